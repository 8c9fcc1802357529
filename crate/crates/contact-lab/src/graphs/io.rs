//! Plain-text graph serialisation.
//!
//! ```text
//! # vertices=4
//! L 0 line -1
//! L 1 line 0
//! L 2 line 1
//! L 3 leaf 1 1
//! 0 1
//! 1 2
//! 0 3
//! ```
//!
//! One `L` line per vertex in id order, then one line per undirected edge in
//! canonical order (`u < v`, sorted). Writing then parsing reproduces the graph
//! exactly, and parsing then writing reproduces the text byte for byte.

use super::{Graph, GraphError, VertexLabel};

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("# vertices={}\n", g.vertex_count()));
    for v in g.vertices() {
        out.push_str(&format!("L {} {}\n", v, g.label(v)));
    }
    for (u, v) in g.edge_list() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let err = |line: usize, message: String| GraphError::Parse { line, message };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty input".into()))?;
    let n: usize = header
        .strip_prefix("# vertices=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(1, format!("expected `# vertices=N` header, got `{header}`")))?;

    let mut labels: Vec<VertexLabel> = Vec::with_capacity(n);
    let mut edges: Vec<(u32, u32)> = Vec::new();

    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "L" {
            if !edges.is_empty() {
                return Err(err(lineno, "vertex line after first edge line".into()));
            }
            let label = parse_label(&fields, lineno)?;
            let id: usize = fields[1]
                .parse()
                .map_err(|_| err(lineno, format!("bad vertex id `{}`", fields[1])))?;
            if id != labels.len() {
                return Err(err(
                    lineno,
                    format!("vertex ids must be consecutive: expected {}, got {id}", labels.len()),
                ));
            }
            labels.push(label);
        } else {
            if fields.len() != 2 {
                return Err(err(lineno, format!("expected `u v` edge line, got `{line}`")));
            }
            let parse_endpoint = |s: &str| -> Result<u32, GraphError> {
                let v: u32 = s
                    .parse()
                    .map_err(|_| err(lineno, format!("bad vertex id `{s}`")))?;
                if v as usize >= labels.len() {
                    return Err(err(lineno, format!("edge endpoint {v} out of range")));
                }
                Ok(v)
            };
            edges.push((parse_endpoint(fields[0])?, parse_endpoint(fields[1])?));
        }
    }

    if labels.len() != n {
        return Err(err(
            1,
            format!("header announces {n} vertices but {} were defined", labels.len()),
        ));
    }

    Graph::from_edges(labels, &edges)
}

fn parse_label(fields: &[&str], lineno: usize) -> Result<VertexLabel, GraphError> {
    let err = |message: String| GraphError::Parse { line: lineno, message };
    match fields {
        ["L", _, "line", z] => z
            .parse()
            .map(VertexLabel::Line)
            .map_err(|_| err(format!("bad line coordinate `{z}`"))),
        ["L", _, "leaf", i, j] => {
            let hub = i.parse().map_err(|_| err(format!("bad hub index `{i}`")))?;
            let index = j.parse().map_err(|_| err(format!("bad leaf index `{j}`")))?;
            Ok(VertexLabel::Leaf { hub, index })
        }
        _ => Err(err(format!("malformed vertex line `{}`", fields.join(" ")))),
    }
}
