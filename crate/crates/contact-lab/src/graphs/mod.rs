//! Finite graphs for contact-process experiments.
//!
//! Vertices carry a [`VertexLabel`] tying them to the geometry they came from: a
//! position on the integer line, or a leaf hanging off a hub. Adjacency is stored in
//! compressed sparse rows with each neighbour list sorted, so vertex identity, label
//! order and serialised form are all deterministic functions of the construction
//! parameters.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

mod io;

pub use io::{parse_graph, write_graph};

/// Dense vertex identifier, stable across serialisation round trips.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a vertex sits in the construction that produced the graph.
///
/// `Line(z)` is the vertex at integer coordinate `z`; `Leaf { hub: i, index: j }` is
/// the `j`-th leaf attached to the `i`-th hub (both 1-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum VertexLabel {
    Line(i64),
    Leaf { hub: u32, index: u32 },
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexLabel::Line(z) => write!(f, "line {z}"),
            VertexLabel::Leaf { hub, index } => write!(f, "leaf {hub} {index}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("construction needs {required} vertices but the budget allows {max_vertices}")]
    BudgetExceeded {
        required: BigInt,
        max_vertices: usize,
    },
    #[error("no edge between vertices {u} and {v}")]
    NoSuchEdge { u: VertexId, v: VertexId },
    #[error("no path between vertices {u} and {v}")]
    Unreachable { u: VertexId, v: VertexId },
    #[error("truncation index must be an even integer >= 2, got {0}")]
    InvalidTruncation(usize),
    #[error("graph text, line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Cap on the number of vertices a builder may materialise.
///
/// The hub/leaf construction grows super-factorially, so builders take an explicit
/// budget and refuse (with the exact requirement) rather than attempt an allocation
/// that cannot succeed.
#[derive(Clone, Copy, Debug)]
pub struct BuildBudget {
    pub max_vertices: usize,
}

impl BuildBudget {
    pub fn new(max_vertices: usize) -> Self {
        assert!(max_vertices >= 2, "budget must allow at least two vertices");
        BuildBudget { max_vertices }
    }
}

impl Default for BuildBudget {
    fn default() -> Self {
        BuildBudget {
            max_vertices: 1_000_000,
        }
    }
}

/// Undirected graph with labelled vertices and sorted CSR adjacency.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    labels: Vec<VertexLabel>,
}

impl Graph {
    /// Builds a graph from labels and undirected edges given as index pairs.
    ///
    /// Rejects out-of-range endpoints, self-loops, duplicate edges and duplicate
    /// labels. Neighbour lists come out sorted regardless of input order.
    pub fn from_edges(
        labels: Vec<VertexLabel>,
        edges: &[(u32, u32)],
    ) -> Result<Graph, GraphError> {
        let n = labels.len();
        let invalid = |message: String| GraphError::Parse { line: 0, message };

        let mut seen = HashSet::with_capacity(n);
        for label in &labels {
            if !seen.insert(*label) {
                return Err(invalid(format!("duplicate vertex label `{label}`")));
            }
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }

        let mut neighbors = vec![VertexId(0); offsets[n]];
        let mut cursor = offsets.clone();
        for &(u, v) in edges {
            neighbors[cursor[u as usize]] = VertexId(v);
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = VertexId(u);
            cursor[v as usize] += 1;
        }

        for v in 0..n {
            let list = &mut neighbors[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate edge at vertex {v}")));
            }
        }

        Ok(Graph {
            offsets,
            neighbors,
            labels,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Number of directed edges (twice [`Graph::edge_count`]); each undirected edge
    /// contributes one transmission clock per direction.
    pub fn directed_edge_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.labels.len() as u32).map(VertexId)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    pub fn label(&self, v: VertexId) -> VertexLabel {
        self.labels[v.index()]
    }

    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: VertexLabel) -> Option<VertexId> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .map(|i| VertexId(i as u32))
    }

    /// Vertex at line coordinate `z`, if present.
    pub fn line_vertex(&self, z: i64) -> Option<VertexId> {
        self.vertex_by_label(VertexLabel::Line(z))
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Directed edges in a fixed order: grouped by source vertex, targets ascending.
    /// The enumeration index doubles as the id of the edge's transmission clock.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            let base = self.offsets[u.index()];
            self.neighbors(u)
                .iter()
                .enumerate()
                .map(move |(k, &v)| (base + k, u, v))
        })
    }

    /// Undirected edges in canonical order: `u < v`, sorted by `(u, v)`.
    pub fn edge_list(&self) -> Vec<(VertexId, VertexId)> {
        let mut edges = Vec::with_capacity(self.edge_count());
        for u in self.vertices() {
            for &v in self.neighbors(u) {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    /// Hop counts from `from` to every vertex; unreachable ones get `u32::MAX`.
    pub fn bfs_distances(&self, from: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        dist[from.index()] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()];
            for &v in self.neighbors(u) {
                if dist[v.index()] == u32::MAX {
                    dist[v.index()] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Induced subgraph on `keep` (given in ascending id order), with dense re-ids
    /// preserving the original relative order and all labels carried over.
    fn induced(&self, keep: &[VertexId]) -> Graph {
        let mut remap = vec![u32::MAX; self.vertex_count()];
        for (new, v) in keep.iter().enumerate() {
            remap[v.index()] = new as u32;
        }
        let labels = keep.iter().map(|&v| self.label(v)).collect();
        let mut edges = Vec::new();
        for &u in keep {
            for &v in self.neighbors(u) {
                if u < v && remap[v.index()] != u32::MAX {
                    edges.push((remap[u.index()], remap[v.index()]));
                }
            }
        }
        Graph::from_edges(labels, &edges).expect("induced subgraph inherits validity")
    }
}

/// Result of deleting one undirected edge.
#[derive(Debug)]
pub enum EdgeRemoval {
    /// The graph stayed connected; the returned graph is the input minus the edge.
    Connected(Graph),
    /// The edge was a bridge; the component of each former endpoint, in order.
    Split {
        containing_u: Graph,
        containing_v: Graph,
    },
}

/// Deletes the undirected edge `{u, v}`.
///
/// If the edge was a bridge the two sides come back as separate graphs (the side of
/// `u` first); vertex labels are preserved and ids are re-densified in original order.
pub fn remove_edge(g: &Graph, u: VertexId, v: VertexId) -> Result<EdgeRemoval, GraphError> {
    if !g.has_edge(u, v) {
        return Err(GraphError::NoSuchEdge { u, v });
    }

    // BFS from u that never crosses {u, v} in either direction.
    let mut visited = vec![false; g.vertex_count()];
    visited[u.index()] = true;
    let mut queue = VecDeque::new();
    queue.push_back(u);
    while let Some(a) = queue.pop_front() {
        for &b in g.neighbors(a) {
            if (a == u && b == v) || (a == v && b == u) {
                continue;
            }
            if !visited[b.index()] {
                visited[b.index()] = true;
                queue.push_back(b);
            }
        }
    }

    if visited[v.index()] {
        let labels = g.labels.clone();
        let mut edges = Vec::with_capacity(g.edge_count() - 1);
        for (a, b) in g.edge_list() {
            if (a, b) != (u.min(v), u.max(v)) {
                edges.push((a.0, b.0));
            }
        }
        Ok(EdgeRemoval::Connected(Graph::from_edges(labels, &edges)?))
    } else {
        let side_u: Vec<VertexId> = g.vertices().filter(|w| visited[w.index()]).collect();
        let side_v: Vec<VertexId> = g.vertices().filter(|w| !visited[w.index()]).collect();
        Ok(EdgeRemoval::Split {
            containing_u: g.induced(&side_u),
            containing_v: g.induced(&side_v),
        })
    }
}

/// Graph distance (number of edges on a shortest path).
pub fn distance(g: &Graph, u: VertexId, v: VertexId) -> Result<u32, GraphError> {
    let dist = g.bfs_distances(u);
    match dist[v.index()] {
        u32::MAX => Err(GraphError::Unreachable { u, v }),
        d => Ok(d),
    }
}

/// Closed ball `B(x, r)`: all vertices within graph distance `r` of `x`, ascending.
pub fn ball(g: &Graph, x: VertexId, r: u32) -> Vec<VertexId> {
    let dist = g.bfs_distances(x);
    g.vertices().filter(|v| dist[v.index()] <= r).collect()
}

/// Hub positions `o_i` and leaf counts `d_i` of the inductive line-with-hubs tree.
///
/// The table holds `o_1 ..= o_{i_max + 1}` and `d_1 ..= d_{i_max}`, all arbitrary
/// precision: `d_i > i!`, so even modest indices overflow any fixed-width integer.
#[derive(Clone, Debug)]
pub struct SequenceTable {
    o: Vec<BigInt>,
    d: Vec<BigInt>,
}

impl SequenceTable {
    /// Largest `i` for which `leaf_count(i)` is available.
    pub fn max_index(&self) -> usize {
        self.d.len()
    }

    /// Hub position `o_i`, `1 <= i <= max_index() + 1`.
    pub fn hub_position(&self, i: usize) -> &BigInt {
        &self.o[i - 1]
    }

    /// Leaf count `d_i`, `1 <= i <= max_index()`.
    pub fn leaf_count(&self, i: usize) -> &BigInt {
        &self.d[i - 1]
    }

    /// `d_2 + d_4 + ... + d_i` for even `i`.
    pub fn even_leaf_sum(&self, i: usize) -> BigInt {
        assert!(i % 2 == 0 && i >= 2 && i <= self.max_index());
        (1..=i / 2).map(|j| &self.d[2 * j - 1]).sum()
    }
}

/// Computes hub positions and leaf counts up to truncation index `i_max >= 2`.
///
/// Seeds: `o_1 = -1`, `o_2 = 2`, `d_1 = 1`. For `i >= 2` the next hub position jumps
/// past everything previously built on the opposite side,
///
/// ```text
/// o_{i+1} = o_{i-1} + i * (d_2 + d_4 + ... + d_{i-1})   for odd i,
/// o_{i+1} = o_{i-1} - i * (d_1 + d_3 + ... + d_{i-1})   for even i,
/// ```
///
/// and the hub at `o_i` receives `d_i = i * |o_i - o_{i+1}|` leaves.
pub fn compute_sequences(i_max: usize) -> SequenceTable {
    assert!(i_max >= 2, "sequence table needs i_max >= 2");
    let mut o = vec![BigInt::from(-1), BigInt::from(2)];
    let mut d = vec![BigInt::from(1)];
    for i in 2..=i_max {
        let skipped: BigInt = if i % 2 == 1 {
            (1..=(i - 1) / 2).map(|j| &d[2 * j - 1]).sum()
        } else {
            (0..=(i - 2) / 2).map(|j| &d[2 * j]).sum()
        };
        let step = BigInt::from(i) * skipped;
        let next = if i % 2 == 1 {
            &o[i - 2] + step
        } else {
            &o[i - 2] - step
        };
        o.push(next);
        let leaves = BigInt::from(i) * (&o[i - 1] - &o[i]).abs();
        d.push(leaves);
    }
    SequenceTable { o, d }
}

/// Path on line coordinates `1 - pad ..= n + pad`, so the region of interest
/// `1 ..= n` sits inside a buffer of `pad` extra vertices on each side.
pub fn build_interval(n: usize, pad: usize) -> Graph {
    assert!(n >= 1, "interval needs at least one interior vertex");
    let lo = 1 - pad as i64;
    let hi = n as i64 + pad as i64;
    let labels: Vec<VertexLabel> = (lo..=hi).map(VertexLabel::Line).collect();
    let edges: Vec<(u32, u32)> = (0..labels.len() as u32 - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(labels, &edges).expect("interval construction is valid")
}

/// Star with `n` vertices: a hub (line coordinate 0) joined to `n - 1` leaves.
pub fn build_star(n: usize) -> Graph {
    assert!(n >= 2, "star needs a hub and at least one leaf");
    let mut labels = vec![VertexLabel::Line(0)];
    labels.extend((1..n as u32).map(|j| VertexLabel::Leaf { hub: 1, index: j }));
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|j| (0, j)).collect();
    Graph::from_edges(labels, &edges).expect("star construction is valid")
}

/// Truncation of the line-with-hubs tree at even index `i_max`.
///
/// Takes the line segment spanned by the built hubs, `o_{i_max - 1} ..= o_{i_max}`,
/// and attaches `d_i` leaves at `o_i` for every `i <= i_max`. Vertex order: line
/// vertices left to right, then leaves grouped by hub index, each group in leaf order.
pub fn build_sv_tree(i_max: usize, budget: &BuildBudget) -> Result<Graph, GraphError> {
    if i_max < 2 || i_max % 2 != 0 {
        return Err(GraphError::InvalidTruncation(i_max));
    }
    let seq = compute_sequences(i_max);
    let z_min = seq.hub_position(i_max - 1).clone();
    let z_max = seq.hub_position(i_max).clone();
    debug_assert!(z_min < z_max);

    let line_count = &z_max - &z_min + 1;
    let leaf_total: BigInt = (1..=i_max).map(|i| seq.leaf_count(i)).sum();
    let required = &line_count + &leaf_total;
    if required > BigInt::from(budget.max_vertices) {
        return Err(GraphError::BudgetExceeded {
            required,
            max_vertices: budget.max_vertices,
        });
    }

    let z_min = z_min.to_i64().expect("span fits after budget check");
    let z_max = z_max.to_i64().expect("span fits after budget check");
    let line_count = (z_max - z_min + 1) as usize;

    let mut labels: Vec<VertexLabel> = (z_min..=z_max).map(VertexLabel::Line).collect();
    let mut edges: Vec<(u32, u32)> = (0..line_count as u32 - 1).map(|i| (i, i + 1)).collect();

    let line_id = |z: i64| (z - z_min) as u32;
    let mut next = line_count as u32;
    for i in 1..=i_max {
        let hub = line_id(seq.hub_position(i).to_i64().expect("hub within span"));
        let leaves = seq.leaf_count(i).to_usize().expect("fits after budget check");
        for j in 1..=leaves {
            labels.push(VertexLabel::Leaf {
                hub: i as u32,
                index: j as u32,
            });
            edges.push((hub, next));
            next += 1;
        }
    }
    Graph::from_edges(labels, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_table_matches_hand_computed_values() {
        let seq = compute_sequences(6);
        let o: Vec<i64> = (1..=7).map(|i| seq.hub_position(i).to_i64().unwrap()).collect();
        assert_eq!(o, vec![-1, 2, -3, 32, -427, 9262, -291733]);
        let d: Vec<i64> = (1..=6).map(|i| seq.leaf_count(i).to_i64().unwrap()).collect();
        assert_eq!(d, vec![1, 10, 105, 1836, 48445, 1805970]);
    }

    #[test]
    fn hub_positions_alternate_and_grow() {
        let seq = compute_sequences(20);
        for i in 1..=20 {
            let oi = seq.hub_position(i);
            // Odd-indexed hubs sit left of the origin, even-indexed hubs right.
            assert_eq!(oi.is_negative(), i % 2 == 1, "sign of o_{i}");
            if i >= 3 {
                assert!(
                    oi.abs() > seq.hub_position(i - 2).abs(),
                    "|o_{i}| must exceed |o_{}|",
                    i - 2
                );
            }
        }
    }

    #[test]
    fn leaf_counts_dominate_factorials() {
        let seq = compute_sequences(12);
        let mut factorial = BigInt::from(1);
        for i in 1..=12usize {
            factorial *= BigInt::from(i);
            assert!(
                seq.leaf_count(i) >= &factorial,
                "d_{i} must be at least {i}!"
            );
        }
    }

    #[test]
    fn interval_is_a_path_with_padding() {
        let g = build_interval(5, 2);
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.label(VertexId(0)), VertexLabel::Line(-1));
        assert_eq!(g.label(VertexId(8)), VertexLabel::Line(7));
        assert_eq!(g.degree(VertexId(0)), 1);
        assert_eq!(g.degree(VertexId(4)), 2);
        assert!(g.has_edge(VertexId(3), VertexId(4)));
        assert!(!g.has_edge(VertexId(0), VertexId(2)));
    }

    #[test]
    fn star_has_hub_plus_leaves() {
        let g = build_star(7);
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.degree(VertexId(0)), 6);
        for j in 1..7u32 {
            assert_eq!(g.degree(VertexId(j)), 1);
            assert_eq!(g.label(VertexId(j)), VertexLabel::Leaf { hub: 1, index: j });
        }
    }

    #[test]
    fn sv_tree_small_truncation() {
        let g = build_sv_tree(2, &BuildBudget::default()).unwrap();
        // Line segment -1..=2 plus d_1 + d_2 = 11 leaves.
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(g.edge_count(), 14);
        let o1 = g.line_vertex(-1).unwrap();
        let o2 = g.line_vertex(2).unwrap();
        // Both hubs are segment boundaries here: one line neighbour plus their leaves.
        assert_eq!(g.degree(o1), 1 + 1);
        assert_eq!(g.degree(o2), 1 + 10);
    }

    #[test]
    fn sv_tree_mid_truncation_counts() {
        let g = build_sv_tree(4, &BuildBudget::default()).unwrap();
        assert_eq!(g.vertex_count(), 1988);
        let line = g
            .labels()
            .iter()
            .filter(|l| matches!(l, VertexLabel::Line(_)))
            .count();
        assert_eq!(line, 36);
        assert_eq!(g.vertex_count() - line, 1952);
        assert!(g.edge_count() == g.vertex_count() - 1, "tree has n - 1 edges");

        let o2 = g.line_vertex(2).unwrap();
        let o4 = g.line_vertex(32).unwrap();
        assert_eq!(distance(&g, o2, o4).unwrap(), 30);
        // o_4 is the right boundary of the segment: line degree 1 plus d_4 leaves.
        assert_eq!(g.degree(o4), 1837);
        assert_eq!(ball(&g, o4, 1).len(), 1838);
    }

    #[test]
    fn sv_tree_budget_is_enforced() {
        let err = build_sv_tree(6, &BuildBudget::new(100)).unwrap_err();
        match err {
            GraphError::BudgetExceeded {
                required,
                max_vertices,
            } => {
                assert_eq!(required, BigInt::from(1_866_057));
                assert_eq!(max_vertices, 100);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn sv_tree_rejects_odd_truncation() {
        assert!(matches!(
            build_sv_tree(3, &BuildBudget::default()),
            Err(GraphError::InvalidTruncation(3))
        ));
    }

    #[test]
    fn remove_bridge_splits_in_endpoint_order() {
        let g = build_interval(4, 0);
        let u = g.line_vertex(2).unwrap();
        let v = g.line_vertex(3).unwrap();
        match remove_edge(&g, u, v).unwrap() {
            EdgeRemoval::Split {
                containing_u,
                containing_v,
            } => {
                assert_eq!(containing_u.vertex_count(), 2);
                assert_eq!(containing_v.vertex_count(), 2);
                assert_eq!(containing_u.label(VertexId(1)), VertexLabel::Line(2));
                assert_eq!(containing_v.label(VertexId(0)), VertexLabel::Line(3));
            }
            _ => panic!("bridge removal must split"),
        }
    }

    #[test]
    fn remove_edge_keeps_cycles_connected() {
        let labels: Vec<VertexLabel> = (0..4).map(VertexLabel::Line).collect();
        let g = Graph::from_edges(labels, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        match remove_edge(&g, VertexId(0), VertexId(1)).unwrap() {
            EdgeRemoval::Connected(h) => {
                assert_eq!(h.vertex_count(), 4);
                assert_eq!(h.edge_count(), 3);
                assert!(!h.has_edge(VertexId(0), VertexId(1)));
                assert_eq!(distance(&h, VertexId(0), VertexId(1)).unwrap(), 3);
            }
            _ => panic!("cycle edge is not a bridge"),
        }
    }

    #[test]
    fn remove_missing_edge_errors() {
        let g = build_interval(4, 0);
        assert!(matches!(
            remove_edge(&g, VertexId(0), VertexId(2)),
            Err(GraphError::NoSuchEdge { .. })
        ));
    }

    #[test]
    fn sv_tree_splits_at_root_edge() {
        let g = build_sv_tree(4, &BuildBudget::default()).unwrap();
        let u = g.line_vertex(0).unwrap();
        let v = g.line_vertex(1).unwrap();
        match remove_edge(&g, u, v).unwrap() {
            EdgeRemoval::Split {
                containing_u,
                containing_v,
            } => {
                assert_eq!(containing_u.vertex_count(), 110);
                assert_eq!(containing_v.vertex_count(), 1878);
                // Odd hubs (with their leaves) fall on the left side, even on the right.
                assert!(containing_u.line_vertex(-3).is_some());
                assert!(containing_u.line_vertex(-1).is_some());
                assert!(containing_v.line_vertex(2).is_some());
                assert!(containing_v.line_vertex(32).is_some());
                assert!(containing_u.line_vertex(2).is_none());
            }
            _ => panic!("the root edge of a tree is a bridge"),
        }
    }

    #[test]
    fn distance_and_ball_on_a_path() {
        let g = build_interval(6, 0);
        let a = g.line_vertex(1).unwrap();
        let b = g.line_vertex(6).unwrap();
        assert_eq!(distance(&g, a, b).unwrap(), 5);
        assert_eq!(distance(&g, a, a).unwrap(), 0);
        let mid = g.line_vertex(3).unwrap();
        let b1 = ball(&g, mid, 1);
        assert_eq!(b1.len(), 3);
        assert!(b1.contains(&g.line_vertex(2).unwrap()));
        assert_eq!(ball(&g, mid, 0), vec![mid]);
        assert_eq!(ball(&g, mid, 10).len(), 6);
    }

    #[test]
    fn unreachable_distance_errors() {
        let labels = vec![VertexLabel::Line(0), VertexLabel::Line(1), VertexLabel::Line(2)];
        let g = Graph::from_edges(labels, &[(0, 1)]).unwrap();
        assert!(matches!(
            distance(&g, VertexId(0), VertexId(2)),
            Err(GraphError::Unreachable { .. })
        ));
    }

    #[test]
    fn builders_reject_bad_input() {
        let labels = vec![VertexLabel::Line(0), VertexLabel::Line(0)];
        assert!(Graph::from_edges(labels, &[(0, 1)]).is_err());
        let labels = vec![VertexLabel::Line(0), VertexLabel::Line(1)];
        assert!(Graph::from_edges(labels.clone(), &[(0, 0)]).is_err());
        assert!(Graph::from_edges(labels.clone(), &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(labels, &[(0, 2)]).is_err());
    }

    #[test]
    fn directed_edge_ids_are_contiguous_and_grouped() {
        let g = build_star(4);
        let edges: Vec<(usize, VertexId, VertexId)> = g.directed_edges().collect();
        assert_eq!(edges.len(), g.directed_edge_count());
        for (k, (id, _, _)) in edges.iter().enumerate() {
            assert_eq!(*id, k);
        }
        assert_eq!(edges[0].1, VertexId(0));
        assert_eq!(edges[0].2, VertexId(1));
        assert_eq!(edges[3].1, VertexId(1));
        assert_eq!(edges[3].2, VertexId(0));
    }
}
