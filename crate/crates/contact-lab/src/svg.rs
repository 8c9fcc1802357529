//! Space-time diagrams of single trajectories as standalone SVG.
//!
//! Vertices run along the x axis (line vertices in coordinate order, then
//! leaves grouped by hub), time runs downward. Infected stretches are drawn
//! as thick bars on each vertex's world line, recoveries as short ticks, and
//! each effective transmission as an arrow from source to target.

use std::fmt::Write as _;

use crate::graphs::{Graph, VertexId, VertexLabel};
use crate::simulate::{Configuration, TraceEvent};

const MARGIN_X: f64 = 46.0;
const MARGIN_Y: f64 = 34.0;
const PLOT_H: f64 = 560.0;

/// Vertices in display order: the line left to right, then leaves by hub.
pub fn display_order(g: &Graph) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = g.vertices().collect();
    order.sort_by_key(|&v| match g.label(v) {
        VertexLabel::Line(z) => (0, z, 0),
        VertexLabel::Leaf { hub, index } => (1, hub as i64, index),
    });
    order
}

/// Renders one trajectory. `events` must be in time order within `[0, horizon]`,
/// as produced by the simulator's observer callback.
pub fn space_time_svg(
    g: &Graph,
    init: &Configuration,
    events: &[TraceEvent],
    horizon: f64,
) -> String {
    assert!(horizon > 0.0 && horizon.is_finite());
    assert!(
        events.iter().all(|e| (0.0..=horizon).contains(&e.time())),
        "events must lie within the drawn window"
    );

    let order = display_order(g);
    let mut col = vec![0usize; g.vertex_count()];
    for (c, &v) in order.iter().enumerate() {
        col[v.index()] = c;
    }
    let col_w = (900.0 / order.len() as f64).clamp(14.0, 42.0);
    let width = 2.0 * MARGIN_X + col_w * (order.len() as f64 - 1.0);
    let height = 2.0 * MARGIN_Y + PLOT_H;
    let x = |v: VertexId| MARGIN_X + col[v.index()] as f64 * col_w;
    let y = |t: f64| MARGIN_Y + t / horizon * PLOT_H;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"##
    );
    svg.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 8 8\" refX=\"7\" refY=\"4\" ",
        "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">",
        "<path d=\"M 0 0 L 8 4 L 0 8 z\" fill=\"#c0392b\"/></marker></defs>\n",
    ));
    let _ = writeln!(svg, r##"<rect width="{width:.0}" height="{height:.0}" fill="white"/>"##);

    // Time axis with five labelled ticks.
    for k in 0..=5 {
        let t = horizon * k as f64 / 5.0;
        let yy = y(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.2}" y1="{yy:.2}" x2="{x1:.2}" y2="{yy:.2}" stroke="#eeeeee"/>"##,
            x0 = MARGIN_X - 6.0,
            x1 = width - MARGIN_X + 6.0,
        );
        let _ = writeln!(
            svg,
            r##"<text x="4" y="{:.2}" font-size="10" fill="#555555">t={t:.2}</text>"##,
            yy + 3.0
        );
    }

    // World lines and column labels.
    for &v in &order {
        let xx = x(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.2}" y1="{y0:.2}" x2="{xx:.2}" y2="{y1:.2}" stroke="#cccccc" stroke-width="1"/>"##,
            y0 = y(0.0),
            y1 = y(horizon),
        );
        let label = match g.label(v) {
            VertexLabel::Line(z) => format!("{z}"),
            VertexLabel::Leaf { hub, index } => format!("{hub}.{index}"),
        };
        let _ = writeln!(
            svg,
            r##"<text x="{xx:.2}" y="{:.2}" font-size="9" fill="#555555" text-anchor="middle">{label}</text>"##,
            MARGIN_Y - 8.0
        );
    }

    // Infected stretches, closed by recoveries or the horizon.
    let mut since: Vec<Option<f64>> = vec![None; g.vertex_count()];
    for v in init.iter() {
        since[v.index()] = Some(0.0);
    }
    let mut bars = String::new();
    let mut marks = String::new();
    for event in events {
        match *event {
            TraceEvent::Infection { time, vertex, source } => {
                since[vertex.index()] = Some(time);
                let _ = writeln!(
                    marks,
                    r##"<line x1="{x0:.2}" y1="{yy:.2}" x2="{x1:.2}" y2="{yy:.2}" stroke="#c0392b" stroke-width="1" marker-end="url(#arrow)"/>"##,
                    x0 = x(source),
                    x1 = x(vertex),
                    yy = y(time),
                );
            }
            TraceEvent::Recovery { time, vertex } => {
                let start = since[vertex.index()]
                    .take()
                    .expect("recovery events only happen on infected vertices");
                draw_bar(&mut bars, x(vertex), y(start), y(time));
                let _ = writeln!(
                    marks,
                    r##"<line x1="{x0:.2}" y1="{yy:.2}" x2="{x1:.2}" y2="{yy:.2}" stroke="#2471a3" stroke-width="2"/>"##,
                    x0 = x(vertex) - 4.0,
                    x1 = x(vertex) + 4.0,
                    yy = y(time),
                );
            }
        }
    }
    for &v in &order {
        if let Some(start) = since[v.index()] {
            draw_bar(&mut bars, x(v), y(start), y(horizon));
        }
    }

    svg.push_str(&bars);
    svg.push_str(&marks);
    svg.push_str("</svg>\n");
    svg
}

fn draw_bar(out: &mut String, x: f64, y0: f64, y1: f64) {
    let _ = writeln!(
        out,
        r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#1a1a1a" stroke-width="4" stroke-linecap="butt"/>"##
    );
}
