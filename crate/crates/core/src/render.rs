//! SVG and DOT output for diagram models.
//!
//! Both writers are plain string templating, so output bytes depend only on
//! the model and the config.

use std::fmt::Write;

use crate::encode::{DiagramModel, Node, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Dot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub format: Format,
    pub width_px: u32,
    pub height_px: u32,
    pub font_size_pt: f64,
    /// Hue in degrees for scheme-3 boxes.
    pub hue: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            format: Format::Svg,
            width_px: 960,
            height_px: 540,
            font_size_pt: 12.0,
            hue: 210.0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::Config("canvas dimensions must be positive".into()));
        }
        if !(self.font_size_pt.is_finite() && self.font_size_pt > 0.0) {
            return Err(Error::Config("font size must be positive".into()));
        }
        if !self.hue.is_finite() {
            return Err(Error::Config("hue must be finite".into()));
        }
        Ok(())
    }
}

/// Renders in the format named by `cfg`.
pub fn render(dm: &DiagramModel, cfg: &RenderConfig) -> Vec<u8> {
    match cfg.format {
        Format::Svg => render_svg(dm, cfg),
        Format::Dot => render_dot(dm),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn hsl_to_hex(hue: f64, s: f64, l: f64) -> String {
    let h = hue.rem_euclid(360.0) / 60.0;
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn value_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

fn caption(dm: &DiagramModel, values: &[f64]) -> String {
    dm.independent_names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

struct Layout {
    xs: Vec<f64>,
    top: f64,
    body: f64,
    radius: f64,
}

impl Layout {
    fn new(dm: &DiagramModel, width: f64, height: f64, font: f64) -> Self {
        let margin_x = (width * 0.08).max(2.0);
        let top = (font * 4.0).min(height * 0.3);
        let bottom = (font * 3.0).min(height * 0.2);
        let body = (height - top - bottom).max(1.0);
        let n = dm.columns.len();
        let xs: Vec<f64> = if n <= 1 {
            vec![width / 2.0; n]
        } else {
            (0..n)
                .map(|i| margin_x + (width - 2.0 * margin_x) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let max_nodes = dm.columns.iter().map(|c| c.nodes.len()).max().unwrap_or(1).max(1);
        let col_gap = if n > 1 { (width - 2.0 * margin_x) / (n - 1) as f64 } else { width };
        let radius = (body / (2.5 * max_nodes as f64))
            .min(col_gap / 4.0)
            .min(margin_x)
            .clamp(1.0, 28.0);
        Layout { xs, top, body, radius }
    }

    fn node_center(&self, col: usize, node: &Node, count: usize) -> (f64, f64) {
        let y = self.top + self.body * (node.position as f64 + 0.5) / count as f64;
        (self.xs[col], y)
    }
}

/// SVG document for a diagram.
pub fn render_svg(dm: &DiagramModel, cfg: &RenderConfig) -> Vec<u8> {
    let width = cfg.width_px.max(1) as f64;
    let height = cfg.height_px.max(1) as f64;
    let font = if cfg.font_size_pt.is_finite() && cfg.font_size_pt > 0.0 {
        cfg.font_size_pt
    } else {
        12.0
    };
    let layout = Layout::new(dm, width, height, font);
    let r = layout.radius;
    let fill = hsl_to_hex(cfg.hue, 0.6, 0.45);
    let stroke = hsl_to_hex(cfg.hue, 0.6, 0.25);
    let m = dm.agents.len().max(1) as f64;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="{f}pt">"#,
        w = cfg.width_px.max(1),
        h = cfg.height_px.max(1),
        f = num(font),
    );
    let _ = writeln!(out, r##"<rect class="background" x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, num(width), num(height));

    // column captions
    for (i, col) in dm.columns.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="step" x="{}" y="{}" text-anchor="middle">t = {}</text>"#,
            num(layout.xs[i]),
            num(font * 1.6),
            col.step_index
        );
        let _ = writeln!(
            out,
            r#"<text class="caption" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(layout.xs[i]),
            num(font * 3.0),
            escape(&caption(dm, &col.independent_values))
        );
    }

    // edges under nodes
    let unit = (0.6 * r / m).clamp(0.25, 3.0);
    let col_of = |step: usize| dm.columns.iter().position(|c| c.step_index == step);
    for e in &dm.edges {
        let (Some(ci), Some(cj)) = (col_of(e.from_step), col_of(e.to_step)) else {
            continue;
        };
        let (from_col, to_col) = (&dm.columns[ci], &dm.columns[cj]);
        let (Some(a), Some(b)) = (
            from_col.nodes.iter().find(|n| n.id == e.from_node),
            to_col.nodes.iter().find(|n| n.id == e.to_node),
        ) else {
            continue;
        };
        let (x0, y0) = layout.node_center(ci, a, from_col.nodes.len());
        let (x1, y1) = layout.node_center(cj, b, to_col.nodes.len());
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len = dx.hypot(dy);
        if len <= 2.0 * r {
            continue;
        }
        let (ux, uy) = (dx / len, dy / len);
        let w = unit * e.agent_count as f64;
        let head = (r * 0.4 + w).min((len - 2.0 * r) / 2.0);
        let (sx, sy) = (x0 + ux * r, y0 + uy * r);
        let (tx, ty) = (x1 - ux * r, y1 - uy * r);
        let (bx, by) = (tx - ux * head, ty - uy * head);
        let half = head * 0.5;
        let _ = writeln!(
            out,
            r##"<path class="edge" d="M {} {} L {} {}" stroke="#555555" stroke-width="{}" fill="none"><title>{} agent(s)</title></path>"##,
            num(sx), num(sy), num(bx), num(by), num(w), e.agent_count
        );
        let _ = writeln!(
            out,
            r##"<path class="arrowhead" d="M {} {} L {} {} L {} {} Z" fill="#555555"/>"##,
            num(tx), num(ty),
            num(bx - uy * half), num(by + ux * half),
            num(bx + uy * half), num(by - ux * half)
        );
    }

    for (i, col) in dm.columns.iter().enumerate() {
        for node in &col.nodes {
            let (cx, cy) = layout.node_center(i, node, col.nodes.len());
            let members: Vec<&str> = node
                .members
                .iter()
                .filter_map(|&j| dm.agents.get(j).map(String::as_str))
                .collect();
            let title = escape(&format!("{{{}}} centroid [{}]", members.join(", "), value_list(&node.centroid)));
            match (dm.scheme, node.style) {
                (Scheme::Boxes, Some(style)) => {
                    let _ = writeln!(
                        out,
                        r#"<rect class="node" x="{}" y="{}" width="{}" height="{}" fill="{fill}" fill-opacity="{}" stroke="{stroke}" stroke-width="{}"><title>{title}</title></rect>"#,
                        num(cx - r), num(cy - r), num(2.0 * r), num(2.0 * r),
                        num(style.intensity),
                        num(style.border_weight * (r * 0.3).clamp(1.0, 6.0)),
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        r##"<circle class="node" cx="{}" cy="{}" r="{}" fill="#ffffff" stroke="#333333" stroke-width="1.5"><title>{title}</title></circle>"##,
                        num(cx), num(cy), num(r)
                    );
                }
            }
            if !node.label.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<text class="node-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
                    num(cx),
                    num(cy + font * 0.4),
                    escape(&node.label)
                );
            }
        }
    }

    let axes = if dm.axis_meta.reduced {
        format!("axes: {} (principal components)", dm.axis_meta.names.join(", "))
    } else {
        format!("axes: {}", dm.axis_meta.names.join(", "))
    };
    let _ = writeln!(
        out,
        r#"<text class="axes" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(width / 2.0),
        num((height - font).max(0.0)),
        escape(&axes)
    );
    out.push_str("</svg>\n");
    out.into_bytes()
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph with one ranked subgraph per step.
pub fn render_dot(dm: &DiagramModel) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("digraph cmd {\n  rankdir=LR;\n");
    match dm.scheme {
        Scheme::Boxes => out.push_str("  node [shape=box, style=filled];\n"),
        _ => out.push_str("  node [shape=circle];\n"),
    }
    let mut columns: Vec<_> = dm.columns.iter().collect();
    columns.sort_by_key(|c| c.step_index);
    for col in columns {
        let t = col.step_index;
        let _ = writeln!(out, "  subgraph cluster_s{t} {{");
        let label = format!("t={t}: {}", caption(dm, &col.independent_values));
        let _ = writeln!(out, "    label={};", dot_quote(&label));
        out.push_str("    rank=same;\n");
        let mut nodes: Vec<&Node> = col.nodes.iter().collect();
        nodes.sort_by_key(|n| n.id);
        for n in nodes {
            match n.style {
                Some(style) => {
                    let alpha = (style.intensity * 255.0).round().clamp(0.0, 255.0) as u8;
                    let _ = writeln!(
                        out,
                        "    s{t}_c{} [label={}, fillcolor=\"#3a78b8{alpha:02x}\", penwidth={}];",
                        n.id,
                        dot_quote(&n.label),
                        num(style.border_weight * 4.0)
                    );
                }
                None => {
                    let _ = writeln!(out, "    s{t}_c{} [label={}];", n.id, dot_quote(&n.label));
                }
            }
        }
        out.push_str("  }\n");
    }
    let mut edges = dm.edges.clone();
    edges.sort_by_key(|e| (e.from_step, e.from_node, e.to_step, e.to_node));
    for e in edges {
        let _ = writeln!(
            out,
            "  s{}_c{} -> s{}_c{} [label=\"{}\"];",
            e.from_step, e.from_node, e.to_step, e.to_node, e.agent_count
        );
    }
    out.push_str("}\n");
    out.into_bytes()
}
