//! Drawings of hybrid graphs as SVG or Graphviz dot.
//!
//! Layout runs in two steps. Measuring sizes each word box from its text
//! rows. Arranging places boxes in reading order (right to left by default),
//! then stacks arcs and phrase bars with a height map: an item spanning
//! columns `a..=b` sits one level above the highest item already placed
//! over those columns, and raises them to its own level. Shorter items are
//! placed first so they stay close to the words.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{HybridGraph, NodeRef, Terminal};

/// Drawing constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub char_width: f64,
    pub row_height: f64,
    pub box_padding: f64,
    pub min_box_width: f64,
    pub gap: f64,
    pub arc_step: f64,
    pub bar_step: f64,
    pub margin: f64,
    pub font_size: f64,
}

impl Default for Style {
    fn default() -> Style {
        Style {
            char_width: 7.5,
            row_height: 16.0,
            box_padding: 10.0,
            min_box_width: 40.0,
            gap: 12.0,
            arc_step: 22.0,
            bar_step: 14.0,
            margin: 16.0,
            font_size: 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    RightToLeft,
    LeftToRight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordBox {
    pub terminal: usize,
    pub x: f64,
    pub width: f64,
    pub location: String,
    pub text: String,
    pub gloss: String,
    pub pos: String,
    pub empty: bool,
}

impl WordBox {
    pub fn center(&self) -> f64 {
        self.x + self.width / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcShape {
    pub dependent: NodeRef,
    pub head: NodeRef,
    pub label: String,
    pub x_dependent: f64,
    pub x_head: f64,
    /// Column interval used by the height map.
    pub columns: (usize, usize),
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseBar {
    pub phrase: usize,
    pub tag: String,
    pub x1: f64,
    pub x2: f64,
    pub columns: (usize, usize),
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualTree {
    pub boxes: Vec<WordBox>,
    pub arcs: Vec<ArcShape>,
    pub bars: Vec<PhraseBar>,
    pub direction: Direction,
    pub width: f64,
    pub height: f64,
    style: Style,
}

/// Per-column height map.
struct HeightMap(Vec<usize>);

impl HeightMap {
    fn place(&mut self, (a, b): (usize, usize)) -> usize {
        let level = self.0[a..=b].iter().copied().max().unwrap_or(0) + 1;
        for h in &mut self.0[a..=b] {
            *h = level;
        }
        level
    }
}

/// Lays out a graph with the default style, right to left.
pub fn layout(graph: &HybridGraph) -> VisualTree {
    layout_with(graph, &BTreeMap::new(), Direction::RightToLeft, Style::default())
}

/// Lays out a graph. `glosses` maps terminal indices to gloss text.
pub fn layout_with(
    graph: &HybridGraph,
    glosses: &BTreeMap<usize, String>,
    direction: Direction,
    style: Style,
) -> VisualTree {
    let mut boxes: Vec<WordBox> = graph
        .terminals
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (location, text, empty) = match t {
                Terminal::Segment(s) => (
                    s.location.map(|l| l.to_string()).unwrap_or_default(),
                    s.form.clone(),
                    false,
                ),
                Terminal::Empty(e) => (String::new(), format!("({})", e.form), true),
            };
            let gloss = glosses.get(&i).cloned().unwrap_or_default();
            let pos = t.pos().to_string();
            let longest = [&location, &text, &gloss, &pos]
                .iter()
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0);
            let width = (longest as f64 * style.char_width + 2.0 * style.box_padding).max(style.min_box_width);
            WordBox {
                terminal: i,
                x: 0.0,
                width,
                location,
                text,
                gloss,
                pos,
                empty,
            }
        })
        .collect();

    let content: f64 = boxes.iter().map(|b| b.width).sum::<f64>() + style.gap * boxes.len().saturating_sub(1) as f64;
    let mut cursor = style.margin;
    let order: Vec<usize> = match direction {
        Direction::LeftToRight => (0..boxes.len()).collect(),
        Direction::RightToLeft => (0..boxes.len()).rev().collect(),
    };
    for i in order {
        boxes[i].x = cursor;
        cursor += boxes[i].width + style.gap;
    }

    let columns = graph.terminals.len().max(1);
    let mut bars: Vec<PhraseBar> = graph
        .phrases
        .iter()
        .enumerate()
        .map(|(p, ph)| {
            let xs = [boxes[ph.start].x, boxes[ph.end].x];
            let ends = [boxes[ph.start].x + boxes[ph.start].width, boxes[ph.end].x + boxes[ph.end].width];
            PhraseBar {
                phrase: p,
                tag: ph.tag.clone(),
                x1: xs[0].min(xs[1]),
                x2: ends[0].max(ends[1]),
                columns: (ph.start, ph.end),
                level: 0,
            }
        })
        .collect();
    let mut bar_order: Vec<usize> = (0..bars.len()).collect();
    bar_order.sort_by_key(|&p| (bars[p].columns.1 - bars[p].columns.0, bars[p].columns.0, p));
    let mut bar_map = HeightMap(vec![0; columns]);
    for p in bar_order {
        bars[p].level = bar_map.place(bars[p].columns);
    }

    let column = |n: NodeRef| match n {
        NodeRef::Terminal(i) => i,
        NodeRef::Phrase(p) => (graph.phrases[p].start + graph.phrases[p].end) / 2,
    };
    let x_of = |n: NodeRef| match n {
        NodeRef::Terminal(i) => boxes[i].center(),
        NodeRef::Phrase(p) => (bars[p].x1 + bars[p].x2) / 2.0,
    };
    let mut arcs: Vec<ArcShape> = graph
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (column(e.dependent), column(e.head));
            ArcShape {
                dependent: e.dependent,
                head: e.head,
                label: e.label.to_string(),
                x_dependent: x_of(e.dependent),
                x_head: x_of(e.head),
                columns: (a.min(b), a.max(b)),
                level: 0,
            }
        })
        .collect();
    arcs.sort_by(|x, y| {
        let key = |a: &ArcShape| (a.columns.1 - a.columns.0, a.columns.0, a.columns.1, a.label.clone());
        key(x).cmp(&key(y))
    });
    let mut arc_map = HeightMap(vec![0; columns]);
    for a in &mut arcs {
        a.level = arc_map.place(a.columns);
    }

    let top_levels = arcs.iter().map(|a| a.level).max().unwrap_or(0) as f64;
    let bottom_levels = bars.iter().map(|b| b.level).max().unwrap_or(0) as f64;
    let height = 2.0 * style.margin
        + top_levels * style.arc_step
        + 4.0 * style.row_height
        + bottom_levels * style.bar_step
        + if bars.is_empty() { 0.0 } else { style.row_height };
    VisualTree {
        boxes,
        arcs,
        bars,
        direction,
        width: content + 2.0 * style.margin,
        height,
        style,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn pos_colour(pos: &str) -> &'static str {
    match pos {
        "V" => "#3a7d2c",
        "N" | "PN" | "ADJ" | "IMPN" | "PRON" | "DEM" | "REL" | "T" | "LOC" => "#2c5d9e",
        _ => "#9e2c2c",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Dot,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "svg" => Ok(Format::Svg),
            "dot" => Ok(Format::Dot),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub fn emit(tree: &VisualTree, format: Format) -> String {
    match format {
        Format::Svg => to_svg(tree),
        Format::Dot => to_dot(tree),
    }
}

pub fn to_svg(tree: &VisualTree) -> String {
    let s = &tree.style;
    let top = s.margin + tree.arcs.iter().map(|a| a.level).max().unwrap_or(0) as f64 * s.arc_step;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}" font-family="sans-serif" font-size="{:.1}">"#,
        tree.width, tree.height, tree.width, tree.height, s.font_size
    );
    out.push_str("<g class=\"words\" text-anchor=\"middle\">\n");
    for b in &tree.boxes {
        let cx = b.center();
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.1}" cy="{top:.1}" r="3.0" fill="{}"/>"#,
            pos_colour(&b.pos)
        );
        let rows = [&b.location, &b.text, &b.gloss, &b.pos];
        for (k, row) in rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let y = top + (k as f64 + 1.0) * s.row_height;
            let style = if b.empty && k == 1 { r#" font-style="italic""# } else { "" };
            let _ = writeln!(out, r#"<text x="{cx:.1}" y="{y:.1}"{style}>{}</text>"#, escape(row));
        }
    }
    out.push_str("</g>\n");

    let bar_top = top + 4.0 * s.row_height + s.row_height / 2.0;
    out.push_str("<g class=\"phrases\" text-anchor=\"middle\">\n");
    for bar in &tree.bars {
        let y = bar_top + (bar.level as f64 - 1.0) * s.bar_step;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="2"/>"#,
            bar.x1, bar.x2
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            (bar.x1 + bar.x2) / 2.0,
            y + s.bar_step - 3.0,
            escape(&bar.tag)
        );
    }
    out.push_str("</g>\n");

    // Arcs first, labels after, so labels stay on top.
    out.push_str("<g class=\"arcs\" fill=\"none\" stroke=\"black\">\n");
    for a in &tree.arcs {
        let h = a.level as f64 * s.arc_step;
        let _ = writeln!(
            out,
            r#"<path d="M {:.1} {top:.1} C {:.1} {:.1} {:.1} {:.1} {:.1} {top:.1}"/>"#,
            a.x_dependent,
            a.x_dependent,
            top - h,
            a.x_head,
            top - h,
            a.x_head
        );
        let _ = writeln!(
            out,
            r#"<path d="M {:.1} {:.1} l -3 -6 l 6 0 z" fill="black"/>"#,
            a.x_head,
            top - 1.0
        );
    }
    out.push_str("</g>\n<g class=\"labels\" text-anchor=\"middle\">\n");
    for a in &tree.arcs {
        let h = a.level as f64 * s.arc_step;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            (a.x_dependent + a.x_head) / 2.0,
            top - 0.75 * h - 2.0,
            escape(&a.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(tree: &VisualTree) -> String {
    let mut out = String::from("digraph hybrid {\n");
    let rank = match tree.direction {
        Direction::RightToLeft => "RL",
        Direction::LeftToRight => "LR",
    };
    let _ = writeln!(out, "  rankdir={rank};");
    out.push_str("  node [shape=plaintext];\n  { rank=same;\n");
    for b in &tree.boxes {
        let _ = writeln!(out, "    w{} [label={}];", b.terminal + 1, dot_quote(&format!("{}\\n{}", b.text, b.pos)));
    }
    out.push_str("  }\n");
    for bar in &tree.bars {
        let _ = writeln!(
            out,
            "  p{} [shape=box, label={}];",
            bar.phrase + 1,
            dot_quote(&format!("{} [{}-{}]", bar.tag, bar.columns.0 + 1, bar.columns.1 + 1))
        );
    }
    let mut edges: Vec<&ArcShape> = tree.arcs.iter().collect();
    edges.sort_by(|a, b| (a.dependent, a.head, &a.label).cmp(&(b.dependent, b.head, &b.label)));
    for a in edges {
        let _ = writeln!(out, "  {} -> {} [label={}];", a.dependent, a.head, dot_quote(&a.label));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MorphSegment;

    #[test]
    fn single_node() {
        let g = HybridGraph::from_segments(vec![MorphSegment::new("qul", "V")]);
        let t = layout(&g);
        assert_eq!(t.boxes.len(), 1);
        assert!(t.arcs.is_empty());
        assert!(to_svg(&t).starts_with("<svg"));
    }
}
