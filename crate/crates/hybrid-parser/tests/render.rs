mod common;

use common::{all_fixtures, conditional, english};
use hybrid_parser::render::{emit, layout, layout_with, to_dot, to_svg, Direction, Format, Style};
use hybrid_parser::{HybridGraph, MorphSegment};

/// Every opened element is closed in order.
fn balanced(svg: &str) -> bool {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = svg;
    while let Some(i) = rest.find('<') {
        let end = rest[i..].find('>').map(|j| i + j);
        let Some(end) = end else { return false };
        let tag = &rest[i + 1..end];
        rest = &rest[end + 1..];
        if tag.starts_with('?') || tag.starts_with('!') || tag.ends_with('/') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop().as_deref() != Some(name.trim()) {
                return false;
            }
        } else {
            stack.push(tag.split_whitespace().next().unwrap_or("").to_string());
        }
    }
    stack.is_empty()
}

#[test]
fn single_word() {
    let g = HybridGraph::from_segments(vec![MorphSegment::new("qul", "V")]);
    let v = layout(&g);
    assert_eq!(v.boxes.len(), 1);
    assert!(v.arcs.is_empty() && v.bars.is_empty());
    assert!(balanced(&to_svg(&v)));
}

#[test]
fn english_example() {
    let v = layout(&english());
    assert_eq!((v.boxes.len(), v.arcs.len(), v.bars.len()), (5, 4, 0));
}

#[test]
fn conditional_verse() {
    let v = layout(&conditional());
    assert_eq!(v.boxes.len(), 9);
    let empty: Vec<_> = v.boxes.iter().filter(|b| b.empty).collect();
    assert_eq!(empty.len(), 1);
    assert_eq!(empty[0].text, "(kaA}in)");
    assert_eq!(v.bars.len(), 3);
    let ns = v.bars.iter().find(|b| b.tag == "NS").unwrap();
    let pp = v.bars.iter().find(|b| b.tag == "PP" && b.columns.0 > 4).unwrap();
    assert!(ns.columns.0 <= pp.columns.0 && pp.columns.1 <= ns.columns.1);
    assert!(ns.level > pp.level);
    // Bars sit below the boxes.
    let svg = to_svg(&v);
    assert!(svg.contains(">NS<") && svg.contains(">VS<"));
}

#[test]
fn right_to_left_mirrors_left_to_right() {
    let g = english();
    let rtl = layout(&g);
    let ltr = layout_with(&g, &Default::default(), Direction::LeftToRight, Style::default());
    assert!(rtl.boxes[0].x > rtl.boxes[4].x);
    assert!(ltr.boxes[0].x < ltr.boxes[4].x);
    assert_eq!(rtl.width, ltr.width);
}

#[test]
fn same_levels_never_overlap() {
    for (name, g) in all_fixtures() {
        let v = layout(&g);
        for (i, a) in v.arcs.iter().enumerate() {
            for b in &v.arcs[i + 1..] {
                if a.level == b.level {
                    assert!(a.columns.1 < b.columns.0 || b.columns.1 < a.columns.0, "{name}");
                }
            }
        }
    }
}

#[test]
fn output_is_deterministic_and_well_formed() {
    for (name, g) in all_fixtures() {
        let v = layout(&g);
        let svg = emit(&v, Format::Svg);
        assert_eq!(svg, to_svg(&layout(&g)), "{name}");
        assert!(balanced(&svg), "{name}");
        let dot = emit(&v, Format::Dot);
        assert_eq!(dot, to_dot(&layout(&g)), "{name}");
        assert!(dot.starts_with("digraph") && dot.trim_end().ends_with('}'), "{name}");
    }
}
