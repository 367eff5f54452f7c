//! Reversible mapping between hybrid graphs and pure dependency graphs.
//!
//! Phrases are folded into expansion markers on edge labels and elided
//! nodes into bridge labels. Dropped subject pronouns are deleted and
//! restored from verb morphology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{feat, span_of, EmptyCategory, Edge, Features, HybridGraph, NodeRef, PhraseNode, Terminal};
use crate::label::Label;
use crate::oracle::is_dropped_pronoun;
use crate::vocab::{empty_category_form, pronoun_form};

/// Something the conversion could not encode or decode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LossDetail {
    pub item: String,
    pub reason: String,
}

impl LossDetail {
    fn new(item: impl fmt::Display, reason: impl Into<String>) -> LossDetail {
        LossDetail {
            item: item.to_string(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for LossDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.item, self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConversionReport {
    pub converted_phrases: usize,
    pub converted_empty_categories: usize,
    pub dropped_pronouns: usize,
    pub loss_details: Vec<LossDetail>,
}

impl ConversionReport {
    pub fn lossy(&self) -> bool {
        !self.loss_details.is_empty()
    }
}

/// Result of decoding a pure graph.
#[derive(Debug, Clone)]
pub struct Restoration {
    pub graph: HybridGraph,
    /// Edges whose markers could not be expanded. Their labels are kept.
    pub errors: Vec<LossDetail>,
}

/// Converts a hybrid graph to a pure dependency graph.
pub fn to_pure(hybrid: &HybridGraph) -> Result<(HybridGraph, ConversionReport)> {
    if let Some(v) = hybrid.validate().into_iter().next() {
        return Err(Error::Invalid(v.to_string()));
    }
    let mut report = ConversionReport::default();
    let mut g = hybrid.clone();

    for e in &g.edges {
        if !e.label.is_simple() {
            report
                .loss_details
                .push(LossDetail::new(edge_name(e), format!("label {} is already enriched", e.label)));
        }
    }

    drop_pronouns(&mut g, &mut report);
    fold_phrases(&mut g, &mut report);
    collapse_chains(&mut g, &mut report);
    Ok((g, report))
}

fn edge_name(e: &Edge) -> String {
    format!("{}->{}", e.dependent, e.head)
}

fn drop_pronouns(g: &mut HybridGraph, report: &mut ConversionReport) {
    let mut i = g.terminals.len();
    while i > 0 {
        i -= 1;
        if !is_dropped_pronoun(g, i) {
            continue;
        }
        let verb = &g.terminals[i - 1];
        if verb.feature(feat::SP).is_some() {
            report.loss_details.push(LossDetail::new(
                NodeRef::Terminal(i),
                "dropped pronoun of a verb with a special group is not restored",
            ));
        }
        let expected = pronoun_form(
            verb.feature(feat::PERSON),
            verb.feature(feat::GENDER),
            verb.feature(feat::NUMBER),
        );
        if g.terminals[i].form() != expected || !g.terminals[i].features().is_empty() {
            report.loss_details.push(LossDetail::new(
                NodeRef::Terminal(i),
                format!("pronoun {:?} does not match the verb's form {expected:?}", g.terminals[i].form()),
            ));
        }
        if g.phrases.iter().any(|p| p.start == i && p.end == i) {
            report
                .loss_details
                .push(LossDetail::new(NodeRef::Terminal(i), "phrase over a dropped pronoun"));
        }
        g.remove_terminal(i);
        report.dropped_pronouns += 1;
    }
}

/// Re-anchors every phrase edge to the phrase's subgraph root.
fn fold_phrases(g: &mut HybridGraph, report: &mut ConversionReport) {
    let roots = g.phrase_roots();
    let mut keep = Vec::new();
    let mut root_of = BTreeMap::new();
    for (p, root) in roots.iter().enumerate() {
        let node = NodeRef::Phrase(p);
        let r = match root {
            Ok(r) => *r,
            Err(msg) => {
                report.loss_details.push(LossDetail::new(node, msg.clone()));
                keep.push(p);
                continue;
            }
        };
        if !g.edges.iter().any(|e| e.touches(node)) {
            report.loss_details.push(LossDetail::new(node, "phrase has no edges"));
        }
        let ph = &g.phrases[p];
        if span_of(&g.yield_of(NodeRef::Terminal(r))) != Some((ph.start, ph.end)) {
            report.loss_details.push(LossDetail::new(
                node,
                format!("span differs from the yield of its root w{}", r + 1),
            ));
        }
        root_of.insert(p, r);
    }
    for e in &mut g.edges {
        let mut rel = match &e.label {
            Label::Rel(r) => r.clone(),
            Label::Bridge { .. } => continue,
        };
        if let NodeRef::Phrase(p) = e.dependent {
            if let Some(&r) = root_of.get(&p) {
                e.dependent = NodeRef::Terminal(r);
                rel.dep_exp = true;
            }
        }
        if let NodeRef::Phrase(p) = e.head {
            if let Some(&r) = root_of.get(&p) {
                e.head = NodeRef::Terminal(r);
                rel.head_exp = true;
            }
        }
        e.label = Label::Rel(rel);
    }
    let mut seen = BTreeSet::new();
    for e in &g.edges {
        if !seen.insert((e.dependent, e.head)) {
            report
                .loss_details
                .push(LossDetail::new(edge_name(e), "phrase and root share an edge"));
        }
        if e.dependent == e.head {
            report.loss_details.push(LossDetail::new(edge_name(e), "edge between a phrase and its root"));
        }
    }
    g.edges.retain(|e| e.dependent != e.head);
    for p in (0..g.phrases.len()).rev() {
        if !keep.contains(&p) {
            g.remove_phrase(p);
            report.converted_phrases += 1;
        }
    }
}

/// Replaces `a -r1-> e -r2-> b` through an empty category by one edge.
fn collapse_chains(g: &mut HybridGraph, report: &mut ConversionReport) {
    let mut i = g.terminals.len();
    while i > 0 {
        i -= 1;
        let Terminal::Empty(ec) = &g.terminals[i] else {
            continue;
        };
        let node = NodeRef::Terminal(i);
        let deps: Vec<&Edge> = g.dependents(node).collect();
        let head = g.head_edge(node);
        let (dep, head) = match (deps.as_slice(), head) {
            ([d], Some(h)) => ((*d).clone(), h.clone()),
            _ => {
                report.loss_details.push(LossDetail::new(
                    node,
                    format!(
                        "empty category with {} dependents and {} head",
                        deps.len(),
                        if head.is_some() { "a" } else { "no" }
                    ),
                ));
                continue;
            }
        };
        if ec.form != empty_category_form(&ec.pos) || !ec.features.is_empty() {
            report.loss_details.push(LossDetail::new(
                node,
                format!("empty category {:?} is not in canonical form", ec.form),
            ));
            continue;
        }
        let (Label::Rel(first), Label::Rel(second)) = (&dep.label, &head.label) else {
            report.loss_details.push(LossDetail::new(node, "nested ellipsis"));
            continue;
        };
        let label = Label::Bridge {
            first: first.clone(),
            pos: ec.pos.clone(),
            second: second.clone(),
        };
        let (a, b) = (dep.dependent, head.head);
        g.remove_terminal(i);
        let shift = |n: NodeRef| match n {
            NodeRef::Terminal(t) if t > i => NodeRef::Terminal(t - 1),
            n => n,
        };
        g.edges.push(Edge::new(shift(a), shift(b), label));
        report.converted_empty_categories += 1;
    }
}

/// Decodes a pure graph: bridges first, then dropped pronouns, then phrases.
pub fn from_pure(pure: &HybridGraph) -> Restoration {
    let mut g = expand_bridges(pure);
    reinsert_pronouns(&mut g);
    let errors = expand_phrases(&mut g);
    Restoration { graph: g, errors }
}

/// Expands every bridge label into an empty category and two edges. The
/// empty category is placed right before the dependent's yield.
pub fn expand_bridges(pure: &HybridGraph) -> HybridGraph {
    let mut g = pure.clone();
    while let Some(k) = g.edges.iter().position(|e| matches!(e.label, Label::Bridge { .. })) {
        let e = g.edges.remove(k);
        let Label::Bridge { first, pos, second } = e.label else {
            unreachable!()
        };
        let at = *g.yield_of(e.dependent).first().expect("non-empty yield");
        g.insert_terminal(
            at,
            Terminal::Empty(EmptyCategory {
                form: empty_category_form(&pos).to_string(),
                pos,
                features: Features::new(),
            }),
        );
        let shift = |n: NodeRef| match n {
            NodeRef::Terminal(t) if t >= at => NodeRef::Terminal(t + 1),
            n => n,
        };
        let ec = NodeRef::Terminal(at);
        g.edges.push(Edge::new(shift(e.dependent), ec, Label::Rel(first)));
        g.edges.push(Edge::new(ec, shift(e.head), Label::Rel(second)));
    }
    g
}

/// Gives every verb without a subject and outside the special groups a
/// dropped pronoun right after it.
pub fn reinsert_pronouns(g: &mut HybridGraph) {
    let mut i = g.terminals.len();
    while i > 0 {
        i -= 1;
        let t = &g.terminals[i];
        if t.is_empty_category() || t.pos() != "V" || t.feature(feat::SP).is_some() {
            continue;
        }
        let node = NodeRef::Terminal(i);
        if g.dependents(node).any(|e| matches!(e.label.base(), "subj" | "subjx")) {
            continue;
        }
        let form = pronoun_form(t.feature(feat::PERSON), t.feature(feat::GENDER), t.feature(feat::NUMBER));
        g.insert_terminal(
            i + 1,
            Terminal::Empty(EmptyCategory {
                pos: "PRON".into(),
                form: form.to_string(),
                features: Features::new(),
            }),
        );
        g.edges
            .push(Edge::new(NodeRef::Terminal(i + 1), node, Label::rel("subj")));
    }
}

/// Materializes a phrase for every endpoint carrying an expansion marker.
fn expand_phrases(g: &mut HybridGraph) -> Vec<LossDetail> {
    let mut errors = Vec::new();
    let mut wanted = BTreeSet::new();
    for e in &g.edges {
        if let Label::Rel(r) = &e.label {
            if r.dep_exp {
                wanted.insert(e.dependent);
            }
            if r.head_exp {
                wanted.insert(e.head);
            }
        }
    }
    let mut spans = BTreeMap::new();
    for &n in &wanted {
        let inner = g.yield_where(n, |e| !(e.head == n && head_expands(&e.label)));
        match span_of(&inner) {
            Some(span) => {
                spans.insert(n, span);
            }
            None => {
                for e in g.edges.iter().filter(|e| e.touches(n)) {
                    errors.push(LossDetail::new(
                        edge_name(e),
                        format!("{n} has a discontinuous subgraph"),
                    ));
                }
            }
        }
    }
    let tags: BTreeMap<NodeRef, String> = spans
        .iter()
        .map(|(&n, &span)| (n, phrase_tag(g, n, span)))
        .collect();
    let base = g.phrases.len();
    let mut index = BTreeMap::new();
    for (k, (&n, &(a, b))) in spans.iter().enumerate() {
        g.phrases.push(PhraseNode::new(a, b, tags[&n].clone()));
        index.insert(n, NodeRef::Phrase(base + k));
    }
    for e in &mut g.edges {
        let Label::Rel(r) = &e.label else { continue };
        let mut rel = r.clone();
        if rel.dep_exp {
            if let Some(&p) = index.get(&e.dependent) {
                e.dependent = p;
                rel.dep_exp = false;
            }
        }
        if rel.head_exp {
            if let Some(&p) = index.get(&e.head) {
                e.head = p;
                rel.head_exp = false;
            }
        }
        e.label = Label::Rel(rel);
    }
    errors
}

fn head_expands(l: &Label) -> bool {
    match l {
        Label::Rel(r) => r.head_exp,
        Label::Bridge { second, .. } => second.head_exp,
    }
}

/// Phrase tag for a span rooted at `root`, from the labeling rules.
pub fn phrase_tag(g: &HybridGraph, root: NodeRef, (a, b): (usize, usize)) -> String {
    let pos = match root {
        NodeRef::Terminal(i) => g.terminals[i].pos(),
        NodeRef::Phrase(_) => "",
    };
    let inside = |n: NodeRef| match n {
        NodeRef::Terminal(i) => a <= i && i <= b,
        NodeRef::Phrase(p) => a <= g.phrases[p].start && g.phrases[p].end <= b,
    };
    let tag = if pos == "P" {
        "PP"
    } else if pos == "V" && g.dependents(root).any(|e| e.label.base() == "subj") {
        "VS"
    } else if g
        .edges
        .iter()
        .any(|e| matches!(e.label.base(), "pred" | "predx") && inside(e.dependent) && inside(e.head))
    {
        "NS"
    } else if matches!(pos, "COND" | "T") {
        "CS"
    } else if pos == "SUB" {
        "SC"
    } else {
        "S"
    };
    tag.to_string()
}

/// True when the graph converts without loss and decodes back to itself.
pub fn is_convertible(hybrid: &HybridGraph) -> bool {
    let Ok((pure, report)) = to_pure(hybrid) else {
        return false;
    };
    if report.lossy() {
        return false;
    }
    let back = from_pure(&pure);
    back.errors.is_empty() && back.graph.structurally_equal(hybrid)
}
