//! Hybrid dependency-constituency graphs.
//!
//! Terminals (morphological segments and empty categories) are addressed by
//! their 0-based position in surface order. Phrases cover inclusive terminal
//! spans. Edges point from dependent to head.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;
use crate::vocab::Vocabulary;

/// Feature name to value. Keys are listed in [`feat`].
pub type Features = BTreeMap<String, String>;

/// Feature keys used on segments.
pub mod feat {
    pub const SEG_TYPE: &str = "segType";
    pub const PERSON: &str = "person";
    pub const GENDER: &str = "gender";
    pub const NUMBER: &str = "number";
    pub const CASE: &str = "case";
    pub const MOOD: &str = "mood";
    pub const VOICE: &str = "voice";
    pub const ASPECT: &str = "aspect";
    pub const STATE: &str = "state";
    pub const DERIVATION: &str = "derivation";
    pub const VFORM: &str = "vform";
    pub const SP: &str = "sp";
    pub const PRON_TYPE: &str = "pronType";

    /// Allowed values for each closed feature. `None` means open-valued.
    pub fn allowed(key: &str) -> Option<Option<&'static [&'static str]>> {
        let v: Option<&'static [&'static str]> = match key {
            SEG_TYPE => Some(&["prefix", "stem", "suffix"]),
            PERSON => Some(&["1", "2", "3"]),
            GENDER => Some(&["M", "F"]),
            NUMBER => Some(&["S", "D", "P"]),
            CASE => Some(&["NOM", "ACC", "GEN"]),
            MOOD => Some(&["IND", "SUBJ", "JUS"]),
            VOICE => Some(&["ACT", "PASS"]),
            ASPECT => Some(&["PERF", "IMPF", "IMPV"]),
            STATE => Some(&["DEF", "INDEF"]),
            DERIVATION => Some(&["ACT PCPL", "PASS PCPL", "VN"]),
            VFORM => Some(&[
                "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII",
            ]),
            PRON_TYPE => Some(&["subject", "object"]),
            SP => None,
            _ => return None,
        };
        Some(v)
    }
}

/// Position of a token in the text: `(chapter:verse:token:segment)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub chapter: u32,
    pub verse: u32,
    pub token: Option<u32>,
    pub segment: Option<u32>,
}

impl Location {
    pub fn new(chapter: u32, verse: u32, token: u32) -> Location {
        Location {
            chapter,
            verse,
            token: Some(token),
            segment: None,
        }
    }

    pub fn with_segment(self, segment: u32) -> Location {
        Location {
            segment: Some(segment),
            ..self
        }
    }

    pub fn segment_or_default(&self) -> u32 {
        self.segment.unwrap_or(1)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}", self.chapter, self.verse)?;
        if let Some(t) = self.token {
            write!(f, ":{t}")?;
            if let Some(s) = self.segment {
                write!(f, ":{s}")?;
            }
        }
        f.write_str(")")
    }
}

/// One morphological segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphSegment {
    pub location: Option<Location>,
    pub form: String,
    pub pos: String,
    pub features: Features,
    pub lemma: Option<String>,
    pub root: Option<String>,
    /// Reference nodes are ordinary segments carrying this flag.
    pub reference: bool,
}

impl MorphSegment {
    pub fn new(form: impl Into<String>, pos: impl Into<String>) -> MorphSegment {
        MorphSegment {
            location: None,
            form: form.into(),
            pos: pos.into(),
            features: Features::new(),
            lemma: None,
            root: None,
            reference: false,
        }
    }

    pub fn with(mut self, key: &str, value: &str) -> MorphSegment {
        self.features.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_lemma(mut self, lemma: &str) -> MorphSegment {
        self.lemma = Some(lemma.to_string());
        self
    }

    pub fn with_root(mut self, root: &str) -> MorphSegment {
        self.root = Some(root.to_string());
        self
    }
}

/// A reconstructed word with no surface realization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyCategory {
    pub pos: String,
    pub form: String,
    pub features: Features,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Segment(MorphSegment),
    Empty(EmptyCategory),
}

impl Terminal {
    pub fn pos(&self) -> &str {
        match self {
            Terminal::Segment(s) => &s.pos,
            Terminal::Empty(e) => &e.pos,
        }
    }

    pub fn form(&self) -> &str {
        match self {
            Terminal::Segment(s) => &s.form,
            Terminal::Empty(e) => &e.form,
        }
    }

    pub fn features(&self) -> &Features {
        match self {
            Terminal::Segment(s) => &s.features,
            Terminal::Empty(e) => &e.features,
        }
    }

    pub fn feature(&self, key: &str) -> Option<&str> {
        self.features().get(key).map(String::as_str)
    }

    pub fn lemma(&self) -> Option<&str> {
        match self {
            Terminal::Segment(s) => s.lemma.as_deref(),
            Terminal::Empty(_) => None,
        }
    }

    pub fn is_empty_category(&self) -> bool {
        matches!(self, Terminal::Empty(_))
    }

    pub fn as_segment(&self) -> Option<&MorphSegment> {
        match self {
            Terminal::Segment(s) => Some(s),
            Terminal::Empty(_) => None,
        }
    }
}

/// A phrase over the inclusive terminal span `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseNode {
    pub start: usize,
    pub end: usize,
    pub tag: String,
}

impl PhraseNode {
    pub fn new(start: usize, end: usize, tag: impl Into<String>) -> PhraseNode {
        PhraseNode {
            start,
            end,
            tag: tag.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    /// True when `other` lies inside this span.
    pub fn covers(&self, other: &PhraseNode) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Terminal(usize),
    Phrase(usize),
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Terminal(i) => write!(f, "w{}", i + 1),
            NodeRef::Phrase(p) => write!(f, "p{}", p + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub dependent: NodeRef,
    pub head: NodeRef,
    pub label: Label,
}

impl Edge {
    pub fn new(dependent: NodeRef, head: NodeRef, label: Label) -> Edge {
        Edge {
            dependent,
            head,
            label,
        }
    }

    pub fn touches(&self, n: NodeRef) -> bool {
        self.dependent == n || self.head == n
    }
}

/// A broken invariant reported by [`HybridGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridGraph {
    pub terminals: Vec<Terminal>,
    pub phrases: Vec<PhraseNode>,
    pub edges: Vec<Edge>,
}

impl HybridGraph {
    pub fn from_segments(segments: Vec<MorphSegment>) -> HybridGraph {
        HybridGraph {
            terminals: segments.into_iter().map(Terminal::Segment).collect(),
            phrases: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn contains(&self, n: NodeRef) -> bool {
        match n {
            NodeRef::Terminal(i) => i < self.terminals.len(),
            NodeRef::Phrase(p) => p < self.phrases.len(),
        }
    }

    fn check(&self, n: NodeRef) -> Result<()> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(Error::InvalidReference(n.to_string()))
        }
    }

    pub fn terminal(&self, i: usize) -> &Terminal {
        &self.terminals[i]
    }

    /// The morphological segments, without empty categories.
    pub fn segments(&self) -> impl Iterator<Item = &MorphSegment> {
        self.terminals.iter().filter_map(Terminal::as_segment)
    }

    pub fn segment_count(&self) -> usize {
        self.segments().count()
    }

    pub fn empty_category_count(&self) -> usize {
        self.terminals.len() - self.segment_count()
    }

    pub fn head_edge(&self, n: NodeRef) -> Option<&Edge> {
        self.edges.iter().find(|e| e.dependent == n)
    }

    /// The head of `n`, or `None` when it is headless.
    pub fn head_of(&self, n: NodeRef) -> Result<Option<NodeRef>> {
        self.check(n)?;
        Ok(self.head_edge(n).map(|e| e.head))
    }

    pub fn dependents(&self, n: NodeRef) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.head == n)
    }

    pub fn has_edge(&self, dependent: NodeRef, head: NodeRef) -> bool {
        self.edges
            .iter()
            .any(|e| e.dependent == dependent && e.head == head)
    }

    /// Terminals dominated by `n`: its own span plus the yields of its
    /// dependents. Edges rejected by `follow` are not traversed.
    pub fn yield_where(&self, n: NodeRef, follow: impl Fn(&Edge) -> bool) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut todo = VecDeque::from([n]);
        while let Some(x) = todo.pop_front() {
            if !seen.insert(x) {
                continue;
            }
            match x {
                NodeRef::Terminal(i) => {
                    out.insert(i);
                }
                NodeRef::Phrase(p) => {
                    let ph = &self.phrases[p];
                    out.extend(ph.start..=ph.end);
                }
            }
            for e in self.edges.iter().filter(|e| e.head == x && follow(e)) {
                todo.push_back(e.dependent);
            }
        }
        out
    }

    pub fn yield_of(&self, n: NodeRef) -> BTreeSet<usize> {
        self.yield_where(n, |_| true)
    }

    /// The contiguous span covered by `n` and its transitive dependents.
    pub fn subgraph_span(&self, n: NodeRef) -> Result<(usize, usize)> {
        self.check(n)?;
        span_of(&self.yield_of(n)).ok_or_else(|| Error::NonProjective(n.to_string()))
    }

    /// The unique headless terminal inside a phrase's span.
    ///
    /// A terminal counts as headed when it has a head edge, or when it is the
    /// root of a strictly smaller nested phrase that has one.
    pub fn subgraph_root(&self, phrase: usize) -> Result<usize> {
        self.check(NodeRef::Phrase(phrase))?;
        self.phrase_roots()[phrase]
            .clone()
            .map_err(Error::IllFormedPhrase)
    }

    /// Roots of every phrase, resolved innermost first.
    pub fn phrase_roots(&self) -> Vec<std::result::Result<usize, String>> {
        let mut order: Vec<usize> = (0..self.phrases.len()).collect();
        order.sort_by_key(|&p| (self.phrases[p].len(), p));
        let mut roots: Vec<std::result::Result<usize, String>> =
            vec![Err(String::new()); self.phrases.len()];
        let mut headed: Vec<bool> = (0..self.terminals.len())
            .map(|i| self.head_edge(NodeRef::Terminal(i)).is_some())
            .collect();
        let mut i = 0;
        while i < order.len() {
            // Phrases of equal size cannot nest strictly; resolve them as a batch.
            let size = self.phrases[order[i]].len();
            let mut j = i;
            let mut batch = Vec::new();
            while j < order.len() && self.phrases[order[j]].len() == size {
                let p = order[j];
                let ph = &self.phrases[p];
                let free: Vec<usize> = (ph.start..=ph.end)
                    .filter(|&t| t < headed.len() && !headed[t])
                    .collect();
                roots[p] = match free.as_slice() {
                    [r] => Ok(*r),
                    [] => Err(format!("p{} has no headless terminal", p + 1)),
                    _ => Err(format!(
                        "p{} has {} headless terminals",
                        p + 1,
                        free.len()
                    )),
                };
                batch.push(p);
                j += 1;
            }
            for p in batch {
                if let Ok(r) = roots[p] {
                    if self.head_edge(NodeRef::Phrase(p)).is_some() {
                        headed[r] = true;
                    }
                }
            }
            i = j;
        }
        roots
    }

    /// Checks every structural invariant and reports each breach.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut v = |subject: String, rule: &'static str| out.push(Violation { subject, rule });
        let n = self.terminals.len();
        for (i, t) in self.terminals.iter().enumerate() {
            if t.form().is_empty() {
                v(format!("w{}", i + 1), "empty form");
            }
            if t.pos().is_empty() {
                v(format!("w{}", i + 1), "empty part of speech");
            }
        }
        for (p, ph) in self.phrases.iter().enumerate() {
            if ph.start > ph.end {
                v(format!("p{}", p + 1), "span start after end");
            } else if ph.end >= n {
                v(format!("p{}", p + 1), "span out of bounds");
            }
            for (q, other) in self.phrases.iter().enumerate().skip(p + 1) {
                let overlap = ph.start <= other.end && other.start <= ph.end;
                if overlap && !ph.covers(other) && !other.covers(ph) {
                    v(format!("p{} p{}", p + 1, q + 1), "partially overlapping spans");
                }
            }
        }
        let mut heads: BTreeMap<NodeRef, usize> = BTreeMap::new();
        for e in &self.edges {
            let subject = format!("{}->{}", e.dependent, e.head);
            if !self.contains(e.dependent) || !self.contains(e.head) {
                v(subject, "dangling node reference");
                continue;
            }
            if e.dependent == e.head {
                v(subject, "edge from a node to itself");
            }
            *heads.entry(e.dependent).or_default() += 1;
        }
        for (node, count) in heads {
            if count > 1 {
                v(node.to_string(), "more than one head");
            }
        }
        if let Some(node) = self.find_cycle() {
            v(node.to_string(), "cycle");
        }
        out
    }

    /// [`validate`](Self::validate) plus tag membership in a vocabulary.
    pub fn validate_with(&self, vocab: &Vocabulary) -> Vec<Violation> {
        let mut out = self.validate();
        for (i, t) in self.terminals.iter().enumerate() {
            if !vocab.has_pos(t.pos()) {
                out.push(Violation {
                    subject: format!("w{} {}", i + 1, t.pos()),
                    rule: "unknown part of speech",
                });
            }
        }
        for (p, ph) in self.phrases.iter().enumerate() {
            if !vocab.has_phrase(&ph.tag) {
                out.push(Violation {
                    subject: format!("p{} {}", p + 1, ph.tag),
                    rule: "unknown phrase tag",
                });
            }
        }
        for e in &self.edges {
            if e.label.check(vocab).is_err() {
                out.push(Violation {
                    subject: format!("{}->{} {}", e.dependent, e.head, e.label),
                    rule: "unknown relation",
                });
            }
        }
        out
    }

    fn find_cycle(&self) -> Option<NodeRef> {
        let mut adj: BTreeMap<NodeRef, Vec<NodeRef>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.dependent).or_default().push(e.head);
        }
        let mut state: BTreeMap<NodeRef, u8> = BTreeMap::new();
        for &start in adj.keys() {
            if state.get(&start).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state.insert(start, 1);
            while let Some((node, idx)) = stack.pop() {
                let next = adj.get(&node).and_then(|v| v.get(idx)).copied();
                match next {
                    Some(h) => {
                        stack.push((node, idx + 1));
                        match state.get(&h).copied().unwrap_or(0) {
                            0 => {
                                state.insert(h, 1);
                                stack.push((h, 0));
                            }
                            1 => return Some(h),
                            _ => {}
                        }
                    }
                    None => {
                        state.insert(node, 2);
                    }
                }
            }
        }
        None
    }

    /// Inserts a terminal at position `at`, shifting later indices.
    pub fn insert_terminal(&mut self, at: usize, t: Terminal) {
        assert!(at <= self.terminals.len());
        self.terminals.insert(at, t);
        let shift = |i: &mut usize| {
            if *i >= at {
                *i += 1
            }
        };
        for e in &mut self.edges {
            for n in [&mut e.dependent, &mut e.head] {
                if let NodeRef::Terminal(i) = n {
                    shift(i);
                }
            }
        }
        for ph in &mut self.phrases {
            shift(&mut ph.start);
            shift(&mut ph.end);
        }
    }

    /// Removes a terminal together with its edges; later indices shift down.
    /// Phrases left without terminals are removed as well.
    pub fn remove_terminal(&mut self, at: usize) -> Terminal {
        let t = self.terminals.remove(at);
        self.edges.retain(|e| !e.touches(NodeRef::Terminal(at)));
        for e in &mut self.edges {
            for n in [&mut e.dependent, &mut e.head] {
                if let NodeRef::Terminal(i) = n {
                    if *i > at {
                        *i -= 1;
                    }
                }
            }
        }
        let mut gone = Vec::new();
        for (p, ph) in self.phrases.iter_mut().enumerate() {
            if ph.start == at && ph.end == at {
                gone.push(p);
                continue;
            }
            if ph.start > at {
                ph.start -= 1;
            }
            if ph.end >= at {
                ph.end -= 1;
            }
        }
        for p in gone.into_iter().rev() {
            self.remove_phrase(p);
        }
        t
    }

    /// Removes a phrase and its edges, renumbering later phrases.
    pub fn remove_phrase(&mut self, p: usize) -> PhraseNode {
        let ph = self.phrases.remove(p);
        self.edges.retain(|e| !e.touches(NodeRef::Phrase(p)));
        for e in &mut self.edges {
            for n in [&mut e.dependent, &mut e.head] {
                if let NodeRef::Phrase(q) = n {
                    if *q > p {
                        *q -= 1;
                    }
                }
            }
        }
        ph
    }

    /// Same graph with phrases and edges in a canonical order.
    ///
    /// Phrases sort by start, then widest first, then tag; edges by endpoints
    /// and label.
    pub fn canonical(&self) -> HybridGraph {
        let mut order: Vec<usize> = (0..self.phrases.len()).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (&self.phrases[a], &self.phrases[b]);
            (x.start, std::cmp::Reverse(x.end), &x.tag, a).cmp(&(
                y.start,
                std::cmp::Reverse(y.end),
                &y.tag,
                b,
            ))
        });
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let remap = |n: NodeRef| match n {
            NodeRef::Phrase(p) => NodeRef::Phrase(new_index[p]),
            t => t,
        };
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge::new(remap(e.dependent), remap(e.head), e.label.clone()))
            .collect();
        edges.sort();
        HybridGraph {
            terminals: self.terminals.clone(),
            phrases: order.iter().map(|&p| self.phrases[p].clone()).collect(),
            edges,
        }
    }

    /// Equality up to the order of phrases and edges.
    pub fn structurally_equal(&self, other: &HybridGraph) -> bool {
        self.canonical() == other.canonical()
    }
}

/// `(min, max)` of a non-empty set without gaps.
pub fn span_of(set: &BTreeSet<usize>) -> Option<(usize, usize)> {
    let lo = *set.first()?;
    let hi = *set.last()?;
    (hi - lo + 1 == set.len()).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(form: &str, pos: &str) -> MorphSegment {
        MorphSegment::new(form, pos)
    }

    fn t(i: usize) -> NodeRef {
        NodeRef::Terminal(i)
    }

    fn chain() -> HybridGraph {
        let mut g = HybridGraph::from_segments(vec![
            seg("a", "N"),
            seg("b", "V"),
            seg("c", "N"),
            seg("d", "P"),
        ]);
        g.edges.push(Edge::new(t(0), t(1), Label::rel("subj")));
        g.edges.push(Edge::new(t(2), t(1), Label::rel("obj")));
        g.edges.push(Edge::new(t(3), t(1), Label::rel("link")));
        g
    }

    #[test]
    fn head_lookup() {
        let g = chain();
        assert_eq!(g.head_of(t(0)).unwrap(), Some(t(1)));
        assert_eq!(g.head_of(t(1)).unwrap(), None);
        assert!(g.head_of(t(9)).is_err());
    }

    #[test]
    fn span_and_root_agree() {
        let mut g = chain();
        g.phrases.push(PhraseNode::new(0, 3, "VS"));
        assert_eq!(g.subgraph_root(0).unwrap(), 1);
        assert_eq!(g.subgraph_span(t(1)).unwrap(), (0, 3));
        assert_eq!(g.subgraph_span(t(3)).unwrap(), (3, 3));
    }

    #[test]
    fn gap_is_non_projective() {
        let mut g = chain();
        g.edges.retain(|e| e.dependent != t(2));
        assert!(matches!(g.subgraph_span(t(1)), Err(Error::NonProjective(_))));
    }

    #[test]
    fn two_free_terminals_is_ill_formed() {
        let mut g = chain();
        g.edges.pop();
        g.phrases.push(PhraseNode::new(1, 3, "S"));
        assert!(matches!(g.subgraph_root(0), Err(Error::IllFormedPhrase(_))));
    }

    #[test]
    fn violations() {
        let mut g = chain();
        assert!(g.validate().is_empty());
        g.edges.push(Edge::new(t(0), t(2), Label::rel("adj")));
        assert!(g.validate().iter().any(|v| v.rule == "more than one head"));
        let mut g = chain();
        g.edges.push(Edge::new(t(1), t(3), Label::rel("adj")));
        assert!(g.validate().iter().any(|v| v.rule == "cycle"));
        let mut g = chain();
        g.phrases.push(PhraseNode::new(0, 2, "S"));
        g.phrases.push(PhraseNode::new(1, 3, "S"));
        assert!(g.validate().iter().any(|v| v.rule == "partially overlapping spans"));
    }

    #[test]
    fn insertion_shifts_spans_and_edges() {
        let mut g = chain();
        g.phrases.push(PhraseNode::new(1, 3, "VS"));
        g.phrases.push(PhraseNode::new(0, 1, "S"));
        g.insert_terminal(
            2,
            Terminal::Empty(EmptyCategory {
                pos: "PRON".into(),
                form: "huwa".into(),
                features: Features::new(),
            }),
        );
        assert_eq!(g.phrases[0], PhraseNode::new(1, 4, "VS"));
        assert_eq!(g.phrases[1], PhraseNode::new(0, 1, "S"));
        assert!(g.has_edge(t(3), t(1)));
        g.remove_terminal(2);
        assert_eq!(g, {
            let mut h = chain();
            h.phrases.push(PhraseNode::new(1, 3, "VS"));
            h.phrases.push(PhraseNode::new(0, 1, "S"));
            h
        });
    }

    #[test]
    fn location_display() {
        let l = Location::new(4, 68, 1);
        assert_eq!(l.to_string(), "(4:68:1)");
        assert_eq!(l.with_segment(2).to_string(), "(4:68:1:2)");
    }
}
