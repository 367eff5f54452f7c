//! Parser configurations and the seven transitions.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{feat, EmptyCategory, Edge, Features, HybridGraph, MorphSegment, NodeRef, PhraseNode, Terminal};
use crate::label::Label;
use crate::vocab::{empty_category_form, pronoun_form};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    /// Π: move the front of the queue onto the stack.
    Shift,
    /// Λ(n): delete the n-th stack item (1 or 2).
    Reduce(u8),
    /// Φ(r): s₁ heads s₂.
    Left(Label),
    /// Ψ(r): s₂ heads s₁.
    Right(Label),
    /// Θ(p): insert an empty category after s₁ and push it.
    Empty(String),
    /// Γ: insert a dropped subject pronoun after the verb s₁.
    Pron,
    /// Ω(z): add a phrase over the subgraph of s₁ and push it.
    Phrase(String),
}

impl Transition {
    /// True for the four transitions of pure dependency parsing.
    pub fn is_dependency(&self) -> bool {
        matches!(
            self,
            Transition::Shift | Transition::Reduce(_) | Transition::Left(_) | Transition::Right(_)
        )
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Shift => f.write_str("SHIFT"),
            Transition::Reduce(n) => write!(f, "REDUCE({n})"),
            Transition::Left(l) => write!(f, "LEFT({l})"),
            Transition::Right(l) => write!(f, "RIGHT({l})"),
            Transition::Empty(p) => write!(f, "EMPTY({p})"),
            Transition::Pron => f.write_str("PRON"),
            Transition::Phrase(z) => write!(f, "PHRASE({z})"),
        }
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Transition> {
        let bad = || Error::parse(1, format!("unknown transition {s:?}"));
        let s = s.trim();
        match s {
            "SHIFT" => return Ok(Transition::Shift),
            "PRON" => return Ok(Transition::Pron),
            "REDUCE(1)" => return Ok(Transition::Reduce(1)),
            "REDUCE(2)" => return Ok(Transition::Reduce(2)),
            _ => {}
        }
        let (name, arg) = s
            .strip_suffix(')')
            .and_then(|x| x.split_once('('))
            .ok_or_else(bad)?;
        if arg.is_empty() {
            return Err(bad());
        }
        let label = || arg.parse::<Label>().map_err(|_| bad());
        Ok(match name {
            "LEFT" => Transition::Left(label()?),
            "RIGHT" => Transition::Right(label()?),
            "EMPTY" => Transition::Empty(arg.to_string()),
            "PHRASE" => Transition::Phrase(arg.to_string()),
            _ => return Err(bad()),
        })
    }
}

impl Serialize for Transition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Transition, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Parses one transition per line, skipping blanks and `#` comments.
pub fn parse_sequence(text: &str) -> Result<Vec<Transition>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            l.parse().map_err(|e| match e {
                Error::Parse { message, .. } => Error::parse(n + 1, message),
                e => e,
            })
        })
        .collect()
}

pub fn format_sequence(seq: &[Transition]) -> String {
    seq.iter().map(|t| format!("{t}\n")).collect()
}

/// Maximum number of transitions for a sentence of `n` terminals.
pub fn step_budget(n: usize) -> usize {
    8 * n + 16
}

/// Queue, stack and the partial graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    /// Terminal indices; the front is q₁.
    pub queue: VecDeque<usize>,
    /// The last element is s₁.
    pub stack: Vec<NodeRef>,
    pub graph: HybridGraph,
}

impl Configuration {
    pub fn initial(sentence: Vec<MorphSegment>) -> Result<Configuration> {
        if sentence.is_empty() {
            return Err(Error::Invalid("empty sentence".into()));
        }
        let graph = HybridGraph::from_segments(sentence);
        Ok(Configuration {
            queue: (0..graph.terminals.len()).collect(),
            stack: Vec::new(),
            graph,
        })
    }

    /// The `k`-th stack item, 1-based from the top.
    pub fn s(&self, k: usize) -> Option<NodeRef> {
        self.stack.len().checked_sub(k).map(|i| self.stack[i])
    }

    pub fn q(&self, k: usize) -> Option<usize> {
        self.queue.get(k - 1).copied()
    }

    pub fn is_terminal(&self) -> bool {
        self.queue.is_empty() && self.stack.is_empty()
    }

    fn s1_terminal(&self) -> Option<usize> {
        match self.s(1)? {
            NodeRef::Terminal(i) => Some(i),
            NodeRef::Phrase(_) => None,
        }
    }

    /// True when `head` lies in the subtree under `dep`.
    fn dominates(&self, dep: NodeRef, head: NodeRef) -> bool {
        let mut x = head;
        for _ in 0..=self.graph.edges.len() {
            if x == dep {
                return true;
            }
            match self.graph.head_edge(x) {
                Some(e) => x = e.head,
                None => return false,
            }
        }
        true
    }

    fn arc_ok(&self, dep: Option<NodeRef>, head: Option<NodeRef>) -> bool {
        match (dep, head) {
            (Some(d), Some(h)) => {
                self.graph.head_edge(d).is_none() && !self.dominates(d, h) && !self.nested(d, h)
            }
            _ => false,
        }
    }

    /// A phrase and a node inside its span.
    fn nested(&self, a: NodeRef, b: NodeRef) -> bool {
        let span = |n: NodeRef| match n {
            NodeRef::Terminal(i) => (i, i),
            NodeRef::Phrase(p) => (self.graph.phrases[p].start, self.graph.phrases[p].end),
        };
        let ((a0, a1), (b0, b1)) = (span(a), span(b));
        let phrase = matches!(a, NodeRef::Phrase(_)) || matches!(b, NodeRef::Phrase(_));
        phrase && ((a0 <= b0 && b1 <= a1) || (b0 <= a0 && a1 <= b1))
    }

    fn has_subject(&self, verb: usize) -> bool {
        self.graph
            .dependents(NodeRef::Terminal(verb))
            .any(|e| matches!(e.label.base(), "subj" | "subjx"))
    }

    pub fn legal(&self, t: &Transition) -> bool {
        match t {
            Transition::Shift => !self.queue.is_empty(),
            Transition::Reduce(n) => matches!(n, 1 | 2) && self.stack.len() >= *n as usize,
            Transition::Left(_) => self.arc_ok(self.s(2), self.s(1)),
            Transition::Right(_) => self.arc_ok(self.s(1), self.s(2)),
            // One insertion per anchor keeps the transition system finite.
            Transition::Empty(_) => self
                .s1_terminal()
                .is_some_and(|i| !self.graph.terminals.get(i + 1).is_some_and(|t| t.is_empty_category())),
            Transition::Pron => self
                .s1_terminal()
                .map(|v| self.graph.terminals[v].pos() == "V" && !self.has_subject(v))
                .unwrap_or(false),
            Transition::Phrase(z) => self.s1_terminal().is_some_and(|i| {
                match self.graph.subgraph_span(NodeRef::Terminal(i)) {
                    Ok((a, b)) => !self.graph.phrases.iter().any(|p| {
                        let same = p.start == a && p.end == b && &p.tag == z;
                        let crossing = p.start <= b && a <= p.end && !(p.start <= a && b <= p.end) && !(a <= p.start && p.end <= b);
                        same || crossing
                    }),
                    Err(_) => false,
                }
            }),
        }
    }

    /// Applies `t` to a copy of this configuration.
    pub fn apply(&self, t: &Transition) -> Result<Configuration> {
        let mut next = self.clone();
        next.apply_mut(t)?;
        Ok(next)
    }

    /// Applies `t` in place. On error the configuration is unchanged.
    pub fn apply_mut(&mut self, t: &Transition) -> Result<()> {
        if !self.legal(t) {
            return Err(Error::IllegalTransition(t.to_string()));
        }
        match t {
            Transition::Shift => {
                let q = self.queue.pop_front().expect("legal");
                self.stack.push(NodeRef::Terminal(q));
            }
            Transition::Reduce(n) => {
                let i = self.stack.len() - *n as usize;
                self.stack.remove(i);
            }
            Transition::Left(l) => {
                let (h, d) = (self.s(1).expect("legal"), self.s(2).expect("legal"));
                self.graph.edges.push(Edge::new(d, h, l.clone()));
            }
            Transition::Right(l) => {
                let (d, h) = (self.s(1).expect("legal"), self.s(2).expect("legal"));
                self.graph.edges.push(Edge::new(d, h, l.clone()));
            }
            Transition::Empty(p) => {
                let a = self.s1_terminal().expect("legal");
                let ec = EmptyCategory {
                    pos: p.clone(),
                    form: empty_category_form(p).to_string(),
                    features: Features::new(),
                };
                self.insert_after(a, ec);
            }
            Transition::Pron => {
                let v = self.s1_terminal().expect("legal");
                let t = &self.graph.terminals[v];
                let form = pronoun_form(t.feature(feat::PERSON), t.feature(feat::GENDER), t.feature(feat::NUMBER));
                let ec = EmptyCategory {
                    pos: "PRON".into(),
                    form: form.to_string(),
                    features: Features::new(),
                };
                let e = self.insert_after(v, ec);
                self.graph
                    .edges
                    .push(Edge::new(NodeRef::Terminal(e), NodeRef::Terminal(v), Label::rel("subj")));
            }
            Transition::Phrase(z) => {
                let i = self.s1_terminal().expect("legal");
                let (a, b) = self.graph.subgraph_span(NodeRef::Terminal(i))?;
                self.graph.phrases.push(PhraseNode::new(a, b, z.clone()));
                self.stack.push(NodeRef::Phrase(self.graph.phrases.len() - 1));
            }
        }
        Ok(())
    }

    /// Inserts an empty category right after terminal `a`, pushes it and
    /// returns its index.
    fn insert_after(&mut self, a: usize, ec: EmptyCategory) -> usize {
        let at = a + 1;
        self.graph.insert_terminal(at, Terminal::Empty(ec));
        for q in &mut self.queue {
            if *q >= at {
                *q += 1;
            }
        }
        for s in &mut self.stack {
            if let NodeRef::Terminal(i) = s {
                if *i >= at {
                    *i += 1;
                }
            }
        }
        self.stack.push(NodeRef::Terminal(at));
        at
    }
}
