//! Static oracle: the canonical transition sequence that builds a gold graph.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::{Edge, HybridGraph, NodeRef, Terminal};
use crate::transition::{step_budget, Configuration, Transition};

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub sequence: Vec<Transition>,
    pub reachable: bool,
    /// Gold edges missing from the replayed graph.
    pub uncovered_edges: Vec<Edge>,
    /// Length of the prefix that precedes the first unrecoverable step.
    pub sound_prefix: usize,
    pub graph: HybridGraph,
}

/// Facts about the gold graph used by every rule.
struct GoldIndex<'a> {
    g: &'a HybridGraph,
    roots: Vec<Option<usize>>,
    dropped: Vec<bool>,
}

impl<'a> GoldIndex<'a> {
    fn new(g: &'a HybridGraph) -> GoldIndex<'a> {
        let roots = g.phrase_roots().into_iter().map(|r| r.ok()).collect();
        let dropped = (0..g.terminals.len())
            .map(|i| is_dropped_pronoun(g, i))
            .collect();
        GoldIndex { g, roots, dropped }
    }
}

/// An empty pronoun right after a verb that it is the subject of.
pub fn is_dropped_pronoun(g: &HybridGraph, i: usize) -> bool {
    let t = &g.terminals[i];
    if !t.is_empty_category() || t.pos() != "PRON" || i == 0 {
        return false;
    }
    match g.head_edge(NodeRef::Terminal(i)) {
        Some(e) => {
            e.head == NodeRef::Terminal(i - 1)
                && e.label.base() == "subj"
                && g.terminals[i - 1].pos() == "V"
                && g.dependents(NodeRef::Terminal(i)).next().is_none()
        }
        None => false,
    }
}

/// Correspondence between working nodes and gold nodes.
struct Alignment {
    terminals: Vec<Option<usize>>,
    phrases: Vec<Option<usize>>,
}

impl Alignment {
    fn derive(c: &Configuration, gold: &HybridGraph) -> Alignment {
        let gold_segments: Vec<usize> = (0..gold.terminals.len())
            .filter(|&i| !gold.terminals[i].is_empty_category())
            .collect();
        let mut terminals: Vec<Option<usize>> = Vec::with_capacity(c.graph.terminals.len());
        let mut ordinal = 0;
        for t in &c.graph.terminals {
            let m = match t {
                Terminal::Segment(_) => {
                    ordinal += 1;
                    gold_segments.get(ordinal - 1).copied()
                }
                Terminal::Empty(_) => match terminals.last() {
                    Some(Some(prev)) => Some(prev + 1)
                        .filter(|&g| g < gold.terminals.len() && gold.terminals[g].is_empty_category()),
                    _ => None,
                },
            };
            terminals.push(m);
        }
        let phrases = c
            .graph
            .phrases
            .iter()
            .map(|p| {
                let a = terminals.get(p.start).copied().flatten()?;
                let b = terminals.get(p.end).copied().flatten()?;
                gold.phrases
                    .iter()
                    .position(|q| q.start == a && q.end == b && q.tag == p.tag)
            })
            .collect();
        Alignment { terminals, phrases }
    }

    fn map(&self, n: NodeRef) -> Option<NodeRef> {
        match n {
            NodeRef::Terminal(i) => self.terminals.get(i).copied().flatten().map(NodeRef::Terminal),
            NodeRef::Phrase(p) => self.phrases.get(p).copied().flatten().map(NodeRef::Phrase),
        }
    }

    fn has_terminal(&self, g: usize) -> bool {
        self.terminals.contains(&Some(g))
    }

    fn has_phrase(&self, g: usize) -> bool {
        self.phrases.contains(&Some(g))
    }
}

struct View<'a, 'b> {
    c: &'b Configuration,
    gold: &'b GoldIndex<'a>,
    al: Alignment,
    built: BTreeSet<(NodeRef, NodeRef, String)>,
}

impl<'a, 'b> View<'a, 'b> {
    fn new(c: &'b Configuration, gold: &'b GoldIndex<'a>) -> View<'a, 'b> {
        let al = Alignment::derive(c, gold.g);
        let built = c
            .graph
            .edges
            .iter()
            .filter_map(|e| Some((al.map(e.dependent)?, al.map(e.head)?, e.label.to_string())))
            .collect();
        View { c, gold, al, built }
    }

    fn is_built(&self, e: &Edge) -> bool {
        self.built
            .contains(&(e.dependent, e.head, e.label.to_string()))
    }

    fn gold_edge(&self, dep: NodeRef, head: NodeRef) -> Option<&'a Edge> {
        self.gold
            .g
            .edges
            .iter()
            .find(|e| e.dependent == dep && e.head == head)
    }

    /// Gold node currently on the stack.
    fn on_stack(&self, gn: NodeRef) -> bool {
        self.c.stack.iter().any(|&s| self.al.map(s) == Some(gn))
    }

    /// Everything the gold graph attaches to this node has been built.
    fn complete(&self, n: NodeRef) -> bool {
        let Some(gn) = self.al.map(n) else {
            return true;
        };
        let g = self.gold.g;
        if g.edges.iter().any(|e| e.touches(gn) && !self.is_built(e)) {
            return false;
        }
        if let NodeRef::Terminal(t) = gn {
            let owns_pending_phrase = self
                .gold
                .roots
                .iter()
                .enumerate()
                .any(|(p, r)| *r == Some(t) && !self.al.has_phrase(p));
            if owns_pending_phrase {
                return false;
            }
            let next = t + 1;
            if next < g.terminals.len() && g.terminals[next].is_empty_category() && !self.al.has_terminal(next) {
                return false;
            }
        }
        true
    }

    fn arc(&self) -> Option<Transition> {
        let (s1, s2) = (self.c.s(1)?, self.c.s(2)?);
        let (g1, g2) = (self.al.map(s1)?, self.al.map(s2)?);
        if let Some(e) = self.gold_edge(g1, g2).filter(|e| !self.is_built(e)) {
            return Some(Transition::Right(e.label.clone()));
        }
        if let Some(e) = self.gold_edge(g2, g1).filter(|e| !self.is_built(e)) {
            // The head waits for its dependents that are still to the right.
            let waiting = self.gold.g.edges.iter().any(|o| {
                o.head == g1 && o.dependent != g2 && !self.is_built(o) && !self.on_stack(o.dependent)
            });
            if !waiting {
                return Some(Transition::Left(e.label.clone()));
            }
        }
        None
    }

    fn phrase(&self) -> Option<Transition> {
        let NodeRef::Terminal(i) = self.c.s(1)? else {
            return None;
        };
        let NodeRef::Terminal(gi) = self.al.map(NodeRef::Terminal(i))? else {
            return None;
        };
        let y: BTreeSet<usize> = self
            .c
            .graph
            .yield_of(NodeRef::Terminal(i))
            .into_iter()
            .map(|w| self.al.terminals[w])
            .collect::<Option<_>>()?;
        self.gold
            .roots
            .iter()
            .enumerate()
            .filter(|(p, r)| **r == Some(gi) && !self.al.has_phrase(*p))
            .map(|(p, _)| &self.gold.g.phrases[p])
            .find(|ph| y.len() == ph.len() && y.iter().all(|&w| ph.contains(w)))
            .map(|ph| Transition::Phrase(ph.tag.clone()))
    }

    fn pending_empty_after_s1(&self) -> Option<(usize, bool)> {
        let NodeRef::Terminal(gi) = self.al.map(self.c.s(1)?)? else {
            return None;
        };
        let next = gi + 1;
        let g = self.gold.g;
        (next < g.terminals.len() && g.terminals[next].is_empty_category() && !self.al.has_terminal(next))
            .then(|| (next, self.gold.dropped[next]))
    }

    fn pron(&self) -> Option<Transition> {
        let (e, dropped) = self.pending_empty_after_s1()?;
        if !dropped {
            return None;
        }
        let verb = NodeRef::Terminal(e - 1);
        let rest_done = self
            .gold
            .g
            .edges
            .iter()
            .filter(|o| o.head == verb && o.dependent != NodeRef::Terminal(e))
            .all(|o| self.is_built(o));
        (self.c.queue.is_empty() || rest_done).then_some(Transition::Pron)
    }

    fn empty(&self) -> Option<Transition> {
        let (e, dropped) = self.pending_empty_after_s1()?;
        (!dropped).then(|| Transition::Empty(self.gold.g.terminals[e].pos().to_string()))
    }

    fn s1_s3_edge(&self) -> bool {
        let (Some(s1), Some(s3)) = (self.c.s(1), self.c.s(3)) else {
            return false;
        };
        let (Some(g1), Some(g3)) = (self.al.map(s1), self.al.map(s3)) else {
            return false;
        };
        [self.gold_edge(g1, g3), self.gold_edge(g3, g1)]
            .into_iter()
            .flatten()
            .any(|e| !self.is_built(e))
    }

    fn next(&self) -> Transition {
        let c = self.c;
        let legal = |t: Transition| c.legal(&t).then_some(t);
        if c.stack.is_empty() {
            return Transition::Shift;
        }
        if let Some(t) = self.arc().and_then(legal) {
            return t;
        }
        if self.complete(c.s(1).expect("non-empty")) {
            return Transition::Reduce(1);
        }
        if c.s(2).is_some_and(|s2| self.complete(s2)) {
            return Transition::Reduce(2);
        }
        if let Some(t) = self.phrase().and_then(legal) {
            return t;
        }
        if let Some(t) = self.pron().and_then(legal) {
            return t;
        }
        if let Some(t) = self.empty().and_then(legal) {
            return t;
        }
        if !c.queue.is_empty() {
            return Transition::Shift;
        }
        if self.s1_s3_edge() {
            return Transition::Reduce(2);
        }
        Transition::Reduce(1)
    }
}

/// The oracle's choice in configuration `c` for the gold graph.
pub fn oracle_next(c: &Configuration, gold: &HybridGraph) -> Transition {
    let idx = GoldIndex::new(gold);
    View::new(c, &idx).next()
}

/// Runs the oracle from the initial configuration until termination or the
/// step budget runs out.
pub fn oracle_sequence(gold: &HybridGraph) -> Result<OracleOutcome> {
    let idx = GoldIndex::new(gold);
    let sentence = gold.segments().cloned().collect();
    let mut c = Configuration::initial(sentence)?;
    let budget = step_budget(gold.terminals.len());
    let mut seq = Vec::new();
    let mut sound_prefix = None;
    while !c.is_terminal() && seq.len() < budget {
        let view = View::new(&c, &idx);
        let t = view.next();
        let removed = match t {
            Transition::Reduce(1) => c.s(1),
            Transition::Reduce(2) => c.s(2),
            _ => None,
        };
        if sound_prefix.is_none() && removed.is_some_and(|n| !view.complete(n)) {
            sound_prefix = Some(seq.len());
        }
        c.apply_mut(&t)?;
        seq.push(t);
    }
    let view = View::new(&c, &idx);
    let uncovered_edges: Vec<Edge> = gold
        .edges
        .iter()
        .filter(|e| !view.is_built(e))
        .cloned()
        .collect();
    let complete = c.is_terminal()
        && uncovered_edges.is_empty()
        && c.graph.edges.len() == gold.edges.len()
        && c.graph.terminals.len() == gold.terminals.len()
        && c.graph.phrases.len() == gold.phrases.len()
        && view.al.phrases.iter().all(Option::is_some)
        && view.al.terminals.iter().all(Option::is_some);
    let reachable = complete
        && c.graph
            .terminals
            .iter()
            .zip(&gold.terminals)
            .all(|(a, b)| a.pos() == b.pos() && a.form() == b.form());
    Ok(OracleOutcome {
        sound_prefix: sound_prefix.unwrap_or(seq.len()),
        sequence: seq,
        reachable,
        uncovered_edges,
        graph: c.graph,
    })
}

/// Replays a transition list from the sentence of `gold`.
pub fn replay(gold: &HybridGraph, seq: &[Transition]) -> Result<Configuration> {
    let mut c = Configuration::initial(gold.segments().cloned().collect())?;
    for t in seq {
        c.apply_mut(t)?;
    }
    Ok(c)
}
