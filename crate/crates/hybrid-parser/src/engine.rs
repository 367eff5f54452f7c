//! Greedy parsing loops for the integrated and multi-step pipelines.

use serde::Serialize;

use crate::conversion::{from_pure, LossDetail};
use crate::error::Result;
use crate::graph::{HybridGraph, MorphSegment, NodeRef};
use crate::learning::{Model, Pipeline};
use crate::transition::{step_budget, Configuration, Transition};

#[derive(Debug, Clone, Serialize)]
pub struct ParseReport {
    pub graph: HybridGraph,
    pub trace: Vec<Transition>,
    /// The model was cut off and the configuration drained so that the whole
    /// trace fits in the step budget.
    pub budget_exhausted: bool,
    /// Restoration errors and anything removed to keep the graph valid.
    pub losses: Vec<LossDetail>,
}

/// Parses with whichever pipeline the model was trained for.
pub fn parse(model: &Model, sentence: Vec<MorphSegment>) -> Result<ParseReport> {
    match model.pipeline {
        Pipeline::Integrated => parse_integrated(model, sentence),
        Pipeline::MultiStep => parse_multi_step(model, sentence),
    }
}

fn greedy(model: &Model, sentence: Vec<MorphSegment>, pure_only: bool) -> Result<ParseReport> {
    let budget = step_budget(sentence.len());
    let mut c = Configuration::initial(sentence)?;
    let mut trace = Vec::new();
    let mut budget_exhausted = false;
    while !c.is_terminal() {
        // Draining takes one step per stack item and two per queue item. A
        // model step grows that by at most one, so stop while it still fits.
        let drain = c.stack.len() + 2 * c.queue.len();
        if trace.len() + 1 + drain + 1 > budget {
            budget_exhausted = true;
            break;
        }
        let mut t = model.predict(&c);
        if pure_only && !t.is_dependency() {
            t = fallback(&c);
        }
        c.apply_mut(&t)?;
        trace.push(t);
    }
    while !c.is_terminal() {
        let t = fallback(&c);
        c.apply_mut(&t)?;
        trace.push(t);
    }
    let mut losses = Vec::new();
    let graph = repair(c.graph, &mut losses);
    Ok(ParseReport {
        graph,
        trace,
        budget_exhausted,
        losses,
    })
}

fn fallback(c: &Configuration) -> Transition {
    if c.legal(&Transition::Reduce(1)) {
        Transition::Reduce(1)
    } else {
        Transition::Shift
    }
}

/// Drops phrases until the graph validates.
fn repair(mut g: HybridGraph, losses: &mut Vec<LossDetail>) -> HybridGraph {
    loop {
        let violations = g.validate();
        let Some(v) = violations.first() else {
            return g;
        };
        let named: Vec<&str> = v.subject.split([' ', '-', '>']).collect();
        let culprit = (0..g.phrases.len())
            .rev()
            .find(|&p| named.contains(&NodeRef::Phrase(p).to_string().as_str()));
        match culprit.or_else(|| g.phrases.len().checked_sub(1)) {
            Some(p) => {
                losses.push(LossDetail {
                    item: NodeRef::Phrase(p).to_string(),
                    reason: format!("removed: {}", v.rule),
                });
                g.remove_phrase(p);
            }
            None => {
                losses.push(LossDetail {
                    item: v.subject.clone(),
                    reason: format!("unrepaired: {}", v.rule),
                });
                return g;
            }
        }
    }
}

/// Builds the hybrid graph directly with the full transition set.
pub fn parse_integrated(model: &Model, sentence: Vec<MorphSegment>) -> Result<ParseReport> {
    greedy(model, sentence, false)
}

/// Parses to a pure dependency graph, then restores phrases and elided nodes.
pub fn parse_multi_step(model: &Model, sentence: Vec<MorphSegment>) -> Result<ParseReport> {
    let pure = greedy(model, sentence, true)?;
    let restored = from_pure(&pure.graph);
    let mut losses = pure.losses;
    losses.extend(restored.errors);
    let graph = repair(restored.graph, &mut losses);
    Ok(ParseReport {
        graph,
        trace: pure.trace,
        budget_exhausted: pure.budget_exhausted,
        losses,
    })
}
