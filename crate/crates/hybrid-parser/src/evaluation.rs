//! LAS, Parseval and ELAS, plus k-fold cross-validation.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine;
use crate::error::{Error, Result};
use crate::graph::{HybridGraph, NodeRef, PhraseNode, Terminal};
use crate::learning::{self, FeatureSet, Pipeline, TrainConfig};

/// Counts behind a precision/recall/F1 triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalReport {
    pub true_positives: u64,
    pub gold_count: u64,
    pub predicted_count: u64,
}

impl EvalReport {
    pub fn new(true_positives: u64, gold_count: u64, predicted_count: u64) -> EvalReport {
        EvalReport {
            true_positives,
            gold_count,
            predicted_count,
        }
    }

    /// TP / predicted, or 1 when nothing was predicted.
    pub fn precision(&self) -> Ratio<u64> {
        ratio_or_one(self.true_positives, self.predicted_count)
    }

    /// TP / gold, or 1 when there is nothing to find.
    pub fn recall(&self) -> Ratio<u64> {
        ratio_or_one(self.true_positives, self.gold_count)
    }

    /// Harmonic mean, 0 when precision and recall are both 0.
    pub fn f1(&self) -> Ratio<u64> {
        let (p, r) = (self.precision(), self.recall());
        let sum = p + r;
        if sum == Ratio::from_integer(0) {
            return Ratio::from_integer(0);
        }
        Ratio::from_integer(2) * p * r / sum
    }

    pub fn add(&mut self, other: &EvalReport) {
        self.true_positives += other.true_positives;
        self.gold_count += other.gold_count;
        self.predicted_count += other.predicted_count;
    }

    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("precision".into(), format!("{:.6}", to_f64(self.precision()))),
            ("recall".into(), format!("{:.6}", to_f64(self.recall()))),
            ("f1".into(), format!("{:.6}", to_f64(self.f1()))),
            ("tp".into(), self.true_positives.to_string()),
            ("gold".into(), self.gold_count.to_string()),
            ("pred".into(), self.predicted_count.to_string()),
        ]
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>10} {:>10}", "precision", "recall", "f1")?;
        writeln!(
            f,
            "{:>10.2} {:>10.2} {:>10.2}",
            100.0 * to_f64(self.precision()),
            100.0 * to_f64(self.recall()),
            100.0 * to_f64(self.f1())
        )
    }
}

fn ratio_or_one(num: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::new(num, den)
    }
}

pub fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Options for vertex equivalence.
#[derive(Debug, Clone, Copy, Default)]
pub struct Matching {
    /// Also require empty categories to follow the same segment.
    pub strict_empty_position: bool,
}

fn check_segments(gold: &HybridGraph, predicted: &HybridGraph) -> Result<()> {
    let g: Vec<&str> = gold.segments().map(|s| s.form.as_str()).collect();
    let p: Vec<&str> = predicted.segments().map(|s| s.form.as_str()).collect();
    if g != p {
        return Err(Error::Mismatch(format!(
            "gold has segments [{}], prediction has [{}]",
            g.join(" "),
            p.join(" ")
        )));
    }
    Ok(())
}

/// Equivalence keys for every node of a graph.
fn check_references(g: &HybridGraph) -> Result<()> {
    let bad_phrase = g.phrases.iter().find(|p| p.start > p.end || p.end >= g.terminals.len());
    if let Some(p) = bad_phrase {
        return Err(Error::InvalidReference(format!("{}[{}-{}]", p.tag, p.start + 1, p.end + 1)));
    }
    match g.edges.iter().flat_map(|e| [e.dependent, e.head]).find(|&n| !g.contains(n)) {
        Some(n) => Err(Error::InvalidReference(n.to_string())),
        None => Ok(()),
    }
}

struct Keys {
    terminals: Vec<String>,
    phrases: Vec<String>,
}

impl Keys {
    fn new(g: &HybridGraph, m: Matching) -> Keys {
        let mut ordinal = 0;
        let terminals: Vec<String> = g
            .terminals
            .iter()
            .map(|t| match t {
                Terminal::Segment(_) => {
                    ordinal += 1;
                    format!("s{ordinal}")
                }
                Terminal::Empty(e) if m.strict_empty_position => {
                    format!("e{}:{}@{ordinal}", e.pos, e.form)
                }
                Terminal::Empty(e) => format!("e{}:{}", e.pos, e.form),
            })
            .collect();
        let phrases = g
            .phrases
            .iter()
            .map(|p| format!("{}[{}]", p.tag, terminals[p.start..=p.end].join(",")))
            .collect();
        Keys { terminals, phrases }
    }

    fn node(&self, n: NodeRef) -> &str {
        match n {
            NodeRef::Terminal(i) => &self.terminals[i],
            NodeRef::Phrase(p) => &self.phrases[p],
        }
    }
}

fn edge_keys(g: &HybridGraph, m: Matching) -> BTreeMap<(String, String, String), u64> {
    let keys = Keys::new(g, m);
    let mut out = BTreeMap::new();
    for e in &g.edges {
        let k = (
            keys.node(e.dependent).to_string(),
            keys.node(e.head).to_string(),
            e.label.to_string(),
        );
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

fn overlap<K: Ord>(gold: &BTreeMap<K, u64>, predicted: &BTreeMap<K, u64>) -> u64 {
    gold.iter()
        .map(|(k, n)| (*n).min(predicted.get(k).copied().unwrap_or(0)))
        .sum()
}

/// Edge-level scores under vertex equivalence.
pub fn elas(gold: &HybridGraph, predicted: &HybridGraph) -> Result<EvalReport> {
    elas_with(gold, predicted, Matching::default())
}

pub fn elas_with(gold: &HybridGraph, predicted: &HybridGraph, m: Matching) -> Result<EvalReport> {
    check_segments(gold, predicted)?;
    check_references(gold)?;
    check_references(predicted)?;
    let g = edge_keys(gold, m);
    let p = edge_keys(predicted, m);
    Ok(EvalReport::new(
        overlap(&g, &p),
        gold.edges.len() as u64,
        predicted.edges.len() as u64,
    ))
}

/// Fraction of headed gold segments with the right head and label.
pub fn las(gold: &HybridGraph, predicted: &HybridGraph) -> Result<Ratio<u64>> {
    Ok(las_report(gold, predicted)?.recall())
}

fn las_report(gold: &HybridGraph, predicted: &HybridGraph) -> Result<EvalReport> {
    check_segments(gold, predicted)?;
    let m = Matching::default();
    let (gk, pk) = (Keys::new(gold, m), Keys::new(predicted, m));
    let heads = |g: &HybridGraph, k: &Keys| -> BTreeMap<String, (String, String)> {
        g.edges
            .iter()
            .filter(|e| matches!(e.dependent, NodeRef::Terminal(i) if !g.terminals[i].is_empty_category()))
            .map(|e| {
                (
                    k.node(e.dependent).to_string(),
                    (k.node(e.head).to_string(), e.label.to_string()),
                )
            })
            .collect()
    };
    let (gh, ph) = (heads(gold, &gk), heads(predicted, &pk));
    let tp = gh.iter().filter(|(d, h)| ph.get(*d) == Some(h)).count() as u64;
    Ok(EvalReport::new(tp, gh.len() as u64, ph.len() as u64))
}

/// Labeled bracket precision and recall.
pub fn parseval(gold: &[PhraseNode], predicted: &[PhraseNode]) -> (Ratio<u64>, Ratio<u64>) {
    let r = parseval_report(gold, predicted);
    (r.precision(), r.recall())
}

pub fn parseval_report(gold: &[PhraseNode], predicted: &[PhraseNode]) -> EvalReport {
    let count = |ps: &[PhraseNode]| {
        let mut m = BTreeMap::new();
        for p in ps {
            *m.entry((p.start, p.end, p.tag.clone())).or_insert(0u64) += 1;
        }
        m
    };
    let (g, p) = (count(gold), count(predicted));
    EvalReport::new(overlap(&g, &p), gold.len() as u64, predicted.len() as u64)
}

/// Which score a corpus evaluation reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Elas,
    Las,
    Parseval,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Metric, String> {
        match s {
            "elas" => Ok(Metric::Elas),
            "las" => Ok(Metric::Las),
            "parseval" => Ok(Metric::Parseval),
            _ => Err(format!("unknown metric {s:?}")),
        }
    }
}

/// Sums counts over aligned graph pairs.
pub fn evaluate_corpus(gold: &[HybridGraph], predicted: &[HybridGraph], metric: Metric) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Mismatch(format!(
            "{} gold graphs but {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    let mut total = EvalReport::default();
    for (k, (g, p)) in gold.iter().zip(predicted).enumerate() {
        let r = match metric {
            Metric::Elas => elas(g, p),
            Metric::Las => las_report(g, p),
            Metric::Parseval => check_segments(g, p).map(|_| {
                // Spans are compared over segments only, so empty categories
                // on either side do not shift them.
                parseval_report(&segment_spans(g), &segment_spans(p))
            }),
        }
        .map_err(|e| Error::Mismatch(format!("graph {}: {e}", k + 1)))?;
        total.add(&r);
    }
    Ok(total)
}

fn segment_spans(g: &HybridGraph) -> Vec<PhraseNode> {
    let mut ordinal = Vec::with_capacity(g.terminals.len());
    let mut n = 0;
    for t in &g.terminals {
        ordinal.push(n);
        if !t.is_empty_category() {
            n += 1;
        }
    }
    g.phrases
        .iter()
        .map(|p| {
            let end = (p.start..=p.end)
                .rev()
                .find(|&i| !g.terminals[i].is_empty_category())
                .map(|i| ordinal[i])
                .unwrap_or(ordinal[p.start]);
            PhraseNode::new(ordinal[p.start], end, p.tag.clone())
        })
        .collect()
}

/// Options for [`cross_validate`].
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub folds: usize,
    pub feature_set: FeatureSet,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub epochs: usize,
}

/// Shuffles with `seed`, slices into contiguous folds, trains on each
/// complement and scores the pooled counts once.
pub fn cross_validate(corpus: &[HybridGraph], cv: &CrossValidation) -> Result<EvalReport> {
    Ok(cross_validate_folds(corpus, cv)?
        .iter()
        .fold(EvalReport::default(), |mut acc, r| {
            acc.add(r);
            acc
        }))
}

/// Per-fold reports, in fold order.
pub fn cross_validate_folds(corpus: &[HybridGraph], cv: &CrossValidation) -> Result<Vec<EvalReport>> {
    if cv.folds < 2 {
        return Err(Error::Training("at least two folds are needed".into()));
    }
    if corpus.len() < cv.folds {
        return Err(Error::Training(format!(
            "{} folds requested for {} graphs",
            cv.folds,
            corpus.len()
        )));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cv.seed));
    let bounds: Vec<(usize, usize)> = (0..cv.folds)
        .map(|k| (k * corpus.len() / cv.folds, (k + 1) * corpus.len() / cv.folds))
        .collect();
    bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let train: Vec<HybridGraph> = order[..lo]
                .iter()
                .chain(&order[hi..])
                .map(|&i| corpus[i].clone())
                .collect();
            let config = TrainConfig {
                feature_set: cv.feature_set,
                pipeline: cv.pipeline,
                seed: cv.seed,
                epochs: cv.epochs,
            };
            let model = learning::train(&train, &config)?;
            let mut report = EvalReport::default();
            for &i in &order[lo..hi] {
                let gold = &corpus[i];
                let segments = gold.segments().cloned().collect();
                let parsed = engine::parse(&model, segments)?;
                report.add(&elas(gold, &parsed.graph)?);
            }
            Ok(report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        let r = EvalReport::new(0, 0, 0);
        assert_eq!(r.precision(), Ratio::from_integer(1));
        assert_eq!(r.recall(), Ratio::from_integer(1));
        assert_eq!(r.f1(), Ratio::from_integer(1));
        let r = EvalReport::new(0, 3, 2);
        assert_eq!(r.f1(), Ratio::from_integer(0));
        let r = EvalReport::new(3, 4, 3);
        assert_eq!(r.recall(), Ratio::new(3, 4));
        assert_eq!(r.f1(), Ratio::new(6, 7));
    }

    #[test]
    fn parseval_label_mismatch() {
        let gold = [PhraseNode::new(0, 2, "VS"), PhraseNode::new(3, 7, "NS")];
        let pred = [PhraseNode::new(0, 2, "VS"), PhraseNode::new(3, 7, "S")];
        assert_eq!(parseval(&gold, &pred), (Ratio::new(1, 2), Ratio::new(1, 2)));
        assert_eq!(parseval(&gold, &[]), (Ratio::from_integer(1), Ratio::from_integer(0)));
        assert_eq!(parseval(&gold, &gold), (Ratio::from_integer(1), Ratio::from_integer(1)));
    }
}
