//! Features, the averaged perceptron and the per-POS classifier bank.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conversion::to_pure;
use crate::error::{Error, Result};
use crate::graph::{feat, HybridGraph, NodeRef};
use crate::oracle::oracle_sequence;
use crate::transition::{Configuration, Transition};
use crate::vocab::Vocabulary;

pub const MODEL_VERSION: u32 = 1;

/// Static feature groups, each a superset of the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    Pos,
    Morph6,
    Morph9,
    Lemma,
    Phi,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 5] = [
        FeatureSet::Pos,
        FeatureSet::Morph6,
        FeatureSet::Morph9,
        FeatureSet::Lemma,
        FeatureSet::Phi,
    ];
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Pos => "pos",
            FeatureSet::Morph6 => "morph6",
            FeatureSet::Morph9 => "morph9",
            FeatureSet::Lemma => "lemma",
            FeatureSet::Phi => "phi",
        })
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<FeatureSet, String> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown feature set {s:?}"))
    }
}

/// Which parser the model drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pipeline {
    /// Full transition set over hybrid graphs.
    Integrated,
    /// Pure dependency parsing followed by restoration.
    MultiStep,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Integrated => "integrated",
            Pipeline::MultiStep => "multistep",
        })
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Pipeline, String> {
        match s {
            "integrated" => Ok(Pipeline::Integrated),
            "multistep" | "multi-step" => Ok(Pipeline::MultiStep),
            _ => Err(format!("unknown pipeline {s:?}")),
        }
    }
}

/// Sorted set of binary predicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector(Vec<String>);

impl FeatureVector {
    fn from_set(set: BTreeSet<String>) -> FeatureVector {
        FeatureVector(set.into_iter().collect())
    }

    pub fn contains(&self, f: &str) -> bool {
        self.0.binary_search_by(|x| x.as_str().cmp(f)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_superset(&self, other: &FeatureVector) -> bool {
        other.iter().all(|f| self.contains(f))
    }
}

const COPULA_GROUP: &[&str] = &["kaAn"];

fn static_features(c: &Configuration, n: Option<NodeRef>, set: FeatureSet) -> Vec<String> {
    let g = &c.graph;
    let mut out = Vec::new();
    let Some(n) = n else {
        out.push("absent".to_string());
        return out;
    };
    let i = match n {
        NodeRef::Phrase(p) => {
            out.push(format!("phrase={}", g.phrases[p].tag));
            return out;
        }
        NodeRef::Terminal(i) => i,
    };
    let t = &g.terminals[i];
    out.push(format!("pos={}", t.pos()));
    if t.is_empty_category() {
        out.push("empty".to_string());
    }
    let mut push = |key: &str| {
        if let Some(v) = t.feature(key) {
            out.push(format!("{key}={v}"));
        }
    };
    if set >= FeatureSet::Morph6 {
        for key in [feat::VOICE, feat::MOOD, feat::CASE, feat::STATE] {
            push(key);
        }
    }
    if set >= FeatureSet::Morph9 {
        push(feat::SEG_TYPE);
        let pron_type = t.feature(feat::PRON_TYPE).or_else(|| {
            let on_verb = i > 0 && g.terminals[i - 1].pos() == "V";
            (t.pos() == "PRON" && t.feature(feat::SEG_TYPE) == Some("suffix") && on_verb).then_some("object")
        });
        if let Some(v) = pron_type {
            out.push(format!("pronType={v}"));
        }
        if t.feature(feat::SP).is_some_and(|v| COPULA_GROUP.contains(&v)) {
            out.push("copula".to_string());
        }
    }
    if set >= FeatureSet::Lemma {
        if let Some(l) = t.lemma() {
            out.push(format!("lem={l}"));
        }
    }
    if set >= FeatureSet::Phi {
        for key in [feat::PERSON, feat::GENDER, feat::NUMBER] {
            if let Some(v) = t.feature(key) {
                out.push(format!("{key}={v}"));
            }
        }
    }
    out
}

fn edge_feature(c: &Configuration, a: Option<NodeRef>, b: Option<NodeRef>) -> Option<String> {
    let (a, b) = (a?, b?);
    c.graph.edges.iter().find_map(|e| {
        if e.dependent == a && e.head == b {
            Some(format!("dep:{}", e.label))
        } else if e.dependent == b && e.head == a {
            Some(format!("head:{}", e.label))
        } else {
            None
        }
    })
}

/// Binary predicates describing a configuration.
pub fn extract_features(c: &Configuration, set: FeatureSet) -> FeatureVector {
    FeatureVector::from_set(predicates(c, set).0)
}

/// The predicates of [`extract_features`] plus pairwise conjunctions of the
/// static predicates of s1 with those of s2 and of q1. This is what the
/// classifiers see.
pub fn classifier_features(c: &Configuration, set: FeatureSet) -> FeatureVector {
    let (mut out, statics) = predicates(c, set);
    for (other, fs) in [("s2", &statics[1]), ("q1", &statics[3])] {
        for x in &statics[0] {
            for y in fs {
                out.insert(format!("s1:{x}&{other}:{y}"));
            }
        }
    }
    FeatureVector::from_set(out)
}

fn predicates(c: &Configuration, set: FeatureSet) -> (BTreeSet<String>, [Vec<String>; 4]) {
    let slots = [
        ("s1", c.s(1)),
        ("s2", c.s(2)),
        ("s3", c.s(3)),
        ("q1", c.q(1).map(NodeRef::Terminal)),
    ];
    let mut out = BTreeSet::new();
    let statics = slots.map(|(name, n)| {
        let fs = static_features(c, n, set);
        for f in &fs {
            out.insert(format!("{name}:{f}"));
        }
        fs
    });
    // Queue nodes never have heads or dependents.
    for (name, n) in &slots[..3] {
        let Some(n) = *n else { continue };
        for e in c.graph.dependents(n) {
            out.insert(format!("{name}:deprel({})", e.label));
        }
        match c.graph.head_edge(n) {
            Some(e) => {
                out.insert(format!("{name}:head={}", e.label));
            }
            None => {
                out.insert(format!("{name}:isroot"));
            }
        }
    }
    for (a, b) in [(0, 1), (0, 3), (1, 2)] {
        if let Some(f) = edge_feature(c, slots[a].1, slots[b].1) {
            out.insert(format!("edge({},{})={f}", slots[a].0, slots[b].0));
        }
    }
    (out, statics)
}

/// Classifier partition for a configuration, keyed by POS(s1).
pub fn partition_key(c: &Configuration) -> String {
    match c.s(1) {
        None => "∅".to_string(),
        Some(NodeRef::Terminal(i)) => c.graph.terminals[i].pos().to_string(),
        Some(NodeRef::Phrase(p)) => format!("phrase:{}", c.graph.phrases[p].tag),
    }
}

/// One training example with interned features.
#[derive(Debug, Clone)]
pub struct Example {
    pub features: Vec<u32>,
    pub label: u16,
    /// Classes that were legal in the configuration.
    pub legal: Vec<u16>,
}

/// A trainable multiclass scorer over interned features.
pub trait Classifier {
    fn fit(&mut self, examples: &[Example], classes: usize, epochs: usize, seed: u64);
    fn scores(&self, features: &[u32], classes: usize) -> Vec<i64>;
}

/// Averaged perceptron with integer weights. The stored weight of each
/// feature is its sum over all updates steps, which ranks classes exactly as
/// the average does.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AveragedPerceptron {
    pub weights: BTreeMap<u32, Vec<(u16, i64)>>,
}

struct Slot {
    class: u16,
    weight: i64,
    total: i64,
    stamp: u64,
}

impl Classifier for AveragedPerceptron {
    fn fit(&mut self, examples: &[Example], classes: usize, epochs: usize, seed: u64) {
        let mut table: HashMap<u32, Vec<Slot>> = HashMap::new();
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut clock: u64 = 0;
        let mut scores = vec![0i64; classes];
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &k in &order {
                clock += 1;
                let ex = &examples[k];
                for s in scores.iter_mut() {
                    *s = 0;
                }
                for f in &ex.features {
                    if let Some(slots) = table.get(f) {
                        for s in slots {
                            scores[s.class as usize] += s.weight;
                        }
                    }
                }
                let guess = ex
                    .legal
                    .iter()
                    .copied()
                    .max_by_key(|&c| (scores[c as usize], std::cmp::Reverse(c)))
                    .unwrap_or(ex.label);
                if guess == ex.label {
                    continue;
                }
                for f in &ex.features {
                    let slots = table.entry(*f).or_default();
                    for (class, delta) in [(ex.label, 1), (guess, -1)] {
                        let s = match slots.iter_mut().position(|s| s.class == class) {
                            Some(p) => &mut slots[p],
                            None => {
                                slots.push(Slot {
                                    class,
                                    weight: 0,
                                    total: 0,
                                    stamp: clock,
                                });
                                slots.last_mut().unwrap()
                            }
                        };
                        s.total += s.weight * (clock - s.stamp) as i64;
                        s.stamp = clock;
                        s.weight += delta;
                    }
                }
            }
        }
        self.weights.clear();
        for (f, slots) in table {
            let mut row: Vec<(u16, i64)> = slots
                .into_iter()
                .map(|s| (s.class, s.total + s.weight * (clock - s.stamp) as i64))
                .filter(|&(_, w)| w != 0)
                .collect();
            row.sort();
            if !row.is_empty() {
                self.weights.insert(f, row);
            }
        }
    }

    fn scores(&self, features: &[u32], classes: usize) -> Vec<i64> {
        let mut out = vec![0i64; classes];
        for f in features {
            if let Some(row) = self.weights.get(f) {
                for &(c, w) in row {
                    out[c as usize] += w;
                }
            }
        }
        out
    }
}

/// The kernel machine settings, kept so another classifier can use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub penalty: f64,
    pub termination: f64,
    pub kernel_gamma: f64,
    pub kernel_r: f64,
    pub kernel_degree: u32,
}

impl Default for Hyperparameters {
    fn default() -> Hyperparameters {
        Hyperparameters {
            penalty: 0.5,
            termination: 1.0,
            kernel_gamma: 0.2,
            kernel_r: 0.0,
            kernel_degree: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingStats {
    pub graphs_used: usize,
    pub graphs_excluded: usize,
    pub pairs: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub version: u32,
    pub feature_set: FeatureSet,
    pub pipeline: Pipeline,
    pub vocabulary: String,
    pub hyperparameters: Hyperparameters,
    pub epochs: usize,
    pub seed: u64,
    pub transitions: Vec<Transition>,
    pub features: Vec<String>,
    pub partitions: BTreeMap<String, AveragedPerceptron>,
    pub backoff: AveragedPerceptron,
    pub stats: TrainingStats,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub feature_set: FeatureSet,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            feature_set: FeatureSet::Lemma,
            pipeline: Pipeline::Integrated,
            seed: 0,
            epochs: 10,
        }
    }
}

struct RawPair {
    partition: String,
    features: FeatureVector,
    label: Transition,
    config: Configuration,
}

fn oracle_pairs(gold: &HybridGraph, set: FeatureSet) -> Option<Vec<RawPair>> {
    let outcome = oracle_sequence(gold).ok()?;
    if !outcome.reachable {
        return None;
    }
    let mut c = Configuration::initial(gold.segments().cloned().collect()).ok()?;
    let mut out = Vec::with_capacity(outcome.sequence.len());
    for t in outcome.sequence {
        out.push(RawPair {
            partition: partition_key(&c),
            features: classifier_features(&c, set),
            label: t.clone(),
            config: c.clone(),
        });
        c.apply_mut(&t).ok()?;
    }
    Some(out)
}

/// Training graphs for a pipeline: hybrid graphs as they are, or their pure
/// conversions with lossy ones left out.
pub fn training_graphs(corpus: &[HybridGraph], pipeline: Pipeline) -> Vec<Option<HybridGraph>> {
    match pipeline {
        Pipeline::Integrated => corpus.iter().cloned().map(Some).collect(),
        Pipeline::MultiStep => corpus
            .par_iter()
            .map(|g| match to_pure(g) {
                Ok((pure, report)) if !report.lossy() => Some(pure),
                _ => None,
            })
            .collect(),
    }
}

/// Fits a model from oracle transitions over `corpus`.
pub fn train(corpus: &[HybridGraph], config: &TrainConfig) -> Result<Model> {
    let graphs = training_graphs(corpus, config.pipeline);
    let per_graph: Vec<Option<Vec<RawPair>>> = graphs
        .par_iter()
        .map(|g| g.as_ref().and_then(|g| oracle_pairs(g, config.feature_set)))
        .collect();
    let mut stats = TrainingStats::default();
    let mut pairs = Vec::new();
    for p in per_graph {
        match p {
            Some(p) => {
                stats.graphs_used += 1;
                pairs.extend(p);
            }
            None => stats.graphs_excluded += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::Training("no usable graphs in the corpus".into()));
    }

    let transitions: Vec<Transition> = pairs
        .iter()
        .map(|p| p.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if transitions.len() > u16::MAX as usize {
        return Err(Error::Training("too many transition classes".into()));
    }
    let class_of: HashMap<&Transition, u16> =
        transitions.iter().enumerate().map(|(i, t)| (t, i as u16)).collect();

    let mut features = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut examples: BTreeMap<String, Vec<Example>> = BTreeMap::new();
    let legal_sets: Vec<Vec<u16>> = pairs
        .par_iter()
        .map(|p| {
            transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| p.config.legal(t))
                .map(|(i, _)| i as u16)
                .collect()
        })
        .collect();
    for (p, legal) in pairs.into_iter().zip(legal_sets) {
        let ids = p
            .features
            .iter()
            .map(|f| {
                *index.entry(f.to_string()).or_insert_with(|| {
                    features.push(f.to_string());
                    (features.len() - 1) as u32
                })
            })
            .collect();
        *stats.pairs.entry(p.partition.clone()).or_insert(0) += 1;
        examples.entry(p.partition).or_default().push(Example {
            features: ids,
            label: class_of[&p.label],
            legal,
        });
    }

    let classes = transitions.len();
    let mut jobs: Vec<(Option<&String>, Vec<&Example>)> =
        examples.iter().map(|(k, v)| (Some(k), v.iter().collect())).collect();
    jobs.push((None, examples.values().flatten().collect()));
    let mut fitted: Vec<(Option<String>, AveragedPerceptron)> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(k, (name, exs))| {
            let owned: Vec<Example> = exs.into_iter().cloned().collect();
            let mut clf = AveragedPerceptron::default();
            clf.fit(&owned, classes, config.epochs, config.seed.wrapping_add(k as u64));
            (name.cloned(), clf)
        })
        .collect();
    let backoff = fitted.pop().expect("backoff job").1;
    let partitions = fitted
        .into_iter()
        .map(|(k, c)| (k.expect("partition name"), c))
        .collect();

    Ok(Model {
        version: MODEL_VERSION,
        feature_set: config.feature_set,
        pipeline: config.pipeline,
        vocabulary: Vocabulary::quranic().fingerprint(),
        hyperparameters: Hyperparameters::default(),
        epochs: config.epochs,
        seed: config.seed,
        transitions,
        features,
        partitions,
        backoff,
        stats,
        index,
    })
}

impl Model {
    fn rebuild_index(&mut self) {
        self.index = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
    }

    /// Transitions ranked best first for a configuration.
    pub fn ranked(&self, c: &Configuration) -> Vec<(Transition, i64)> {
        let fv = classifier_features(c, self.feature_set);
        let ids: Vec<u32> = fv.iter().filter_map(|f| self.index.get(f).copied()).collect();
        let clf = self.partitions.get(&partition_key(c)).unwrap_or(&self.backoff);
        let scores = clf.scores(&ids, self.transitions.len());
        let mut ranked: Vec<(usize, i64)> = scores.into_iter().enumerate().collect();
        ranked.sort_by_key(|&(i, s)| (std::cmp::Reverse(s), i));
        ranked
            .into_iter()
            .map(|(i, s)| (self.transitions[i].clone(), s))
            .collect()
    }

    /// The best legal transition, falling back to `REDUCE(1)` then `SHIFT`.
    pub fn predict(&self, c: &Configuration) -> Transition {
        self.ranked(c)
            .into_iter()
            .map(|(t, _)| t)
            .find(|t| c.legal(t))
            .unwrap_or_else(|| {
                if c.legal(&Transition::Reduce(1)) {
                    Transition::Reduce(1)
                } else {
                    Transition::Shift
                }
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    /// Reads a model, rejecting other versions and vocabularies.
    pub fn from_json(text: &str, vocab: &Vocabulary) -> Result<Model> {
        let mut m: Model = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if m.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "model version {} is not supported (expected {MODEL_VERSION})",
                m.version
            )));
        }
        if m.vocabulary != vocab.fingerprint() {
            return Err(Error::Model("model was trained with a different vocabulary".into()));
        }
        m.rebuild_index();
        Ok(m)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path, vocab: &Vocabulary) -> Result<Model> {
        Model::from_json(&std::fs::read_to_string(path)?, vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MorphSegment;

    #[test]
    fn initial_configuration_features() {
        let c = Configuration::initial(vec![MorphSegment::new("kitaAbu", "N")]).unwrap();
        let fv = extract_features(&c, FeatureSet::Pos);
        for f in ["q1:pos=N", "s1:absent", "s2:absent", "s3:absent"] {
            assert!(fv.contains(f), "{f}");
        }
        assert_eq!(partition_key(&c), "∅");
    }

    #[test]
    fn feature_set_names() {
        for f in FeatureSet::ALL {
            assert_eq!(f.to_string().parse::<FeatureSet>().unwrap(), f);
        }
        assert!(FeatureSet::Pos < FeatureSet::Phi);
    }
}
