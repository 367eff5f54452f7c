//! Python bindings. Treebanks cross the boundary as CoNLL-X text.

use std::collections::BTreeMap;

use hybrid_parser::conllx::{format_graph, format_treebank, parse_treebank};
use hybrid_parser::conversion::{from_pure, is_convertible, to_pure};
use hybrid_parser::engine;
use hybrid_parser::evaluation::{elas, evaluate_corpus, to_f64, EvalReport, Metric};
use hybrid_parser::learning::{self, TrainConfig};
use hybrid_parser::oracle::oracle_sequence;
use hybrid_parser::render::{emit, layout, Format};
use hybrid_parser::synth::{self, Profile};
use hybrid_parser::{HybridGraph, TreebankDocument, Vocabulary};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn read(text: &str) -> PyResult<Vec<HybridGraph>> {
    let doc = parse_treebank(text, Vocabulary::quranic()).map_err(err)?;
    Ok(doc.entries.into_iter().map(|e| e.graph).collect())
}

fn read_one(text: &str) -> PyResult<HybridGraph> {
    let mut graphs = read(text)?;
    match graphs.len() {
        1 => Ok(graphs.remove(0)),
        n => Err(err(format!("expected one graph, found {n}"))),
    }
}

fn scores(r: &EvalReport) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("precision".to_string(), to_f64(r.precision())),
        ("recall".to_string(), to_f64(r.recall())),
        ("f1".to_string(), to_f64(r.f1())),
        ("true_positives".to_string(), r.true_positives as f64),
        ("gold".to_string(), r.gold_count as f64),
        ("predicted".to_string(), r.predicted_count as f64),
    ])
}

/// Re-serializes a treebank, checking that it parses.
#[pyfunction]
fn normalize(text: &str) -> PyResult<String> {
    let doc = parse_treebank(text, Vocabulary::quranic()).map_err(err)?;
    Ok(format_treebank(&doc))
}

/// Oracle transitions for a single gold graph, and whether it was reached.
#[pyfunction]
fn oracle(text: &str) -> PyResult<(Vec<String>, bool)> {
    let g = read_one(text)?;
    let out = oracle_sequence(&g).map_err(err)?;
    Ok((out.sequence.iter().map(|t| t.to_string()).collect(), out.reachable))
}

/// Pure dependency form of a hybrid graph and the list of losses.
#[pyfunction]
fn to_pure_graph(text: &str) -> PyResult<(String, Vec<String>)> {
    let g = read_one(text)?;
    let (pure, report) = to_pure(&g).map_err(err)?;
    Ok((format_graph(&pure), report.loss_details.iter().map(|l| l.to_string()).collect()))
}

/// Hybrid graph restored from its pure form, with restoration errors.
#[pyfunction]
fn to_hybrid_graph(text: &str) -> PyResult<(String, Vec<String>)> {
    let g = read_one(text)?;
    let r = from_pure(&g);
    Ok((format_graph(&r.graph), r.errors.iter().map(|l| l.to_string()).collect()))
}

#[pyfunction]
fn convertible(text: &str) -> PyResult<bool> {
    Ok(is_convertible(&read_one(text)?))
}

/// Extended labelled attachment score between two single-graph documents.
#[pyfunction]
fn elas_score(gold: &str, predicted: &str) -> PyResult<BTreeMap<String, f64>> {
    let r = elas(&read_one(gold)?, &read_one(predicted)?).map_err(err)?;
    Ok(scores(&r))
}

/// Corpus-level score; `metric` is one of elas, las, parseval.
#[pyfunction]
#[pyo3(signature = (gold, predicted, metric = "elas"))]
fn evaluate(gold: &str, predicted: &str, metric: &str) -> PyResult<BTreeMap<String, f64>> {
    let m: Metric = metric.parse().map_err(err)?;
    let r = evaluate_corpus(&read(gold)?, &read(predicted)?, m).map_err(err)?;
    Ok(scores(&r))
}

#[pyfunction]
#[pyo3(signature = (seed, count, profile = "pure"))]
fn synthesize(seed: u64, count: usize, profile: &str) -> PyResult<String> {
    let p: Profile = profile.parse().map_err(err)?;
    Ok(format_treebank(&synth::generate(seed, count, p)))
}

/// SVG or DOT for every graph in a treebank.
#[pyfunction]
#[pyo3(signature = (text, format = "svg"))]
fn render(text: &str, format: &str) -> PyResult<Vec<String>> {
    let f: Format = format.parse().map_err(err)?;
    Ok(read(text)?.iter().map(|g| emit(&layout(g), f)).collect())
}

#[pyclass(module = "hybridparser")]
struct Model {
    inner: learning::Model,
}

#[pymethods]
impl Model {
    #[staticmethod]
    #[pyo3(signature = (corpus, features = "lemma", pipeline = "integrated", seed = 0, epochs = 10))]
    fn train(corpus: &str, features: &str, pipeline: &str, seed: u64, epochs: usize) -> PyResult<Model> {
        let config = TrainConfig {
            feature_set: features.parse().map_err(err)?,
            pipeline: pipeline.parse().map_err(err)?,
            seed,
            epochs,
        };
        let inner = learning::train(&read(corpus)?, &config).map_err(err)?;
        Ok(Model { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Model> {
        let inner = learning::Model::from_json(text, Vocabulary::quranic()).map_err(err)?;
        Ok(Model { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn pipeline(&self) -> String {
        self.inner.pipeline.to_string()
    }

    #[getter]
    fn feature_set(&self) -> String {
        self.inner.feature_set.to_string()
    }

    /// Parses the segments of every graph in `text`, ignoring gold structure.
    fn parse(&self, text: &str) -> PyResult<String> {
        let mut out = Vec::new();
        for g in read(text)? {
            let report = engine::parse(&self.inner, g.segments().cloned().collect()).map_err(err)?;
            out.push(report.graph);
        }
        Ok(format_treebank(&TreebankDocument::from_graphs(out)))
    }
}

#[pymodule]
fn hybridparser(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(to_pure_graph, m)?)?;
    m.add_function(wrap_pyfunction!(to_hybrid_graph, m)?)?;
    m.add_function(wrap_pyfunction!(convertible, m)?)?;
    m.add_function(wrap_pyfunction!(elas_score, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_class::<Model>()?;
    Ok(())
}
