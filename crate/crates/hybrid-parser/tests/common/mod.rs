#![allow(dead_code)]

use std::path::PathBuf;

use hybrid_parser::conllx::parse_treebank;
use hybrid_parser::synth::generate;
use hybrid_parser::{HybridGraph, Vocabulary};

pub fn fixture_path(dir: &str, name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(dir).join(name)
}

pub fn fixture_text(dir: &str, name: &str) -> String {
    std::fs::read_to_string(fixture_path(dir, name)).unwrap()
}

pub fn english_vocab() -> Vocabulary {
    Vocabulary::parse(&fixture_text("oracle", "english_svo.vocab")).unwrap()
}

/// The first graph of a fixture file, read with its own vocabulary if it has one.
pub fn fixture(dir: &str, name: &str) -> HybridGraph {
    let vocab = match name.strip_suffix(".conllx") {
        Some(stem) if fixture_path(dir, &format!("{stem}.vocab")).exists() => {
            Vocabulary::parse(&fixture_text(dir, &format!("{stem}.vocab"))).unwrap()
        }
        _ => Vocabulary::quranic().clone(),
    };
    parse_treebank(&fixture_text(dir, name), &vocab).unwrap().entries.remove(0).graph
}

/// "John gave the boy biscuits".
pub fn english() -> HybridGraph {
    fixture("oracle", "english_svo.conllx")
}

/// The conditional verse (7:186).
pub fn conditional() -> HybridGraph {
    fixture("oracle", "conditional_nominal.conllx")
}

pub fn all_fixtures() -> Vec<(String, HybridGraph)> {
    let mut out = Vec::new();
    for dir in ["oracle", "conversion"] {
        let mut names: Vec<String> = std::fs::read_dir(fixture_path(dir, ""))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".conllx"))
            .collect();
        names.sort();
        for n in names {
            let g = fixture(dir, &n);
            out.push((format!("{dir}/{n}"), g));
        }
    }
    out
}

pub fn synth(seed: u64, count: usize, profile: &str) -> Vec<HybridGraph> {
    generate(seed, count, profile.parse().unwrap()).graphs().cloned().collect()
}
