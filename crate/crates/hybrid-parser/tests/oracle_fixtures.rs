use std::path::PathBuf;

use hybrid_parser::conllx::parse_treebank;
use hybrid_parser::oracle::{oracle_next, oracle_sequence, replay};
use hybrid_parser::transition::{format_sequence, parse_sequence, Configuration, Transition};
use hybrid_parser::{HybridGraph, Label, NodeRef, Vocabulary};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle").join(name)
}

fn load(name: &str) -> HybridGraph {
    let vocab = if name.starts_with("english") {
        Vocabulary::load(&fixture("english_svo.vocab")).unwrap()
    } else {
        Vocabulary::quranic().clone()
    };
    let text = std::fs::read_to_string(fixture(&format!("{name}.conllx"))).unwrap();
    parse_treebank(&text, &vocab).unwrap().entries.remove(0).graph
}

fn expected(name: &str) -> Vec<Transition> {
    parse_sequence(&std::fs::read_to_string(fixture(&format!("{name}.transitions"))).unwrap()).unwrap()
}

#[test]
fn english_sequence_matches() {
    let g = load("english_svo");
    let out = oracle_sequence(&g).unwrap();
    assert_eq!(format_sequence(&out.sequence), format_sequence(&expected("english_svo")));
    assert_eq!(out.sequence.len(), 14);
    assert!(out.reachable);
    assert!(out.graph.structurally_equal(&g));
}

#[test]
fn conditional_sequence_matches() {
    let g = load("conditional_nominal");
    let out = oracle_sequence(&g).unwrap();
    assert_eq!(format_sequence(&out.sequence), format_sequence(&expected("conditional_nominal")));
    assert!(out.reachable);
    assert!(out.graph.structurally_equal(&g));
}

#[test]
fn det_after_four_shifts() {
    let g = load("english_svo");
    let c = replay(&g, &vec![Transition::Shift; 4]).unwrap();
    assert_eq!(oracle_next(&c, &g), Transition::Left(Label::rel("det")));
    assert!(c.legal(&Transition::Left(Label::rel("det"))));
}

#[test]
fn nominal_phrase_once_queue_is_empty() {
    let g = load("conditional_nominal");
    let seq = expected("conditional_nominal");
    let at = seq.iter().position(|t| *t == Transition::Phrase("NS".into())).unwrap();
    let c = replay(&g, &seq[..at]).unwrap();
    assert!(c.queue.is_empty());
    assert_eq!(oracle_next(&c, &g), Transition::Phrase("NS".into()));
}

#[test]
fn isolated_particle_is_reduced() {
    let g = load("conditional_nominal");
    let seq = expected("conditional_nominal");
    // After shifting the result particle, which has no edges.
    let c = replay(&g, &seq[..10]).unwrap();
    assert_eq!(c.s(1), Some(NodeRef::Terminal(3)));
    assert_eq!(oracle_next(&c, &g), Transition::Reduce(1));
}

#[test]
fn table_rows_are_read() {
    let g = load("table_rows");
    assert_eq!(g.terminals.len(), 5);
    assert_eq!(g.terminals[1].form(), "Huwa");
    assert!(g.terminals[1].is_empty_category());
    assert_eq!(g.phrases.len(), 1);
    assert_eq!((g.phrases[0].start, g.phrases[0].end), (2, 4));
    assert_eq!(g.head_of(NodeRef::Phrase(0)).unwrap(), Some(NodeRef::Terminal(0)));
    assert_eq!(g.edges.len(), 4);
}

#[test]
fn initial_configurations() {
    let g = load("english_svo");
    let c = Configuration::initial(g.segments().cloned().collect()).unwrap();
    assert_eq!(c.queue.len(), 5);
    assert!(c.stack.is_empty());
    let g = load("conditional_nominal");
    let c = Configuration::initial(g.segments().cloned().collect()).unwrap();
    assert_eq!(c.queue.len(), 8);
}
