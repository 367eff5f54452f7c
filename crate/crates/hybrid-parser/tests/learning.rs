mod common;

use common::{conditional, english, english_vocab, synth};
use hybrid_parser::engine::parse;
use hybrid_parser::learning::{extract_features, train, FeatureSet, Model, Pipeline, TrainConfig};
use hybrid_parser::oracle::oracle_sequence;
use hybrid_parser::{Configuration, HybridGraph, Label, Transition, Vocabulary};

fn config(feature_set: FeatureSet, pipeline: Pipeline) -> TrainConfig {
    TrainConfig {
        feature_set,
        pipeline,
        seed: 3,
        epochs: 10,
    }
}

fn sentence(g: &HybridGraph) -> Vec<hybrid_parser::MorphSegment> {
    g.segments().cloned().collect()
}

#[test]
fn single_graph_is_memorized_under_every_feature_set() {
    let gold = english();
    for fs in FeatureSet::ALL {
        let model = train(std::slice::from_ref(&gold), &config(fs, Pipeline::Integrated)).unwrap();
        let c = Configuration::initial(sentence(&gold)).unwrap();
        assert_eq!(model.predict(&c), Transition::Shift, "{fs}");
        let out = parse(&model, sentence(&gold)).unwrap();
        assert!(out.graph.structurally_equal(&gold), "{fs}");
        assert_eq!(out.trace, oracle_sequence(&gold).unwrap().sequence);
    }
}

#[test]
fn conditional_verse_is_memorized() {
    let gold = conditional();
    let model = train(std::slice::from_ref(&gold), &config(FeatureSet::Lemma, Pipeline::Integrated)).unwrap();
    let out = parse(&model, sentence(&gold)).unwrap();
    assert!(out.graph.structurally_equal(&gold));
    assert!(out.losses.is_empty());
}

#[test]
fn subject_dependent_shows_in_features() {
    let gold = english();
    // SHIFT SHIFT LEFT(subj): s1 = gave with a subj dependent.
    let mut c = Configuration::initial(sentence(&gold)).unwrap();
    for t in [Transition::Shift, Transition::Shift, Transition::Left(Label::rel("subj"))] {
        c.apply_mut(&t).unwrap();
    }
    let fv = extract_features(&c, FeatureSet::Pos);
    assert!(fv.contains("s1:deprel(subj)"));
    assert!(fv.contains("s1:pos=V"));
}

#[test]
fn initial_features_under_pos() {
    let c = Configuration::initial(vec![hybrid_parser::MorphSegment::new("kitaAbu", "N")]).unwrap();
    let fv = extract_features(&c, FeatureSet::Pos);
    let got: Vec<&str> = fv.iter().collect();
    let mut want = vec!["q1:pos=N", "s1:absent", "s2:absent", "s3:absent"];
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let corpus = synth(4, 40, "+phrases,+ellipsis");
    let a = train(&corpus, &config(FeatureSet::Phi, Pipeline::Integrated)).unwrap();
    let b = train(&corpus, &config(FeatureSet::Phi, Pipeline::Integrated)).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn save_load_roundtrip_and_vocabulary_check() {
    let corpus = synth(4, 20, "+phrases,+ellipsis");
    let model = train(&corpus, &config(FeatureSet::Lemma, Pipeline::MultiStep)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = Model::load(&path, Vocabulary::quranic()).unwrap();
    assert_eq!(back.to_json(), model.to_json());
    for g in &corpus[..5] {
        let a = parse(&model, sentence(g)).unwrap();
        let b = parse(&back, sentence(g)).unwrap();
        assert_eq!(a.trace, b.trace);
    }
    assert!(Model::load(&path, &english_vocab()).is_err());
    let bumped = model.to_json().replacen("\"version\":1", "\"version\":2", 1);
    assert!(Model::from_json(&bumped, Vocabulary::quranic()).is_err());
}

#[test]
fn metadata_records_hyperparameters_and_counts() {
    let mut corpus = synth(4, 20, "+phrases,+ellipsis");
    corpus.extend(synth(9, 20, "all"));
    let model = train(&corpus, &config(FeatureSet::Lemma, Pipeline::Integrated)).unwrap();
    let h = &model.hyperparameters;
    assert_eq!((h.penalty, h.termination, h.kernel_gamma, h.kernel_r, h.kernel_degree), (0.5, 1.0, 0.2, 0.0, 2));
    assert_eq!(model.stats.graphs_used + model.stats.graphs_excluded, corpus.len());
    assert!(model.stats.pairs.contains_key("∅"));
    assert!(model.stats.pairs.values().sum::<usize>() > 0);
}

#[test]
fn empty_usable_corpus_is_an_error() {
    assert!(train(&[], &TrainConfig::default()).is_err());
}

#[test]
fn predict_takes_the_best_legal_transition() {
    // Conflicting patterns make the top-ranked transition illegal somewhere.
    let corpus = synth(6, 60, "all");
    let model = train(&corpus, &config(FeatureSet::Pos, Pipeline::Integrated)).unwrap();
    let mut top_illegal = 0;
    for g in synth(7, 30, "all") {
        let mut c = Configuration::initial(sentence(&g)).unwrap();
        let mut steps = 0;
        while !c.is_terminal() && steps < 200 {
            let ranked = model.ranked(&c);
            let t = model.predict(&c);
            assert!(c.legal(&t));
            if !c.legal(&ranked[0].0) {
                top_illegal += 1;
                let first_legal = ranked.iter().map(|(t, _)| t).find(|t| c.legal(t));
                assert_eq!(Some(&t), first_legal);
            }
            c.apply_mut(&t).unwrap();
            steps += 1;
        }
    }
    assert!(top_illegal > 0);
}

#[test]
fn lone_item_with_empty_queue_falls_back_to_reduce() {
    let gold = english();
    let model = train(std::slice::from_ref(&gold), &config(FeatureSet::Pos, Pipeline::MultiStep)).unwrap();
    let mut c = Configuration::initial(vec![hybrid_parser::MorphSegment::new("x", "ADJ")]).unwrap();
    c.apply_mut(&Transition::Shift).unwrap();
    assert_eq!(model.predict(&c), Transition::Reduce(1));
}
