mod common;

use common::{all_fixtures, conditional, english, fixture_text, synth};
use hybrid_parser::evaluation::{
    cross_validate, cross_validate_folds, elas, elas_with, evaluate_corpus, las, parseval, CrossValidation,
    EvalReport, Matching, Metric,
};
use hybrid_parser::learning::{FeatureSet, Pipeline};
use hybrid_parser::{Label, NodeRef, PhraseNode};
use num_rational::Ratio;

fn r(n: u64, d: u64) -> Ratio<u64> {
    Ratio::new(n, d)
}

#[test]
fn every_fixture_scores_one_against_itself() {
    for (name, g) in all_fixtures() {
        let rep = elas(&g, &g).unwrap();
        assert_eq!(rep.precision(), r(1, 1), "{name}");
        assert_eq!(rep.recall(), r(1, 1), "{name}");
        assert_eq!(rep.f1(), r(1, 1), "{name}");
    }
}

#[test]
fn las_with_one_relabelled_edge() {
    let gold = english();
    let mut pred = gold.clone();
    // Edges by hand: John-subj->gave, the-det->boy, boy-obj->gave, biscuits-obj->gave.
    assert_eq!(gold.edges.len(), 4);
    let det = pred.edges.iter_mut().find(|e| e.label == Label::rel("det")).unwrap();
    det.label = Label::rel("mod");
    assert_eq!(las(&gold, &pred).unwrap(), r(3, 4));
    assert_eq!(las(&gold, &gold).unwrap(), r(1, 1));
}

#[test]
fn deleting_one_edge_costs_recall_only() {
    let gold = conditional();
    // Count edges straight from the file: a row carries an edge when its HEAD is set.
    let e = fixture_text("oracle", "conditional_nominal.conllx")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .filter(|l| !matches!(l.split('\t').nth(6), Some("_") | Some("–") | Some("-") | None))
        .count() as u64;
    assert_eq!(e, 7);
    let mut pred = gold.clone();
    pred.edges.retain(|x| x.label != Label::rel("predx"));
    assert_eq!(pred.edges.len() as u64, e - 1);
    let rep = elas(&gold, &pred).unwrap();
    assert_eq!(rep.recall(), r(e - 1, e));
    assert_eq!(rep.precision(), r(1, 1));
}

#[test]
fn elas_recall_matches_las_on_pure_graphs() {
    let gold = english();
    let mut pred = gold.clone();
    pred.edges[0].head = NodeRef::Terminal(3);
    pred.edges.pop();
    let rep = elas(&gold, &pred).unwrap();
    assert_eq!(rep.recall(), las(&gold, &pred).unwrap());
}

#[test]
fn parseval_conventions() {
    let gold = vec![PhraseNode::new(0, 2, "VS"), PhraseNode::new(3, 7, "NS")];
    assert_eq!(parseval(&gold, &gold), (r(1, 1), r(1, 1)));
    assert_eq!(parseval(&gold, &[]), (r(1, 1), r(0, 1)));
    assert_eq!(parseval(&[], &[]), (r(1, 1), r(1, 1)));
    let pred = vec![PhraseNode::new(0, 2, "VS"), PhraseNode::new(3, 7, "S")];
    assert_eq!(parseval(&gold, &pred), (r(1, 2), r(1, 2)));
}

#[test]
fn report_zero_denominators() {
    let none = EvalReport::new(0, 0, 0);
    assert_eq!((none.precision(), none.recall(), none.f1()), (r(1, 1), r(1, 1), r(1, 1)));
    let miss = EvalReport::new(0, 3, 2);
    assert_eq!(miss.f1(), r(0, 1));
    let empty_pred = EvalReport::new(0, 3, 0);
    assert_eq!((empty_pred.precision(), empty_pred.recall()), (r(1, 1), r(0, 1)));
}

#[test]
fn dangling_references_are_rejected() {
    let gold = conditional();
    let mut pred = gold.clone();
    pred.phrases.clear();
    assert!(elas(&gold, &pred).is_err());
}

#[test]
fn mismatched_sentences_are_rejected() {
    assert!(elas(&english(), &conditional()).is_err());
    assert!(las(&english(), &conditional()).is_err());
    assert!(evaluate_corpus(&[english()], &[], Metric::Elas).is_err());
}

#[test]
fn empty_categories_match_by_form_unless_strict() {
    let gold = conditional();
    let mut pred = gold.clone();
    // Move the elided noun one place later; loose matching ignores position.
    let ec = pred.terminals.remove(6);
    pred.terminals.insert(7, ec);
    for e in &mut pred.edges {
        for n in [&mut e.dependent, &mut e.head] {
            *n = match *n {
                NodeRef::Terminal(6) => NodeRef::Terminal(7),
                NodeRef::Terminal(7) => NodeRef::Terminal(6),
                other => other,
            };
        }
    }
    pred.phrases.clear();
    pred.edges.retain(|e| !matches!((e.dependent, e.head), (NodeRef::Phrase(_), _) | (_, NodeRef::Phrase(_))));
    let loose = elas(&gold, &pred).unwrap();
    let strict = elas_with(&gold, &pred, Matching { strict_empty_position: true }).unwrap();
    assert!(strict.true_positives < loose.true_positives);
}

fn cv(folds: usize, feature_set: FeatureSet) -> CrossValidation {
    CrossValidation {
        folds,
        feature_set,
        pipeline: Pipeline::Integrated,
        seed: 5,
        epochs: 3,
    }
}

#[test]
fn leave_one_out_on_three_graphs() {
    let corpus = synth(2, 3, "+phrases,+ellipsis");
    let a = cross_validate(&corpus, &cv(3, FeatureSet::Lemma)).unwrap();
    let b = cross_validate(&corpus, &cv(3, FeatureSet::Lemma)).unwrap();
    assert_eq!(a, b);
    assert!(a.gold_count > 0);
    assert!(cross_validate(&corpus, &cv(4, FeatureSet::Lemma)).is_err());
    assert!(cross_validate(&corpus, &cv(1, FeatureSet::Lemma)).is_err());
}

#[test]
fn pooled_counts_differ_from_mean_fold_f1() {
    let corpus = synth(3, 40, "+phrases,+ellipsis");
    let config = cv(4, FeatureSet::Pos);
    let folds = cross_validate_folds(&corpus, &config).unwrap();
    assert_eq!(folds.len(), 4);
    let pooled = cross_validate(&corpus, &config).unwrap();
    let mean = folds.iter().map(|f| f.f1()).sum::<Ratio<u64>>() / Ratio::from_integer(folds.len() as u64);
    assert_ne!(pooled.f1(), mean);
    let summed: u64 = folds.iter().map(|f| f.true_positives).sum();
    assert_eq!(pooled.true_positives, summed);
}

#[test]
fn ten_folds_on_a_learnable_corpus() {
    let corpus = synth(21, 500, "+phrases,+ellipsis");
    let mut config = cv(10, FeatureSet::Lemma);
    config.epochs = 10;
    let rep = cross_validate(&corpus, &config).unwrap();
    assert!(hybrid_parser::evaluation::to_f64(rep.f1()) >= 0.90, "{rep}");
}
