//! One line per acceptance criterion. Runs as a plain binary so the lines
//! always reach the test log.

mod common;

use std::time::{Duration, Instant};

use common::{all_fixtures, conditional, english, fixture, fixture_text};
use hybrid_parser::conllx::{format_treebank, parse_treebank};
use hybrid_parser::conversion::{expand_bridges, from_pure, is_convertible, to_pure};
use hybrid_parser::engine::{parse, parse_integrated, parse_multi_step};
use hybrid_parser::evaluation::{
    cross_validate, elas, evaluate_corpus, las, parseval, to_f64, CrossValidation, EvalReport, Metric,
};
use hybrid_parser::learning::{train, FeatureSet, Model, Pipeline, TrainConfig};
use hybrid_parser::notation::parse_feature_line;
use hybrid_parser::oracle::{oracle_sequence, replay};
use hybrid_parser::synth::{generate, Profile};
use hybrid_parser::transition::{parse_sequence, step_budget};
use hybrid_parser::{HybridGraph, MorphSegment, PhraseNode, Vocabulary};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, Duration, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn one() -> Ratio<u64> {
    Ratio::from_integer(1)
}

fn criterion_1() -> Outcome {
    for (name, len) in [("english_svo", 14), ("conditional_nominal", 31)] {
        let gold = fixture("oracle", &format!("{name}.conllx"));
        let want = parse_sequence(&fixture_text("oracle", &format!("{name}.transitions"))).map_err(|e| e.to_string())?;
        let out = oracle_sequence(&gold).map_err(|e| e.to_string())?;
        check(out.sequence == want, format!("{name}: oracle sequence differs from fixture"))?;
        check(out.sequence.len() == len, format!("{name}: {} transitions, expected {len}", want.len()))?;
        let rebuilt = replay(&gold, &out.sequence).map_err(|e| e.to_string())?;
        let f1 = elas(&gold, &rebuilt.graph).map_err(|e| e.to_string())?.f1();
        check(f1 == one(), format!("{name}: replay ELAS F1 {f1}"))?;
    }
    Ok("14 and 31 transitions reproduced; replay ELAS F1 = 1".into())
}

fn criterion_2() -> Outcome {
    for name in ["phrase_dependent", "dropped_subject", "ellipsis_bridge", "pp_ellipsis"] {
        let hybrid = fixture("conversion", &format!("{name}.hybrid.conllx"));
        let pure = fixture("conversion", &format!("{name}.pure.conllx"));
        let (converted, report) = to_pure(&hybrid).map_err(|e| e.to_string())?;
        check(!report.lossy(), format!("{name}: lossy"))?;
        check(converted.structurally_equal(&pure), format!("{name}: pure form differs"))?;
    }
    let pure = fixture("conversion", "pp_ellipsis.pure.conllx");
    let bridged = expand_bridges(&pure);
    check(
        bridged.structurally_equal(&fixture("conversion", "pp_ellipsis.bridged.conllx")),
        "first restoration stage differs",
    )?;
    let restored = from_pure(&pure);
    check(restored.errors.is_empty(), "restoration errors")?;
    check(
        restored.graph.structurally_equal(&fixture("conversion", "pp_ellipsis.hybrid.conllx")),
        "second restoration stage differs",
    )?;
    Ok("four conversions and the two-stage restoration match exactly".into())
}

fn criterion_3() -> Outcome {
    let doc = generate(2024, 1000, "+phrases,+ellipsis".parse().unwrap());
    let mut convertible = 0;
    for (k, g) in doc.graphs().enumerate() {
        if !is_convertible(g) {
            continue;
        }
        convertible += 1;
        let (pure, _) = to_pure(g).map_err(|e| e.to_string())?;
        let back = from_pure(&pure).graph;
        let f1 = elas(g, &back).map_err(|e| e.to_string())?.f1();
        check(f1 == one() && back.edges.len() == g.edges.len(), format!("graph {}: roundtrip F1 {f1}", k + 1))?;
    }
    check(convertible >= 950, format!("only {convertible}/1000 convertible"))?;
    Ok(format!("{convertible}/1000 convertible, all roundtrip with F1 = 1 and equal edge counts"))
}

fn criterion_4() -> Outcome {
    for (name, g) in all_fixtures() {
        let r = elas(&g, &g).map_err(|e| e.to_string())?;
        check(r.precision() == one() && r.recall() == one() && r.f1() == one(), format!("{name}: elas(g,g) != 1"))?;
    }
    let gold: Vec<HybridGraph> = common::synth(77, 1000, "pure");
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (k, g) in gold.iter().enumerate() {
        check(g.phrases.is_empty() && g.empty_category_count() == 0, format!("graph {}: not pure", k + 1))?;
        let mut p = g.clone();
        let n = p.terminals.len();
        p.edges.retain(|_| rng.random_bool(0.8));
        for e in &mut p.edges {
            if rng.random_bool(0.2) {
                e.label = hybrid_parser::Label::rel("mod");
            }
        }
        // Reattach headless segments to random heads where legal.
        for i in 0..n {
            let d = hybrid_parser::NodeRef::Terminal(i);
            let h = hybrid_parser::NodeRef::Terminal(rng.random_range(0..n));
            if rng.random_bool(0.3) && p.head_edge(d).is_none() && d != h {
                p.edges.push(hybrid_parser::Edge::new(d, h, hybrid_parser::Label::rel("obj")));
            }
        }
        let recall = elas(g, &p).map_err(|e| e.to_string())?.recall();
        let l = las(g, &p).map_err(|e| e.to_string())?;
        check(recall == l, format!("graph {}: elas recall {recall} != las {l}", k + 1))?;
    }
    let spans = [PhraseNode::new(0, 2, "VS"), PhraseNode::new(3, 7, "NS")];
    check(parseval(&spans, &spans) == (one(), one()), "parseval identical")?;
    check(parseval(&spans, &[]) == (one(), Ratio::from_integer(0)), "parseval empty prediction")?;
    check(parseval(&[], &[]) == (one(), one()), "parseval both empty")?;
    let empty = EvalReport::new(0, 0, 0);
    check(empty.f1() == one(), "empty report F1")?;
    check(EvalReport::new(0, 2, 2).f1() == Ratio::from_integer(0), "zero F1 when P+R=0")?;
    Ok("elas(g,g)=1 on fixtures; recall = LAS exactly on 1000 pure graphs; zero-denominator rules hold".into())
}

fn criterion_5() -> Outcome {
    let mut graphs = 0;
    for (k, profile) in ["pure", "+phrases", "+ellipsis", "+phrases,+ellipsis", "+disconnected"].iter().enumerate() {
        let doc = generate(500 + k as u64, 200, profile.parse().unwrap());
        for (i, g) in doc.graphs().enumerate() {
            let out = oracle_sequence(g).map_err(|e| e.to_string())?;
            check(out.reachable, format!("{profile} graph {}: unreachable", i + 1))?;
            check(out.graph.structurally_equal(g), format!("{profile} graph {}: replay differs", i + 1))?;
            graphs += 1;
        }
    }
    let mut profile: Profile = "+nonprojective".parse().unwrap();
    profile.crossing_rate = 0.1;
    let doc = generate(600, 1000, profile);
    let mut injected = 0;
    for (i, e) in doc.entries.iter().enumerate() {
        let was_injected = e.meta("injected").is_some();
        injected += was_injected as usize;
        let out = oracle_sequence(&e.graph).map_err(|e| e.to_string())?;
        check(out.reachable != was_injected, format!("+nonprojective graph {}: reachable={}", i + 1, out.reachable))?;
    }
    Ok(format!("{graphs}/{graphs} reachable; unreachable set = the {injected} injected graphs of 1000"))
}

fn score(model: &Model, graphs: &[HybridGraph]) -> Result<f64, String> {
    let mut predicted = Vec::new();
    for g in graphs {
        predicted.push(parse(model, g.segments().cloned().collect()).map_err(|e| e.to_string())?.graph);
    }
    Ok(to_f64(evaluate_corpus(graphs, &predicted, Metric::Elas).map_err(|e| e.to_string())?.f1()))
}

fn criterion_6() -> Outcome {
    let corpus = common::synth(11, 300, "+phrases,+ellipsis");
    let (train_set, held_out) = corpus.split_at(200);
    let config = TrainConfig {
        feature_set: FeatureSet::Lemma,
        pipeline: Pipeline::Integrated,
        seed: 1,
        epochs: 10,
    };
    let model = train(train_set, &config).map_err(|e| e.to_string())?;
    let (fit, held) = (score(&model, train_set)?, score(&model, held_out)?);
    check(fit >= 0.99, format!("training ELAS F1 {fit:.4} < 0.99"))?;
    check(held >= 0.90, format!("held-out ELAS F1 {held:.4} < 0.90"))?;
    Ok(format!("training ELAS F1 {fit:.4} (>= 0.99), held-out {held:.4} (>= 0.90)"))
}

fn noisy_sentence(rng: &mut ChaCha8Rng, tags: &[&str]) -> Vec<MorphSegment> {
    let keys = ["case", "gender", "number", "person", "mood", "sp", "segType", "pronType", "state", "voice"];
    let values = ["NOM", "ACC", "GEN", "M", "F", "S", "D", "P", "1", "2", "3", "kaAn", "<in~", "prefix", "suffix", "?"];
    let n = rng.random_range(1..=64);
    (0..n)
        .map(|i| {
            let pos = tags[rng.random_range(0..tags.len())];
            let mut s = MorphSegment::new(format!("f{i}"), pos).with_lemma(&format!("l{}", rng.random_range(0..20)));
            for _ in 0..rng.random_range(0..5) {
                s = s.with(keys[rng.random_range(0..keys.len())], values[rng.random_range(0..values.len())]);
            }
            s
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let corpus = common::synth(31, 120, "all");
    let mut models = Vec::new();
    for pipeline in [Pipeline::Integrated, Pipeline::MultiStep] {
        for (feature_set, graphs) in [(FeatureSet::Phi, &corpus[..]), (FeatureSet::Pos, &corpus[..1])] {
            let config = TrainConfig {
                feature_set,
                pipeline,
                seed: 0,
                epochs: 3,
            };
            models.push(train(graphs, &config).map_err(|e| e.to_string())?);
        }
    }
    let tags: Vec<&str> = Vocabulary::quranic().pos_tags().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sentences = 0;
    let mut drained = 0;
    for _ in 0..300 {
        let s = noisy_sentence(&mut rng, &tags);
        let n = s.len();
        for model in &models {
            // Each model is run through the pipeline it was not trained for as well.
            for out in [parse_integrated(model, s.clone()), parse_multi_step(model, s.clone())] {
                let out = out.map_err(|e| e.to_string())?;
                drained += out.budget_exhausted as usize;
                check(out.trace.len() <= step_budget(n) , format!("length {n}: {} steps", out.trace.len()))?;
                check(out.graph.validate().is_empty(), format!("length {n}: invalid output"))?;
                check(out.graph.segment_count() == n, format!("length {n}: segments lost"))?;
            }
        }
        sentences += 1;
    }
    Ok(format!(
        "{sentences} fuzzed sentences x {} runs terminated within 8n+16 and validated ({drained} cut off by the budget)",
        models.len() * 2
    ))
}

/// Returns None when no treebank export is available.
fn criterion_8() -> Option<Outcome> {
    let path = std::env::var_os("HYBRID_PARSER_TREEBANK")?;
    Some((|| {
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let corpus: Vec<HybridGraph> = parse_treebank(&text, Vocabulary::quranic())
            .map_err(|e| e.to_string())?
            .entries
            .into_iter()
            .map(|e| e.graph)
            .collect();
        let run = |graphs: &[HybridGraph], pipeline| -> Result<f64, String> {
            let cv = CrossValidation {
                folds: 10,
                feature_set: FeatureSet::Lemma,
                pipeline,
                seed: 0,
                epochs: 10,
            };
            Ok(100.0 * to_f64(cross_validate(graphs, &cv).map_err(|e| e.to_string())?.f1()))
        };
        let (integrated, multi) = (run(&corpus, Pipeline::Integrated)?, run(&corpus, Pipeline::MultiStep)?);
        check((integrated - 89.03).abs() <= 1.5, format!("integrated F1 {integrated:.2} outside 89.03 +/- 1.5"))?;
        check((multi - 87.47).abs() <= 1.5, format!("multi-step F1 {multi:.2} outside 87.47 +/- 1.5"))?;
        check(integrated > multi, "integrated does not beat multi-step")?;
        let filtered: Vec<HybridGraph> = corpus.iter().filter(|g| is_convertible(g)).cloned().collect();
        let diff = run(&filtered, Pipeline::Integrated)? - run(&filtered, Pipeline::MultiStep)?;
        check((diff - 1.4).abs() <= 0.32, format!("filtered difference {diff:.2} outside 1.4 +/- 0.32"))?;
        Ok(format!("integrated {integrated:.2}, multi-step {multi:.2}, filtered difference {diff:.2}"))
    })())
}

fn criterion_9() -> Outcome {
    let mut docs = 0;
    for (k, profile) in ["pure", "+phrases", "+ellipsis", "+phrases,+ellipsis", "+disconnected", "all"].iter().enumerate() {
        let doc = generate(900 + k as u64, 300, profile.parse().unwrap());
        let text = format_treebank(&doc);
        let back = parse_treebank(&text, Vocabulary::quranic()).map_err(|e| e.to_string())?;
        check(format_treebank(&back) == text, format!("{profile}: bytes differ after read/write"))?;
        docs += 1;
    }
    let seg = |line: &str| parse_feature_line(line, None).map_err(|e| e.to_string());
    let tags = |s: &[MorphSegment]| s.iter().map(|x| x.pos.clone()).collect::<Vec<_>>();
    let get = |s: &MorphSegment, k: &str| s.features.get(k).cloned().unwrap_or_default();

    let a = seg("[bi+ POS:N ACT PCPL (IV) LEM:muSorix ROOT:Srx M GEN PRON:2MP]")?;
    check(tags(&a) == ["P", "N", "PRON"], "bi+ example: segment tags")?;
    check(a[0].form == "bi", "bi+ example: prefix form")?;
    check(
        get(&a[1], "derivation") == "ACT PCPL"
            && get(&a[1], "vform") == "IV"
            && a[1].lemma.as_deref() == Some("muSorix")
            && a[1].root.as_deref() == Some("Srx")
            && get(&a[1], "gender") == "M"
            && get(&a[1], "case") == "GEN",
        "bi+ example: stem features",
    )?;
    check(
        (get(&a[2], "person"), get(&a[2], "gender"), get(&a[2], "number"), get(&a[2], "pronType"))
            == ("2".into(), "M".into(), "P".into(), "object".into()),
        "bi+ example: suffix features",
    )?;

    let b = seg("[w:CONJ+ l:EMPH+ POS:V PERF LEM:hadaY ROOT:hdy 1P PRON:3MP]")?;
    check(tags(&b) == ["CONJ", "EMPH", "V", "PRON"], "(4:68) example: segment tags")?;
    check(get(&b[2], "aspect") == "PERF" && get(&b[2], "person") == "1" && get(&b[2], "number") == "P", "(4:68) example: verb features")?;
    check(get(&b[3], "person") == "3" && get(&b[3], "gender") == "M" && get(&b[3], "number") == "P", "(4:68) example: suffix features")?;

    let c = seg("[POS:P LEM:fiY]")?;
    check(tags(&c) == ["P"] && c[0].lemma.as_deref() == Some("fiY"), "(74:42:3) example")?;
    Ok(format!("{docs} synth corpora byte-identical after read/write; three notation examples parse as stated"))
}

fn main() {
    // Sanity: the figure fixtures themselves load.
    let _ = (english(), conditional());
    let criteria: [Criterion; 8] = [
        (1, Duration::from_secs(1), criterion_1),
        (2, Duration::from_secs(1), criterion_2),
        (3, Duration::from_secs(30), criterion_3),
        (4, Duration::from_secs(30), criterion_4),
        (5, Duration::from_secs(60), criterion_5),
        (6, Duration::from_secs(300), criterion_6),
        (7, Duration::from_secs(120), criterion_7),
        (9, Duration::from_secs(5), criterion_9),
    ];
    let mut failed = 0;
    let mut report = |n: u32, limit: Duration, start: Instant, outcome: Outcome| {
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {took:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {n}: {msg} [{took:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg} [{took:.2?}]");
            }
        }
    };
    for (n, limit, f) in criteria {
        let start = Instant::now();
        report(n, limit, start, f());
        if n == 7 {
            let start = Instant::now();
            match criterion_8() {
                Some(outcome) => report(8, Duration::MAX, start, outcome),
                None => println!(
                    "N/A  criterion 8: conditional on a Quranic Treebank export; set HYBRID_PARSER_TREEBANK to run it"
                ),
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
