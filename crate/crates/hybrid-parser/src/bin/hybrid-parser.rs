use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use hybrid_parser::conllx::{format_treebank, parse_treebank};
use hybrid_parser::conversion::{from_pure, to_pure};
use hybrid_parser::engine;
use hybrid_parser::evaluation::{cross_validate, evaluate_corpus, to_f64, CrossValidation, Metric};
use hybrid_parser::learning::{train, FeatureSet, Model, Pipeline, TrainConfig};
use hybrid_parser::notation::read_feature_file;
use hybrid_parser::oracle::{oracle_sequence, replay};
use hybrid_parser::render::{emit, layout_with, Direction, Format, Style};
use hybrid_parser::synth::{generate, Profile};
use hybrid_parser::transition::{format_sequence, parse_sequence};
use hybrid_parser::{Error, HybridGraph, TreebankDocument, TreebankEntry, Vocabulary};

// Closed pipes (`| head`) are not errors.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! out_raw {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

const THREADS_ENV: &str = "HYBRID_PARSER_THREADS";

#[derive(Parser)]
#[command(name = "hybrid-parser", version, about = "Hybrid dependency-constituency parser")]
struct Cli {
    /// File of `key=value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tag inventory file (defaults to the built-in Quranic inventory).
    #[arg(long, global = true)]
    vocab: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model from a treebank.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "lemma")]
        features: FeatureSet,
        #[arg(long, default_value = "integrated")]
        pipeline: Pipeline,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse CoNLL-X or feature-notation input.
    Parse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Record each sentence's transitions as a comment.
        #[arg(long)]
        trace: bool,
    },
    /// Score predicted graphs against gold graphs.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value = "elas")]
        metric: Metric,
    },
    /// k-fold cross-validation.
    Crossval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value = "lemma")]
        features: FeatureSet,
        #[arg(long, default_value = "integrated")]
        pipeline: Pipeline,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        /// Exit with status 3 when F1 falls below this value.
        #[arg(long)]
        min_f1: Option<f64>,
    },
    /// Convert between hybrid and pure dependency graphs.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        direction: Direction2,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that the oracle rebuilds every graph and matches fixtures.
    OracleCheck {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Directory of `NAME.conllx` and `NAME.transitions` pairs.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value = "pure")]
        profile: Profile,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw each graph of a corpus.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "svg")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
        /// Left-to-right word order.
        #[arg(long)]
        ltr: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Direction2 {
    ToPure,
    ToHybrid,
}

enum Failure {
    Usage(String),
    Data(String),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

/// Appends flags from the config file that are not already on the command
/// line and that the chosen subcommand accepts.
fn merge_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(k) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(k + 1)
        .ok_or_else(|| Failure::Usage("--config needs a file".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{path}: {e}")))?;
    let cmd = Cli::command();
    let Some(sub) = args.iter().skip(1).find_map(|a| cmd.find_subcommand(a)) else {
        return Ok(args);
    };
    let mut out = args.clone();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("{path}:{}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let flag = format!("--{key}");
        if args.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            if value == "true" {
                out.push(flag);
            }
        } else {
            out.push(flag);
            out.push(value.to_string());
        }
    }
    Ok(out)
}

fn read_corpus(path: &Path, vocab: &Vocabulary) -> Result<TreebankDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    parse_treebank(&text, vocab).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn header(pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        out!("# {k}={v}");
    }
}

fn report_lines(pairs: &[(String, String)]) {
    for (k, v) in pairs {
        out!("{k}={v}");
    }
}

fn looks_like_conllx(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.contains('\t'))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let vocab = match &cli.vocab {
        Some(p) => Vocabulary::load(p)?,
        None => Vocabulary::quranic().clone(),
    };
    match cli.command {
        Command::Train {
            corpus,
            features,
            pipeline,
            seed,
            epochs,
            out,
        } => {
            let doc = read_corpus(&corpus, &vocab)?;
            let graphs: Vec<HybridGraph> = doc.graphs().cloned().collect();
            let config = TrainConfig {
                feature_set: features,
                pipeline,
                seed,
                epochs,
            };
            let mut model = train(&graphs, &config)?;
            model.vocabulary = vocab.fingerprint();
            model.save(&out)?;
            header(&[
                ("command", "train".into()),
                ("features", features.to_string()),
                ("pipeline", pipeline.to_string()),
                ("seed", seed.to_string()),
                ("epochs", epochs.to_string()),
            ]);
            out!("graphs_used={}", model.stats.graphs_used);
            out!("graphs_excluded={}", model.stats.graphs_excluded);
            out!("classes={}", model.transitions.len());
            out!("features={}", model.features.len());
            for (k, n) in &model.stats.pairs {
                out!("pairs[{k}]={n}");
            }
        }
        Command::Parse {
            model,
            input,
            out,
            trace,
        } => {
            let model = Model::load(&model, &vocab)?;
            let text = std::fs::read_to_string(&input)?;
            let sentences: Vec<(Vec<String>, Vec<_>)> = if looks_like_conllx(&text) {
                parse_treebank(&text, &vocab)?
                    .entries
                    .into_iter()
                    .map(|e| (e.comments, e.graph.segments().cloned().collect()))
                    .collect()
            } else {
                read_feature_file(&text)?
                    .into_iter()
                    .map(|s| {
                        let comments = s.location.map(|l| vec![format!(" location = {l}")]).unwrap_or_default();
                        (comments, s.segments)
                    })
                    .collect()
            };
            let mut doc = TreebankDocument::default();
            let mut exhausted = 0;
            for (comments, segments) in sentences {
                let report = engine::parse(&model, segments)?;
                exhausted += report.budget_exhausted as usize;
                let mut entry = TreebankEntry::new(report.graph);
                entry.comments = comments;
                if trace {
                    let seq = format_sequence(&report.trace).trim().replace('\n', " ");
                    entry.set_meta("transitions", &seq);
                }
                for loss in &report.losses {
                    eprintln!("warning: {loss}");
                }
                doc.entries.push(entry);
            }
            write_file(&out, &format_treebank(&doc))?;
            out!("sentences={}", doc.len());
            out!("budget_exhausted={exhausted}");
        }
        Command::Eval { gold, pred, metric } => {
            let gold = read_corpus(&gold, &vocab)?;
            let pred = read_corpus(&pred, &vocab)?;
            let g: Vec<HybridGraph> = gold.graphs().cloned().collect();
            let p: Vec<HybridGraph> = pred.graphs().cloned().collect();
            let report = evaluate_corpus(&g, &p, metric)?;
            report_lines(&report.key_values());
        }
        Command::Crossval {
            corpus,
            folds,
            features,
            pipeline,
            seed,
            epochs,
            min_f1,
        } => {
            let doc = read_corpus(&corpus, &vocab)?;
            let graphs: Vec<HybridGraph> = doc.graphs().cloned().collect();
            let cv = CrossValidation {
                folds,
                feature_set: features,
                pipeline,
                seed,
                epochs,
            };
            let report = cross_validate(&graphs, &cv)?;
            out_raw!("{report}");
            report_lines(&report.key_values());
            out!("folds={folds}");
            out!("spec={features}");
            out!("pipeline={pipeline}");
            out!("seed={seed}");
            if let Some(min) = min_f1 {
                let f1 = to_f64(report.f1());
                if f1 < min {
                    return Err(Failure::Acceptance(format!("f1 {f1:.6} is below {min}")));
                }
            }
        }
        Command::Convert { input, direction, out } => {
            let doc = read_corpus(&input, &vocab)?;
            let mut converted = TreebankDocument::default();
            let (mut phrases, mut ecs, mut pronouns, mut lossy) = (0, 0, 0, 0);
            for (k, entry) in doc.entries.iter().enumerate() {
                let graph = match direction {
                    Direction2::ToPure => {
                        let (pure, report) = to_pure(&entry.graph)?;
                        phrases += report.converted_phrases;
                        ecs += report.converted_empty_categories;
                        pronouns += report.dropped_pronouns;
                        if report.lossy() {
                            lossy += 1;
                        }
                        for d in &report.loss_details {
                            out!("loss[{}]={d}", k + 1);
                        }
                        pure
                    }
                    Direction2::ToHybrid => {
                        let restored = from_pure(&entry.graph);
                        if !restored.errors.is_empty() {
                            lossy += 1;
                        }
                        for d in &restored.errors {
                            out!("loss[{}]={d}", k + 1);
                        }
                        restored.graph
                    }
                };
                let mut e = TreebankEntry::new(graph);
                e.comments = entry.comments.clone();
                converted.entries.push(e);
            }
            out!("graphs={}", doc.len());
            out!("converted_phrases={phrases}");
            out!("converted_empty_categories={ecs}");
            out!("dropped_pronouns={pronouns}");
            out!("lossy_graphs={lossy}");
            if let Some(out) = out {
                write_file(&out, &format_treebank(&converted))?;
            }
        }
        Command::OracleCheck { corpus, fixtures } => {
            if corpus.is_none() && fixtures.is_none() {
                return Err(Failure::Usage("give --corpus, --fixtures or both".into()));
            }
            let mut failures = Vec::new();
            if let Some(corpus) = corpus {
                let doc = read_corpus(&corpus, &vocab)?;
                let mut unreachable = 0;
                for (k, g) in doc.graphs().enumerate() {
                    let outcome = oracle_sequence(g)?;
                    if !outcome.reachable {
                        unreachable += 1;
                        continue;
                    }
                    let rebuilt = replay(g, &outcome.sequence)?;
                    if !rebuilt.graph.structurally_equal(g) {
                        failures.push(format!("graph {}: replay differs from gold", k + 1));
                    }
                }
                out!("graphs={}", doc.len());
                out!("unreachable={unreachable}");
            }
            if let Some(dir) = fixtures {
                let mut names: Vec<PathBuf> = std::fs::read_dir(&dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "transitions"))
                    .collect();
                names.sort();
                for t in &names {
                    let stem = t.with_extension("");
                    let own_vocab = stem.with_extension("vocab");
                    let v = if own_vocab.exists() { Vocabulary::load(&own_vocab)? } else { vocab.clone() };
                    let gold = read_corpus(&stem.with_extension("conllx"), &v)?;
                    let expected = parse_sequence(&std::fs::read_to_string(t)?)?;
                    let name = stem.file_name().unwrap_or_default().to_string_lossy().to_string();
                    let Some(entry) = gold.entries.first() else {
                        failures.push(format!("{name}: no graph"));
                        continue;
                    };
                    let outcome = oracle_sequence(&entry.graph)?;
                    let ok = outcome.sequence == expected && outcome.reachable;
                    out!("fixture[{name}]={}", if ok { "pass" } else { "fail" });
                    if !ok {
                        failures.push(format!(
                            "{name}: expected {} transitions, oracle gave:\n{}",
                            expected.len(),
                            format_sequence(&outcome.sequence)
                        ));
                    }
                }
            }
            if !failures.is_empty() {
                return Err(Failure::Acceptance(failures.join("\n")));
            }
        }
        Command::Synth {
            seed,
            count,
            profile,
            out,
        } => {
            if count == 0 {
                return Err(Failure::Usage("--count must be at least 1".into()));
            }
            let doc = generate(seed, count, profile);
            write_file(&out, &format_treebank(&doc))?;
            out!("graphs={count}");
            out!("profile={profile}");
            out!("seed={seed}");
        }
        Command::Render {
            input,
            format,
            out,
            ltr,
        } => {
            let doc = read_corpus(&input, &vocab)?;
            std::fs::create_dir_all(&out)?;
            let direction = if ltr { Direction::LeftToRight } else { Direction::RightToLeft };
            let ext = match format {
                Format::Svg => "svg",
                Format::Dot => "dot",
            };
            for (k, g) in doc.graphs().enumerate() {
                let tree = layout_with(g, &BTreeMap::new(), direction, Style::default());
                write_file(&out.join(format!("graph-{:04}.{ext}", k + 1)), &emit(&tree, format))?;
            }
            out!("documents={}", doc.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let args = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(f) => return fail(f),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let (code, msg) = match f {
        Failure::Usage(m) => (1, m),
        Failure::Data(m) => (2, m),
        Failure::Acceptance(m) => (3, m),
    };
    eprintln!("error: {msg}");
    ExitCode::from(code)
}
