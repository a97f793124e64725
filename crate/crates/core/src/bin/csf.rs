//! `csf`: train, replay and evaluate cognitive status filters.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 input that
//! parses but fails validation (unknown ids, inconsistent files).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cognitive_status::eval::{
    self, compare_models, evaluate, format_p, mcnemar_exact_p, render_pairs, render_text,
    EvalConfig, EvalData, Familiarity, ModelKind, PairResult,
};
use cognitive_status::filter::{init_filter, UpdateMode};
use cognitive_status::io::{self, read_file};
use cognitive_status::status::{argmax_status, row_label};
use cognitive_status::train::{train, Exclusions};
use cognitive_status::{DecayPolicy, DialogueId, Error, ObjectId, StatusDistribution};

#[derive(Parser)]
#[command(name = "csf", version, about = "Cognitive status filter toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a conditional status table from a corpus and responses.
    Train(TrainArgs),
    /// Replay one object's filter through a dialogue.
    Predict(PredictArgs),
    /// Leave-one-out evaluation of the filter models and baselines.
    Evaluate(EvaluateArgs),
    /// Contingency tables and McNemar tests from a stored report.
    Compare(CompareArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Additive smoothing constant.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long = "exclude-object")]
    exclude_objects: Vec<String>,
    #[arg(long = "exclude-dialogue")]
    exclude_dialogues: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    dialogue: String,
    #[arg(long)]
    object: String,
    /// uniform, informed, or three comma-separated probabilities I,A,F.
    #[arg(long, default_value = "uniform")]
    prior: String,
    #[arg(long, default_value = "soft")]
    mode: UpdateMode,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    /// Comma-separated subset of u, i, fsm, rb.
    #[arg(long, default_value = "u,i,fsm,rb")]
    models: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "soft")]
    mode: UpdateMode,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value = "decay-one")]
    fsm_decay: DecayPolicy,
    #[arg(long, default_value = "scene")]
    familiarity: Familiarity,
    /// Leave cells whose majority label is tied out of scoring.
    #[arg(long)]
    exclude_tied_gold: bool,
    /// Worker threads for the fold loop (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    report: PathBuf,
    /// A pair `a,b`; repeatable. Defaults to every pair in the report.
    #[arg(long = "pairs")]
    pairs: Vec<String>,
    /// Also print the exact binomial p-value (not the default test).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn semantic(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        Self {
            code: if e.is_parse_error() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// A closed stdout (`csf ... | head`) ends the command quietly.
fn stdout_failure(e: std::io::Error) -> Failure {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        Failure {
            code: 0,
            message: String::new(),
        }
    } else {
        Failure {
            code: 2,
            message: format!("cannot write to stdout: {e}"),
        }
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        writeln!(std::io::stdout(), $($arg)*).map_err(stdout_failure)?
    }};
}

macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        write!(std::io::stdout(), $($arg)*).map_err(stdout_failure)?
    }};
}

fn init_logging() {
    let level = match std::env::var("CSF_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Error,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn write_output(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents).map_err(|e| Failure {
        code: 2,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    outln!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
    Ok(())
}

fn parse_prior(s: &str) -> Result<StatusDistribution, Failure> {
    match s {
        "uniform" => Ok(eval::uniform_prior()),
        "informed" => Ok(eval::informed_prior()),
        custom => {
            let parts: Vec<f64> = custom
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::semantic(format!("bad prior {custom:?}: {e}")))?;
            let [i, a, f]: [f64; 3] = parts
                .try_into()
                .map_err(|_| Failure::semantic(format!("prior {custom:?} needs three values")))?;
            Ok(StatusDistribution::new(i, a, f)?)
        }
    }
}

fn load_corpus(path: &Path) -> Result<io::DialogueCorpus, Failure> {
    Ok(io::parse_corpus(&read_file(path)?)?)
}

#[derive(Serialize)]
struct RowAudit {
    row: &'static str,
    probs: [f64; 3],
    counts: Option<[u64; 3]>,
    sum: f64,
}

#[derive(Serialize)]
struct TrainSummary {
    out: String,
    rows: Vec<RowAudit>,
    fallback_rows: Vec<&'static str>,
    missing_pairs: usize,
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let corpus = load_corpus(&args.corpus)?;
    let responses = io::parse_responses(&read_file(&args.responses)?, &corpus)?;
    let mut excl = Exclusions::none();
    for o in &args.exclude_objects {
        let id = ObjectId::new(o.as_str()).filter(|id| corpus.has_object(id));
        excl.objects
            .insert(id.ok_or_else(|| Failure::semantic(format!("unknown object {o:?}")))?);
    }
    for d in &args.exclude_dialogues {
        let id = DialogueId::new(d.as_str()).filter(|id| corpus.dialogue(id).is_some());
        excl.dialogues
            .insert(id.ok_or_else(|| Failure::semantic(format!("unknown dialogue {d:?}")))?);
    }
    let trained = train(&corpus, &responses.responses, &excl, args.alpha)?;
    write_output(&args.out, &io::write_table(&trained.table))?;

    let rows: Vec<RowAudit> = trained
        .table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let probs = r.dist.as_array();
            RowAudit {
                row: row_label(i),
                probs,
                counts: r.counts,
                sum: probs.iter().sum(),
            }
        })
        .collect();
    if args.json {
        print_json(&TrainSummary {
            out: args.out.display().to_string(),
            rows,
            fallback_rows: trained.fallback_rows,
            missing_pairs: trained.missing_pairs.len(),
        })?;
        return Ok(());
    }
    outln!(
        "{:<6} {:>8} {:>8} {:>8} {:>14}  {}",
        "row",
        "I",
        "A",
        "F",
        "sum",
        "counts"
    );
    for r in &rows {
        let counts = r.counts.map_or_else(
            || "-".to_string(),
            |c| format!("{} {} {}", c[0], c[1], c[2]),
        );
        outln!(
            "{:<6} {:>8.4} {:>8.4} {:>8.4} {:>14.12}  {}",
            r.row,
            r.probs[0],
            r.probs[1],
            r.probs[2],
            r.sum,
            counts
        );
    }
    if !trained.fallback_rows.is_empty() {
        outln!("uniform fallback rows: {}", trained.fallback_rows.join(" "));
    }
    outln!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct PredictStep {
    utterance: u32,
    linguistic: cognitive_status::LinguisticStatus,
    belief: [f64; 3],
    status: cognitive_status::CognitiveStatus,
}

#[derive(Serialize)]
struct PredictOutput {
    dialogue: DialogueId,
    object: ObjectId,
    mode: UpdateMode,
    prior: [f64; 3],
    prior_status: cognitive_status::CognitiveStatus,
    steps: Vec<PredictStep>,
}

fn cmd_predict(args: PredictArgs) -> CmdResult {
    let table = io::read_table(&read_file(&args.table)?)?;
    let corpus = load_corpus(&args.corpus)?;
    let dialogue = DialogueId::new(args.dialogue.as_str())
        .and_then(|id| corpus.dialogue(&id))
        .ok_or_else(|| Failure::semantic(format!("unknown dialogue {:?}", args.dialogue)))?;
    let object = ObjectId::new(args.object.as_str())
        .filter(|o| corpus.has_object(o))
        .ok_or_else(|| Failure::semantic(format!("unknown object {:?}", args.object)))?;
    let prior = parse_prior(&args.prior)?;

    let mut filter = init_filter(object.clone(), prior, Arc::new(table), args.mode);
    let mut steps = Vec::with_capacity(dialogue.utterances.len());
    for u in &dialogue.utterances {
        let ling = corpus.linguistic_status(&object, &dialogue.id, u.index);
        let belief = filter.update(ling).map_err(Error::from)?;
        steps.push(PredictStep {
            utterance: u.index.get(),
            linguistic: ling,
            belief: belief.as_array(),
            status: argmax_status(&belief),
        });
    }
    let out = PredictOutput {
        dialogue: dialogue.id.clone(),
        object,
        mode: args.mode,
        prior: prior.as_array(),
        prior_status: argmax_status(&prior),
        steps,
    };
    if args.json {
        print_json(&out)?;
        return Ok(());
    }
    let fmt = |p: [f64; 3]| format!("({:.4}, {:.4}, {:.4})", p[0], p[1], p[2]);
    outln!("prior    {}  {}", fmt(out.prior), out.prior_status);
    for s in &out.steps {
        outln!(
            "U{:<3} {}  {}  {}",
            s.utterance,
            s.linguistic,
            fmt(s.belief),
            s.status
        );
    }
    Ok(())
}

fn parse_models(list: &str) -> Result<Vec<ModelKind>, Failure> {
    list.split(',')
        .map(|m| ModelKind::parse(m.trim()).map_err(Failure::from))
        .collect()
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    let corpus = load_corpus(&args.corpus)?;
    let responses = io::parse_responses(&read_file(&args.responses)?, &corpus)?;
    let models = parse_models(&args.models)?;
    if args.alpha.is_nan() || args.alpha < 0.0 {
        return Err(Failure::semantic("--alpha must be >= 0"));
    }
    let config = EvalConfig {
        mode: args.mode,
        alpha: args.alpha,
        fsm_decay: args.fsm_decay,
        seed: args.seed,
        familiarity: args.familiarity,
        exclude_tied_gold: args.exclude_tied_gold,
    };
    let data = EvalData::prepare(corpus, &responses.responses)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::semantic(format!("thread pool: {e}")))?;
    let report = pool.install(|| evaluate(&data, &models, &config))?;
    let text = io::write_report(&report);
    write_output(&args.out, &text)?;
    if args.json {
        out!("{text}");
    } else {
        out!("{}", render_text(&report));
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow<'a> {
    #[serde(flatten)]
    pair: &'a PairResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_p: Option<f64>,
}

fn cmd_compare(args: CompareArgs) -> CmdResult {
    let report = io::parse_report(&read_file(&args.report)?)?;
    let mut requested = Vec::new();
    if args.pairs.is_empty() {
        let names = &report.config.models;
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                requested.push((names[i], names[j]));
            }
        }
    }
    for p in &args.pairs {
        let models = parse_models(p)?;
        let [a, b]: [ModelKind; 2] = models
            .try_into()
            .map_err(|_| Failure::semantic(format!("pair {p:?} must name two models")))?;
        requested.push((a, b));
    }
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (a, b) in requested {
        if seen.insert((a.name(), b.name())) {
            pairs.push(compare_models(&report, a, b)?);
        }
    }
    let exact: Vec<Option<f64>> = pairs
        .iter()
        .map(|p| args.exact.then(|| mcnemar_exact_p(&p.contingency)))
        .collect();
    if args.json {
        let rows: Vec<CompareRow> = pairs
            .iter()
            .zip(&exact)
            .map(|(pair, exact_p)| CompareRow {
                pair,
                exact_p: *exact_p,
            })
            .collect();
        print_json(&rows)?;
        return Ok(());
    }
    out!("{}", render_pairs(&pairs));
    if args.exact {
        outln!();
        outln!("Exact binomial McNemar (not the continuity-corrected test above)");
        for (p, e) in pairs.iter().zip(&exact) {
            let name = format!("{}, {}", p.model1.label(), p.model2.label());
            outln!("{:<22} {:>9}", name, format_p(e.expect("exact requested")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
