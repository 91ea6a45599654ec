//! `affordance` command-line driver.
//!
//! Every command resolves one [`RunConfig`] (file plus flag overrides), echoes
//! it as `config.json` into its output directory and is deterministic given
//! that file. Exit codes: 0 success, 2 usage or configuration error, 1 runtime
//! failure.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use social_affordance::data::{load_dataset, save_dataset, save_sequence, Dataset};
use social_affordance::inference::{dp_parse, SegmentCap};
use social_affordance::learning::{learn, Variant};
use social_affordance::model::{InteractionModel, SceneTrack};
use social_affordance::synthbench::{
    generate_synthetic, model_boundary_recovery, run_suite, sequence_distance, Method, ScenarioKind,
};
use social_affordance::synthesis::synthesize;

pub use config::{RunConfig, ScenarioSection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CONFIG_ECHO: &str = social_affordance::data::CONFIG_FILE;

#[derive(Debug, Parser)]
#[command(name = "affordance", version, about = "Learn and synthesize two-agent social affordances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset of one scenario.
    GenData {
        #[command(flatten)]
        common: Common,
        /// Scenario kind, e.g. handshake.
        #[arg(long)]
        scenario: Option<String>,
        /// Number of instances.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        pool: Option<PoolArg>,
    },
    /// Learn one model per interaction label of a dataset.
    Learn {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Decode sub-event parses of a dataset under a model.
    Parse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Synthesize agent 2 for every sequence of a dataset.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also write a JSON-lines trace of every synthesis step.
        #[arg(long)]
        trace: bool,
    },
    /// Run the synthetic benchmark over all methods.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Restrict to these scenarios (repeatable).
        #[arg(long)]
        scenario: Vec<String>,
        /// Exit nonzero when the expected method ordering does not hold.
        #[arg(long)]
        check_ordering: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    V1,
    V2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PoolArg {
    Train,
    Test,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<social_affordance::Error> for Failure {
    fn from(e: social_affordance::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::GenData {
            common,
            scenario,
            n,
            pool,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(s) = scenario {
                cfg.scenario.kind = s;
            }
            if let Some(n) = n {
                cfg.scenario.n = n;
            }
            if let Some(p) = pool {
                cfg.scenario.pool = match p {
                    PoolArg::Train => social_affordance::synthbench::ActorPool::Train,
                    PoolArg::Test => social_affordance::synthbench::ActorPool::Test,
                };
            }
            cmd_gen_data(&cfg.resolve(), &common.out)
        }
        Command::Learn { common, data, variant } => {
            let mut cfg = base_config(&common)?;
            cfg.data = data.or(cfg.data);
            if let Some(v) = variant {
                cfg.variant = match v {
                    VariantArg::Full => Variant::Full,
                    VariantArg::V1 => Variant::V1,
                    VariantArg::V2 => Variant::V2,
                };
            }
            cmd_learn(&cfg.resolve(), &common.out)
        }
        Command::Parse { common, data, model } => {
            let mut cfg = base_config(&common)?;
            cfg.data = data.or(cfg.data);
            cfg.model = model.or(cfg.model);
            cmd_parse(&cfg.resolve(), &common.out)
        }
        Command::Synthesize {
            common,
            data,
            model,
            trace,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.data = data.or(cfg.data);
            cfg.model = model.or(cfg.model);
            cfg.trace |= trace;
            cmd_synthesize(&cfg.resolve(), &common.out)
        }
        Command::Evaluate {
            common,
            scenario,
            check_ordering,
        } => {
            let mut cfg = base_config(&common)?;
            if !scenario.is_empty() {
                cfg.suite.scenarios = scenario
                    .iter()
                    .map(|s| scenario_kind(s))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            cmd_evaluate(&cfg.resolve(), &common.out, check_ordering)
        }
    }
}

fn base_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn scenario_kind(name: &str) -> Result<ScenarioKind, Failure> {
    ScenarioKind::from_name(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown scenario '{name}'; valid kinds: {}",
            ScenarioKind::valid_names()
        ))
    })
}

fn existing_path(p: &Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    match p {
        None => Err(Failure::Usage(format!("--{what} is required"))),
        Some(p) if !p.exists() => Err(Failure::Usage(format!("{what} path {} does not exist", p.display()))),
        Some(p) => Ok(p.clone()),
    }
}

fn prepare_out(cfg: &RunConfig, out: &Path) -> CmdResult {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join(CONFIG_ECHO), &cfg.to_json())
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_data(cfg: &RunConfig) -> Result<Dataset, Failure> {
    let dir = existing_path(&cfg.data, "data")?;
    Ok(load_dataset(&dir).with_context(|| format!("loading dataset {}", dir.display()))?)
}

fn load_model(cfg: &RunConfig) -> Result<InteractionModel, Failure> {
    let path = existing_path(&cfg.model, "model")?;
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InteractionModel::from_json(&text).with_context(|| format!("parsing model {}", path.display()))?)
}

/// Sequences of the model's category; any other label is an error.
fn matching_sequences<'a>(
    ds: &'a Dataset,
    model: &InteractionModel,
) -> Result<Vec<&'a social_affordance::data::InteractionSequence>, Failure> {
    if let Some(s) = ds.sequences.iter().find(|s| s.label != model.label) {
        return Err(social_affordance::Error::LabelMismatch {
            expected: model.label.clone(),
            found: format!("{} (sequence {})", s.label, s.id),
        }
        .into());
    }
    Ok(ds.sequences.iter().collect())
}

fn cmd_gen_data(cfg: &RunConfig, out: &Path) -> CmdResult {
    let kind = scenario_kind(&cfg.scenario.kind)?;
    let sc = cfg.scenario.scenario_config().expect("kind checked above");
    debug_assert_eq!(sc.kind, kind);
    let ds = generate_synthetic(&sc, cfg.scenario.n, cfg.seed)?;
    prepare_out(cfg, out)?;
    save_dataset(&ds, out)?;
    println!("wrote {} {} instances to {}", ds.sequences.len(), kind.name(), out.display());
    Ok(())
}

fn cmd_learn(cfg: &RunConfig, out: &Path) -> CmdResult {
    let ds = load_data(cfg)?;
    let mut learn_cfg = cfg.learn.clone();
    learn_cfg.num_categories = ds.dictionary.len().max(1);
    learn_cfg.validate()?;
    prepare_out(cfg, out)?;
    for label in &ds.dictionary {
        let seqs: Vec<_> = ds.with_label(label).cloned().collect();
        if seqs.is_empty() {
            continue;
        }
        let outcome = learn(&seqs, &learn_cfg).with_context(|| format!("learning '{label}'"))?;
        write_file(&out.join(format!("model_{label}.json")), &outcome.model.to_json()?)?;
        let trace = serde_json::to_string_pretty(&outcome.trace).context("serializing trace")?;
        write_file(&out.join(format!("trace_{label}.json")), &trace)?;
        println!(
            "{label}: {} sequences, {} sub-events, best log-prob {:.4}",
            seqs.len(),
            outcome.model.num_subevents,
            outcome.best_log_prob
        );
    }
    Ok(())
}

/// A decoded parse; loads directly as annotations.
#[derive(Serialize)]
struct ParseFile<'a> {
    id: &'a str,
    label: &'a str,
    /// `null` when no parse has finite probability.
    log_posterior: Option<f64>,
    intervals: Vec<[u32; 2]>,
    labels: Vec<u32>,
}

fn cmd_parse(cfg: &RunConfig, out: &Path) -> CmdResult {
    let ds = load_data(cfg)?;
    let model = load_model(cfg)?;
    let seqs = matching_sequences(&ds, &model)?;
    prepare_out(cfg, out)?;
    for seq in &seqs {
        let track = SceneTrack::from_sequence(seq);
        let dp = dp_parse(&track, &model, SegmentCap::DurationPrior).with_context(|| format!("parsing {}", seq.id))?;
        let ann = dp.parse.to_annotations();
        let file = ParseFile {
            id: &seq.id,
            label: &seq.label,
            log_posterior: dp.log_posterior.is_finite().then_some(dp.log_posterior),
            intervals: ann.intervals,
            labels: ann.labels,
        };
        let text = serde_json::to_string_pretty(&file).context("serializing parse")?;
        write_file(&out.join(format!("{}.parse.json", seq.id)), &text)?;
    }
    let annotated: Vec<_> = seqs.iter().filter(|s| s.annotations.is_some()).map(|s| (*s).clone()).collect();
    if annotated.is_empty() {
        println!("parsed {} sequences", seqs.len());
    } else {
        let tol = cfg.suite.boundary_tol;
        let rate = model_boundary_recovery(&model, &annotated, tol)?;
        println!(
            "parsed {} sequences; boundary recovery (±{tol} frames) {:.3}",
            seqs.len(),
            rate
        );
    }
    Ok(())
}

fn cmd_synthesize(cfg: &RunConfig, out: &Path) -> CmdResult {
    cfg.synthesis.validate()?;
    let ds = load_data(cfg)?;
    let model = load_model(cfg)?;
    let seqs = matching_sequences(&ds, &model)?;
    let t0 = cfg.synthesis.t0;
    if let Some(s) = seqs.iter().find(|s| s.len() < t0 as usize) {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "sequence {} has {} frames, fewer than the {t0} warm-start frames",
            s.id,
            s.len()
        )));
    }
    prepare_out(cfg, out)?;
    let mut total = 0.0;
    for seq in &seqs {
        let result = synthesize(seq, &model, &cfg.synthesis).with_context(|| format!("synthesizing {}", seq.id))?;
        save_sequence(&result.sequence, &out.join(format!("{}.json", seq.id)))?;
        if cfg.trace {
            let mut lines = String::new();
            for step in &result.trace {
                lines.push_str(&serde_json::to_string(step).context("serializing trace")?);
                lines.push('\n');
            }
            write_file(&out.join(format!("{}.trace.jsonl", seq.id)), &lines)?;
        }
        let d = sequence_distance(&result.sequence, seq, t0 as usize)?;
        total += d;
        println!("{}: average joint distance {:.4}", seq.id, d);
    }
    if !seqs.is_empty() {
        println!("mean over {} sequences {:.4}", seqs.len(), total / seqs.len() as f64);
    }
    Ok(())
}

fn cmd_evaluate(cfg: &RunConfig, out: &Path, check_ordering: bool) -> CmdResult {
    let report = run_suite(&cfg.suite, &Method::ALL)?;
    prepare_out(cfg, out)?;
    write_file(&out.join("report.json"), &report.to_json()?)?;
    let table = report.to_csv();
    write_file(&out.join("table.csv"), &table)?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(table.as_bytes());
    for note in &report.notes {
        let _ = writeln!(stdout, "note: {note}");
    }
    if check_ordering {
        let violations = report.ordering_violations();
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("ordering violated: {v}");
            }
            return Err(Failure::Runtime(anyhow::anyhow!(
                "{} ordering check(s) failed",
                violations.len()
            )));
        }
        let _ = writeln!(stdout, "ordering holds");
    }
    Ok(())
}
