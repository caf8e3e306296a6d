use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use agent_miner::composer::{discover, verify_bundle, ComposerOptions, DfgMiner, InductiveMiner, NetDiscovery};
use agent_miner::conformance::measure;
use agent_miner::log_io::{write_csv, ColumnMapping, GeneratorConfig, TimestampFormat, XesKeys};
use agent_miner::petri::{from_pnml, is_safe, is_sound, to_dot, to_pnml, DEFAULT_STATE_BOUND};
use agent_miner::typing::DEFAULT_DISTANCE_THRESHOLD;
use agent_miner::{EventLog, Naming};
use agent_miner_cli::config::{am_model_id, default_cm_thresholds, diagonal_pairs, parse_pairs, SweepConfig};
use agent_miner_cli::pipeline::{bundle_artifacts, prepare, read_results, write_artifacts, write_fronts, write_manifest_json, write_results, Miner, ResultRow};
use agent_miner_cli::{run_pipeline, Source};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "agent-miner", version, about = "Discover multi-agent system nets from event logs and evaluate them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded health surveillance log as CSV.
    Generate(GenerateArgs),
    /// One Agent Miner run; writes the interaction, agent and MAS nets.
    Discover(DiscoverArgs),
    /// One inductive baseline run on the case log.
    Baseline(BaselineArgs),
    /// Recall, precision and size of a PNML net against a log.
    Measure(MeasureArgs),
    /// The full parameter sweep with results, Pareto fronts and models.
    Pipeline(PipelineArgs),
    /// Recompute Pareto fronts from a results CSV.
    Pareto(ParetoArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1024)]
    cases: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Let tests and therapy events of a round overlap in time.
    #[arg(long)]
    interleave: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// CSV or XES (by extension) event log.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value = "case")]
    case_column: String,
    #[arg(long, default_value = "activity")]
    activity_column: String,
    #[arg(long, default_value = "agent")]
    agent_column: String,
    #[arg(long, default_value = "timestamp")]
    timestamp_column: String,
    /// auto, rfc3339, epoch-ms or a strftime pattern.
    #[arg(long, default_value = "auto")]
    timestamp_format: String,
    #[arg(long, default_value = "concept:name")]
    xes_case_key: String,
    #[arg(long, default_value = "concept:name")]
    xes_activity_key: String,
    #[arg(long, default_value = "org:resource")]
    xes_agent_key: String,
    #[arg(long, default_value = "time:timestamp")]
    xes_timestamp_key: String,
}

impl InputArgs {
    fn source(&self) -> Source {
        let timestamp_format: TimestampFormat = self.timestamp_format.parse().unwrap_or_default();
        Source::File {
            path: self.input.clone(),
            mapping: ColumnMapping {
                case_column: self.case_column.clone(),
                activity_column: self.activity_column.clone(),
                agent_column: self.agent_column.clone(),
                timestamp_column: self.timestamp_column.clone(),
                timestamp_format,
            },
            xes: XesKeys {
                case: self.xes_case_key.clone(),
                activity: self.xes_activity_key.clone(),
                agent: self.xes_agent_key.clone(),
                timestamp: self.xes_timestamp_key.clone(),
            },
        }
    }
}

#[derive(Args, Clone)]
struct SelectionArgs {
    /// Share of traces kept by the variant frequency filter.
    #[arg(long, default_value_t = 1.0)]
    vff: f64,
    #[arg(long, default_value_t = DEFAULT_DISTANCE_THRESHOLD)]
    distance_threshold: f64,
    /// Treat every agent instance as its own type.
    #[arg(long)]
    no_typing: bool,
    #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
    state_bound: usize,
}

impl SelectionArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            vff: self.vff,
            distance_threshold: self.distance_threshold,
            type_agents: !self.no_typing,
            state_bound: self.state_bound,
            ..SweepConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentDiscovery {
    Dfg,
    Inductive,
}

#[derive(Args)]
struct DiscoverArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    selection: SelectionArgs,
    /// Agent net parameter: activity share for dfg, noise for inductive.
    #[arg(long, default_value_t = 1.0)]
    ff: f64,
    /// Noise threshold of the interaction net discovery.
    #[arg(long, default_value_t = 0.0)]
    th: f64,
    #[arg(long, value_enum, default_value = "dfg")]
    anda: AgentDiscovery,
    /// Keep iterations of observable transitions in the interaction net.
    #[arg(long)]
    keep_iterations: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value_t = 0.0)]
    th: f64,
    #[arg(long, default_value = "aol")]
    naming: Naming,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// Workflow net in PNML.
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value = "aal")]
    naming: Naming,
    /// Strip agents from `agent|activity` labels before measuring.
    #[arg(long)]
    rewrite_labels: bool,
}

#[derive(Args)]
struct PipelineArgs {
    /// Event log; without it a health log is generated from --cases and --seed.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "case")]
    case_column: String,
    #[arg(long, default_value = "activity")]
    activity_column: String,
    #[arg(long, default_value = "agent")]
    agent_column: String,
    #[arg(long, default_value = "timestamp")]
    timestamp_column: String,
    #[arg(long, default_value = "auto")]
    timestamp_format: String,
    #[arg(long, default_value = "org:resource")]
    xes_agent_key: String,
    #[arg(long, default_value_t = 1024)]
    cases: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    selection: SelectionArgs,
    /// Agent Miner pairs as ff:th,ff:th,... (default: the diagonal (i/10, 1 - i/10)).
    #[arg(long)]
    am_pairs: Option<String>,
    /// Comma separated baseline thresholds (default 0.0 to 0.9 by 0.1).
    #[arg(long, value_delimiter = ',')]
    cm_thresholds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "aol,aal")]
    namings: Vec<Naming>,
    #[arg(long)]
    keep_iterations: bool,
    #[arg(long, env = "AGENT_MINER_WORKERS")]
    workers: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

fn generate(a: GenerateArgs) -> Result<()> {
    let config = GeneratorConfig {
        cases: a.cases,
        seed: a.seed,
        interleave: a.interleave,
        ..GeneratorConfig::default()
    };
    let selection = agent_miner::log_io::generate_health_log(&config)?;
    write_csv(&selection, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("{} events in {} cases written to {}", selection.len(), a.cases, a.out.display());
    Ok(())
}

fn run_discover(a: DiscoverArgs) -> Result<()> {
    let config = a.selection.config();
    let prepared = prepare(&a.input.source().load().context("select events")?, &config)?;
    let anda: &dyn NetDiscovery = match a.anda {
        AgentDiscovery::Dfg => &DfgMiner,
        AgentDiscovery::Inductive => &InductiveMiner,
    };
    let options = ComposerOptions {
        remove_iterations: !a.keep_iterations,
        state_bound: config.state_bound,
    };
    let bundle = discover(&prepared.selection, anda, &InductiveMiner, a.ff, a.th, options)?;
    let report = verify_bundle(&bundle, config.state_bound)?;
    let id = am_model_id(a.ff, a.th);
    let (artifacts, entry) = bundle_artifacts(&id, &bundle, &report);
    write_artifacts(&artifacts, &a.out)?;
    write_manifest_json(&entry, &a.out.join("manifest.json"))?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    for v in &report.verdicts {
        println!("{}\tsafe={:?}\tsound={:?}", v.net, v.safe, v.sound);
    }
    if !report.all_hold() {
        bail!("nets failing safeness or soundness: {}", report.failing().join(", "));
    }
    Ok(())
}

fn run_baseline(a: BaselineArgs) -> Result<()> {
    let config = a.selection.config();
    let prepared = prepare(&a.input.source().load().context("select events")?, &config)?;
    let log = EventLog::from_cases(prepared.selection, a.naming);
    let net = InductiveMiner.discover(&log, a.th).map_err(|e| anyhow!(e))?;
    fs::create_dir_all(&a.out)?;
    let name = format!("cm-{}", a.naming.as_str().to_ascii_lowercase());
    fs::write(a.out.join(format!("{name}.pnml")), to_pnml(&net, &name))?;
    fs::write(a.out.join(format!("{name}.dot")), to_dot(&net, &name))?;
    let quality = measure(&net, &log, config.state_bound)?;
    let row = ResultRow {
        model_id: name,
        miner: Miner::Conventional,
        naming: a.naming,
        ff: None,
        th: a.th,
        quality,
        safe: is_safe(&net, config.state_bound).ok(),
        sound: is_sound(&net, config.state_bound).ok(),
    };
    write_results(&[row], io::stdout().lock())
}

fn run_measure(a: MeasureArgs) -> Result<()> {
    let text = fs::read_to_string(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    let mut net = from_pnml(&text)?;
    if a.rewrite_labels {
        net = net.rewrite_labels_to_activity();
    }
    let config = a.selection.config();
    let prepared = prepare(&a.input.source().load().context("select events")?, &config)?;
    let log = EventLog::from_cases(prepared.selection, a.naming);
    let quality = measure(&net, &log, config.state_bound)?;
    let row = ResultRow {
        model_id: a.net.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        miner: Miner::AgentMiner,
        naming: a.naming,
        ff: None,
        th: 0.0,
        quality,
        safe: is_safe(&net, config.state_bound).ok(),
        sound: is_sound(&net, config.state_bound).ok(),
    };
    write_results(&[row], io::stdout().lock())
}

fn run_sweep(a: PipelineArgs) -> Result<()> {
    let source = match &a.input {
        Some(path) => InputArgs {
            input: path.clone(),
            case_column: a.case_column.clone(),
            activity_column: a.activity_column.clone(),
            agent_column: a.agent_column.clone(),
            timestamp_column: a.timestamp_column.clone(),
            timestamp_format: a.timestamp_format.clone(),
            xes_case_key: "concept:name".into(),
            xes_activity_key: "concept:name".into(),
            xes_agent_key: a.xes_agent_key.clone(),
            xes_timestamp_key: "time:timestamp".into(),
        }
        .source(),
        None => Source::Generated(GeneratorConfig {
            cases: a.cases,
            seed: a.seed,
            ..GeneratorConfig::default()
        }),
    };
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = SweepConfig {
        am_pairs: a.am_pairs.as_deref().map(parse_pairs).transpose()?.unwrap_or_else(diagonal_pairs),
        cm_thresholds: a.cm_thresholds.clone().unwrap_or_else(default_cm_thresholds),
        namings: a.namings.clone(),
        seed: a.seed,
        remove_iterations: !a.keep_iterations,
        workers,
        ..a.selection.config()
    };
    let run = run_pipeline(&source, &config, &a.out)?;
    eprintln!("{} rows written to {}", run.rows.len(), run.results_path.display());
    Ok(())
}

fn run_pareto(a: ParetoArgs) -> Result<()> {
    let file = fs::File::open(&a.results).with_context(|| format!("reading {}", a.results.display()))?;
    let rows = read_results(file)?;
    fs::create_dir_all(&a.out)?;
    for f in write_fronts(&rows, &a.out)? {
        println!("{}", a.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Discover(a) => run_discover(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Measure(a) => run_measure(a),
        Command::Pipeline(a) => run_sweep(a),
        Command::Pareto(a) => run_pareto(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
