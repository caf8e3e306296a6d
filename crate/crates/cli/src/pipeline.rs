//! The evaluation sweep: select events, type agents, discover Agent Miner
//! (AM) and conventional miner (CM) models, measure them, write artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use agent_miner::composer::{discover, verify_bundle, BundleReport, ComposerOptions, DfgMiner, DiscoveryBundle, InductiveMiner, NetDiscovery};
use agent_miner::conformance::{measure, QualityReport};
use agent_miner::log_io::variant_frequency_filter;
use agent_miner::petri::{is_safe, is_sound, to_dot, to_pnml};
use agent_miner::typing::{type_agents, AgentTypeAssignment};
use agent_miner::{EventLog, EventSelection, Naming, WorkflowNet};
use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{am_model_id, cm_model_id, format_param, SweepConfig};
use crate::input::{Source, SourceInfo};
use crate::pareto::{pareto_front, Axes, Point};

pub const RESULT_COLUMNS: [&str; 13] = [
    "model_id",
    "miner",
    "naming",
    "ff",
    "th",
    "size",
    "recall",
    "precision",
    "ent_log",
    "ent_model",
    "ent_intersection",
    "safe",
    "sound",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Miner {
    #[serde(rename = "AM")]
    AgentMiner,
    #[serde(rename = "CM")]
    Conventional,
}

impl Miner {
    pub fn as_str(self) -> &'static str {
        match self {
            Miner::AgentMiner => "AM",
            Miner::Conventional => "CM",
        }
    }
}

/// One measured (model, naming) combination. `None` verdicts could not be
/// decided within the state bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model_id: String,
    pub miner: Miner,
    pub naming: Naming,
    pub ff: Option<f64>,
    pub th: f64,
    pub quality: QualityReport,
    pub safe: Option<bool>,
    pub sound: Option<bool>,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_verdict(v: Option<bool>) -> String {
    v.map_or("unknown".into(), |b| b.to_string())
}

fn parse_verdict(s: &str) -> Result<Option<bool>> {
    match s {
        "true" => Ok(Some(true)),
        "false" => Ok(Some(false)),
        "unknown" => Ok(None),
        other => bail!("bad verdict '{other}'"),
    }
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        let q = &self.quality;
        vec![
            self.model_id.clone(),
            self.miner.as_str().into(),
            self.naming.as_str().into(),
            self.ff.map(format_param).unwrap_or_default(),
            format_param(self.th),
            q.size.to_string(),
            fmt_float(q.recall),
            fmt_float(q.precision),
            fmt_float(q.ent_log),
            fmt_float(q.ent_model),
            fmt_float(q.ent_intersection),
            fmt_verdict(self.safe),
            fmt_verdict(self.sound),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<ResultRow> {
        let field = |k: usize| r.get(k).ok_or_else(|| anyhow!("missing column {}", RESULT_COLUMNS[k]));
        let miner = match field(1)? {
            "AM" => Miner::AgentMiner,
            "CM" => Miner::Conventional,
            other => bail!("bad miner '{other}'"),
        };
        let ff = match field(3)? {
            "" => None,
            s => Some(s.parse()?),
        };
        Ok(ResultRow {
            model_id: field(0)?.to_string(),
            miner,
            naming: field(2)?.parse().map_err(|e: String| anyhow!(e))?,
            ff,
            th: field(4)?.parse()?,
            quality: QualityReport {
                size: field(5)?.parse()?,
                recall: field(6)?.parse()?,
                precision: field(7)?.parse()?,
                ent_log: field(8)?.parse()?,
                ent_model: field(9)?.parse()?,
                ent_intersection: field(10)?.parse()?,
            },
            safe: parse_verdict(field(11)?)?,
            sound: parse_verdict(field(12)?)?,
        })
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULT_COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<&str> = r.headers()?.iter().collect();
    if header != RESULT_COLUMNS {
        bail!("unexpected results header {header:?}");
    }
    r.records()
        .enumerate()
        .map(|(k, rec)| ResultRow::from_record(&rec?).with_context(|| format!("results row {}", k + 1)))
        .collect()
}

/// The selection the sweep runs on.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub selection: EventSelection,
    pub assignment: Option<AgentTypeAssignment>,
    pub input_events: usize,
}

/// Applies the variant filter and, if configured, agent typing.
pub fn prepare(raw: &EventSelection, config: &SweepConfig) -> Result<Prepared> {
    if raw.is_empty() {
        bail!("select events: no events after selection");
    }
    let filtered = variant_frequency_filter(raw, config.vff).context("select events")?;
    if filtered.is_empty() {
        bail!("select events: no events after selection");
    }
    let (selection, assignment) = if config.type_agents {
        let (s, a) = type_agents(&filtered, config.distance_threshold).context("identify agent types")?;
        (s, Some(a))
    } else {
        (filtered, None)
    };
    Ok(Prepared {
        selection,
        assignment,
        input_events: raw.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetEntry {
    pub name: String,
    pub file: String,
    pub size: usize,
    pub safe: Option<bool>,
    pub sound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEntry {
    pub id: String,
    pub miner: Miner,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naming: Option<Naming>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ff: Option<f64>,
    pub th: f64,
    pub nets: Vec<NetEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A file to write, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

fn net_artifacts(dir: &Path, stem: &str, net: &WorkflowNet, title: &str) -> [Artifact; 2] {
    [
        Artifact {
            path: dir.join(format!("{stem}.pnml")),
            contents: to_pnml(net, title),
        },
        Artifact {
            path: dir.join(format!("{stem}.dot")),
            contents: to_dot(net, title),
        },
    ]
}

fn split(r: &Result<bool, String>) -> (Option<bool>, Option<String>) {
    match r {
        Ok(b) => (Some(*b), None),
        Err(e) => (None, Some(e.clone())),
    }
}

/// PNML and DOT per net of the bundle under `models/<id>/` plus the
/// manifest entry.
pub fn bundle_artifacts(id: &str, bundle: &DiscoveryBundle, report: &BundleReport) -> (Vec<Artifact>, ModelEntry) {
    let dir = Path::new("models").join(id);
    let mut nets: Vec<(String, &WorkflowNet)> = vec![("interaction".into(), &bundle.interaction_net)];
    for (agent, net) in &bundle.agent_nets {
        nets.push((format!("agent:{agent}"), net));
    }
    nets.push(("mas".into(), &bundle.mas_net));

    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    for (name, net) in nets {
        let stem = name.replace(':', "-");
        let verdict = report.verdicts.iter().find(|v| v.net == name).expect("verdict per net");
        let (safe, note_safe) = split(&verdict.safe);
        let (sound, note_sound) = split(&verdict.sound);
        artifacts.extend(net_artifacts(&dir, &stem, net, &format!("{id} {name}")));
        entries.push(NetEntry {
            name,
            file: dir.join(format!("{stem}.pnml")).display().to_string(),
            size: net.size(),
            safe,
            sound,
            note: note_safe.or(note_sound),
        });
    }
    let entry = ModelEntry {
        id: id.to_string(),
        miner: Miner::AgentMiner,
        naming: None,
        ff: Some(bundle.parameters.ff),
        th: bundle.parameters.th,
        nets: entries,
        warnings: bundle.warnings.clone(),
    };
    (artifacts, entry)
}

#[derive(Debug, Clone, Copy)]
enum Job {
    AgentMiner { ff: f64, th: f64 },
    Conventional { naming: Naming, th: f64 },
}

struct JobOutput {
    rows: Vec<ResultRow>,
    artifacts: Vec<Artifact>,
    model: ModelEntry,
}

struct Shared<'a> {
    selection: &'a EventSelection,
    logs: BTreeMap<Naming, EventLog>,
    config: &'a SweepConfig,
}

fn run_job(job: Job, ctx: &Shared) -> Result<JobOutput> {
    let bound = ctx.config.state_bound;
    match job {
        Job::AgentMiner { ff, th } => {
            let id = am_model_id(ff, th);
            let options = ComposerOptions {
                remove_iterations: ctx.config.remove_iterations,
                state_bound: bound,
            };
            let bundle = discover(ctx.selection, &DfgMiner, &InductiveMiner, ff, th, options).with_context(|| format!("{id}"))?;
            let report = verify_bundle(&bundle, bound).with_context(|| format!("{id}: verify"))?;
            let mas = report.verdicts.last().expect("mas verdict");
            let (safe, sound) = (mas.safe.clone().ok(), mas.sound.clone().ok());
            let mut rows = Vec::new();
            for (&naming, log) in &ctx.logs {
                // AOL comparisons drop the agent part of MAS labels.
                let net = match naming {
                    Naming::Aal => bundle.mas_net.clone(),
                    _ => bundle.mas_net.rewrite_labels_to_activity(),
                };
                let quality = measure(&net, log, bound).with_context(|| format!("{id}: compare models ({naming})"))?;
                rows.push(ResultRow {
                    model_id: id.clone(),
                    miner: Miner::AgentMiner,
                    naming,
                    ff: Some(ff),
                    th,
                    quality,
                    safe,
                    sound,
                });
            }
            let (artifacts, model) = bundle_artifacts(&id, &bundle, &report);
            Ok(JobOutput { rows, artifacts, model })
        }
        Job::Conventional { naming, th } => {
            let id = cm_model_id(naming, th);
            let log = &ctx.logs[&naming];
            let net = InductiveMiner.discover(log, th).map_err(|e| anyhow!(e)).with_context(|| format!("{id}: discover CM model"))?;
            let safe = is_safe(&net, bound);
            let sound = is_sound(&net, bound);
            let note = safe.as_ref().err().or(sound.as_ref().err()).map(|e| e.to_string());
            let (safe, sound) = (safe.ok(), sound.ok());
            let quality = measure(&net, log, bound).with_context(|| format!("{id}: compare models"))?;
            let dir = Path::new("models").join(&id);
            let artifacts = net_artifacts(&dir, "net", &net, &id).to_vec();
            let model = ModelEntry {
                id: id.clone(),
                miner: Miner::Conventional,
                naming: Some(naming),
                ff: None,
                th,
                nets: vec![NetEntry {
                    name: "net".into(),
                    file: dir.join("net.pnml").display().to_string(),
                    size: net.size(),
                    safe,
                    sound,
                    note,
                }],
                warnings: Vec::new(),
            };
            let rows = vec![ResultRow {
                model_id: id,
                miner: Miner::Conventional,
                naming,
                ff: None,
                th,
                quality,
                safe,
                sound,
            }];
            Ok(JobOutput { rows, artifacts, model })
        }
    }
}

/// Measurements and model entries of a finished sweep, sorted by model id.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<ResultRow>,
    pub models: Vec<ModelEntry>,
    pub artifacts: Vec<Artifact>,
}

/// Runs every AM pair and every (CM threshold, naming) job on a pool of
/// `config.workers` threads. On failure, returns the error of the first
/// failing job in job order together with whatever succeeded.
pub fn sweep(selection: &EventSelection, config: &SweepConfig) -> (SweepResult, Option<anyhow::Error>) {
    let logs: BTreeMap<Naming, EventLog> = config
        .namings
        .iter()
        .map(|&n| (n, EventLog::from_cases(selection.clone(), n)))
        .collect();
    let ctx = Shared { selection, logs, config };
    let mut jobs: Vec<Job> = config.am_pairs.iter().map(|&(ff, th)| Job::AgentMiner { ff, th }).collect();
    for &naming in ctx.logs.keys() {
        jobs.extend(config.cm_thresholds.iter().map(|&th| Job::Conventional { naming, th }));
    }
    let run = || jobs.par_iter().map(|&j| run_job(j, &ctx)).collect::<Vec<_>>();
    let outputs = match rayon::ThreadPoolBuilder::new().num_threads(config.workers).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("falling back to the global thread pool: {e}");
            run()
        }
    };

    let mut result = SweepResult {
        rows: Vec::new(),
        models: Vec::new(),
        artifacts: Vec::new(),
    };
    let mut first_error = None;
    for out in outputs {
        match out {
            Ok(o) => {
                result.rows.extend(o.rows);
                result.models.push(o.model);
                result.artifacts.extend(o.artifacts);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    result.rows.sort_by(|a, b| (&a.model_id, a.naming).cmp(&(&b.model_id, b.naming)));
    result.models.sort_by(|a, b| a.id.cmp(&b.id));
    result.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    (result, first_error)
}

fn axis_value(row: &ResultRow, name: &str) -> f64 {
    match name {
        "size" => row.quality.size as f64,
        "recall" => row.quality.recall,
        _ => row.quality.precision,
    }
}

fn axis_names(axes: Axes) -> (&'static str, &'static str) {
    match axes {
        Axes::RecallPrecision => ("recall", "precision"),
        Axes::SizePrecision => ("size", "precision"),
        Axes::SizeRecall => ("size", "recall"),
    }
}

/// One `pareto_<axes>_<naming>.csv` per axis pair and naming present in
/// `rows`. Returns the file names.
pub fn write_fronts(rows: &[ResultRow], out_dir: &Path) -> Result<Vec<String>> {
    let mut namings: Vec<Naming> = rows.iter().map(|r| r.naming).collect();
    namings.sort();
    namings.dedup();
    let mut files = Vec::new();
    for naming in namings {
        for axes in Axes::ALL {
            let (xn, yn) = axis_names(axes);
            let points: Vec<Point> = rows
                .iter()
                .filter(|r| r.naming == naming)
                .map(|r| Point::new(&r.model_id, axis_value(r, xn), axis_value(r, yn)))
                .collect();
            let front = pareto_front(&points, axes);
            let name = format!("pareto_{}_{}.csv", axes, naming.as_str().to_ascii_lowercase());
            let mut w = csv::Writer::from_path(out_dir.join(&name)).with_context(|| format!("writing {name}"))?;
            w.write_record(["model_id", xn, yn])?;
            for p in &front.points {
                let x = if xn == "size" { format!("{}", p.x as u64) } else { fmt_float(p.x) };
                w.write_record([p.id.clone(), x, fmt_float(p.y)])?;
            }
            w.flush()?;
            files.push(name);
        }
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
struct Environment {
    os: &'static str,
    arch: &'static str,
}

#[derive(Debug, Serialize)]
struct EventCounts {
    input: usize,
    selected: usize,
    cases: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    environment: Environment,
    source: SourceInfo,
    events: EventCounts,
    config: &'a SweepConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    agent_types: Option<BTreeMap<String, Vec<String>>>,
    outputs: Vec<String>,
    models: &'a [ModelEntry],
}

pub fn write_manifest_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_artifacts(artifacts: &[Artifact], out_dir: &Path) -> Result<()> {
    for a in artifacts {
        let path = out_dir.join(&a.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Summary of a finished pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub rows: Vec<ResultRow>,
    pub results_path: PathBuf,
}

/// Full sweep: load, prepare, discover, measure, then write
/// `results.csv`, the Pareto CSVs, `models/` and `manifest.json` to
/// `out_dir`.
pub fn run_pipeline(source: &Source, config: &SweepConfig, out_dir: &Path) -> Result<PipelineRun> {
    config.validate()?;
    let raw = source.load().context("select events")?;
    let prepared = prepare(&raw, config)?;
    log::info!(
        "{} of {} events selected, {} jobs",
        prepared.selection.len(),
        prepared.input_events,
        config.am_pairs.len() + config.namings.len() * config.cm_thresholds.len()
    );
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let (result, error) = sweep(&prepared.selection, config);
    write_artifacts(&result.artifacts, out_dir)?;
    if let Some(e) = error {
        return Err(e.context(format!(
            "aborted; partial artifacts: {} model(s) written under {}, no results CSV",
            result.models.len(),
            out_dir.join("models").display()
        )));
    }

    let results_path = out_dir.join("results.csv");
    let file = fs::File::create(&results_path).with_context(|| format!("writing {}", results_path.display()))?;
    write_results(&result.rows, file)?;
    let mut outputs = vec!["results.csv".to_string()];
    outputs.extend(write_fronts(&result.rows, out_dir)?);
    outputs.push("models/".into());

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        environment: Environment {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        },
        source: source.info(),
        events: EventCounts {
            input: prepared.input_events,
            selected: prepared.selection.len(),
            cases: prepared.selection.cases().len(),
        },
        config,
        agent_types: prepared.assignment.as_ref().map(|a| {
            a.types()
                .into_iter()
                .map(|(t, members)| (t.to_string(), members.into_iter().map(str::to_string).collect()))
                .collect()
        }),
        outputs,
        models: &result.models,
    };
    write_manifest_json(&manifest, &out_dir.join("manifest.json"))?;
    Ok(PipelineRun {
        rows: result.rows,
        results_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, naming: Naming, ff: Option<f64>) -> ResultRow {
        ResultRow {
            model_id: id.into(),
            miner: if ff.is_some() { Miner::AgentMiner } else { Miner::Conventional },
            naming,
            ff,
            th: 0.3,
            quality: QualityReport {
                recall: 1.0,
                precision: 0.25,
                size: 42,
                ent_log: 0.5,
                ent_model: 2.0,
                ent_intersection: 0.5,
            },
            safe: Some(true),
            sound: None,
        }
    }

    #[test]
    fn results_round_trip() {
        let rows = vec![row("am-ff0.70-th0.30", Naming::Aal, Some(0.7)), row("cm-aol-th0.30", Naming::Aol, None)];
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("model_id,miner,naming,ff,th,size,recall,precision,ent_log,ent_model,ent_intersection,safe,sound\n"));
        assert!(text.contains("cm-aol-th0.30,CM,AOL,,0.30,42,1.000000,0.250000"));
        assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_results("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_selection_fails_early() {
        let err = prepare(&EventSelection::empty(), &SweepConfig::default()).unwrap_err();
        assert!(err.to_string().contains("no events after selection"));
    }
}
