//! Where the events come from.

use std::path::{Path, PathBuf};

use agent_miner::log_io::{generate_health_log, parse_csv, parse_xes, ColumnMapping, GeneratorConfig, XesKeys};
use agent_miner::EventSelection;
use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone)]
pub enum Source {
    File {
        path: PathBuf,
        mapping: ColumnMapping,
        xes: XesKeys,
    },
    Generated(GeneratorConfig),
}

/// Manifest view of a [`Source`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceInfo {
    File { path: String },
    Generated { cases: usize, seed: u64, interleave: bool },
}

impl Source {
    pub fn info(&self) -> SourceInfo {
        match self {
            Source::File { path, .. } => SourceInfo::File {
                path: path.display().to_string(),
            },
            Source::Generated(c) => SourceInfo::Generated {
                cases: c.cases,
                seed: c.seed,
                interleave: c.interleave,
            },
        }
    }

    /// Files ending in `.xes` are read as XES, everything else as CSV.
    pub fn load(&self) -> Result<EventSelection> {
        match self {
            Source::File { path, mapping, xes } => {
                if is_xes(path) {
                    parse_xes(path, xes).with_context(|| format!("reading {}", path.display()))
                } else {
                    mapping.validate()?;
                    parse_csv(path, mapping).with_context(|| format!("reading {}", path.display()))
                }
            }
            Source::Generated(c) => Ok(generate_health_log(c)?),
        }
    }
}

fn is_xes(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xes"))
}
