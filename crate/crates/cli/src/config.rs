//! Sweep configuration.

use std::collections::BTreeSet;

use agent_miner::petri::DEFAULT_STATE_BOUND;
use agent_miner::typing::DEFAULT_DISTANCE_THRESHOLD;
use agent_miner::Naming;
use anyhow::{bail, Result};
use serde::Serialize;

/// `(i/10, 1 - i/10)` for `i` in `1..=10`.
pub fn diagonal_pairs() -> Vec<(f64, f64)> {
    (1..=10).map(|i| (i as f64 / 10.0, (10 - i) as f64 / 10.0)).collect()
}

/// `0.0, 0.1, ..., 0.9`.
pub fn default_cm_thresholds() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Variant frequency filter share in `(0, 1]`.
    pub vff: f64,
    /// Agent Miner runs as `(ff, th)`.
    pub am_pairs: Vec<(f64, f64)>,
    /// Noise thresholds of the conventional miner.
    pub cm_thresholds: Vec<f64>,
    pub namings: Vec<Naming>,
    pub state_bound: usize,
    pub distance_threshold: f64,
    pub seed: u64,
    pub remove_iterations: bool,
    /// Cluster instances into agent types before discovery.
    pub type_agents: bool,
    /// Output does not depend on it, so it is left out of the manifest.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            vff: 1.0,
            am_pairs: diagonal_pairs(),
            cm_thresholds: default_cm_thresholds(),
            namings: vec![Naming::Aol, Naming::Aal],
            state_bound: DEFAULT_STATE_BOUND,
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            seed: 7,
            remove_iterations: true,
            type_agents: true,
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vff > 0.0 && self.vff <= 1.0) {
            bail!("vff must lie in (0, 1], got {}", self.vff);
        }
        let mut ids = BTreeSet::new();
        for &(ff, th) in &self.am_pairs {
            if !(ff > 0.0 && ff <= 1.0) {
                bail!("ff must lie in (0, 1], got {ff}");
            }
            if !(0.0..1.0).contains(&th) {
                bail!("th must lie in [0, 1), got {th}");
            }
            if !ids.insert(am_model_id(ff, th)) {
                bail!("duplicate parameter pair ({ff}, {th})");
            }
        }
        let mut seen = BTreeSet::new();
        for &th in &self.cm_thresholds {
            if !(0.0..1.0).contains(&th) {
                bail!("cm threshold must lie in [0, 1), got {th}");
            }
            if !seen.insert(format_param(th)) {
                bail!("duplicate cm threshold {th}");
            }
        }
        for n in &self.namings {
            if *n == Naming::AgentOnly {
                bail!("namings must be AOL or AAL");
            }
        }
        if self.namings.is_empty() {
            bail!("at least one naming is required");
        }
        if self.state_bound == 0 || self.workers == 0 {
            bail!("state bound and workers must be positive");
        }
        Ok(())
    }
}

pub fn format_param(x: f64) -> String {
    format!("{x:.2}")
}

pub fn am_model_id(ff: f64, th: f64) -> String {
    format!("am-ff{}-th{}", format_param(ff), format_param(th))
}

pub fn cm_model_id(naming: Naming, th: f64) -> String {
    format!("cm-{}-th{}", naming.as_str().to_ascii_lowercase(), format_param(th))
}

/// Parses `ff:th,ff:th,...`.
pub fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|p| {
            let Some((a, b)) = p.split_once(':') else { bail!("expected ff:th, got '{p}'") };
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_diagonal() {
        let c = SweepConfig::default();
        assert_eq!(c.am_pairs.len(), 10);
        assert_eq!(c.am_pairs[9], (1.0, 0.0));
        assert_eq!(format_param(c.am_pairs[0].1), "0.90");
        assert_eq!(c.cm_thresholds.len(), 10);
        c.validate().unwrap();
    }

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("0.5:0.1, 1:0").unwrap(), vec![(0.5, 0.1), (1.0, 0.0)]);
        assert!(parse_pairs("0.5").is_err());
        let c = SweepConfig {
            am_pairs: vec![(0.5, 0.1), (0.5, 0.1)],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
