//! Agent types: agent instances are clustered by the similarity of the DFGs
//! of their agent logs, then events are relabeled from instance to type.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use thiserror::Error;

use crate::dfg::{build_dfg, Dfg, DfgError};
use crate::event::{EventSelection, Naming};
use crate::partition::partition;

pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum TypingError {
    #[error("agent instance '{0}' has no type")]
    Unmapped(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Dfg(#[from] DfgError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// DFG (activity labels) of every agent instance's agent log.
pub fn instance_dfgs(selection: &EventSelection) -> Result<BTreeMap<String, Dfg>, TypingError> {
    partition(selection)
        .agent_logs
        .into_iter()
        .map(|(agent, log)| Ok((agent, build_dfg(&log.with_naming(Naming::Aol))?)))
        .collect()
}

/// `1 − max(|E₁∩E₂| / |E₁|, |E₁∩E₂| / |E₂|)` over the edge sets. Two
/// edgeless DFGs are at distance 0 when they share an activity and 1
/// otherwise; one edgeless DFG is at distance 1 from any other.
pub fn dfg_distance(a: &Dfg, b: &Dfg) -> f64 {
    let ea = a.edge_set();
    let eb = b.edge_set();
    match (ea.is_empty(), eb.is_empty()) {
        (true, true) => {
            if a.activity_set().is_disjoint(&b.activity_set()) {
                1.0
            } else {
                0.0
            }
        }
        (true, false) | (false, true) => 1.0,
        (false, false) => {
            let common = ea.intersection(&eb).count() as f64;
            1.0 - (common / ea.len() as f64).max(common / eb.len() as f64)
        }
    }
}

/// Mapping from agent instance to agent type id (`a1`, `a2`, ...).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentTypeAssignment {
    map: BTreeMap<String, String>,
}

impl AgentTypeAssignment {
    pub fn from_map(map: BTreeMap<String, String>) -> Self {
        AgentTypeAssignment { map }
    }

    /// Every instance is its own type, named after itself.
    pub fn identity<'a>(instances: impl IntoIterator<Item = &'a str>) -> Self {
        AgentTypeAssignment {
            map: instances.into_iter().map(|a| (a.to_string(), a.to_string())).collect(),
        }
    }

    pub fn type_of(&self, instance: &str) -> Option<&str> {
        self.map.get(instance).map(String::as_str)
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    /// Members of every type, sorted.
    pub fn types(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (i, t) in &self.map {
            out.entry(t.as_str()).or_default().insert(i.as_str());
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TypingError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["instance", "type"])?;
        for (i, t) in &self.map {
            w.write_record([i, t])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairwise distances between instance DFGs, rows and columns in key
/// order.
pub fn distance_matrix(dfgs: &BTreeMap<String, Dfg>) -> Vec<Vec<f64>> {
    let v: Vec<&Dfg> = dfgs.values().collect();
    let n = v.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = dfg_distance(v[i], v[j]);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

pub fn write_distance_csv<W: Write>(dfgs: &BTreeMap<String, Dfg>, writer: W) -> Result<(), TypingError> {
    let d = distance_matrix(dfgs);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["instance".to_string()];
    header.extend(dfgs.keys().cloned());
    w.write_record(&header)?;
    for (name, row) in dfgs.keys().zip(&d) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|x| format!("{x:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Agglomerative clustering with complete linkage: repeatedly merges the
/// closest pair of clusters while their linkage is at most `threshold`.
/// Ties go to the pair whose smallest members come first. Types are
/// numbered in the order of their smallest member.
pub fn cluster_agents(dfgs: &BTreeMap<String, Dfg>, threshold: f64) -> Result<AgentTypeAssignment, TypingError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(TypingError::InvalidParameter(format!("distance threshold must lie in [0, 1], got {threshold}")));
    }
    let names: Vec<&String> = dfgs.keys().collect();
    let d = distance_matrix(dfgs);
    // Members are instance indices; clusters stay sorted by smallest member.
    let mut clusters: Vec<Vec<usize>> = (0..names.len()).map(|i| vec![i]).collect();
    let linkage = |a: &[usize], b: &[usize]| {
        a.iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| d[i][j])
            .fold(0.0, f64::max)
    };
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let l = linkage(&clusters[x], &clusters[y]);
                if best.is_none_or(|(b, _, _)| l < b) {
                    best = Some((l, x, y));
                }
            }
        }
        match best {
            Some((l, x, y)) if l <= threshold + 1e-12 => {
                let merged = clusters.remove(y);
                clusters[x].extend(merged);
                clusters[x].sort_unstable();
            }
            _ => break,
        }
    }
    clusters.sort_by_key(|c| c[0]);
    let mut map = BTreeMap::new();
    for (k, c) in clusters.iter().enumerate() {
        for &i in c {
            map.insert(names[i].clone(), format!("a{}", k + 1));
        }
    }
    Ok(AgentTypeAssignment { map })
}

/// Replaces every agent instance by its type.
pub fn relabel_to_types(selection: &EventSelection, assignment: &AgentTypeAssignment) -> Result<EventSelection, TypingError> {
    if let Some(missing) = selection.agents().into_iter().find(|a| assignment.type_of(a).is_none()) {
        return Err(TypingError::Unmapped(missing.to_string()));
    }
    Ok(selection.map_agents(|a| assignment.type_of(a).expect("checked").to_string()))
}

/// Instance DFGs, clustering and relabeling in one step.
pub fn type_agents(selection: &EventSelection, threshold: f64) -> Result<(EventSelection, AgentTypeAssignment), TypingError> {
    let dfgs = instance_dfgs(selection)?;
    let assignment = cluster_agents(&dfgs, threshold)?;
    Ok((relabel_to_types(selection, &assignment)?, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dfg(traces: &[&[&str]]) -> Dfg {
        let v: Vec<Vec<&str>> = traces.iter().map(|t| t.to_vec()).collect();
        Dfg::from_sequences(&v)
    }

    #[test]
    fn distance_cases() {
        let ab = dfg(&[&["a", "b"]]);
        let abc = dfg(&[&["a", "b", "c"]]);
        let xy = dfg(&[&["x", "y"]]);
        assert_eq!(dfg_distance(&ab, &ab), 0.0);
        assert_eq!(dfg_distance(&ab, &abc), 0.0);
        assert_eq!(dfg_distance(&ab, &xy), 1.0);
        let a = dfg(&[&["a"]]);
        let a2 = dfg(&[&["a"], &["a"]]);
        let z = dfg(&[&["z"]]);
        assert_eq!(dfg_distance(&a, &a2), 0.0);
        assert_eq!(dfg_distance(&a, &z), 1.0);
        assert_eq!(dfg_distance(&a, &ab), 1.0);
        let half = dfg(&[&["a", "b", "q"], &["r", "s"]]);
        let other = dfg(&[&["a", "b", "z"], &["t", "u"]]);
        assert!((dfg_distance(&half, &other) - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    fn instances() -> BTreeMap<String, Dfg> {
        BTreeMap::from([
            ("p".to_string(), dfg(&[&["a", "b"]])),
            ("q".to_string(), dfg(&[&["x", "y"]])),
            ("r".to_string(), dfg(&[&["a", "b", "c"]])),
        ])
    }

    #[test]
    fn thresholds_bracket_the_clustering() {
        let all_apart = cluster_agents(&instances(), 0.0).unwrap();
        assert_eq!(all_apart.types().len(), 2);
        assert_eq!(all_apart.type_of("p"), all_apart.type_of("r"));
        let one = cluster_agents(&instances(), 1.0).unwrap();
        assert_eq!(one.types().len(), 1);
        assert_eq!(one.type_of("q"), Some("a1"));
        assert_eq!(all_apart.type_of("q"), Some("a2"));
    }

    #[test]
    fn relabel_requires_total_assignment() {
        let s = EventSelection::new(vec![crate::event::Event::new(0, 0, "c", "a", "d5")]).unwrap();
        let err = relabel_to_types(&s, &AgentTypeAssignment::default()).unwrap_err();
        assert!(matches!(err, TypingError::Unmapped(ref a) if a == "d5"));
        assert!(cluster_agents(&instances(), 1.5).is_err());
    }
}
