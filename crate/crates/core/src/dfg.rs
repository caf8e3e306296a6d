//! Directly-follows graphs, the activity frequency filter, and the
//! translation of a DFG into a workflow net.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::event::{EventError, EventLog};
use crate::petri::{Label, LabeledNet, PlaceId, WorkflowNet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nothing to translate: the DFG has no activity on a start-to-end walk")]
    Empty,
    #[error(transparent)]
    Event(#[from] EventError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dfg {
    /// Occurrence count per label.
    pub activities: BTreeMap<String, u64>,
    pub edges: BTreeMap<(String, String), u64>,
    /// Trace-initial counts.
    pub starts: BTreeMap<String, u64>,
    /// Trace-final counts.
    pub ends: BTreeMap<String, u64>,
}

impl Dfg {
    pub fn from_sequences<S: AsRef<str>>(traces: &[Vec<S>]) -> Dfg {
        let mut dfg = Dfg::default();
        for trace in traces {
            let (Some(first), Some(last)) = (trace.first(), trace.last()) else {
                continue;
            };
            *dfg.starts.entry(first.as_ref().to_string()).or_default() += 1;
            *dfg.ends.entry(last.as_ref().to_string()).or_default() += 1;
            for a in trace {
                *dfg.activities.entry(a.as_ref().to_string()).or_default() += 1;
            }
            for w in trace.windows(2) {
                *dfg
                    .edges
                    .entry((w[0].as_ref().to_string(), w[1].as_ref().to_string()))
                    .or_default() += 1;
            }
        }
        dfg
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    /// The directly-follows relation without counts.
    pub fn edge_set(&self) -> BTreeSet<(&str, &str)> {
        self.edges.keys().map(|(a, b)| (a.as_str(), b.as_str())).collect()
    }

    pub fn activity_set(&self) -> BTreeSet<&str> {
        self.activities.keys().map(String::as_str).collect()
    }

    /// Graphviz rendering with counts on nodes and edges.
    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut s = String::from("digraph dfg {\n  rankdir=LR;\n  start [shape=circle, label=\"\"];\n  end [shape=doublecircle, label=\"\"];\n");
        for (a, n) in &self.activities {
            let _ = writeln!(s, "  {} [shape=box, style=rounded, label={}];", q(a), q(&format!("{a} ({n})")));
        }
        for (a, n) in &self.starts {
            let _ = writeln!(s, "  start -> {} [label=\"{n}\"];", q(a));
        }
        for ((a, b), n) in &self.edges {
            let _ = writeln!(s, "  {} -> {} [label=\"{n}\"];", q(a), q(b));
        }
        for (a, n) in &self.ends {
            let _ = writeln!(s, "  {} -> end [label=\"{n}\"];", q(a));
        }
        s.push_str("}\n");
        s
    }
}

/// Counts activities, directly-follows pairs, and start and end labels over
/// the traces of `log` under its naming function.
pub fn build_dfg(log: &EventLog) -> Result<Dfg, DfgError> {
    Ok(Dfg::from_sequences(&log.label_sequences()?))
}

/// Keeps the most frequent activities (ties lexicographic) until they cover
/// at least `ff` of all occurrences, drops everything touching the others,
/// and marks kept activities lacking an incoming (outgoing) edge as start
/// (end). If no start or no end remains, the most frequent kept activity is
/// promoted. Finally, kept activities unreachable from a start become starts
/// and those that cannot reach an end become ends.
pub fn filter_dfg(dfg: &Dfg, ff: f64) -> Result<Dfg, DfgError> {
    if !(ff > 0.0 && ff <= 1.0) {
        return Err(DfgError::InvalidParameter(format!("ff must lie in (0, 1], got {ff}")));
    }
    let total: u64 = dfg.activities.values().sum();
    let mut ranked: Vec<(&String, u64)> = dfg.activities.iter().map(|(a, &n)| (a, n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let target = ff * total as f64 - 1e-9;
    let mut kept = BTreeSet::new();
    let mut covered = 0u64;
    for (a, n) in &ranked {
        if covered as f64 >= target {
            break;
        }
        kept.insert((*a).clone());
        covered += n;
    }
    if kept.len() == dfg.activities.len() {
        return Ok(dfg.clone());
    }

    let mut out = Dfg {
        activities: dfg.activities.iter().filter(|(a, _)| kept.contains(*a)).map(|(a, &n)| (a.clone(), n)).collect(),
        edges: dfg
            .edges
            .iter()
            .filter(|((a, b), _)| kept.contains(a) && kept.contains(b))
            .map(|(k, &n)| (k.clone(), n))
            .collect(),
        starts: dfg.starts.iter().filter(|(a, _)| kept.contains(*a)).map(|(a, &n)| (a.clone(), n)).collect(),
        ends: dfg.ends.iter().filter(|(a, _)| kept.contains(*a)).map(|(a, &n)| (a.clone(), n)).collect(),
    };
    let has_in: BTreeSet<&String> = out.edges.keys().map(|(_, b)| b).collect();
    let has_out: BTreeSet<&String> = out.edges.keys().map(|(a, _)| a).collect();
    let mut new_starts = Vec::new();
    let mut new_ends = Vec::new();
    for (a, &n) in &out.activities {
        if !has_in.contains(a) && !out.starts.contains_key(a) {
            new_starts.push((a.clone(), n));
        }
        if !has_out.contains(a) && !out.ends.contains_key(a) {
            new_ends.push((a.clone(), n));
        }
    }
    out.starts.extend(new_starts);
    out.ends.extend(new_ends);
    let most_frequent = ranked.iter().find(|(a, _)| kept.contains(*a)).map(|(a, n)| ((*a).clone(), *n));
    if let Some((a, n)) = most_frequent {
        if out.starts.is_empty() {
            out.starts.insert(a.clone(), n);
        }
        if out.ends.is_empty() {
            out.ends.insert(a, n);
        }
    }
    // Kept activities cut off from every start (end) become starts (ends),
    // so every one of them lies on a start-to-end walk.
    let reached = closure(&out, &out.starts, true);
    let unreached: Vec<(String, u64)> = out.activities.iter().filter(|(a, _)| !reached.contains(a.as_str())).map(|(a, &n)| (a.clone(), n)).collect();
    out.starts.extend(unreached);
    let finishing = closure(&out, &out.ends, false);
    let stuck: Vec<(String, u64)> = out.activities.iter().filter(|(a, _)| !finishing.contains(a.as_str())).map(|(a, &n)| (a.clone(), n)).collect();
    out.ends.extend(stuck);
    Ok(out)
}

/// Activities that are not on any walk from a start to an end activity.
pub fn unreachable_activities(dfg: &Dfg) -> BTreeSet<String> {
    let on_walk = activities_on_walks(dfg);
    dfg.activities.keys().filter(|a| !on_walk.contains(*a)).cloned().collect()
}

/// Activities reachable from `seeds` along edges (against them if not
/// `forward`), seeds included.
fn closure<'a>(dfg: &'a Dfg, seeds: &'a BTreeMap<String, u64>, forward: bool) -> BTreeSet<&'a str> {
    let mut seen: BTreeSet<&str> = seeds.keys().map(String::as_str).filter(|a| dfg.activities.contains_key(*a)).collect();
    let mut stack: Vec<&str> = seen.iter().copied().collect();
    while let Some(x) = stack.pop() {
        for (a, b) in dfg.edges.keys() {
            let (from, to) = if forward { (a, b) } else { (b, a) };
            if from == x && seen.insert(to.as_str()) {
                stack.push(to);
            }
        }
    }
    seen
}

fn activities_on_walks(dfg: &Dfg) -> BTreeSet<String> {
    let fwd = closure(dfg, &dfg.starts, true);
    let bwd = closure(dfg, &dfg.ends, false);
    fwd.intersection(&bwd).map(|s| s.to_string()).collect()
}

/// Translates the DFG into a workflow net: per activity `x` a transition
/// `in_x → x → out_x`, per edge `(x, y)` a silent `out_x → in_y`, per start
/// a silent `i → in_x`, per end a silent `out_x → f`. Its observable runs
/// are the DFG walks from a start to an end activity. Activities off such
/// walks are dropped with a warning.
pub fn dfg_to_wfnet(dfg: &Dfg) -> Result<WorkflowNet, DfgError> {
    let keep = activities_on_walks(dfg);
    if keep.is_empty() {
        return Err(DfgError::Empty);
    }
    if keep.len() < dfg.activities.len() {
        let dropped: Vec<&String> = dfg.activities.keys().filter(|a| !keep.contains(*a)).collect();
        log::warn!("dropping activities outside every start-to-end walk: {dropped:?}");
    }
    let mut net = LabeledNet::new();
    let i = net.add_place("i");
    let f = net.add_place("f");
    let mut ports: BTreeMap<&str, (PlaceId, PlaceId)> = BTreeMap::new();
    for a in &keep {
        let pin = net.add_place(format!("in_{a}"));
        let pout = net.add_place(format!("out_{a}"));
        let t = net.add_transition(a.clone(), Label::Visible(a.clone()));
        net.add_input(pin, t).expect("fresh nodes");
        net.add_output(t, pout).expect("fresh nodes");
        ports.insert(a, (pin, pout));
    }
    let silent = |net: &mut LabeledNet, name: String, from: PlaceId, to: PlaceId| {
        let t = net.add_transition(name, Label::Silent);
        net.add_input(from, t).expect("fresh nodes");
        net.add_output(t, to).expect("fresh nodes");
    };
    for a in dfg.starts.keys().filter(|a| keep.contains(*a)) {
        silent(&mut net, format!("start {a}"), i, ports[a.as_str()].0);
    }
    for (a, b) in dfg.edges.keys().filter(|(a, b)| keep.contains(a) && keep.contains(b)) {
        silent(&mut net, format!("{a} -> {b}"), ports[a.as_str()].1, ports[b.as_str()].0);
    }
    for a in dfg.ends.keys().filter(|a| keep.contains(*a)) {
        silent(&mut net, format!("end {a}"), ports[a.as_str()].1, f);
    }
    WorkflowNet::new(net, i, f).map_err(|e| unreachable!("DFG translation built a broken net: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::{accepted_words, is_safe, is_sound};

    fn seqs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|t| t.iter().map(|s| s.to_string()).collect()).collect()
    }

    fn words(v: &[&[&str]]) -> BTreeSet<Vec<String>> {
        seqs(v).into_iter().collect()
    }

    #[test]
    fn counts() {
        let d = Dfg::from_sequences(&seqs(&[&["a", "b"], &["a", "b"]]));
        assert_eq!(d.edges, BTreeMap::from([(("a".into(), "b".into()), 2)]));
        assert_eq!(d.starts, BTreeMap::from([("a".into(), 2)]));
        assert_eq!(d.ends, BTreeMap::from([("b".into(), 2)]));
        let d = Dfg::from_sequences(&seqs(&[&["a"]]));
        assert!(d.edges.is_empty());
        assert_eq!(d.starts, d.ends);
    }

    #[test]
    fn full_fraction_is_identity() {
        let d = Dfg::from_sequences(&seqs(&[&["a", "b", "c"], &["b"]]));
        assert_eq!(filter_dfg(&d, 1.0).unwrap(), d);
        assert!(filter_dfg(&d, 0.0).is_err());
    }

    #[test]
    fn equal_counts_keep_first_lexicographic() {
        let d = Dfg::from_sequences(&seqs(&[&["c", "a", "b"]]));
        let f = filter_dfg(&d, 0.01).unwrap();
        assert_eq!(f.activity_set(), BTreeSet::from(["a"]));
        assert!(f.starts.contains_key("a") && f.ends.contains_key("a"));
    }

    #[test]
    fn single_path_net() {
        let d = Dfg::from_sequences(&seqs(&[&["a", "b"]]));
        let w = dfg_to_wfnet(&d).unwrap();
        assert_eq!(accepted_words(&w, 5, 1000).unwrap(), words(&[&["a", "b"]]));
        assert!(is_safe(&w, 1000).unwrap() && is_sound(&w, 1000).unwrap());
    }

    #[test]
    fn loop_dfg_gives_repetition() {
        let d = Dfg::from_sequences(&seqs(&[&["physio", "swim", "yoga", "physio", "swim", "yoga"]]));
        let w = dfg_to_wfnet(&d).unwrap();
        let got = accepted_words(&w, 9, 1000).unwrap();
        let unit = ["physio", "swim", "yoga"];
        let expected: BTreeSet<Vec<String>> =
            (1..=3).map(|k| unit.iter().cycle().take(3 * k).map(|s| s.to_string()).collect()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn unreachable_component_is_dropped() {
        let mut d = Dfg::from_sequences(&seqs(&[&["a", "b"]]));
        d.activities.insert("x".into(), 1);
        d.activities.insert("y".into(), 1);
        d.edges.insert(("x".into(), "y".into()), 1);
        assert_eq!(unreachable_activities(&d), BTreeSet::from(["x".to_string(), "y".to_string()]));
        let w = dfg_to_wfnet(&d).unwrap();
        assert_eq!(w.net().visible_labels(), BTreeSet::from(["a", "b"]));
    }

    #[test]
    fn empty_dfg_is_an_error() {
        assert_eq!(dfg_to_wfnet(&Dfg::default()), Err(DfgError::Empty));
    }
}
