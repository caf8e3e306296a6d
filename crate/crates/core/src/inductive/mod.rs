//! Inductive discovery: recursively split the log along exclusive-choice,
//! sequence, parallel and loop cuts of its directly-follows graph, building
//! a process tree, then translate the tree into a workflow net.
//!
//! With a positive noise threshold, directly-follows edges weaker than
//! `noise × (strongest outgoing edge of their source)` are ignored during
//! cut detection, as are rare start and end activities, and rare empty
//! traces are dropped.

mod tree;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::event::{EventError, EventLog, Naming};
use crate::petri::WorkflowNet;

pub use tree::{tree_to_wfnet, ProcessTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InductiveError {
    #[error("empty log")]
    EmptyLog,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Event(#[from] EventError),
}

/// Variant multiset over interned labels.
type Log = BTreeMap<Vec<u32>, u64>;

#[derive(Debug, Clone)]
struct Graph {
    nodes: Vec<u32>,
    /// `succ[i][j]`: edge between local indices `i` and `j`.
    succ: Vec<Vec<bool>>,
    starts: Vec<bool>,
    ends: Vec<bool>,
}

impl Graph {
    fn new(log: &Log, noise: f64) -> Graph {
        let nodes: Vec<u32> = log.keys().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let local: BTreeMap<u32, usize> = nodes.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let n = nodes.len();
        let mut edges = vec![vec![0u64; n]; n];
        let mut starts = vec![0u64; n];
        let mut ends = vec![0u64; n];
        for (trace, &count) in log {
            let (Some(first), Some(last)) = (trace.first(), trace.last()) else { continue };
            starts[local[first]] += count;
            ends[local[last]] += count;
            for w in trace.windows(2) {
                edges[local[&w[0]]][local[&w[1]]] += count;
            }
        }
        let keep = |count: u64, strongest: u64| count > 0 && (count as f64) >= noise * strongest as f64;
        let succ = edges
            .iter()
            .map(|row| {
                let strongest = row.iter().copied().max().unwrap_or(0);
                row.iter().map(|&c| keep(c, strongest)).collect()
            })
            .collect();
        let max_start = starts.iter().copied().max().unwrap_or(0);
        let max_end = ends.iter().copied().max().unwrap_or(0);
        Graph {
            nodes,
            succ,
            starts: starts.iter().map(|&c| keep(c, max_start)).collect(),
            ends: ends.iter().map(|&c| keep(c, max_end)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn groups(&self, mut uf: UnionFind) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.len() {
            by_root.entry(uf.find(i)).or_default().push(i);
        }
        let mut v: Vec<Vec<usize>> = by_root.into_values().collect();
        v.sort_by_key(|g| g[0]);
        v
    }

    fn xor_cut(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in 0..n {
                if self.succ[i][j] {
                    uf.union(i, j);
                }
            }
        }
        let g = self.groups(uf);
        (g.len() > 1).then_some(g)
    }

    fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut r = self.succ.clone();
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    fn sequence_cut(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.len();
        let r = self.closure();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if r[i][j] == r[j][i] {
                    uf.union(i, j);
                }
            }
        }
        let groups = self.groups(uf);
        if groups.len() < 2 {
            return None;
        }
        // Every member of an earlier group reaches every member of a later
        // one and never the other way round.
        let before = |a: &[usize], b: &[usize]| a.iter().all(|&x| b.iter().all(|&y| r[x][y] && !r[y][x]));
        let preceding: Vec<usize> = groups
            .iter()
            .map(|g| groups.iter().filter(|h| before(h, g)).count())
            .collect();
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|&k| preceding[k]);
        let groups: Vec<Vec<usize>> = order.into_iter().map(|k| groups[k].clone()).collect();
        for x in 0..groups.len() {
            for y in x + 1..groups.len() {
                if !before(&groups[x], &groups[y]) {
                    return None;
                }
            }
        }
        Some(groups)
    }

    fn parallel_cut(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if !(self.succ[i][j] && self.succ[j][i]) {
                    uf.union(i, j);
                }
            }
        }
        let groups = self.groups(uf);
        if groups.len() < 2 {
            return None;
        }
        let valid = |g: &Vec<usize>| g.iter().any(|&i| self.starts[i]) && g.iter().any(|&i| self.ends[i]);
        let (mut good, bad): (Vec<Vec<usize>>, Vec<Vec<usize>>) = groups.into_iter().partition(valid);
        if good.is_empty() {
            return None;
        }
        for g in bad {
            good[0].extend(g);
        }
        good[0].sort_unstable();
        (good.len() > 1).then_some(good)
    }

    /// First group is the body; the others are redo parts.
    fn loop_cut(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.len();
        let in_do: Vec<bool> = (0..n).map(|i| self.starts[i] || self.ends[i]).collect();
        if in_do.iter().all(|&b| b) {
            return None;
        }
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in 0..n {
                if self.succ[i][j] && !in_do[i] && !in_do[j] {
                    uf.union(i, j);
                }
            }
        }
        let mut body: Vec<usize> = (0..n).filter(|&i| in_do[i]).collect();
        let mut redo = Vec::new();
        for comp in self.groups(uf) {
            if in_do[comp[0]] {
                continue;
            }
            let member: BTreeSet<usize> = comp.iter().copied().collect();
            let mut ok = true;
            let mut entered = false;
            let mut exited = false;
            for &c in &comp {
                for d in (0..n).filter(|d| !member.contains(d)) {
                    if self.succ[d][c] {
                        entered = true;
                        // Redo parts are entered from end activities only,
                        // and then from all of them.
                        ok &= self.ends[d] && (0..n).filter(|&e| self.ends[e]).all(|e| self.succ[e][c]);
                    }
                    if self.succ[c][d] {
                        exited = true;
                        ok &= self.starts[d] && (0..n).filter(|&s| self.starts[s]).all(|s| self.succ[c][s]);
                    }
                }
            }
            if ok && entered && exited {
                redo.push(comp);
            } else {
                body.extend(comp);
            }
        }
        if redo.is_empty() {
            return None;
        }
        body.sort_unstable();
        let mut out = vec![body];
        out.extend(redo);
        Some(out)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

enum Cut {
    Xor,
    Sequence,
    Parallel,
    Loop,
}

struct Miner<'a> {
    names: &'a [String],
    noise: f64,
}

fn add(log: &mut Log, trace: Vec<u32>, count: u64) {
    *log.entry(trace).or_insert(0) += count;
}

fn project(log: &Log, keep: impl Fn(u32) -> bool) -> Log {
    let mut out = Log::new();
    for (t, &c) in log {
        add(&mut out, t.iter().copied().filter(|&a| keep(a)).collect(), c);
    }
    out
}

impl Miner<'_> {
    fn mine(&self, log: &Log) -> ProcessTree {
        let total: u64 = log.values().sum();
        let empty = log.get(&Vec::new()).copied().unwrap_or(0);
        if total == 0 || empty == total {
            return ProcessTree::Silent;
        }
        if empty > 0 {
            let mut rest = log.clone();
            rest.remove(&Vec::new());
            if self.noise > 0.0 && (empty as f64) < self.noise * total as f64 {
                return self.mine(&rest);
            }
            return ProcessTree::Xor(vec![ProcessTree::Silent, self.mine(&rest)]);
        }
        let graph = Graph::new(log, self.noise);
        if graph.len() == 1 {
            let leaf = ProcessTree::Activity(self.names[graph.nodes[0] as usize].clone());
            return if log.keys().all(|t| t.len() == 1) {
                leaf
            } else {
                ProcessTree::looped(leaf, ProcessTree::Silent)
            };
        }
        let cuts: [(Cut, fn(&Graph) -> Option<Vec<Vec<usize>>>); 4] = [
            (Cut::Xor, Graph::xor_cut),
            (Cut::Sequence, Graph::sequence_cut),
            (Cut::Parallel, Graph::parallel_cut),
            (Cut::Loop, Graph::loop_cut),
        ];
        for (kind, detect) in cuts {
            if let Some(groups) = detect(&graph) {
                return self.split(log, &graph, kind, groups);
            }
        }
        self.fall_through(log, &graph)
    }

    fn split(&self, log: &Log, graph: &Graph, kind: Cut, groups: Vec<Vec<usize>>) -> ProcessTree {
        let mut group_of: BTreeMap<u32, usize> = BTreeMap::new();
        for (k, g) in groups.iter().enumerate() {
            for &i in g {
                group_of.insert(graph.nodes[i], k);
            }
        }
        let in_group = |k: usize| {
            let group_of = &group_of;
            move |a: u32| group_of[&a] == k
        };
        match kind {
            Cut::Xor => {
                let mut parts = vec![Log::new(); groups.len()];
                for (t, &c) in log {
                    let mut counts = vec![0usize; groups.len()];
                    for a in t {
                        counts[group_of[a]] += 1;
                    }
                    let best = (0..groups.len()).max_by_key(|&k| (counts[k], std::cmp::Reverse(k))).unwrap();
                    add(&mut parts[best], t.iter().copied().filter(|a| group_of[a] == best).collect(), c);
                }
                ProcessTree::Xor(parts.iter().filter(|p| !p.is_empty()).map(|p| self.mine(p)).collect())
            }
            Cut::Sequence => ProcessTree::Sequence((0..groups.len()).map(|k| self.mine(&project(log, in_group(k)))).collect()),
            Cut::Parallel => ProcessTree::Parallel((0..groups.len()).map(|k| self.mine(&project(log, in_group(k)))).collect()),
            Cut::Loop => {
                let mut parts = vec![Log::new(); groups.len()];
                for (t, &c) in log {
                    let mut expect_body = true;
                    let mut run: Vec<u32> = Vec::new();
                    let mut run_group = usize::MAX;
                    let mut flush = |run: &mut Vec<u32>, k: usize, expect_body: &mut bool| {
                        if run.is_empty() {
                            return;
                        }
                        if k == 0 {
                            add(&mut parts[0], std::mem::take(run), c);
                            *expect_body = false;
                        } else {
                            if *expect_body {
                                add(&mut parts[0], Vec::new(), c);
                            }
                            add(&mut parts[k], std::mem::take(run), c);
                            *expect_body = true;
                        }
                    };
                    for &a in t {
                        let k = group_of[&a];
                        if k != run_group {
                            flush(&mut run, run_group, &mut expect_body);
                            run_group = k;
                        }
                        run.push(a);
                    }
                    flush(&mut run, run_group, &mut expect_body);
                    if expect_body {
                        add(&mut parts[0], Vec::new(), c);
                    }
                }
                let body = self.mine(&parts[0]);
                let redos: Vec<ProcessTree> = parts[1..].iter().filter(|p| !p.is_empty()).map(|p| self.mine(p)).collect();
                let redo = match redos.len() {
                    0 => ProcessTree::Silent,
                    1 => redos.into_iter().next().unwrap(),
                    _ => ProcessTree::Xor(redos),
                };
                ProcessTree::looped(body, redo)
            }
        }
    }

    fn fall_through(&self, log: &Log, graph: &Graph) -> ProcessTree {
        // An activity occurring exactly once in every trace runs in
        // parallel with the rest.
        for &a in &graph.nodes {
            if log.keys().all(|t| t.iter().filter(|&&x| x == a).count() == 1) {
                let rest = project(log, |x| x != a);
                return ProcessTree::Parallel(vec![ProcessTree::Activity(self.names[a as usize].clone()), self.mine(&rest)]);
            }
        }
        let full = Graph::new(log, 0.0);
        let local: BTreeMap<u32, usize> = full.nodes.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        // Split traces wherever an end activity is directly followed by a
        // start activity, then wherever a start activity recurs.
        let splitters: [&dyn Fn(u32, u32) -> bool; 2] = [
            &|x, y| full.ends[local[&x]] && full.starts[local[&y]],
            &|_, y| full.starts[local[&y]],
        ];
        for split_here in splitters {
            let mut out = Log::new();
            let mut changed = false;
            for (t, &c) in log {
                let mut piece = vec![t[0]];
                for w in t.windows(2) {
                    if split_here(w[0], w[1]) {
                        add(&mut out, std::mem::take(&mut piece), c);
                        changed = true;
                    }
                    piece.push(w[1]);
                }
                add(&mut out, piece, c);
            }
            if changed {
                return ProcessTree::looped(self.mine(&out), ProcessTree::Silent);
            }
        }
        let all = graph
            .nodes
            .iter()
            .map(|&a| ProcessTree::Activity(self.names[a as usize].clone()))
            .collect();
        ProcessTree::looped(ProcessTree::Xor(all), ProcessTree::Silent)
    }
}

/// Discovers a process tree from label sequences.
pub fn discover_tree_from_sequences<S: AsRef<str>>(traces: &[Vec<S>], noise_threshold: f64) -> Result<ProcessTree, InductiveError> {
    if !(0.0..1.0).contains(&noise_threshold) {
        return Err(InductiveError::InvalidParameter(format!("noise threshold must lie in [0, 1), got {noise_threshold}")));
    }
    if traces.is_empty() {
        return Err(InductiveError::EmptyLog);
    }
    // Ids follow lexicographic label order.
    let names: Vec<String> = traces
        .iter()
        .flatten()
        .map(|s| s.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let id: BTreeMap<&str, u32> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
    let mut log = Log::new();
    for t in traces {
        add(&mut log, t.iter().map(|s| id[s.as_ref()]).collect(), 1);
    }
    let miner = Miner {
        names: &names,
        noise: noise_threshold,
    };
    Ok(miner.mine(&log).normalized())
}

pub fn discover_tree(log: &EventLog, noise_threshold: f64) -> Result<ProcessTree, InductiveError> {
    discover_tree_from_sequences(&log.label_sequences()?, noise_threshold)
}

/// Renames `log` by `naming`, discovers a tree and translates it.
pub fn discover_cm_model(log: &EventLog, naming: Naming, threshold: f64) -> Result<WorkflowNet, InductiveError> {
    if log.is_empty() {
        return Err(InductiveError::EmptyLog);
    }
    let tree = discover_tree(&log.with_naming(naming), threshold)?;
    Ok(tree_to_wfnet(&tree))
}
