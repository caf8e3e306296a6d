//! Occurrence semantics and state-space analysis.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{Label, LabeledNet, Marking, PetriError, PlaceId, TransitionId, WorkflowNet};

/// Transitions whose input places all hold a token in `marking`.
pub fn enabled(net: &LabeledNet, marking: &Marking) -> BTreeSet<TransitionId> {
    net.transitions()
        .filter(|&t| net.preset(t).iter().all(|&p| marking.tokens(p) > 0))
        .collect()
}

/// `M' = (M − •t) + t•`
pub fn fire(net: &LabeledNet, marking: &Marking, t: TransitionId) -> Result<Marking, PetriError> {
    if !net.has_transition(t) {
        return Err(PetriError::UnknownTransition(t));
    }
    let mut next = marking.clone();
    for &p in net.preset(t) {
        if !next.take(p) {
            return Err(PetriError::NotEnabled(t));
        }
    }
    for &p in net.postset(t) {
        next.add(p, 1);
    }
    Ok(next)
}

/// Place indices, transitions as index lists, for fast exploration.
struct Compiled {
    places: Vec<PlaceId>,
    index: HashMap<PlaceId, u32>,
    transitions: Vec<(TransitionId, Vec<u32>, Vec<u32>)>,
}

impl Compiled {
    fn new(net: &LabeledNet) -> Self {
        let places: Vec<PlaceId> = net.places().collect();
        let index: HashMap<PlaceId, u32> = places.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
        let transitions = net
            .transitions()
            .map(|t| {
                let pre = net.preset(t).iter().map(|p| index[p]).collect();
                let post = net.postset(t).iter().map(|p| index[p]).collect();
                (t, pre, post)
            })
            .collect();
        Compiled {
            places,
            index,
            transitions,
        }
    }

    fn encode(&self, m: &Marking) -> Box<[u32]> {
        let mut v = Vec::new();
        for (p, n) in m.iter() {
            let ix = self.index[&p];
            v.extend(std::iter::repeat_n(ix, n as usize));
        }
        v.into_boxed_slice()
    }

    /// Fires transition `k` on the sorted multiset `s`, if enabled.
    fn fire(&self, s: &[u32], k: usize) -> Option<Box<[u32]>> {
        let (_, pre, post) = &self.transitions[k];
        let mut v = s.to_vec();
        for p in pre {
            let pos = v.binary_search(p).ok()?;
            v.remove(pos);
        }
        for &p in post {
            let pos = v.binary_search(&p).unwrap_or_else(|e| e);
            v.insert(pos, p);
        }
        Some(v.into_boxed_slice())
    }
}

fn has_duplicate(s: &[u32]) -> bool {
    s.windows(2).any(|w| w[0] == w[1])
}

/// The reachability graph of a marked net. State 0 is the initial marking.
#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    places: Vec<PlaceId>,
    states: Vec<Box<[u32]>>,
    index: HashMap<Box<[u32]>, usize>,
    edges: Vec<(usize, TransitionId, usize)>,
    labels: HashMap<TransitionId, Label>,
}

impl ReachabilityGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[(usize, TransitionId, usize)] {
        &self.edges
    }

    pub fn marking(&self, state: usize) -> Marking {
        Marking::from_places(self.states[state].iter().map(|&ix| self.places[ix as usize]))
    }

    pub fn find(&self, marking: &Marking) -> Option<usize> {
        let mut v = Vec::new();
        for (p, n) in marking.iter() {
            let ix = self.places.iter().position(|&q| q == p)? as u32;
            v.extend(std::iter::repeat_n(ix, n as usize));
        }
        v.sort_unstable();
        self.index.get(v.as_slice()).copied()
    }

    pub fn label(&self, t: TransitionId) -> &Label {
        &self.labels[&t]
    }

    /// Outgoing `(transition, target)` pairs per state.
    pub fn successors(&self) -> Vec<Vec<(TransitionId, usize)>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for &(s, t, d) in &self.edges {
            out[s].push((t, d));
        }
        out
    }

    /// True when some reachable marking puts two tokens in a place.
    pub fn has_unsafe_marking(&self) -> bool {
        self.states.iter().any(|s| has_duplicate(s))
    }
}

/// Explores from `initial`; stops early (returning `true`) once `stop`
/// holds for a discovered state.
fn explore(
    net: &LabeledNet,
    initial: &Marking,
    bound: usize,
    stop: impl Fn(&[u32]) -> bool,
) -> Result<(ReachabilityGraph, bool), PetriError> {
    let bound = bound.max(1);
    let c = Compiled::new(net);
    let start = c.encode(initial);
    let mut graph = ReachabilityGraph {
        places: c.places.clone(),
        states: vec![start.clone()],
        index: HashMap::from([(start.clone(), 0)]),
        edges: Vec::new(),
        labels: net.transitions().map(|t| (t, net.label(t).clone())).collect(),
    };
    if stop(&start) {
        return Ok((graph, true));
    }
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let current = graph.states[s].clone();
        for k in 0..c.transitions.len() {
            let Some(next) = c.fire(&current, k) else { continue };
            let target = match graph.index.get(&next) {
                Some(&d) => d,
                None => {
                    if graph.states.len() >= bound {
                        return Err(PetriError::StateBound { bound });
                    }
                    let d = graph.states.len();
                    let halt = stop(&next);
                    graph.states.push(next.clone());
                    graph.index.insert(next, d);
                    if halt {
                        graph.edges.push((s, c.transitions[k].0, d));
                        return Ok((graph, true));
                    }
                    queue.push_back(d);
                    d
                }
            };
            graph.edges.push((s, c.transitions[k].0, target));
        }
    }
    Ok((graph, false))
}

/// All markings reachable from `initial` with their occurrence edges.
/// Fails once more than `bound` distinct markings have been found.
pub fn reachability_graph(net: &LabeledNet, initial: &Marking, bound: usize) -> Result<ReachabilityGraph, PetriError> {
    explore(net, initial, bound, |_| false).map(|(g, _)| g)
}

/// Every marking reachable from `{i}` puts at most one token in each place.
pub fn is_safe(wf: &WorkflowNet, bound: usize) -> Result<bool, PetriError> {
    let (_, stopped) = explore(wf.net(), &wf.initial_marking(), bound, has_duplicate)?;
    Ok(!stopped)
}

/// Option to complete (`{f}` reachable from every reachable marking) and no
/// dead transitions.
pub fn is_sound(wf: &WorkflowNet, bound: usize) -> Result<bool, PetriError> {
    let g = reachability_graph(wf.net(), &wf.initial_marking(), bound)?;
    let Some(final_state) = g.find(&wf.final_marking()) else {
        return Ok(false);
    };
    let fired: HashSet<TransitionId> = g.edges.iter().map(|&(_, t, _)| t).collect();
    if fired.len() != wf.net().transition_count() {
        return Ok(false);
    }
    let mut reverse = vec![Vec::new(); g.state_count()];
    for &(s, _, d) in &g.edges {
        reverse[d].push(s);
    }
    let mut seen = vec![false; g.state_count()];
    seen[final_state] = true;
    let mut stack = vec![final_state];
    while let Some(s) = stack.pop() {
        for &p in &reverse[s] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    Ok(seen.into_iter().all(|b| b))
}

/// Observable words of length at most `max_len` of runs from `{i}` to
/// `{f}`.
pub fn accepted_words(wf: &WorkflowNet, max_len: usize, bound: usize) -> Result<BTreeSet<Vec<String>>, PetriError> {
    let g = reachability_graph(wf.net(), &wf.initial_marking(), bound)?;
    let final_state = g.find(&wf.final_marking());
    let succ = g.successors();
    let mut words = BTreeSet::new();
    let mut seen: HashSet<(usize, Vec<String>)> = HashSet::new();
    let mut queue = VecDeque::from([(0usize, Vec::<String>::new())]);
    seen.insert((0, Vec::new()));
    while let Some((s, w)) = queue.pop_front() {
        if Some(s) == final_state {
            words.insert(w.clone());
        }
        for &(t, d) in &succ[s] {
            let mut next = w.clone();
            if let Label::Visible(l) = g.label(t) {
                if next.len() == max_len {
                    continue;
                }
                next.push(l.clone());
            }
            if seen.insert((d, next.clone())) {
                queue.push_back((d, next));
            }
        }
    }
    Ok(words)
}
