//! Deterministic automata over string labels: prefix-tree acceptors of
//! logs, determinized net languages, products and minimization.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::ConformanceError;
use crate::event::EventLog;
use crate::petri::{reachability_graph, Label, LabeledNet, PlaceId, TransitionId, WorkflowNet};

pub const DETERMINIZATION_CAP: usize = 1_000_000;

/// A DFA with a partial transition function. Symbols are indices into the
/// sorted alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<String>,
    transitions: Vec<BTreeMap<usize, usize>>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    /// Accepts nothing.
    pub fn empty(alphabet: Vec<String>) -> Dfa {
        Dfa {
            alphabet,
            transitions: vec![BTreeMap::new()],
            initial: 0,
            accepting: vec![false],
        }
    }

    /// Builds a DFA from raw parts; `alphabet` must be sorted and free of
    /// duplicates, and every target a valid state.
    pub fn from_parts(
        alphabet: Vec<String>,
        transitions: Vec<BTreeMap<usize, usize>>,
        initial: usize,
        accepting: Vec<bool>,
    ) -> Dfa {
        assert!(alphabet.windows(2).all(|w| w[0] < w[1]), "alphabet must be sorted");
        assert_eq!(transitions.len(), accepting.len());
        assert!(initial < accepting.len());
        assert!(transitions
            .iter()
            .all(|m| m.iter().all(|(&a, &t)| a < alphabet.len() && t < accepting.len())));
        Dfa {
            alphabet,
            transitions,
            initial,
            accepting,
        }
    }

    /// Prefix-tree acceptor of a set of words.
    pub fn from_words<S: AsRef<str>>(words: &[Vec<S>]) -> Dfa {
        let alphabet: Vec<String> = words
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut transitions = vec![BTreeMap::new()];
        let mut accepting = vec![false];
        for w in words {
            let mut s = 0;
            for a in w {
                let sym = index[a.as_ref()];
                s = match transitions[s].get(&sym) {
                    Some(&t) => t,
                    None => {
                        let t = transitions.len();
                        transitions.push(BTreeMap::new());
                        accepting.push(false);
                        transitions[s].insert(sym, t);
                        t
                    }
                };
            }
            accepting[s] = true;
        }
        Dfa {
            alphabet,
            transitions,
            initial: 0,
            accepting,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    /// `(symbol, target)` pairs leaving `s`.
    pub fn moves(&self, s: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.transitions[s].iter().map(|(&a, &t)| (a, t))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(BTreeMap::len).sum()
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let mut s = self.initial;
        for a in word {
            let Ok(sym) = self.alphabet.binary_search_by(|x| x.as_str().cmp(a.as_ref())) else {
                return false;
            };
            match self.transitions[s].get(&sym) {
                Some(&t) => s = t,
                None => return false,
            }
        }
        self.accepting[s]
    }

    pub fn is_empty_language(&self) -> bool {
        !self.coreachable()[self.initial]
    }

    /// True when the transition graph restricted to useful states has a
    /// cycle, i.e. the language is infinite.
    pub fn has_cycle(&self) -> bool {
        let t = self.trim();
        let n = t.state_count();
        let mut indegree = vec![0usize; n];
        for s in 0..n {
            for (_, d) in t.moves(s) {
                indegree[d] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut seen = 0;
        while let Some(s) = queue.pop_front() {
            seen += 1;
            for (_, d) in t.moves(s) {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    queue.push_back(d);
                }
            }
        }
        seen < n
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut reverse = vec![Vec::new(); n];
        for s in 0..n {
            for (_, t) in self.moves(s) {
                reverse[t].push(s);
            }
        }
        let mut seen = self.accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &reverse[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Restricts to states on some accepting path, renumbered in BFS order
    /// from the initial state.
    pub fn trim(&self) -> Dfa {
        let co = self.coreachable();
        if !co[self.initial] {
            return Dfa::empty(self.alphabet.clone());
        }
        let mut id = vec![usize::MAX; self.state_count()];
        let mut order = vec![self.initial];
        id[self.initial] = 0;
        let mut k = 0;
        while k < order.len() {
            let s = order[k];
            k += 1;
            for (_, t) in self.moves(s) {
                if co[t] && id[t] == usize::MAX {
                    id[t] = order.len();
                    order.push(t);
                }
            }
        }
        let transitions = order
            .iter()
            .map(|&s| self.moves(s).filter(|&(_, t)| co[t]).map(|(a, t)| (a, id[t])).collect())
            .collect();
        let accepting = order.iter().map(|&s| self.accepting[s]).collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            transitions,
            initial: 0,
            accepting,
        }
    }

    /// Minimal trimmed DFA by Moore partition refinement.
    pub fn minimize(&self) -> Dfa {
        let t = self.trim();
        if t.is_empty_language() {
            return t;
        }
        let n = t.state_count();
        let mut class: Vec<usize> = t.accepting.iter().map(|&a| usize::from(a)).collect();
        loop {
            let mut signatures: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let sig = (class[s], t.moves(s).map(|(a, d)| (a, class[d])).collect::<Vec<_>>());
                let len = signatures.len();
                next[s] = *signatures.entry(sig).or_insert(len);
            }
            let stable = signatures.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let classes = class.iter().max().map_or(0, |m| m + 1);
        let mut transitions = vec![BTreeMap::new(); classes];
        let mut accepting = vec![false; classes];
        for s in 0..n {
            accepting[class[s]] = t.accepting[s];
            for (a, d) in t.moves(s) {
                transitions[class[s]].insert(a, class[d]);
            }
        }
        Dfa {
            alphabet: t.alphabet.clone(),
            transitions,
            initial: class[t.initial],
            accepting,
        }
        .trim()
    }

    /// Accepted words of length at most `max_len`, sorted.
    pub fn words_up_to(&self, max_len: usize) -> BTreeSet<Vec<String>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(self.initial, Vec::<String>::new())];
        while let Some((s, w)) = stack.pop() {
            if self.accepting[s] {
                out.insert(w.clone());
            }
            if w.len() < max_len {
                for (a, t) in self.moves(s) {
                    let mut next = w.clone();
                    next.push(self.alphabet[a].clone());
                    stack.push((t, next));
                }
            }
        }
        out
    }
}

/// Prefix-tree acceptor of the label sequences of `log`.
pub fn log_automaton(log: &EventLog) -> Result<Dfa, ConformanceError> {
    Ok(Dfa::from_words(&log.label_sequences()?))
}

/// Determinized observable language of `wf`: runs from `{i}` ending in
/// `{f}`, silent steps erased.
///
/// Silent choices are resolved up front (see `resolve_silent_choices`), so
/// `state_bound` counts markings of the reduced net and unsafety is detected
/// on that net.
pub fn model_automaton(wf: &WorkflowNet, state_bound: usize) -> Result<Dfa, ConformanceError> {
    let net = resolve_silent_choices(wf.net(), &[wf.initial(), wf.final_place()]);
    net_automaton(&net, wf, state_bound)
}

/// Determinizes `net`, which shares `wf`'s source and sink places.
fn net_automaton(net: &LabeledNet, wf: &WorkflowNet, state_bound: usize) -> Result<Dfa, ConformanceError> {
    let graph = reachability_graph(net, &wf.initial_marking(), state_bound)?;
    if graph.has_unsafe_marking() {
        return Err(ConformanceError::Unsafe);
    }
    let alphabet: Vec<String> = net.visible_labels().into_iter().map(str::to_string).collect();
    let symbol: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = graph.state_count();
    let mut silent: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut visible: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(s, t, d) in graph.edges() {
        match graph.label(t) {
            Label::Silent => silent[s].push(d),
            Label::Visible(l) => visible[s].push((symbol[l.as_str()], d)),
        }
    }
    let final_state = graph.find(&wf.final_marking());
    // A subset is kept only by its frontier: states with a visible move or
    // the final marking. Closures with equal frontiers accept the same
    // suffixes.
    let frontier: Vec<bool> = (0..n).map(|s| !visible[s].is_empty() || Some(s) == final_state).collect();
    let mut mark = vec![0u32; n];
    let mut epoch = 0u32;
    let mut closure = |seeds: Vec<usize>| -> Vec<usize> {
        epoch += 1;
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in seeds {
            if mark[s] != epoch {
                mark[s] = epoch;
                stack.push(s);
            }
        }
        while let Some(s) = stack.pop() {
            if frontier[s] {
                out.push(s);
            }
            for &d in &silent[s] {
                if mark[d] != epoch {
                    mark[d] = epoch;
                    stack.push(d);
                }
            }
        }
        out.sort_unstable();
        out
    };

    let start = closure(vec![0]);
    let mut subsets: Vec<Vec<usize>> = vec![start.clone()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start, 0)]);
    let mut transitions: Vec<BTreeMap<usize, usize>> = Vec::new();
    let mut k = 0;
    while k < subsets.len() {
        let mut moves: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &s in &subsets[k] {
            for &(a, d) in &visible[s] {
                moves.entry(a).or_default().push(d);
            }
        }
        let mut row = BTreeMap::new();
        for (a, targets) in moves {
            let target = closure(targets);
            let id = match index.get(&target) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= DETERMINIZATION_CAP {
                        return Err(ConformanceError::DeterminizationCap { cap: DETERMINIZATION_CAP });
                    }
                    let id = subsets.len();
                    subsets.push(target.clone());
                    index.insert(target, id);
                    id
                }
            };
            row.insert(a, id);
        }
        transitions.push(row);
        k += 1;
    }
    let accepting = subsets
        .iter()
        .map(|set| final_state.is_some_and(|f| set.binary_search(&f).is_ok()))
        .collect();
    Ok(Dfa {
        alphabet,
        transitions,
        initial: 0,
        accepting,
    }
    .trim())
}

/// Largest number of transition copies one resolution step may create.
const RESOLUTION_FANOUT: usize = 256;

/// Folds silent transitions into the producers of their input place. A place
/// `p` qualifies when every transition it feeds is silent with preset `{p}`:
/// such a step can always fire right after the token arrives without losing
/// runs, so each producer `u` of `p` is replaced by one copy per consumer `t`
/// with postset `u• - p + t•`. The observable language from `{i}` to `{f}` is
/// unchanged.
fn resolve_silent_choices(net: &LabeledNet, keep: &[PlaceId]) -> LabeledNet {
    let mut net = net.clone();
    loop {
        let candidate = net.places().find(|&p| {
            let (pre, post) = (net.place_preset(p), net.place_postset(p));
            !keep.contains(&p)
                && !pre.is_empty()
                && !post.is_empty()
                && pre.len() * post.len() <= RESOLUTION_FANOUT
                && post.iter().all(|&t| {
                    net.label(t).is_silent()
                        && net.preset(t).len() == 1
                        && pre.iter().all(|&u| net.postset(u).iter().all(|q| *q == p || !net.postset(t).contains(q)))
                        && !net.postset(t).contains(&p)
                })
        });
        let Some(p) = candidate else { return net };
        let producers: Vec<TransitionId> = net.place_preset(p).iter().copied().collect();
        let consumers: Vec<TransitionId> = net.place_postset(p).iter().copied().collect();
        for &u in &producers {
            for &t in &consumers {
                let copy = net.add_transition(format!("{}+{}", net.transition_name(u), net.transition_name(t)), net.label(u).clone());
                let inputs: Vec<PlaceId> = net.preset(u).iter().copied().collect();
                let outputs: Vec<PlaceId> = net.postset(u).iter().filter(|&&q| q != p).chain(net.postset(t)).copied().collect();
                for q in inputs {
                    net.add_input(q, copy).expect("existing place");
                }
                for q in outputs {
                    net.add_output(copy, q).expect("existing place");
                }
            }
        }
        for t in producers.into_iter().chain(consumers) {
            net.remove_transition(t).expect("existing transition");
        }
        net.remove_place(p).expect("existing place");
    }
}

/// Product automaton over the union alphabet, trimmed.
pub fn intersect(a: &Dfa, b: &Dfa) -> Dfa {
    let alphabet: Vec<String> = a.alphabet.iter().chain(&b.alphabet).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let pos = |x: &Dfa| -> Vec<usize> { x.alphabet.iter().map(|s| alphabet.binary_search(s).unwrap()).collect() };
    let (pa, pb) = (pos(a), pos(b));
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([((a.initial, b.initial), 0)]);
    let mut pairs = vec![(a.initial, b.initial)];
    let mut transitions: Vec<BTreeMap<usize, usize>> = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let (x, y) = pairs[k];
        let ymoves: BTreeMap<usize, usize> = b.moves(y).map(|(s, t)| (pb[s], t)).collect();
        let mut row = BTreeMap::new();
        for (s, tx) in a.moves(x) {
            let sym = pa[s];
            if let Some(&ty) = ymoves.get(&sym) {
                let id = *index.entry((tx, ty)).or_insert_with(|| {
                    pairs.push((tx, ty));
                    pairs.len() - 1
                });
                row.insert(sym, id);
            }
        }
        transitions.push(row);
        k += 1;
    }
    let accepting = pairs.iter().map(|&(x, y)| a.accepting[x] && b.accepting[y]).collect();
    Dfa {
        alphabet,
        transitions,
        initial: 0,
        accepting,
    }
    .trim()
}

/// Language equality by exploring the product of the completed automata.
pub fn equivalent(a: &Dfa, b: &Dfa) -> bool {
    let a = a.minimize();
    let b = b.minimize();
    let alphabet: BTreeSet<&String> = a.alphabet.iter().chain(&b.alphabet).collect();
    let step = |d: &Dfa, s: Option<usize>, sym: &str| -> Option<usize> {
        let s = s?;
        let ix = d.alphabet.binary_search_by(|x| x.as_str().cmp(sym)).ok()?;
        d.transitions[s].get(&ix).copied()
    };
    let accepts = |d: &Dfa, s: Option<usize>| s.is_some_and(|s| d.accepting[s]);
    let mut seen = BTreeSet::from([(Some(a.initial), Some(b.initial))]);
    let mut queue = VecDeque::from([(Some(a.initial), Some(b.initial))]);
    while let Some((x, y)) = queue.pop_front() {
        if accepts(&a, x) != accepts(&b, y) {
            return false;
        }
        for sym in &alphabet {
            let next = (step(&a, x, sym), step(&b, y, sym));
            if next != (None, None) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    true
}
