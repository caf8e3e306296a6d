//! Labeled Petri nets and workflow nets.
//!
//! Nets are ordinary (arc weights are 1) and keep both directions of the flow
//! relation per node, so presets and postsets of places and transitions are
//! cheap lookups.

mod analysis;
mod dot;
mod pnml;
mod reduce;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::event::parse_aal;

pub use analysis::{accepted_words, enabled, fire, is_safe, is_sound, reachability_graph, ReachabilityGraph};
pub use dot::to_dot;
pub use pnml::{from_pnml, to_pnml};
pub use reduce::{fuse_series_places, refine_transition, rewrite_labels_to_activity};

pub const DEFAULT_STATE_BOUND: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PetriError {
    #[error("unknown place {0}")]
    UnknownPlace(PlaceId),
    #[error("unknown transition {0}")]
    UnknownTransition(TransitionId),
    #[error("transition {0} is not enabled")]
    NotEnabled(TransitionId),
    #[error("state bound exceeded: more than {bound} reachable markings")]
    StateBound { bound: usize },
    #[error("not a workflow net: {0}")]
    NotWorkflowNet(String),
    #[error("transition {0} is silent; only observable transitions can be refined")]
    SilentRefinement(TransitionId),
    #[error("label discipline violated: {0}")]
    Discipline(String),
    #[error("malformed PNML: {0}")]
    Pnml(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub u32);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Silent,
    Visible(String),
}

impl Label {
    pub fn visible(s: impl Into<String>) -> Self {
        Label::Visible(s.into())
    }

    pub fn is_silent(&self) -> bool {
        matches!(self, Label::Silent)
    }

    pub fn as_visible(&self) -> Option<&str> {
        match self {
            Label::Silent => None,
            Label::Visible(s) => Some(s),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Silent => f.write_str("τ"),
            Label::Visible(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PlaceData {
    name: String,
    pre: BTreeSet<TransitionId>,
    post: BTreeSet<TransitionId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TransitionData {
    name: String,
    label: Label,
    pre: BTreeSet<PlaceId>,
    post: BTreeSet<PlaceId>,
}

/// A labeled Petri net `(P, T, F, λ)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledNet {
    places: BTreeMap<PlaceId, PlaceData>,
    transitions: BTreeMap<TransitionId, TransitionData>,
    next_place: u32,
    next_transition: u32,
}

impl LabeledNet {
    pub fn new() -> Self {
        LabeledNet::default()
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> PlaceId {
        let id = PlaceId(self.next_place);
        self.next_place += 1;
        self.places.insert(
            id,
            PlaceData {
                name: name.into(),
                pre: BTreeSet::new(),
                post: BTreeSet::new(),
            },
        );
        id
    }

    pub fn add_transition(&mut self, name: impl Into<String>, label: Label) -> TransitionId {
        let id = TransitionId(self.next_transition);
        self.next_transition += 1;
        self.transitions.insert(
            id,
            TransitionData {
                name: name.into(),
                label,
                pre: BTreeSet::new(),
                post: BTreeSet::new(),
            },
        );
        id
    }

    /// Adds the arc `p → t`.
    pub fn add_input(&mut self, p: PlaceId, t: TransitionId) -> Result<(), PetriError> {
        self.check(p, t)?;
        self.places.get_mut(&p).unwrap().post.insert(t);
        self.transitions.get_mut(&t).unwrap().pre.insert(p);
        Ok(())
    }

    /// Adds the arc `t → p`.
    pub fn add_output(&mut self, t: TransitionId, p: PlaceId) -> Result<(), PetriError> {
        self.check(p, t)?;
        self.places.get_mut(&p).unwrap().pre.insert(t);
        self.transitions.get_mut(&t).unwrap().post.insert(p);
        Ok(())
    }

    fn check(&self, p: PlaceId, t: TransitionId) -> Result<(), PetriError> {
        if !self.places.contains_key(&p) {
            return Err(PetriError::UnknownPlace(p));
        }
        if !self.transitions.contains_key(&t) {
            return Err(PetriError::UnknownTransition(t));
        }
        Ok(())
    }

    pub fn remove_transition(&mut self, t: TransitionId) -> Result<(), PetriError> {
        let data = self.transitions.remove(&t).ok_or(PetriError::UnknownTransition(t))?;
        for p in data.pre {
            self.places.get_mut(&p).unwrap().post.remove(&t);
        }
        for p in data.post {
            self.places.get_mut(&p).unwrap().pre.remove(&t);
        }
        Ok(())
    }

    pub fn remove_place(&mut self, p: PlaceId) -> Result<(), PetriError> {
        let data = self.places.remove(&p).ok_or(PetriError::UnknownPlace(p))?;
        for t in data.pre {
            self.transitions.get_mut(&t).unwrap().post.remove(&p);
        }
        for t in data.post {
            self.transitions.get_mut(&t).unwrap().pre.remove(&p);
        }
        Ok(())
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.places.keys().copied()
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.transitions.keys().copied()
    }

    pub fn has_place(&self, p: PlaceId) -> bool {
        self.places.contains_key(&p)
    }

    pub fn has_transition(&self, t: TransitionId) -> bool {
        self.transitions.contains_key(&t)
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn arc_count(&self) -> usize {
        self.transitions.values().map(|t| t.pre.len() + t.post.len()).sum()
    }

    /// All arcs as `(source, target)` display names, places before
    /// transitions for input arcs.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut out = Vec::with_capacity(self.arc_count());
        for (&t, data) in &self.transitions {
            out.extend(data.pre.iter().map(|&p| Arc::Input(p, t)));
            out.extend(data.post.iter().map(|&p| Arc::Output(t, p)));
        }
        out
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[&p].name
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[&t].name
    }

    pub fn label(&self, t: TransitionId) -> &Label {
        &self.transitions[&t].label
    }

    pub fn set_label(&mut self, t: TransitionId, label: Label) -> Result<(), PetriError> {
        self.transitions
            .get_mut(&t)
            .ok_or(PetriError::UnknownTransition(t))?
            .label = label;
        Ok(())
    }

    /// `•t`
    pub fn preset(&self, t: TransitionId) -> &BTreeSet<PlaceId> {
        &self.transitions[&t].pre
    }

    /// `t•`
    pub fn postset(&self, t: TransitionId) -> &BTreeSet<PlaceId> {
        &self.transitions[&t].post
    }

    /// `•p`
    pub fn place_preset(&self, p: PlaceId) -> &BTreeSet<TransitionId> {
        &self.places[&p].pre
    }

    /// `p•`
    pub fn place_postset(&self, p: PlaceId) -> &BTreeSet<TransitionId> {
        &self.places[&p].post
    }

    /// Distinct observable labels, sorted.
    pub fn visible_labels(&self) -> BTreeSet<&str> {
        self.transitions.values().filter_map(|t| t.label.as_visible()).collect()
    }

    pub fn observable_transitions(&self) -> Vec<TransitionId> {
        self.transitions
            .iter()
            .filter(|(_, d)| !d.label.is_silent())
            .map(|(&t, _)| t)
            .collect()
    }

    /// Moves every arc of `from` onto `into` and deletes `from`.
    fn merge_place_into(&mut self, from: PlaceId, into: PlaceId) {
        let data = self.places.remove(&from).expect("place exists");
        for t in data.pre {
            let td = self.transitions.get_mut(&t).unwrap();
            td.post.remove(&from);
            td.post.insert(into);
            self.places.get_mut(&into).unwrap().pre.insert(t);
        }
        for t in data.post {
            let td = self.transitions.get_mut(&t).unwrap();
            td.pre.remove(&from);
            td.pre.insert(into);
            self.places.get_mut(&into).unwrap().post.insert(t);
        }
    }

    /// Copies `other` into this net under fresh ids. Names are prefixed with
    /// `prefix`. Returns the id maps.
    fn absorb(
        &mut self,
        other: &LabeledNet,
        prefix: &str,
    ) -> (BTreeMap<PlaceId, PlaceId>, BTreeMap<TransitionId, TransitionId>) {
        let pmap: BTreeMap<_, _> = other
            .places
            .iter()
            .map(|(&p, d)| (p, self.add_place(format!("{prefix}{}", d.name))))
            .collect();
        let mut tmap = BTreeMap::new();
        for (&t, d) in &other.transitions {
            let nt = self.add_transition(format!("{prefix}{}", d.name), d.label.clone());
            for p in &d.pre {
                self.add_input(pmap[p], nt).unwrap();
            }
            for p in &d.post {
                self.add_output(nt, pmap[p]).unwrap();
            }
            tmap.insert(t, nt);
        }
        (pmap, tmap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    Input(PlaceId, TransitionId),
    Output(TransitionId, PlaceId),
}

/// `|P| + |T| + |F|`
pub fn net_size(net: &LabeledNet) -> usize {
    net.place_count() + net.transition_count() + net.arc_count()
}

/// A multiset of places.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(BTreeMap<PlaceId, u32>);

impl Marking {
    pub fn new() -> Self {
        Marking::default()
    }

    pub fn single(p: PlaceId) -> Self {
        Marking::from_places([p])
    }

    pub fn from_places(places: impl IntoIterator<Item = PlaceId>) -> Self {
        let mut m = Marking::new();
        for p in places {
            m.add(p, 1);
        }
        m
    }

    pub fn tokens(&self, p: PlaceId) -> u32 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    pub fn add(&mut self, p: PlaceId, n: u32) {
        if n > 0 {
            *self.0.entry(p).or_insert(0) += n;
        }
    }

    /// Removes one token from `p`; false when `p` is empty.
    pub fn take(&mut self, p: PlaceId) -> bool {
        match self.0.get_mut(&p) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.0.remove(&p);
                true
            }
            None => false,
        }
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&n| u64::from(n)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.0.iter().map(|(&p, &n)| (p, n))
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if n == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{n}")?;
            }
        }
        f.write_str("]")
    }
}

/// A labeled net with a source place `i` and a sink place `f` such that
/// every node lies on a directed walk from `i` to `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowNet {
    net: LabeledNet,
    initial: PlaceId,
    final_place: PlaceId,
}

impl WorkflowNet {
    pub fn new(net: LabeledNet, initial: PlaceId, final_place: PlaceId) -> Result<Self, PetriError> {
        validate_workflow(&net, initial, final_place)?;
        Ok(WorkflowNet {
            net,
            initial,
            final_place,
        })
    }

    pub fn net(&self) -> &LabeledNet {
        &self.net
    }

    pub fn initial(&self) -> PlaceId {
        self.initial
    }

    pub fn final_place(&self) -> PlaceId {
        self.final_place
    }

    pub fn into_parts(self) -> (LabeledNet, PlaceId, PlaceId) {
        (self.net, self.initial, self.final_place)
    }

    pub fn initial_marking(&self) -> Marking {
        Marking::single(self.initial)
    }

    pub fn final_marking(&self) -> Marking {
        Marking::single(self.final_place)
    }

    pub fn size(&self) -> usize {
        net_size(&self.net)
    }

    /// The net `i → t → f` with one transition.
    pub fn single(label: Label) -> WorkflowNet {
        let mut net = LabeledNet::new();
        let i = net.add_place("i");
        let f = net.add_place("f");
        let name = label.as_visible().unwrap_or("tau").to_string();
        let t = net.add_transition(name, label);
        net.add_input(i, t).unwrap();
        net.add_output(t, f).unwrap();
        WorkflowNet {
            net,
            initial: i,
            final_place: f,
        }
    }
}

fn validate_workflow(net: &LabeledNet, i: PlaceId, f: PlaceId) -> Result<(), PetriError> {
    let bad = |m: String| Err(PetriError::NotWorkflowNet(m));
    if !net.has_place(i) {
        return bad(format!("initial place {i} missing"));
    }
    if !net.has_place(f) {
        return bad(format!("final place {f} missing"));
    }
    if i == f {
        return bad("initial and final place coincide".into());
    }
    if !net.place_preset(i).is_empty() {
        return bad(format!("initial place {i} has incoming arcs"));
    }
    if !net.place_postset(f).is_empty() {
        return bad(format!("final place {f} has outgoing arcs"));
    }
    let forward = walk(net, i, true);
    let backward = walk(net, f, false);
    for p in net.places() {
        if !forward.0.contains(&p) || !backward.0.contains(&p) {
            return bad(format!("place {p} is not on a walk from {i} to {f}"));
        }
    }
    for t in net.transitions() {
        if !forward.1.contains(&t) || !backward.1.contains(&t) {
            return bad(format!("transition {t} is not on a walk from {i} to {f}"));
        }
    }
    Ok(())
}

/// Nodes reachable from `start` along (or against) the flow relation.
fn walk(net: &LabeledNet, start: PlaceId, forward: bool) -> (BTreeSet<PlaceId>, BTreeSet<TransitionId>) {
    let mut places = BTreeSet::from([start]);
    let mut transitions = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let next_t = if forward { net.place_postset(p) } else { net.place_preset(p) };
        for &t in next_t {
            if transitions.insert(t) {
                let next_p = if forward { net.postset(t) } else { net.preset(t) };
                for &q in next_p {
                    if places.insert(q) {
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    (places, transitions)
}

/// Which alphabet the observable labels of a net are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelDiscipline {
    Plain,
    /// Labels are agent identifiers.
    Interaction,
    /// Labels are rendered `(agent, activity)` pairs.
    Mas,
    /// `(agent, activity)` pairs of the given agent only.
    Agent(String),
}

impl LabelDiscipline {
    pub fn check(&self, net: &LabeledNet) -> Result<(), PetriError> {
        for label in net.visible_labels() {
            let ok = match self {
                LabelDiscipline::Plain => true,
                LabelDiscipline::Interaction => parse_aal(label).is_none(),
                LabelDiscipline::Mas => parse_aal(label).is_some(),
                LabelDiscipline::Agent(a) => parse_aal(label).is_some_and(|(agent, _)| &agent == a),
            };
            if !ok {
                return Err(PetriError::Discipline(format!("label '{label}' violates {self:?}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> WorkflowNet {
        WorkflowNet::single(Label::visible("a"))
    }

    #[test]
    fn sizes() {
        assert_eq!(net_size(&LabeledNet::new()), 0);
        assert_eq!(chain().size(), 5);
    }

    #[test]
    fn workflow_validation() {
        let mut net = LabeledNet::new();
        let i = net.add_place("i");
        let f = net.add_place("f");
        let t = net.add_transition("a", Label::visible("a"));
        net.add_input(i, t).unwrap();
        net.add_output(t, f).unwrap();
        let stray = net.add_place("stray");
        assert!(WorkflowNet::new(net.clone(), i, f).is_err());
        net.remove_place(stray).unwrap();
        assert!(WorkflowNet::new(net.clone(), i, f).is_ok());
        assert!(WorkflowNet::new(net, f, i).is_err());
    }

    #[test]
    fn arcs_are_symmetric() {
        let w = chain();
        let n = w.net();
        for t in n.transitions() {
            for &p in n.preset(t) {
                assert!(n.place_postset(p).contains(&t));
            }
            for &p in n.postset(t) {
                assert!(n.place_preset(p).contains(&t));
            }
        }
        assert_eq!(n.arcs().len(), 2);
    }

    #[test]
    fn marking_take_and_add() {
        let mut m = Marking::single(PlaceId(0));
        m.add(PlaceId(0), 1);
        assert_eq!(m.tokens(PlaceId(0)), 2);
        assert!(m.take(PlaceId(0)));
        assert!(m.take(PlaceId(0)));
        assert!(!m.take(PlaceId(0)));
        assert!(m.is_empty());
    }

    #[test]
    fn disciplines() {
        let mut net = LabeledNet::new();
        net.add_transition("x", Label::visible("a1|check"));
        assert!(LabelDiscipline::Mas.check(&net).is_ok());
        assert!(LabelDiscipline::Agent("a1".into()).check(&net).is_ok());
        assert!(LabelDiscipline::Agent("a2".into()).check(&net).is_err());
        assert!(LabelDiscipline::Interaction.check(&net).is_err());
    }
}
