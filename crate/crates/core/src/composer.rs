//! Agent Miner: an interaction net over agents, one agent net per agent
//! type, and their composition into a multi-agent system (MAS) net.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::conformance::model_automaton;
use crate::dfg::{build_dfg, dfg_to_wfnet, filter_dfg};
use crate::event::{EventLog, EventSelection};
use crate::inductive::{discover_tree, tree_to_wfnet};
use crate::partition::partition;
use crate::petri::{is_safe, is_sound, reachability_graph, refine_transition, LabelDiscipline, PetriError, TransitionId, WorkflowNet};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

/// Pluggable log-to-net discovery. `parameter` is the filter or noise
/// setting of the algorithm.
pub trait NetDiscovery: Sync {
    fn name(&self) -> &'static str;
    fn discover(&self, log: &EventLog, parameter: f64) -> Result<WorkflowNet, BoxError>;
}

/// DFG with activity frequency filter `ff ∈ (0, 1]`, translated to a net
/// and reduced by Fusion of Series Places.
#[derive(Debug, Clone, Copy, Default)]
pub struct DfgMiner;

impl NetDiscovery for DfgMiner {
    fn name(&self) -> &'static str {
        "dfg"
    }

    fn discover(&self, log: &EventLog, ff: f64) -> Result<WorkflowNet, BoxError> {
        let dfg = filter_dfg(&build_dfg(log)?, ff)?;
        Ok(dfg_to_wfnet(&dfg)?.fuse_series_places())
    }
}

/// Inductive miner with noise threshold in `[0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InductiveMiner;

impl NetDiscovery for InductiveMiner {
    fn name(&self) -> &'static str {
        "inductive"
    }

    fn discover(&self, log: &EventLog, noise: f64) -> Result<WorkflowNet, BoxError> {
        Ok(tree_to_wfnet(&discover_tree(log, noise)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    AgentTraces,
    InteractionLog,
    InteractionNet,
    AgentLogs,
    AgentNets,
    MasNet,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::AgentTraces => "create agent trace set",
            Step::InteractionLog => "create interaction log",
            Step::InteractionNet => "discover interaction net",
            Step::AgentLogs => "create agent logs",
            Step::AgentNets => "discover agent nets",
            Step::MasNet => "discover MAS net",
        })
    }
}

#[derive(Debug, Error)]
pub enum ComposerError {
    #[error("{step}: {source}")]
    Step {
        step: Step,
        #[source]
        source: BoxError,
    },
    #[error("no observable iteration could be removed: {0}")]
    IterationRemoval(String),
    #[error("no agent net for interaction label '{0}'")]
    MissingAgentNet(String),
    #[error("bundle has no agent nets")]
    EmptyBundle,
    #[error(transparent)]
    Petri(#[from] PetriError),
}

fn at<E: Into<BoxError>>(step: Step) -> impl FnOnce(E) -> ComposerError {
    move |e| ComposerError::Step { step, source: e.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposerOptions {
    pub remove_iterations: bool,
    pub state_bound: usize,
}

impl Default for ComposerOptions {
    fn default() -> Self {
        ComposerOptions {
            remove_iterations: true,
            state_bound: crate::petri::DEFAULT_STATE_BOUND,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub ff: f64,
    pub th: f64,
}

#[derive(Debug, Clone)]
pub struct DiscoveryBundle {
    pub interaction_net: WorkflowNet,
    pub agent_nets: BTreeMap<String, WorkflowNet>,
    pub mas_net: WorkflowNet,
    pub parameters: Parameters,
    pub warnings: Vec<String>,
}

/// Silent transitions closing a cycle `M -t-> M' -τ*-> M` with `t`
/// observable, in id order.
fn iteration_closers(wf: &WorkflowNet, bound: usize) -> Result<Vec<TransitionId>, PetriError> {
    let graph = reachability_graph(wf.net(), &wf.initial_marking(), bound)?;
    let succ = graph.successors();
    let mut closers = BTreeSet::new();
    for &(m, t, m1) in graph.edges() {
        if graph.label(t).is_silent() {
            continue;
        }
        let mut seen = BTreeSet::from([m1]);
        let mut stack = vec![m1];
        while let Some(s) = stack.pop() {
            for &(u, d) in &succ[s] {
                if !graph.label(u).is_silent() {
                    continue;
                }
                if d == m {
                    closers.insert(u);
                }
                if seen.insert(d) {
                    stack.push(d);
                }
            }
        }
    }
    Ok(closers.into_iter().collect())
}

/// Deletes silent transitions that let an observable transition repeat with
/// only silent steps in between, to fixpoint. A deletion is kept only if the
/// result is a safe and sound workflow net that still accepts every
/// `reference` word the input accepted. Fails when iterations exist but none
/// can be removed.
pub fn remove_observable_iterations(
    inet: &WorkflowNet,
    state_bound: usize,
    reference: Option<&[Vec<String>]>,
) -> Result<WorkflowNet, ComposerError> {
    let accepted = |wf: &WorkflowNet| -> Result<Vec<Vec<String>>, ComposerError> {
        let Some(words) = reference else { return Ok(Vec::new()) };
        let dfa = model_automaton(wf, state_bound).map_err(|e| ComposerError::IterationRemoval(e.to_string()))?;
        Ok(words.iter().filter(|w| dfa.accepts(w)).cloned().collect())
    };
    let must_accept = accepted(inet)?;
    let mut current = inet.clone();
    let mut removed = 0;
    let mut last_reason = String::new();
    'outer: loop {
        let closers = iteration_closers(&current, state_bound)?;
        if closers.is_empty() {
            break;
        }
        for t in closers {
            let candidate = match current.without_transition(t) {
                Ok(c) => c,
                Err(e) => {
                    last_reason = format!("removing {t}: {e}");
                    continue;
                }
            };
            if !is_safe(&candidate, state_bound)? || !is_sound(&candidate, state_bound)? {
                last_reason = format!("removing {t} breaks safeness or soundness");
                continue;
            }
            if accepted(&candidate)?.len() < must_accept.len() {
                last_reason = format!("removing {t} loses reference behavior");
                continue;
            }
            current = candidate;
            removed += 1;
            continue 'outer;
        }
        if removed == 0 {
            return Err(ComposerError::IterationRemoval(last_reason));
        }
        break;
    }
    Ok(current)
}

/// Refines every observable transition of `inet` with the agent net of its
/// label, then fuses series places.
pub fn compose_mas(inet: &WorkflowNet, agent_nets: &BTreeMap<String, WorkflowNet>) -> Result<WorkflowNet, ComposerError> {
    let mut mas = inet.clone();
    for t in inet.net().observable_transitions() {
        let label = inet.net().label(t).as_visible().expect("observable");
        let sub = agent_nets.get(label).ok_or_else(|| ComposerError::MissingAgentNet(label.to_string()))?;
        mas = refine_transition(&mas, t, sub)?;
    }
    Ok(mas.fuse_series_places())
}

/// The six discovery steps. Agent nets come from `anda` with parameter
/// `ff`, the interaction net from `inda` with parameter `th`.
pub fn discover(
    selection: &EventSelection,
    anda: &dyn NetDiscovery,
    inda: &dyn NetDiscovery,
    ff: f64,
    th: f64,
    options: ComposerOptions,
) -> Result<DiscoveryBundle, ComposerError> {
    if selection.is_empty() {
        return Err(at(Step::AgentTraces)("no events after selection"));
    }
    let parts = partition(selection);
    let mut warnings = Vec::new();

    let interaction = &parts.interaction;
    let reference = interaction.label_sequences().map_err(at(Step::InteractionLog))?;
    let mut inet = inda.discover(interaction, th).map_err(at(Step::InteractionNet))?;
    LabelDiscipline::Interaction.check(inet.net()).map_err(at(Step::InteractionNet))?;
    if options.remove_iterations {
        match remove_observable_iterations(&inet, options.state_bound, Some(&reference)) {
            Ok(net) => inet = net,
            Err(ComposerError::Petri(e)) => return Err(at(Step::InteractionNet)(e)),
            Err(e) => {
                let msg = format!("keeping interaction net unchanged: {e}");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }

    let mut agent_nets = BTreeMap::new();
    for (agent, log) in &parts.agent_logs {
        if log.is_empty() {
            return Err(at(Step::AgentLogs)(format!("agent log of '{agent}' is empty")));
        }
        let net = anda.discover(log, ff).map_err(at(Step::AgentNets))?;
        LabelDiscipline::Agent(agent.clone()).check(net.net()).map_err(at(Step::AgentNets))?;
        agent_nets.insert(agent.clone(), net);
    }

    let mas_net = compose_mas(&inet, &agent_nets).map_err(at(Step::MasNet))?;
    LabelDiscipline::Mas.check(mas_net.net()).map_err(at(Step::MasNet))?;
    Ok(DiscoveryBundle {
        interaction_net: inet,
        agent_nets,
        mas_net,
        parameters: Parameters { ff, th },
        warnings,
    })
}

/// Safeness and soundness of one net; `Err` carries the reason the check
/// could not finish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetVerdict {
    pub net: String,
    pub safe: Result<bool, String>,
    pub sound: Result<bool, String>,
}

impl NetVerdict {
    pub fn holds(&self) -> bool {
        self.safe == Ok(true) && self.sound == Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleReport {
    pub verdicts: Vec<NetVerdict>,
}

impl BundleReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(NetVerdict::holds)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|v| !v.holds()).map(|v| v.net.as_str()).collect()
    }
}

fn verdict(name: String, wf: &WorkflowNet, bound: usize) -> NetVerdict {
    NetVerdict {
        net: name,
        safe: is_safe(wf, bound).map_err(|e| e.to_string()),
        sound: is_sound(wf, bound).map_err(|e| e.to_string()),
    }
}

/// Checks the interaction net, every agent net (named `agent:<type>`) and
/// the MAS net.
pub fn verify_bundle(bundle: &DiscoveryBundle, state_bound: usize) -> Result<BundleReport, ComposerError> {
    if bundle.agent_nets.is_empty() {
        return Err(ComposerError::EmptyBundle);
    }
    let mut verdicts = vec![verdict("interaction".into(), &bundle.interaction_net, state_bound)];
    for (agent, net) in &bundle.agent_nets {
        verdicts.push(verdict(format!("agent:{agent}"), net, state_bound));
    }
    verdicts.push(verdict("mas".into(), &bundle.mas_net, state_bound));
    Ok(BundleReport { verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::{accepted_words, Label, LabeledNet};

    /// `i -τ-> q -a1-> p -τ-> q -τ-> f`.
    fn self_loop(with_exit_from_p: bool) -> WorkflowNet {
        let mut net = LabeledNet::new();
        let i = net.add_place("i");
        let q = net.add_place("q");
        let p = net.add_place("p");
        let f = net.add_place("f");
        let enter = net.add_transition("enter", Label::Silent);
        net.add_input(i, enter).unwrap();
        net.add_output(enter, q).unwrap();
        let a = net.add_transition("a1", Label::visible("a1"));
        net.add_input(q, a).unwrap();
        net.add_output(a, p).unwrap();
        let back = net.add_transition("back", Label::Silent);
        net.add_input(p, back).unwrap();
        net.add_output(back, q).unwrap();
        let exit = net.add_transition("exit", Label::Silent);
        if with_exit_from_p {
            net.add_input(p, exit).unwrap();
        } else {
            net.add_input(q, exit).unwrap();
        }
        net.add_output(exit, f).unwrap();
        WorkflowNet::new(net, i, f).unwrap()
    }

    fn words(wf: &WorkflowNet, n: usize) -> BTreeSet<Vec<String>> {
        accepted_words(wf, n, 1000).unwrap()
    }

    #[test]
    fn self_iteration_removed() {
        let wf = self_loop(true);
        assert!(words(&wf, 6).contains(&vec!["a1".to_string(), "a1".to_string()]));
        let fixed = remove_observable_iterations(&wf, 1000, None).unwrap();
        assert_eq!(words(&fixed, 6), BTreeSet::from([vec!["a1".to_string()]]));
    }

    #[test]
    fn only_iteration_is_not_repairable() {
        let wf = self_loop(false);
        assert!(matches!(
            remove_observable_iterations(&wf, 1000, None),
            Err(ComposerError::IterationRemoval(_))
        ));
    }

    #[test]
    fn single_agent_selection() {
        use crate::event::Event;
        let events = vec![
            Event::new(0, 0, "c1", "x", "d1"),
            Event::new(1, 1, "c1", "y", "d1"),
            Event::new(2, 2, "c2", "x", "d1"),
        ];
        let s = EventSelection::new(events).unwrap();
        let b = discover(&s, &DfgMiner, &InductiveMiner, 1.0, 0.0, ComposerOptions::default()).unwrap();
        assert_eq!(b.interaction_net.net().observable_transitions().len(), 1);
        assert_eq!(words(&b.mas_net, 4), words(&b.agent_nets["d1"], 4));
        assert!(verify_bundle(&b, 1000).unwrap().all_hold());
    }

    #[test]
    fn empty_inputs() {
        let err = discover(&EventSelection::empty(), &DfgMiner, &InductiveMiner, 1.0, 0.0, ComposerOptions::default()).unwrap_err();
        assert!(err.to_string().contains("no events after selection"));
        let wf = WorkflowNet::single(Label::visible("a"));
        let bundle = DiscoveryBundle {
            interaction_net: wf.clone(),
            agent_nets: BTreeMap::new(),
            mas_net: wf,
            parameters: Parameters { ff: 1.0, th: 0.0 },
            warnings: vec![],
        };
        assert!(matches!(verify_bundle(&bundle, 100), Err(ComposerError::EmptyBundle)));
    }
}
