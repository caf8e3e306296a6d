//! Agent trace sets, interaction logs and agent logs.
//!
//! An agent trace is a maximal run of consecutive events of one case that
//! share the agent attribute. The interaction log keeps the first event of
//! every agent trace and names events by agent; the agent log of `a` keeps
//! the agent traces performed by `a` and names events by `(agent, activity)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::event::{case_trace_set, Event, EventLog, EventSelection, Naming, Trace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("agent '{0}' does not occur in the selection")]
    UnknownAgent(String),
}

/// Cuts every case trace wherever the agent changes. Traces are returned in
/// the order of their first event.
pub fn agent_trace_set(selection: &EventSelection) -> Vec<Trace> {
    let mut out = Vec::new();
    for case in case_trace_set(selection) {
        let mut run: Vec<Event> = Vec::new();
        for e in case.events() {
            if run.last().is_some_and(|last| last.agent != e.agent) {
                out.push(Trace::from_sorted(std::mem::take(&mut run)));
            }
            run.push(e.clone());
        }
        out.push(Trace::from_sorted(run));
    }
    out.sort_by_key(|t| t.first().order_key());
    out
}

fn interaction_from_traces(traces: &[Trace]) -> EventLog {
    let firsts: Vec<Event> = traces.iter().map(|t| t.first().clone()).collect();
    let selection = EventSelection::new(firsts).expect("agent traces are disjoint");
    EventLog::from_cases(selection, Naming::AgentOnly)
}

/// The first events of all agent traces, grouped by case and named by
/// agent.
pub fn interaction_log(selection: &EventSelection) -> EventLog {
    interaction_from_traces(&agent_trace_set(selection))
}

fn agent_log_from_traces(traces: &[Trace], agent: &str) -> Option<EventLog> {
    let mine: Vec<Trace> = traces.iter().filter(|t| t.first().agent == agent).cloned().collect();
    if mine.is_empty() {
        return None;
    }
    let events: Vec<Event> = mine.iter().flat_map(|t| t.events().iter().cloned()).collect();
    let selection = EventSelection::new(events).expect("agent traces are disjoint");
    Some(EventLog::from_parts(selection, mine, Naming::Aal))
}

/// The agent traces performed by `agent`, named by `(agent, activity)`.
pub fn agent_log(selection: &EventSelection, agent: &str) -> Result<EventLog, PartitionError> {
    agent_log_from_traces(&agent_trace_set(selection), agent).ok_or_else(|| PartitionError::UnknownAgent(agent.to_string()))
}

/// Interaction log and agent logs in one pass.
pub struct Partition {
    pub agent_traces: Vec<Trace>,
    pub interaction: EventLog,
    pub agent_logs: BTreeMap<String, EventLog>,
}

pub fn partition(selection: &EventSelection) -> Partition {
    let agent_traces = agent_trace_set(selection);
    let interaction = interaction_from_traces(&agent_traces);
    let agent_logs = selection
        .agents()
        .into_iter()
        .map(|a| {
            let log = agent_log_from_traces(&agent_traces, a).expect("agent occurs");
            (a.to_string(), log)
        })
        .collect();
    Partition {
        agent_traces,
        interaction,
        agent_logs,
    }
}
