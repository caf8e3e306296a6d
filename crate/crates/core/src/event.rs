//! Events, event selections, traces and event logs.
//!
//! An [`EventSelection`] is kept sorted by `(timestamp, id)`, which makes
//! that pair a strict total order even when timestamps collide: the id is the
//! ingestion counter assigned by the parser or generator.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ingestion counter that identifies an event within a selection.
pub type EventId = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventError {
    #[error("duplicate event id {0}")]
    DuplicateId(EventId),
    #[error("missing attribute '{attribute}' on event {event}")]
    MissingAttribute { attribute: &'static str, event: EventId },
}

/// A single recorded event with the four mandatory attributes and any extra
/// string attributes carried over from the source log.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    /// Microseconds since the Unix epoch.
    pub timestamp: i64,
    pub case: String,
    pub activity: String,
    /// Agent instance before typing, agent type afterwards.
    pub agent: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, String>,
}

impl Event {
    pub fn new(
        id: EventId,
        timestamp: i64,
        case: impl Into<String>,
        activity: impl Into<String>,
        agent: impl Into<String>,
    ) -> Self {
        Event {
            id,
            timestamp,
            case: case.into(),
            activity: activity.into(),
            agent: agent.into(),
            extras: BTreeMap::new(),
        }
    }

    /// Key of the strict total order on events.
    pub fn order_key(&self) -> (i64, EventId) {
        (self.timestamp, self.id)
    }
}

/// A finite set of events, stored in `(timestamp, id)` order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventSelection {
    events: Vec<Event>,
}

impl EventSelection {
    /// Builds a selection, rejecting duplicate ids.
    pub fn new(mut events: Vec<Event>) -> Result<Self, EventError> {
        let mut seen = HashSet::with_capacity(events.len());
        for e in &events {
            if !seen.insert(e.id) {
                return Err(EventError::DuplicateId(e.id));
            }
        }
        events.sort_by_key(Event::order_key);
        Ok(EventSelection { events })
    }

    pub fn empty() -> Self {
        EventSelection::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    /// Distinct agent values, sorted.
    pub fn agents(&self) -> BTreeSet<&str> {
        self.events.iter().map(|e| e.agent.as_str()).collect()
    }

    /// Distinct case values, sorted.
    pub fn cases(&self) -> BTreeSet<&str> {
        self.events.iter().map(|e| e.case.as_str()).collect()
    }

    /// Sub-selection of the events matching `keep`. Order is inherited.
    pub fn filter(&self, mut keep: impl FnMut(&Event) -> bool) -> EventSelection {
        EventSelection {
            events: self.events.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Same events with every agent value passed through `f`.
    pub fn map_agents(&self, mut f: impl FnMut(&str) -> String) -> EventSelection {
        let events = self
            .events
            .iter()
            .map(|e| Event {
                agent: f(&e.agent),
                ..e.clone()
            })
            .collect();
        EventSelection { events }
    }
}

impl<'a> IntoIterator for &'a EventSelection {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

/// A nonempty sequence of events strictly increasing in `(timestamp, id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    events: Vec<Event>,
}

impl Trace {
    /// Sorts the events into trace order. Returns `None` for an empty input.
    pub fn new(mut events: Vec<Event>) -> Option<Self> {
        if events.is_empty() {
            return None;
        }
        events.sort_by_key(Event::order_key);
        Some(Trace { events })
    }

    pub(crate) fn from_sorted(events: Vec<Event>) -> Self {
        debug_assert!(!events.is_empty());
        debug_assert!(events.windows(2).all(|w| w[0].order_key() < w[1].order_key()));
        Trace { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn first(&self) -> &Event {
        &self.events[0]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> Vec<EventId> {
        self.events.iter().map(|e| e.id).collect()
    }

    pub fn labels(&self, naming: Naming) -> Result<Vec<String>, EventError> {
        self.events.iter().map(|e| name_of(e, naming)).collect()
    }
}

/// Naming function of an event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Naming {
    /// Activity-only labeling.
    Aol,
    /// Agent-and-activity labeling, rendered by [`aal_label`].
    Aal,
    /// Agent-only labeling, used by interaction logs.
    AgentOnly,
}

impl Naming {
    pub fn as_str(self) -> &'static str {
        match self {
            Naming::Aol => "AOL",
            Naming::Aal => "AAL",
            Naming::AgentOnly => "AGENT",
        }
    }
}

impl fmt::Display for Naming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Naming {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aol" => Ok(Naming::Aol),
            "aal" => Ok(Naming::Aal),
            "agent" | "agentonly" | "agent-only" => Ok(Naming::AgentOnly),
            other => Err(format!("unknown naming '{other}' (expected aol, aal or agent)")),
        }
    }
}

/// Separator between agent and activity in AAL labels.
pub const AAL_SEPARATOR: char = '|';

fn escape_component(s: &str, out: &mut String) {
    for c in s.chars() {
        if c == '\\' || c == AAL_SEPARATOR {
            out.push('\\');
        }
        out.push(c);
    }
}

/// Renders the `(agent, activity)` pair as `agent|activity`, escaping `|`
/// and `\` inside the components.
pub fn aal_label(agent: &str, activity: &str) -> String {
    let mut out = String::with_capacity(agent.len() + activity.len() + 1);
    escape_component(agent, &mut out);
    out.push(AAL_SEPARATOR);
    escape_component(activity, &mut out);
    out
}

/// Inverse of [`aal_label`]. Returns `None` unless the label contains exactly
/// one unescaped separator.
pub fn parse_aal(label: &str) -> Option<(String, String)> {
    let mut parts = vec![String::new()];
    let mut chars = label.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => parts.last_mut()?.push(chars.next()?),
            AAL_SEPARATOR => parts.push(String::new()),
            c => parts.last_mut()?.push(c),
        }
    }
    if parts.len() != 2 {
        return None;
    }
    let activity = parts.pop()?;
    let agent = parts.pop()?;
    Some((agent, activity))
}

/// Name of `event` under `naming`. Empty mandatory attributes count as
/// missing.
pub fn name_of(event: &Event, naming: Naming) -> Result<String, EventError> {
    let need = |attribute: &'static str, value: &str| {
        if value.is_empty() {
            Err(EventError::MissingAttribute {
                attribute,
                event: event.id,
            })
        } else {
            Ok(())
        }
    };
    match naming {
        Naming::Aol => {
            need("activity", &event.activity)?;
            Ok(event.activity.clone())
        }
        Naming::Aal => {
            need("agent", &event.agent)?;
            need("activity", &event.activity)?;
            Ok(aal_label(&event.agent, &event.activity))
        }
        Naming::AgentOnly => {
            need("agent", &event.agent)?;
            Ok(event.agent.clone())
        }
    }
}

/// Groups the selection into one trace per case. Traces are returned in the
/// order of their first event.
pub fn case_trace_set(selection: &EventSelection) -> Vec<Trace> {
    let mut by_case: BTreeMap<&str, Vec<Event>> = BTreeMap::new();
    for e in selection {
        by_case.entry(e.case.as_str()).or_default().push(e.clone());
    }
    let mut traces: Vec<Trace> = by_case.into_values().map(Trace::from_sorted).collect();
    traces.sort_by_key(|t| t.first().order_key());
    traces
}

/// An event log: a selection, a trace set partitioning it, and a naming
/// function.
#[derive(Debug, Clone)]
pub struct EventLog {
    selection: EventSelection,
    traces: Vec<Trace>,
    naming: Naming,
}

impl EventLog {
    pub(crate) fn from_parts(selection: EventSelection, traces: Vec<Trace>, naming: Naming) -> Self {
        debug_assert_eq!(
            traces.iter().map(Trace::len).sum::<usize>(),
            selection.len(),
            "traces must partition the selection"
        );
        EventLog {
            selection,
            traces,
            naming,
        }
    }

    /// The log induced by the case attribute.
    pub fn from_cases(selection: EventSelection, naming: Naming) -> Self {
        let traces = case_trace_set(&selection);
        EventLog::from_parts(selection, traces, naming)
    }

    pub fn selection(&self) -> &EventSelection {
        &self.selection
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn naming(&self) -> Naming {
        self.naming
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Same selection and traces under another naming function.
    pub fn with_naming(&self, naming: Naming) -> EventLog {
        EventLog {
            selection: self.selection.clone(),
            traces: self.traces.clone(),
            naming,
        }
    }

    /// Label sequence of every trace, in trace order.
    pub fn label_sequences(&self) -> Result<Vec<Vec<String>>, EventError> {
        self.traces.iter().map(|t| t.labels(self.naming)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(id: u64, ts: i64, case: &str, act: &str, agent: &str) -> Event {
        Event::new(id, ts, case, act, agent)
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = EventSelection::new(vec![ev(1, 0, "c", "a", "x"), ev(1, 5, "c", "b", "x")]);
        assert_eq!(err, Err(EventError::DuplicateId(1)));
    }

    #[test]
    fn timestamp_ties_fall_back_to_ids() {
        let s = EventSelection::new(vec![ev(2, 10, "c", "b", "x"), ev(1, 10, "c", "a", "x")]).unwrap();
        let ids: Vec<_> = s.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn empty_selection_has_no_case_traces() {
        assert!(case_trace_set(&EventSelection::empty()).is_empty());
    }

    #[test]
    fn distinct_cases_give_singleton_traces() {
        let s = EventSelection::new(vec![
            ev(0, 1, "c1", "a", "x"),
            ev(1, 2, "c2", "a", "x"),
            ev(2, 3, "c3", "a", "x"),
        ])
        .unwrap();
        let traces = case_trace_set(&s);
        assert_eq!(traces.len(), 3);
        assert!(traces.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn aal_rendering_escapes_separator() {
        assert_eq!(aal_label("a1", "check"), "a1|check");
        let odd = aal_label("x|y", "a\\b");
        assert_eq!(odd, "x\\|y|a\\\\b");
        assert_eq!(parse_aal(&odd), Some(("x|y".into(), "a\\b".into())));
        assert_eq!(parse_aal("plain"), None);
        assert_eq!(parse_aal("a|b|c"), None);
    }

    #[test]
    fn naming_functions() {
        let e = ev(0, 0, "case1", "check", "a1");
        assert_eq!(name_of(&e, Naming::Aol).unwrap(), "check");
        assert_eq!(name_of(&e, Naming::Aal).unwrap(), "a1|check");
        assert_eq!(name_of(&e, Naming::AgentOnly).unwrap(), "a1");
        let anonymous = ev(3, 0, "case1", "check", "");
        assert_eq!(
            name_of(&anonymous, Naming::AgentOnly),
            Err(EventError::MissingAttribute {
                attribute: "agent",
                event: 3
            })
        );
        assert!(name_of(&anonymous, Naming::Aol).is_ok());
    }

    #[test]
    fn naming_parses_from_cli_spelling() {
        assert_eq!("aol".parse::<Naming>(), Ok(Naming::Aol));
        assert_eq!("AAL".parse::<Naming>(), Ok(Naming::Aal));
        assert!("xyz".parse::<Naming>().is_err());
    }
}
