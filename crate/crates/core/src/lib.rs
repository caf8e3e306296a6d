//! Agent system discovery from event logs.
//!
//! The crate splits an event selection into an interaction log and per-agent
//! logs, discovers an interaction net and agent nets with pluggable discovery
//! algorithms, composes them into a multi-agent system (MAS) workflow net and
//! measures discovered nets against logs with entropy-based recall and
//! precision.
//!
//! Module map:
//!
//! - [`event`]: events, traces, naming functions and event logs.
//! - [`log_io`]: CSV/XES ingestion, CSV export, variant filtering, log generators.
//! - [`petri`]: labeled Petri nets, workflow nets, analysis, reduction, export.
//! - [`dfg`]: directly-follows graphs and their translation to workflow nets.
//! - [`inductive`]: inductive discovery of process trees and their nets.
//! - [`partition`]: agent trace sets, interaction logs and agent logs.
//! - [`typing`]: clustering of agent instances into agent types.
//! - [`composer`]: the Agent Miner discovery algorithm.
//! - [`conformance`]: automata, topological entropy, recall and precision.

pub mod composer;
pub mod conformance;
pub mod dfg;
pub mod event;
pub mod inductive;
pub mod log_io;
pub mod partition;
pub mod petri;
pub mod typing;

pub use event::{Event, EventLog, EventSelection, Naming, Trace};
pub use petri::{Label, LabeledNet, Marking, PlaceId, TransitionId, WorkflowNet};
