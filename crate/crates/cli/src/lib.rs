//! Evaluation pipeline around the `agent_miner` library: input selection,
//! parameter sweeps over Agent Miner and a conventional inductive baseline,
//! measurement, Pareto fronts and artifact export.

pub mod config;
pub mod input;
pub mod pareto;
pub mod pipeline;

pub use config::SweepConfig;
pub use input::Source;
pub use pareto::{pareto_front, Axes, ParetoFront, Point};
pub use pipeline::{run_pipeline, ResultRow, RESULT_COLUMNS};
