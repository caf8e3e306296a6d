//! Random multi-agent logs for stress and property tests.
//!
//! Each log draws a number of agents and activities, gives every activity an
//! owning agent, and walks a random Markov chain over the activities. Now and
//! then an event is handed to another agent, so activities can be shared.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event::{Event, EventSelection};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub max_agents: usize,
    pub max_activities: usize,
    pub max_traces: usize,
    pub max_trace_len: usize,
    /// Chance that an event is performed by a random agent instead of the
    /// activity's owner.
    pub handover_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            max_agents: 8,
            max_activities: 12,
            max_traces: 64,
            max_trace_len: 12,
            handover_noise: 0.1,
        }
    }
}

/// Generates a nonempty random log. Agents are named `a1..`, activities
/// `x1..`, cases `c1..`.
pub fn random_multi_agent_log(seed: u64, config: &SyntheticConfig) -> EventSelection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_acts = rng.random_range(1..=config.max_activities.max(1));
    let n_agents = rng.random_range(1..=config.max_agents.max(1)).min(n_acts);
    let owner: Vec<usize> = (0..n_acts)
        .map(|a| if a < n_agents { a } else { rng.random_range(0..n_agents) })
        .collect();
    let successors: Vec<Vec<usize>> = (0..n_acts)
        .map(|_| {
            let k = rng.random_range(1..=3.min(n_acts));
            (0..k).map(|_| rng.random_range(0..n_acts)).collect()
        })
        .collect();
    let starts: Vec<usize> = (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..n_acts)).collect();
    let stop = rng.random_range(0.15..0.5);

    let n_traces = rng.random_range(1..=config.max_traces.max(1));
    let mut events = Vec::new();
    for case in 0..n_traces {
        let mut current = *starts.choose(&mut rng).expect("nonempty");
        for step in 0..config.max_trace_len.max(1) {
            let agent = if rng.random_bool(config.handover_noise) {
                rng.random_range(0..n_agents)
            } else {
                owner[current]
            };
            let id = events.len() as u64;
            events.push(Event::new(
                id,
                (case * 1000 + step) as i64,
                format!("c{}", case + 1),
                format!("x{}", current + 1),
                format!("a{}", agent + 1),
            ));
            if rng.random_bool(stop) {
                break;
            }
            current = *successors[current].choose(&mut rng).expect("nonempty");
        }
    }
    EventSelection::new(events).expect("ids are unique")
}
