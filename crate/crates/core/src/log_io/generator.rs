//! Seeded generator for the health surveillance example log.
//!
//! Doctor `d1` checks and analyzes every patient. When the analysis finds a
//! risk, `d1` prescribes a nonempty set of tests (performed by `d2` or `d4`)
//! and a nonempty set of exercises (run by `d3` or `d5` in one or more
//! sessions). Tests and therapy are independent: by default one block runs
//! after the other in random order, with `interleave` set they run on
//! separate clocks and their events mix. Afterwards `d1` checks and analyzes again; once no risk is
//! found, or the round limit is hit, `d1` discharges the patient.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LogIoError;
use crate::event::{Event, EventSelection};

pub const TESTS: [&str; 3] = ["B-test", "U-sound", "X-ray"];
pub const THERAPIES: [&str; 4] = ["physio", "gym", "swim", "yoga"];

const MINUTE: i64 = 60_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub cases: usize,
    pub seed: u64,
    /// Upper bound on prescription rounds per patient; 0 yields the
    /// check, analyze, discharge path for everyone.
    pub max_rework_rounds: usize,
    /// Probability that an analysis finds a risk.
    pub rework_probability: f64,
    /// Inclusion probability of each test and exercise in a prescription.
    pub prescription_probabilities: BTreeMap<String, f64>,
    /// Exercise sessions per round are drawn uniformly from 1..=this.
    pub max_therapy_sessions: usize,
    /// Run tests and therapy of a round on overlapping clocks.
    pub interleave: bool,
    /// Start of the first case, microseconds since the epoch.
    pub start: i64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let prescription_probabilities = TESTS
            .iter()
            .chain(THERAPIES.iter())
            .map(|a| (a.to_string(), 0.5))
            .collect();
        GeneratorConfig {
            cases: 1024,
            seed: 7,
            max_rework_rounds: 3,
            rework_probability: 0.6,
            prescription_probabilities,
            max_therapy_sessions: 3,
            interleave: false,
            // 2023-03-30T00:00:00Z
            start: 1_680_134_400_000_000,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), LogIoError> {
        let bad = |msg: String| Err(LogIoError::InvalidParameter(msg));
        if self.cases == 0 {
            return bad("cases must be at least 1".into());
        }
        if self.max_therapy_sessions == 0 {
            return bad("max_therapy_sessions must be at least 1".into());
        }
        let probs = std::iter::once(("rework", &self.rework_probability))
            .chain(self.prescription_probabilities.iter().map(|(k, v)| (k.as_str(), v)));
        for (name, p) in probs {
            if !(0.0..=1.0).contains(p) {
                return bad(format!("probability for '{name}' must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    fn probability(&self, activity: &str) -> f64 {
        self.prescription_probabilities.get(activity).copied().unwrap_or(0.5)
    }
}

/// Draws a nonempty subset of `items`, kept in the given order.
fn nonempty_subset<'a>(rng: &mut ChaCha8Rng, items: &[&'a str], config: &GeneratorConfig) -> Vec<&'a str> {
    let mut chosen: Vec<&str> = items
        .iter()
        .copied()
        .filter(|a| rng.random_bool(config.probability(a)))
        .collect();
    if chosen.is_empty() {
        chosen.push(items[rng.random_range(0..items.len())]);
    }
    chosen
}

struct Raw {
    timestamp: i64,
    activity: &'static str,
    agent: &'static str,
}

fn generate_case(config: &GeneratorConfig, index: usize) -> Vec<Raw> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let gap = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| rng.random_range(lo..hi) * MINUTE;

    let mut out = Vec::new();
    let mut t = config.start + index as i64 * 360 * MINUTE + gap(&mut rng, 0, 120);
    let push = |out: &mut Vec<Raw>, timestamp, activity, agent| out.push(Raw { timestamp, activity, agent });

    push(&mut out, t, "check", "d1");
    t += gap(&mut rng, 5, 60);
    push(&mut out, t, "analyze", "d1");
    let mut round = 0;
    while round < config.max_rework_rounds && rng.random_bool(config.rework_probability) {
        t += gap(&mut rng, 5, 60);
        push(&mut out, t, "prescribe", "d1");
        let tester = if rng.random_bool(0.5) { "d2" } else { "d4" };
        let trainer = if rng.random_bool(0.5) { "d3" } else { "d5" };
        let tests = nonempty_subset(&mut rng, &TESTS, config);
        let exercises = nonempty_subset(&mut rng, &THERAPIES, config);
        let sessions = rng.random_range(1..=config.max_therapy_sessions);

        let tests_first = rng.random_bool(0.5);
        let mut test_clock = t + gap(&mut rng, 60, 1440);
        let mut therapy_clock = t + gap(&mut rng, 60, 1440);
        let run_tests = |out: &mut Vec<Raw>, rng: &mut ChaCha8Rng, clock: &mut i64| {
            for &test in &tests {
                push(out, *clock, test, tester);
                *clock += gap(rng, 30, 720);
            }
        };
        let run_therapy = |out: &mut Vec<Raw>, rng: &mut ChaCha8Rng, clock: &mut i64| {
            for _ in 0..sessions {
                for &exercise in &exercises {
                    push(out, *clock, exercise, trainer);
                    *clock += gap(rng, 30, 720);
                }
            }
        };
        if config.interleave {
            run_tests(&mut out, &mut rng, &mut test_clock);
            run_therapy(&mut out, &mut rng, &mut therapy_clock);
        } else if tests_first {
            run_tests(&mut out, &mut rng, &mut test_clock);
            therapy_clock = test_clock;
            run_therapy(&mut out, &mut rng, &mut therapy_clock);
        } else {
            run_therapy(&mut out, &mut rng, &mut therapy_clock);
            test_clock = therapy_clock;
            run_tests(&mut out, &mut rng, &mut test_clock);
        }
        t = test_clock.max(therapy_clock) + gap(&mut rng, 30, 240);
        push(&mut out, t, "check", "d1");
        t += gap(&mut rng, 5, 60);
        push(&mut out, t, "analyze", "d1");
        round += 1;
    }
    t += gap(&mut rng, 5, 60);
    push(&mut out, t, "discharge", "d1");
    out
}

/// Generates the health surveillance log. Each case draws from its own
/// ChaCha stream keyed by `(seed, case index)`, so case `k` is the same for
/// any number of cases greater than `k`.
pub fn generate_health_log(config: &GeneratorConfig) -> Result<EventSelection, LogIoError> {
    config.validate()?;
    let mut events = Vec::new();
    for index in 0..config.cases {
        let case = format!("case{}", index + 1);
        for raw in generate_case(config, index) {
            let id = events.len() as u64;
            events.push(Event::new(id, raw.timestamp, case.clone(), raw.activity, raw.agent));
        }
    }
    Ok(EventSelection::new(events)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{case_trace_set, Naming};

    #[test]
    fn minimal_path_without_rework() {
        let config = GeneratorConfig {
            cases: 1,
            max_rework_rounds: 0,
            ..GeneratorConfig::default()
        };
        let s = generate_health_log(&config).unwrap();
        let acts: Vec<_> = s.iter().map(|e| (e.activity.as_str(), e.agent.as_str())).collect();
        assert_eq!(acts, vec![("check", "d1"), ("analyze", "d1"), ("discharge", "d1")]);
    }

    #[test]
    fn prefix_of_cases_is_stable() {
        let small = GeneratorConfig {
            cases: 4,
            ..GeneratorConfig::default()
        };
        let large = GeneratorConfig {
            cases: 9,
            ..GeneratorConfig::default()
        };
        let a = case_trace_set(&generate_health_log(&small).unwrap());
        let b = case_trace_set(&generate_health_log(&large).unwrap());
        for t in &a {
            let same = b.iter().find(|u| u.first().case == t.first().case).unwrap();
            assert_eq!(t.labels(Naming::Aal).unwrap(), same.labels(Naming::Aal).unwrap());
        }
    }

    #[test]
    fn blocks_do_not_mix_unless_interleaved() {
        // Most agent switches within one stretch between two d1 events.
        let max_switches = |interleave| {
            let config = GeneratorConfig {
                cases: 64,
                interleave,
                ..GeneratorConfig::default()
            };
            let s = generate_health_log(&config).unwrap();
            let mut most = 0;
            for t in case_trace_set(&s) {
                let agents: Vec<&str> = t.events().iter().map(|e| e.agent.as_str()).collect();
                for stretch in agents.split(|a| *a == "d1") {
                    most = most.max(stretch.windows(2).filter(|w| w[0] != w[1]).count());
                }
            }
            most
        };
        assert_eq!(max_switches(false), 1);
        assert!(max_switches(true) > 1);
    }

    #[test]
    fn invalid_probability_is_rejected() {
        let mut config = GeneratorConfig::default();
        config.prescription_probabilities.insert("yoga".into(), 1.5);
        assert!(generate_health_log(&config).is_err());
        let config = GeneratorConfig {
            cases: 0,
            ..GeneratorConfig::default()
        };
        assert!(generate_health_log(&config).is_err());
    }
}
