//! Entropy-based recall and precision of a workflow net against a log.

mod dfa;
mod entropy;

use thiserror::Error;

use crate::event::{EventError, EventLog};
use crate::petri::{PetriError, WorkflowNet};

pub use dfa::{equivalent, intersect, log_automaton, model_automaton, Dfa, DETERMINIZATION_CAP};
pub use entropy::{topological_entropy, DENSE_FALLBACK_LIMIT, POWER_MAX_ITERATIONS, POWER_TOLERANCE};

/// Entropies below this are treated as zero.
pub const ZERO_ENTROPY: f64 = 1e-12;
/// Ratios overshooting `[0, 1]` by at most this are clamped silently.
pub const CLAMP_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ConformanceError {
    #[error("net is not safe")]
    Unsafe,
    #[error("determinization exceeded {cap} states")]
    DeterminizationCap { cap: usize },
    #[error("power iteration did not converge on {states} states after {iterations} iterations")]
    NoConvergence { states: usize, iterations: usize },
    #[error("{what} has zero entropy but the intersection does not")]
    DegenerateRatio { what: &'static str },
    #[error("ratio {value} outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Petri(#[from] PetriError),
    #[error(transparent)]
    Event(#[from] EventError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub recall: f64,
    pub precision: f64,
    pub size: usize,
    pub ent_log: f64,
    pub ent_model: f64,
    pub ent_intersection: f64,
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64, ConformanceError> {
    let num = if num < ZERO_ENTROPY { 0.0 } else { num };
    let den = if den < ZERO_ENTROPY { 0.0 } else { den };
    let r = match (num == 0.0, den == 0.0) {
        (true, true) => 1.0,
        (false, true) => return Err(ConformanceError::DegenerateRatio { what }),
        _ => num / den,
    };
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&r) {
        return Err(ConformanceError::OutOfRange { value: r });
    }
    Ok(r.clamp(0.0, 1.0))
}

/// Recall and precision from the three automata. When the intersection is
/// empty while both languages are not, both measures are 0 even if the
/// entropies vanish.
pub fn quality(log: &Dfa, model: &Dfa) -> Result<(f64, f64, [f64; 3]), ConformanceError> {
    let inter = intersect(log, model);
    let ent_log = topological_entropy(log)?;
    let ent_model = topological_entropy(model)?;
    let ent_inter = topological_entropy(&inter)?;
    let disjoint = inter.is_empty_language() && !log.is_empty_language() && !model.is_empty_language();
    let (recall, precision) = if disjoint {
        (0.0, 0.0)
    } else {
        (ratio(ent_inter, ent_log, "log")?, ratio(ent_inter, ent_model, "model")?)
    };
    Ok((recall, precision, [ent_log, ent_model, ent_inter]))
}

/// Recall, precision and size of `wf` against the label sequences of `log`.
pub fn measure(wf: &WorkflowNet, log: &EventLog, state_bound: usize) -> Result<QualityReport, ConformanceError> {
    let l = log_automaton(log)?;
    let m = model_automaton(wf, state_bound)?;
    let (recall, precision, [ent_log, ent_model, ent_intersection]) = quality(&l, &m)?;
    Ok(QualityReport {
        recall,
        precision,
        size: wf.size(),
        ent_log,
        ent_model,
        ent_intersection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::Label;

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0, "log").unwrap(), 1.0);
        assert_eq!(ratio(1e-13, 0.0, "log").unwrap(), 1.0);
        assert!(ratio(0.5, 0.0, "log").is_err());
        assert_eq!(ratio(1.0 + 1e-9, 1.0, "log").unwrap(), 1.0);
        assert!(ratio(2.0, 1.0, "log").is_err());
    }

    #[test]
    fn single_transition_net() {
        let wf = WorkflowNet::single(Label::visible("a"));
        let d = model_automaton(&wf, 100).unwrap();
        assert!(d.accepts(&["a"]));
        assert!(!d.accepts::<&str>(&[]));
        let silent = WorkflowNet::single(Label::Silent);
        assert!(model_automaton(&silent, 100).unwrap().accepts::<&str>(&[]));
    }

    #[test]
    fn disjoint_languages_score_zero() {
        let l = Dfa::from_words(&[vec!["a"]]);
        let m = Dfa::from_words(&[vec!["b"]]);
        let (r, p, _) = quality(&l, &m).unwrap();
        assert_eq!((r, p), (0.0, 0.0));
        let (r, p, _) = quality(&l, &l).unwrap();
        assert_eq!((r, p), (1.0, 1.0));
    }
}
