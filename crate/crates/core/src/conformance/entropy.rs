//! Topological entropy of regular languages.
//!
//! The entropy of `L` is `ln ρ`, where `ρ` is the spectral radius of the
//! adjacency matrix of the trimmed DFA of `L` after adding one edge from
//! every accepting state back to the initial state. Trimming plus those
//! back edges makes the graph strongly connected, so `ρ` is a Perron root.

use nalgebra::DMatrix;

use super::{ConformanceError, Dfa};

pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITERATIONS: usize = 100_000;
pub const DENSE_FALLBACK_LIMIT: usize = 512;

/// `(source, target, multiplicity)` triples of the short-circuited graph.
fn short_circuit(d: &Dfa) -> Vec<Vec<(usize, f64)>> {
    let n = d.state_count();
    let mut out = vec![Vec::new(); n];
    for (s, row) in out.iter_mut().enumerate() {
        let mut counts: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for (_, t) in d.moves(s) {
            *counts.entry(t).or_default() += 1.0;
        }
        if d.is_accepting(s) {
            *counts.entry(d.initial()).or_default() += 1.0;
        }
        row.extend(counts);
    }
    out
}

/// For an acyclic DFA every cycle of the short-circuited graph passes
/// through the initial state once, and `ρ = 1/z` for the root of
/// `Σ_w z^(|w|+1) = 1` over accepted words `w`.
fn acyclic_radius(d: &Dfa) -> f64 {
    let n = d.state_count();
    let mut indegree = vec![0usize; n];
    for s in 0..n {
        for (_, t) in d.moves(s) {
            indegree[t] += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
    while let Some(s) = stack.pop() {
        order.push(s);
        for (_, t) in d.moves(s) {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                stack.push(t);
            }
        }
    }
    let series = |z: f64| -> f64 {
        let mut weight = vec![0.0; n];
        weight[d.initial()] = 1.0;
        let mut total = 0.0;
        for &s in &order {
            let w = weight[s];
            if w == 0.0 {
                continue;
            }
            if d.is_accepting(s) {
                total += w * z;
            }
            for (_, t) in d.moves(s) {
                weight[t] += w * z;
            }
        }
        total
    };
    // series is increasing in z, series(1) ≥ 1 for a nonempty language, and
    // ρ ≤ max out-degree + 1.
    let max_degree = (0..n).map(|s| d.moves(s).count() + usize::from(d.is_accepting(s))).max().unwrap_or(1);
    let mut lo = 1.0 / max_degree.max(1) as f64 / 2.0;
    let mut hi = 1.0;
    if series(hi) <= 1.0 {
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if series(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    2.0 / (lo + hi)
}

/// Power iteration on `A + I`, which is primitive whenever `A` is
/// irreducible. Returns `None` without convergence.
fn power_radius(graph: &[Vec<(usize, f64)>]) -> Option<f64> {
    let n = graph.len();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..POWER_MAX_ITERATIONS {
        for (s, row) in graph.iter().enumerate() {
            y[s] = x[s] + row.iter().map(|&(t, m)| m * x[t]).sum::<f64>();
        }
        let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
        for s in 0..n {
            let r = y[s] / x[s];
            lower = lower.min(r);
            upper = upper.max(r);
        }
        if upper - lower <= POWER_TOLERANCE * lower {
            return Some(0.5 * (lower + upper) - 1.0);
        }
        let scale = y.iter().copied().fold(0.0, f64::max);
        for s in 0..n {
            // Entries stay positive since the diagonal of A + I is 1.
            x[s] = (y[s] / scale).max(f64::MIN_POSITIVE);
        }
    }
    None
}

fn dense_radius(graph: &[Vec<(usize, f64)>]) -> f64 {
    let n = graph.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (s, row) in graph.iter().enumerate() {
        for &(t, k) in row {
            m[(s, t)] = k;
        }
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Topological entropy of the language of `d`; `0` for the empty language.
pub fn topological_entropy(d: &Dfa) -> Result<f64, ConformanceError> {
    let t = d.trim();
    if t.is_empty_language() {
        return Ok(0.0);
    }
    let rho = if !t.has_cycle() {
        acyclic_radius(&t)
    } else {
        let graph = short_circuit(&t);
        match power_radius(&graph) {
            Some(r) => r,
            None if graph.len() <= DENSE_FALLBACK_LIMIT => dense_radius(&graph),
            None => {
                return Err(ConformanceError::NoConvergence {
                    states: graph.len(),
                    iterations: POWER_MAX_ITERATIONS,
                })
            }
        }
    };
    Ok(rho.max(1.0).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Dfa {
        let v: Vec<Vec<String>> = ws.iter().map(|w| w.chars().map(String::from).collect()).collect();
        Dfa::from_words(&v)
    }

    #[test]
    fn single_word_has_zero_entropy() {
        assert_eq!(topological_entropy(&words(&["abc"])).unwrap(), 0.0);
        assert_eq!(topological_entropy(&words(&[""])).unwrap(), 0.0);
        assert_eq!(topological_entropy(&Dfa::empty(vec![])).unwrap(), 0.0);
    }

    #[test]
    fn two_letters_free_monoid() {
        // Σ* over {a, b}: one state, two self loops plus the back edge.
        let d = Dfa::from_parts(
            vec!["a".into(), "b".into()],
            vec![[(0, 0), (1, 0)].into_iter().collect()],
            0,
            vec![true],
        );
        assert!((topological_entropy(&d).unwrap() - 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn acyclic_matches_dense() {
        let d = words(&["ab", "ac", "b", "bcd"]).trim();
        let exact = acyclic_radius(&d);
        let dense = dense_radius(&short_circuit(&d));
        assert!((exact - dense).abs() < 1e-9, "{exact} vs {dense}");
        let power = power_radius(&short_circuit(&d)).unwrap();
        assert!((exact - power).abs() < 1e-7, "{exact} vs {power}");
    }

    #[test]
    fn periodic_cycle() {
        // (ab)* has radius 1 after short-circuiting.
        let d = Dfa::from_parts(
            vec!["a".into(), "b".into()],
            vec![[(0, 1)].into_iter().collect(), [(1, 0)].into_iter().collect()],
            0,
            vec![true, false],
        );
        let h = topological_entropy(&d).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        // Cycles of length 2 (ab) and 1 (back edge): z + z² = 1.
        assert!((h - golden.ln()).abs() < 1e-8, "{h}");
    }
}
