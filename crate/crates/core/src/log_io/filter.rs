use std::collections::{BTreeMap, HashSet};

use super::LogIoError;
use crate::event::{case_trace_set, EventSelection, Naming, Trace};

/// Keeps the most frequent case-trace variants (AOL label sequences) until
/// the kept traces first cover at least `vff` of all traces. Variants of
/// equal frequency are taken in lexicographic order.
pub fn variant_frequency_filter(selection: &EventSelection, vff: f64) -> Result<EventSelection, LogIoError> {
    if !(vff > 0.0 && vff <= 1.0) {
        return Err(LogIoError::InvalidParameter(format!("vff must lie in (0, 1], got {vff}")));
    }
    let traces = case_trace_set(selection);
    if traces.is_empty() {
        return Ok(selection.clone());
    }
    let mut variants: BTreeMap<Vec<String>, Vec<&Trace>> = BTreeMap::new();
    for t in &traces {
        variants.entry(t.labels(Naming::Aol)?).or_default().push(t);
    }
    let mut ranked: Vec<(&Vec<String>, &Vec<&Trace>)> = variants.iter().collect();
    // BTreeMap iteration is lexicographic; a stable sort by count keeps it
    // as the tie-break.
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()));

    let total = traces.len() as f64;
    let target = vff * total - 1e-9;
    let mut kept_cases = HashSet::new();
    let mut kept = 0usize;
    for (_, group) in ranked {
        if kept as f64 >= target {
            break;
        }
        kept += group.len();
        kept_cases.extend(group.iter().map(|t| t.first().case.clone()));
    }
    Ok(selection.filter(|e| kept_cases.contains(&e.case)))
}
