//! Structural transformations: Fusion of Series Places, transition
//! refinement and label rewriting.

use super::{Label, LabeledNet, PetriError, PlaceId, TransitionId, WorkflowNet};
use crate::event::parse_aal;

/// Places `(p, q)` joined by the silent series transition `t`, if fusable.
fn series_pair(net: &LabeledNet, t: TransitionId) -> Option<(PlaceId, PlaceId)> {
    if !net.label(t).is_silent() || net.preset(t).len() != 1 || net.postset(t).len() != 1 {
        return None;
    }
    let p = *net.preset(t).first()?;
    let q = *net.postset(t).first()?;
    if p == q || net.place_postset(p).len() != 1 || net.place_preset(q).len() != 1 {
        return None;
    }
    Some((p, q))
}

/// Fuses to fixpoint. `ends` are the workflow source and sink; a fusion
/// that would merge them is skipped. Returns the net and the new sink.
fn fuse(mut net: LabeledNet, ends: Option<(PlaceId, PlaceId)>) -> (LabeledNet, Option<PlaceId>) {
    let mut sink = ends.map(|(_, f)| f);
    loop {
        let mut changed = false;
        let candidates: Vec<TransitionId> = net.transitions().collect();
        for t in candidates {
            if !net.has_transition(t) {
                continue;
            }
            let Some((p, q)) = series_pair(&net, t) else { continue };
            if let Some((i, _)) = ends {
                if p == i && Some(q) == sink {
                    continue;
                }
            }
            net.remove_transition(t).expect("transition exists");
            net.merge_place_into(q, p);
            if sink == Some(q) {
                sink = Some(p);
            }
            changed = true;
        }
        if !changed {
            return (net, sink);
        }
    }
}

/// Repeatedly merges `p` and `q` wherever a silent `t` has `•t = {p}`,
/// `t• = {q}`, `p• = {t}`, `•q = {t}` and `p ≠ q`, deleting `t`.
pub fn fuse_series_places(net: &LabeledNet) -> LabeledNet {
    fuse(net.clone(), None).0
}

/// Replaces the observable transition `t` of `host` by a copy of `sub`,
/// stitched in with a silent enter transition (`•t → sub.i`) and a silent
/// exit transition (`sub.f → t•`).
pub fn refine_transition(host: &WorkflowNet, t: TransitionId, sub: &WorkflowNet) -> Result<WorkflowNet, PetriError> {
    let net = host.net();
    if !net.has_transition(t) {
        return Err(PetriError::UnknownTransition(t));
    }
    if net.label(t).is_silent() {
        return Err(PetriError::SilentRefinement(t));
    }
    let mut out = net.clone();
    let name = net.transition_name(t).to_string();
    let (pmap, _) = out.absorb(sub.net(), &format!("{name}/"));
    let enter = out.add_transition(format!("{name}/enter"), Label::Silent);
    let exit = out.add_transition(format!("{name}/exit"), Label::Silent);
    for &p in net.preset(t) {
        out.add_input(p, enter)?;
    }
    out.add_output(enter, pmap[&sub.initial()])?;
    out.add_input(pmap[&sub.final_place()], exit)?;
    for &p in net.postset(t) {
        out.add_output(exit, p)?;
    }
    out.remove_transition(t)?;
    WorkflowNet::new(out, host.initial(), host.final_place())
}

/// Turns every `agent|activity` label into `activity`. Other labels are
/// kept.
pub fn rewrite_labels_to_activity(net: &LabeledNet) -> LabeledNet {
    let mut out = net.clone();
    for t in net.transitions() {
        if let Some((_, activity)) = net.label(t).as_visible().and_then(parse_aal) {
            out.set_label(t, Label::Visible(activity)).expect("transition exists");
        }
    }
    out
}

impl WorkflowNet {
    /// Fusion of Series Places; the merged places keep the source and sink
    /// roles of their constituents.
    pub fn fuse_series_places(&self) -> WorkflowNet {
        let (net, sink) = fuse(self.net.clone(), Some((self.initial, self.final_place)));
        WorkflowNet {
            net,
            initial: self.initial,
            final_place: sink.expect("sink tracked"),
        }
    }

    pub fn rewrite_labels_to_activity(&self) -> WorkflowNet {
        WorkflowNet {
            net: rewrite_labels_to_activity(&self.net),
            ..self.clone()
        }
    }

    /// Same net without transition `t`; fails if the result is no longer a
    /// workflow net.
    pub fn without_transition(&self, t: TransitionId) -> Result<WorkflowNet, PetriError> {
        let mut net = self.net.clone();
        net.remove_transition(t)?;
        WorkflowNet::new(net, self.initial, self.final_place)
    }
}
