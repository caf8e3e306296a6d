//! PNML export and import for workflow nets. Silent transitions carry the
//! `$invisible$` toolspecific marker understood by common process mining
//! tools; the sink is written as a final marking.

use std::collections::HashMap;
use std::fmt::Write as _;

use quick_xml::escape::{escape, resolve_xml_entity};
use quick_xml::events::Event as XmlEvent;
use quick_xml::Reader;

use super::{Label, LabeledNet, PetriError, PlaceId, TransitionId, WorkflowNet};

pub fn to_pnml(wf: &WorkflowNet, name: &str) -> String {
    let net = wf.net();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    s.push_str("  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n");
    let _ = writeln!(s, "    <name><text>{}</text></name>", escape(name));
    s.push_str("    <page id=\"n0\">\n");
    for p in net.places() {
        let _ = write!(
            s,
            "      <place id=\"{p}\"><name><text>{}</text></name>",
            escape(net.place_name(p))
        );
        if p == wf.initial() {
            s.push_str("<initialMarking><text>1</text></initialMarking>");
        }
        s.push_str("</place>\n");
    }
    for t in net.transitions() {
        match net.label(t) {
            Label::Visible(l) => {
                let _ = writeln!(s, "      <transition id=\"{t}\"><name><text>{}</text></name></transition>", escape(l));
            }
            Label::Silent => {
                let _ = writeln!(
                    s,
                    "      <transition id=\"{t}\"><name><text>tau</text></name>\
                     <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\"{t}\"/></transition>"
                );
            }
        }
    }
    for (n, arc) in net.arcs().into_iter().enumerate() {
        let (src, dst) = match arc {
            super::Arc::Input(p, t) => (p.to_string(), t.to_string()),
            super::Arc::Output(t, p) => (t.to_string(), p.to_string()),
        };
        let _ = writeln!(s, "      <arc id=\"a{n}\" source=\"{src}\" target=\"{dst}\"/>");
    }
    s.push_str("    </page>\n");
    let _ = writeln!(
        s,
        "    <finalmarkings><marking><place idref=\"{}\"><text>1</text></place></marking></finalmarkings>",
        wf.final_place()
    );
    s.push_str("  </net>\n</pnml>\n");
    s
}

#[derive(Default)]
struct RawTransition {
    id: String,
    name: String,
    invisible: bool,
}

fn attr(e: &quick_xml::events::BytesStart<'_>, key: &[u8]) -> Result<Option<String>, PetriError> {
    for a in e.attributes() {
        let a = a.map_err(|err| PetriError::Pnml(err.to_string()))?;
        if a.key.as_ref() == key {
            let v = a.unescape_value().map_err(|err| PetriError::Pnml(err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

/// Reads a PNML document with one net. The source place is the place with
/// an initial token; the sink comes from the final marking if present,
/// otherwise it is the unique place without outgoing arcs.
pub fn from_pnml(text: &str) -> Result<WorkflowNet, PetriError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut places: Vec<(String, String, u32)> = Vec::new();
    let mut transitions: Vec<RawTransition> = Vec::new();
    let mut arcs: Vec<(String, String)> = Vec::new();
    let mut final_refs: Vec<String> = Vec::new();
    let mut text = String::new();

    loop {
        let ev = reader.read_event().map_err(|e| PetriError::Pnml(e.to_string()))?;
        match ev {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let name = e.local_name().as_ref().to_vec();
                let in_final = stack.iter().any(|n| n == b"finalmarkings");
                match name.as_slice() {
                    b"place" if in_final => {
                        final_refs.push(attr(e, b"idref")?.ok_or_else(|| PetriError::Pnml("final place without idref".into()))?);
                    }
                    b"place" => {
                        let id = attr(e, b"id")?.ok_or_else(|| PetriError::Pnml("place without id".into()))?;
                        places.push((id.clone(), id, 0));
                    }
                    b"transition" => {
                        let id = attr(e, b"id")?.ok_or_else(|| PetriError::Pnml("transition without id".into()))?;
                        transitions.push(RawTransition {
                            id,
                            ..RawTransition::default()
                        });
                    }
                    b"toolspecific" if stack.last().map(Vec::as_slice) == Some(b"transition") => {
                        if attr(e, b"activity")?.as_deref() == Some("$invisible$") {
                            if let Some(t) = transitions.last_mut() {
                                t.invisible = true;
                            }
                        }
                    }
                    b"arc" => {
                        let src = attr(e, b"source")?.ok_or_else(|| PetriError::Pnml("arc without source".into()))?;
                        let dst = attr(e, b"target")?.ok_or_else(|| PetriError::Pnml("arc without target".into()))?;
                        arcs.push((src, dst));
                    }
                    _ => {}
                }
                if matches!(ev, XmlEvent::Start(_)) {
                    if name == b"text" {
                        text.clear();
                    }
                    stack.push(name);
                }
            }
            XmlEvent::Text(ref t) => {
                text.push_str(&t.decode().map_err(|e| PetriError::Pnml(e.to_string()))?);
            }
            XmlEvent::GeneralRef(ref r) => {
                if let Some(c) = r.resolve_char_ref().map_err(|e| PetriError::Pnml(e.to_string()))? {
                    text.push(c);
                } else {
                    let name = r.decode().map_err(|e| PetriError::Pnml(e.to_string()))?;
                    let value = resolve_xml_entity(&name)
                        .ok_or_else(|| PetriError::Pnml(format!("unknown entity '&{name};'")))?;
                    text.push_str(value);
                }
            }
            XmlEvent::End(ref e) if e.local_name().as_ref() == b"text" => {
                let value = std::mem::take(&mut text);
                let path: Vec<&[u8]> = stack.iter().rev().take(3).map(Vec::as_slice).collect();
                let in_final = stack.iter().any(|n| n == b"finalmarkings");
                match path.as_slice() {
                    [b"text", b"name", b"place", ..] if !in_final => {
                        if let Some(p) = places.last_mut() {
                            p.1 = value;
                        }
                    }
                    [b"text", b"initialMarking", b"place", ..] => {
                        let n = value.trim().parse().map_err(|_| PetriError::Pnml(format!("bad marking '{value}'")))?;
                        if let Some(p) = places.last_mut() {
                            p.2 = n;
                        }
                    }
                    [b"text", b"name", b"transition", ..] => {
                        if let Some(t) = transitions.last_mut() {
                            t.name = value;
                        }
                    }
                    _ => {}
                }
                stack.pop();
            }
            XmlEvent::End(_) => {
                stack.pop();
            }
            XmlEvent::Eof => break,
            _ => {}
        }
    }

    let mut net = LabeledNet::new();
    let mut pids: HashMap<String, PlaceId> = HashMap::new();
    let mut tids: HashMap<String, TransitionId> = HashMap::new();
    let mut initial = Vec::new();
    for (id, name, tokens) in &places {
        let p = net.add_place(name.clone());
        if pids.insert(id.clone(), p).is_some() {
            return Err(PetriError::Pnml(format!("duplicate id '{id}'")));
        }
        if *tokens > 0 {
            initial.push(p);
        }
    }
    for t in &transitions {
        let label = if t.invisible { Label::Silent } else { Label::Visible(t.name.clone()) };
        let name = if t.name.is_empty() { t.id.clone() } else { t.name.clone() };
        tids.insert(t.id.clone(), net.add_transition(name, label));
    }
    for (src, dst) in &arcs {
        match (pids.get(src), tids.get(dst), tids.get(src), pids.get(dst)) {
            (Some(&p), Some(&t), _, _) => net.add_input(p, t)?,
            (_, _, Some(&t), Some(&p)) => net.add_output(t, p)?,
            _ => return Err(PetriError::Pnml(format!("arc {src} -> {dst} does not join a place and a transition"))),
        }
    }
    let [i] = initial[..] else {
        return Err(PetriError::Pnml(format!("expected one initially marked place, found {}", initial.len())));
    };
    let f = match final_refs.as_slice() {
        [r] => *pids.get(r).ok_or_else(|| PetriError::Pnml(format!("unknown final place '{r}'")))?,
        [] => {
            let sinks: Vec<PlaceId> = net.places().filter(|&p| net.place_postset(p).is_empty()).collect();
            match sinks[..] {
                [f] => f,
                _ => return Err(PetriError::Pnml("cannot determine the final place".into())),
            }
        }
        _ => return Err(PetriError::Pnml("final marking must be a single place".into())),
    };
    WorkflowNet::new(net, i, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::accepted_words;

    fn sample() -> WorkflowNet {
        let mut net = LabeledNet::new();
        let i = net.add_place("i");
        let m = net.add_place("m");
        let f = net.add_place("f");
        let a = net.add_transition("a", Label::visible("a1|x < y & z"));
        let tau = net.add_transition("tau", Label::Silent);
        let b = net.add_transition("b", Label::visible("b"));
        net.add_input(i, a).unwrap();
        net.add_output(a, m).unwrap();
        net.add_input(m, tau).unwrap();
        net.add_output(tau, f).unwrap();
        net.add_input(m, b).unwrap();
        net.add_output(b, f).unwrap();
        WorkflowNet::new(net, i, f).unwrap()
    }

    #[test]
    fn round_trip_keeps_structure_and_language() {
        let w = sample();
        let text = to_pnml(&w, "sample");
        assert!(text.contains("$invisible$"));
        let back = from_pnml(&text).unwrap();
        assert!(back.net().visible_labels().contains("a1|x < y & z"));
        assert_eq!(back.size(), w.size());
        assert_eq!(accepted_words(&back, 3, 100).unwrap(), accepted_words(&w, 3, 100).unwrap());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(from_pnml("<pnml><net><page></page></net></pnml>").is_err());
    }
}
