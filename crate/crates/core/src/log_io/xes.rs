//! Reader for the subset of XES used by public event logs: traces with flat
//! string/date attributes. Nested attributes, extensions, globals and
//! classifiers are skipped.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::{LogIoError, TimestampFormat};
use crate::event::{Event, EventSelection};

/// Attribute keys holding the mandatory attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XesKeys {
    /// Trace-level attribute used as the case identifier.
    pub case: String,
    pub activity: String,
    pub agent: String,
    pub timestamp: String,
}

impl Default for XesKeys {
    fn default() -> Self {
        XesKeys {
            case: "concept:name".into(),
            activity: "concept:name".into(),
            agent: "org:resource".into(),
            timestamp: "time:timestamp".into(),
        }
    }
}

pub fn parse_xes(path: impl AsRef<Path>, keys: &XesKeys) -> Result<EventSelection, LogIoError> {
    let file = File::open(path)?;
    parse_from(Reader::from_reader(BufReader::new(file)), keys)
}

pub fn parse_xes_str(text: &str, keys: &XesKeys) -> Result<EventSelection, LogIoError> {
    parse_from(Reader::from_reader(text.as_bytes()), keys)
}

const ATTRIBUTE_TAGS: [&[u8]; 6] = [b"string", b"date", b"int", b"float", b"boolean", b"id"];

fn key_value(e: &BytesStart<'_>) -> Result<Option<(String, String)>, LogIoError> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| LogIoError::Xml(err.to_string()))?;
        let v = attr
            .unescape_value()
            .map_err(|err| LogIoError::Xml(err.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(v),
            b"value" => value = Some(v),
            _ => {}
        }
    }
    Ok(key.zip(value))
}

#[derive(Default)]
struct PendingTrace {
    attrs: BTreeMap<String, String>,
    events: Vec<BTreeMap<String, String>>,
}

fn parse_from<R: BufRead>(mut reader: Reader<R>, keys: &XesKeys) -> Result<EventSelection, LogIoError> {
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    // Element names from the root down to the current element.
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut trace: Option<PendingTrace> = None;
    let mut event: Option<BTreeMap<String, String>> = None;
    let mut traces_seen = 0usize;
    let mut out = Vec::new();

    loop {
        let xml = reader
            .read_event_into(&mut buf)
            .map_err(|e| LogIoError::Xml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match xml {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let name = e.local_name().as_ref().to_vec();
                let parent = stack.last().map(Vec::as_slice);
                let is_empty = matches!(xml, XmlEvent::Empty(_));
                match name.as_slice() {
                    b"trace" if parent == Some(b"log") => {
                        trace = Some(PendingTrace::default());
                        if is_empty {
                            finish_trace(trace.take(), traces_seen, keys, &mut out)?;
                            traces_seen += 1;
                        }
                    }
                    b"event" if parent == Some(b"trace") => {
                        event = Some(BTreeMap::new());
                        if is_empty {
                            if let (Some(t), Some(ev)) = (trace.as_mut(), event.take()) {
                                t.events.push(ev);
                            }
                        }
                    }
                    tag if ATTRIBUTE_TAGS.contains(&tag) => {
                        if let Some((k, v)) = key_value(e)? {
                            match parent {
                                Some(b"event") => {
                                    if let Some(ev) = event.as_mut() {
                                        ev.insert(k, v);
                                    }
                                }
                                Some(b"trace") => {
                                    if let Some(t) = trace.as_mut() {
                                        t.attrs.insert(k, v);
                                    }
                                }
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
                if !is_empty {
                    stack.push(name);
                }
            }
            XmlEvent::End(ref e) => {
                let name = e.local_name().as_ref().to_vec();
                if stack.pop().as_deref() != Some(name.as_slice()) {
                    return Err(LogIoError::Xml(format!(
                        "unbalanced closing tag </{}>",
                        String::from_utf8_lossy(&name)
                    )));
                }
                match name.as_slice() {
                    b"event" if stack.last().map(Vec::as_slice) == Some(b"trace") => {
                        if let (Some(t), Some(ev)) = (trace.as_mut(), event.take()) {
                            t.events.push(ev);
                        }
                    }
                    b"trace" if stack.last().map(Vec::as_slice) == Some(b"log") => {
                        finish_trace(trace.take(), traces_seen, keys, &mut out)?;
                        traces_seen += 1;
                    }
                    _ => {}
                }
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(LogIoError::Xml("unexpected end of document".into()));
    }
    Ok(EventSelection::new(out)?)
}

fn finish_trace(
    trace: Option<PendingTrace>,
    index: usize,
    keys: &XesKeys,
    out: &mut Vec<Event>,
) -> Result<(), LogIoError> {
    let Some(trace) = trace else { return Ok(()) };
    let case = trace
        .attrs
        .get(&keys.case)
        .cloned()
        .ok_or_else(|| LogIoError::MissingTraceKey {
            key: keys.case.clone(),
            trace: index,
        })?;
    for (n, mut attrs) in trace.events.into_iter().enumerate() {
        let mut take = |key: &str| {
            attrs.remove(key).ok_or_else(|| LogIoError::MissingXesKey {
                key: key.to_string(),
                trace: index,
                event: n,
            })
        };
        let activity = take(&keys.activity)?;
        let agent = take(&keys.agent)?;
        let raw_ts = take(&keys.timestamp)?;
        let timestamp = TimestampFormat::Auto
            .parse(&raw_ts)
            .ok_or_else(|| LogIoError::Xml(format!("bad timestamp '{raw_ts}' in trace {index}, event {n}")))?;
        let id = out.len() as u64;
        let mut e = Event::new(id, timestamp, case.clone(), activity, agent);
        e.extras = attrs;
        out.push(e);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(body: &str) -> String {
        format!(r#"<?xml version="1.0" encoding="UTF-8"?><log xes.version="1.0">{body}</log>"#)
    }

    fn ev(act: &str, res: Option<&str>, ts: &str) -> String {
        let res = res
            .map(|r| format!(r#"<string key="org:resource" value="{r}"/>"#))
            .unwrap_or_default();
        format!(
            r#"<event><string key="concept:name" value="{act}"/>{res}<date key="time:timestamp" value="{ts}"/></event>"#
        )
    }

    #[test]
    fn one_trace_two_events() {
        let xml = doc(&format!(
            r#"<trace><string key="concept:name" value="case-1"/>{}{}</trace>"#,
            ev("A", Some("r1"), "2020-01-01T10:00:00.000+01:00"),
            ev("B", Some("r2"), "2020-01-01T11:00:00.000+01:00"),
        ));
        let s = parse_xes_str(&xml, &XesKeys::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.cases().len(), 1);
        assert_eq!(s.events()[0].activity, "A");
        assert_eq!(s.events()[1].agent, "r2");
    }

    #[test]
    fn shared_resource_across_cases() {
        let xml = doc(&format!(
            r#"<trace><string key="concept:name" value="1"/>{}</trace><trace><string key="concept:name" value="2"/>{}</trace>"#,
            ev("A", Some("r1"), "2020-01-01T10:00:00Z"),
            ev("B", Some("r1"), "2020-01-02T10:00:00Z"),
        ));
        let s = parse_xes_str(&xml, &XesKeys::default()).unwrap();
        assert_eq!(s.cases().len(), 2);
        assert_eq!(s.agents().len(), 1);
    }

    #[test]
    fn missing_resource_names_event() {
        let xml = doc(&format!(
            r#"<trace><string key="concept:name" value="1"/>{}{}</trace>"#,
            ev("A", Some("r1"), "2020-01-01T10:00:00Z"),
            ev("B", None, "2020-01-01T11:00:00Z"),
        ));
        let err = parse_xes_str(&xml, &XesKeys::default()).unwrap_err();
        assert_eq!(err.to_string(), "event 1 of trace 0 lacks attribute 'org:resource'");
    }

    #[test]
    fn nested_and_global_attributes_are_ignored() {
        let xml = doc(&format!(
            r#"<global scope="event"><string key="concept:name" value="x"/></global>
               <trace><string key="concept:name" value="1"/>
               <event><string key="concept:name" value="A"/><string key="org:resource" value="r"/>
               <date key="time:timestamp" value="2020-01-01T10:00:00Z"/>
               <list key="meta"><string key="concept:name" value="nested"/></list>
               <string key="lifecycle:transition" value="complete"/></event>{}</trace>"#,
            ev("B", Some("r"), "2020-01-01T11:00:00Z")
        ));
        let s = parse_xes_str(&xml, &XesKeys::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.events()[0].activity, "A");
        assert_eq!(
            s.events()[0].extras.get("lifecycle:transition").map(String::as_str),
            Some("complete")
        );
    }

    #[test]
    fn malformed_xml_is_rejected() {
        let err = parse_xes_str("<log><trace></log>", &XesKeys::default()).unwrap_err();
        assert!(matches!(err, LogIoError::Xml(_)));
    }
}
