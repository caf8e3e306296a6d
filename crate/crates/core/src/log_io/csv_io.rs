use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{format_timestamp, ColumnMapping, LogIoError};
use crate::event::{Event, EventSelection};

/// Reads an RFC-4180 CSV file with a header row. Columns not named by the
/// mapping become extra attributes.
pub fn parse_csv(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<EventSelection, LogIoError> {
    parse_csv_reader(File::open(path)?, mapping)
}

pub fn parse_csv_reader<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<EventSelection, LogIoError> {
    mapping.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LogIoError::MissingColumn(name.to_string()))
    };
    let case_ix = column(&mapping.case_column)?;
    let activity_ix = column(&mapping.activity_column)?;
    let agent_ix = column(&mapping.agent_column)?;
    let ts_ix = column(&mapping.timestamp_column)?;
    let mandatory = [case_ix, activity_ix, agent_ix, ts_ix];

    let mut events = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let row = n + 1;
        let cell = |ix: usize, attribute: &'static str| -> Result<String, LogIoError> {
            match record.get(ix) {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(LogIoError::EmptyCell { attribute, row }),
            }
        };
        let case = cell(case_ix, "case")?;
        let activity = cell(activity_ix, "activity")?;
        let agent = cell(agent_ix, "agent")?;
        let raw_ts = cell(ts_ix, "timestamp")?;
        let timestamp = mapping
            .timestamp_format
            .parse(&raw_ts)
            .ok_or(LogIoError::BadTimestamp { value: raw_ts, row })?;
        let mut event = Event::new(n as u64, timestamp, case, activity, agent);
        for (ix, (name, value)) in headers.iter().zip(record.iter()).enumerate() {
            if !mandatory.contains(&ix) && !value.is_empty() {
                event.extras.insert(name.to_string(), value.to_string());
            }
        }
        events.push(event);
    }
    Ok(EventSelection::new(events)?)
}

/// Writes the selection as CSV with columns `case,activity,agent,timestamp`
/// followed by the extra attributes in name order. Output is a function of
/// the selection only.
pub fn write_csv(selection: &EventSelection, path: impl AsRef<Path>) -> Result<(), LogIoError> {
    let file = File::create(path)?;
    write_csv_writer(selection, std::io::BufWriter::new(file))
}

pub fn write_csv_writer<W: Write>(selection: &EventSelection, writer: W) -> Result<(), LogIoError> {
    let extra_keys: BTreeSet<&str> = selection
        .iter()
        .flat_map(|e| e.extras.keys().map(String::as_str))
        .filter(|k| !matches!(*k, "case" | "activity" | "agent" | "timestamp"))
        .collect();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["case", "activity", "agent", "timestamp"];
    header.extend(extra_keys.iter().copied());
    w.write_record(&header)?;
    let empty = BTreeMap::new();
    for e in selection {
        let extras = if e.extras.is_empty() { &empty } else { &e.extras };
        let mut row = vec![
            e.case.clone(),
            e.activity.clone(),
            e.agent.clone(),
            format_timestamp(e.timestamp),
        ];
        row.extend(extra_keys.iter().map(|k| extras.get(*k).cloned().unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
