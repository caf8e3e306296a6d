//! Event log ingestion and export, the variant frequency filter, and log
//! generators.

mod csv_io;
mod filter;
mod generator;
pub mod synthetic;
mod xes;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::event::EventError;

pub use csv_io::{parse_csv, parse_csv_reader, write_csv, write_csv_writer};
pub use filter::variant_frequency_filter;
pub use generator::{generate_health_log, GeneratorConfig, TESTS, THERAPIES};
pub use xes::{parse_xes, parse_xes_str, XesKeys};

#[derive(Debug, Error)]
pub enum LogIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),
    #[error("missing attribute '{attribute}' at row {row}")]
    EmptyCell { attribute: &'static str, row: usize },
    #[error("unparseable timestamp '{value}' at row {row}")]
    BadTimestamp { value: String, row: usize },
    #[error("malformed XES: {0}")]
    Xml(String),
    #[error("event {event} of trace {trace} lacks attribute '{key}'")]
    MissingXesKey { key: String, trace: usize, event: usize },
    #[error("trace {trace} lacks attribute '{key}'")]
    MissingTraceKey { key: String, trace: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Event(#[from] EventError),
}

/// How timestamps are written in an input file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TimestampFormat {
    /// ISO-8601 with offset; then ISO-8601 without offset read as UTC; then
    /// an integer count of epoch milliseconds.
    #[default]
    Auto,
    Rfc3339,
    EpochMillis,
    /// A `chrono` strftime pattern without offset, read as UTC.
    Pattern(String),
}

impl TimestampFormat {
    /// Parses `value` into microseconds since the epoch.
    pub fn parse(&self, value: &str) -> Option<i64> {
        let value = value.trim();
        match self {
            TimestampFormat::Auto => parse_rfc3339(value)
                .or_else(|| parse_naive(value, "%Y-%m-%dT%H:%M:%S%.f"))
                .or_else(|| parse_naive(value, "%Y-%m-%d %H:%M:%S%.f"))
                .or_else(|| parse_epoch_millis(value)),
            TimestampFormat::Rfc3339 => parse_rfc3339(value),
            TimestampFormat::EpochMillis => parse_epoch_millis(value),
            TimestampFormat::Pattern(p) => parse_naive(value, p),
        }
    }
}

impl std::str::FromStr for TimestampFormat {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => TimestampFormat::Auto,
            "rfc3339" | "iso8601" => TimestampFormat::Rfc3339,
            "epoch-ms" | "epoch_ms" | "millis" => TimestampFormat::EpochMillis,
            other => TimestampFormat::Pattern(other.to_string()),
        })
    }
}

fn parse_rfc3339(value: &str) -> Option<i64> {
    DateTime::parse_from_rfc3339(value)
        .ok()
        .map(|d| d.timestamp_micros())
}

fn parse_naive(value: &str, pattern: &str) -> Option<i64> {
    NaiveDateTime::parse_from_str(value, pattern)
        .ok()
        .map(|d| d.and_utc().timestamp_micros())
}

fn parse_epoch_millis(value: &str) -> Option<i64> {
    value.parse::<i64>().ok().and_then(|ms| ms.checked_mul(1000))
}

/// Renders microseconds since the epoch as RFC 3339 in UTC with microsecond
/// precision.
pub fn format_timestamp(micros: i64) -> String {
    match DateTime::<Utc>::from_timestamp_micros(micros) {
        Some(d) => d.to_rfc3339_opts(SecondsFormat::Micros, true),
        None => micros.to_string(),
    }
}

/// Names of the CSV columns holding the mandatory attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub case_column: String,
    pub activity_column: String,
    pub agent_column: String,
    pub timestamp_column: String,
    pub timestamp_format: TimestampFormat,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            case_column: "case".into(),
            activity_column: "activity".into(),
            agent_column: "agent".into(),
            timestamp_column: "timestamp".into(),
            timestamp_format: TimestampFormat::Auto,
        }
    }
}

impl ColumnMapping {
    pub fn validate(&self) -> Result<(), LogIoError> {
        let cols = [
            &self.case_column,
            &self.activity_column,
            &self.agent_column,
            &self.timestamp_column,
        ];
        if cols.iter().any(|c| c.is_empty()) {
            return Err(LogIoError::InvalidMapping("column names must be nonempty".into()));
        }
        for (i, a) in cols.iter().enumerate() {
            if cols[i + 1..].contains(a) {
                return Err(LogIoError::InvalidMapping(format!("column '{a}' mapped twice")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_timestamps() {
        let f = TimestampFormat::Auto;
        assert_eq!(f.parse("1970-01-01T00:00:01+00:00"), Some(1_000_000));
        assert_eq!(f.parse("1970-01-01T01:00:01+01:00"), Some(1_000_000));
        assert_eq!(f.parse("1970-01-01 00:00:02"), Some(2_000_000));
        assert_eq!(f.parse("1500"), Some(1_500_000));
        assert_eq!(f.parse("yesterday"), None);
    }

    #[test]
    fn format_round_trips() {
        let t = 1_680_193_640_123_456;
        assert_eq!(TimestampFormat::Rfc3339.parse(&format_timestamp(t)), Some(t));
    }

    #[test]
    fn mapping_rejects_duplicates() {
        let m = ColumnMapping {
            agent_column: "case".into(),
            ..ColumnMapping::default()
        };
        assert!(matches!(m.validate(), Err(LogIoError::InvalidMapping(_))));
        assert!(ColumnMapping::default().validate().is_ok());
    }
}
