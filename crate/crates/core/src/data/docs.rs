//! Raw text documents from JSONL (`timestamp`, `text`, `source`, optional `label`).

use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::Sentiment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawTextDoc {
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Sentiment>,
}

#[derive(Deserialize)]
struct DocLine {
    timestamp: String,
    text: String,
    source: String,
    #[serde(default)]
    label: Option<String>,
}

/// Accepts RFC 3339 timestamps (any offset, converted to UTC), naive
/// `YYYY-MM-DDTHH:MM:SS[.f]` read as UTC, and bare dates at midnight UTC.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    Err(Error::data(format!("timestamp {s:?} is not ISO-8601")))
}

pub fn parse_doc_line(line: &str) -> Result<RawTextDoc> {
    let raw: DocLine = serde_json::from_str(line).map_err(|e| Error::data(e.to_string()))?;
    if raw.text.trim().is_empty() {
        return Err(Error::data("text must be non-empty"));
    }
    Ok(RawTextDoc {
        timestamp: parse_timestamp(&raw.timestamp)?,
        text: raw.text,
        source: raw.source,
        label: raw.label.as_deref().map(str::parse).transpose()?,
    })
}

/// One document per non-blank line.
pub fn parse_text_jsonl(input: &str) -> Result<Vec<RawTextDoc>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| parse_doc_line(l).map_err(|e| Error::data(format!("line {}: {e}", n + 1))))
        .collect()
}

pub fn read_text_jsonl(path: &Path) -> Result<Vec<RawTextDoc>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_text_jsonl(&text)
}

pub fn write_text_jsonl(path: &Path, docs: &[RawTextDoc]) -> Result<()> {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
