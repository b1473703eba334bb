//! Artifact encoding. Floats are always written with 17 significant digits
//! so that a file round-trips every value exactly.

use std::io;

use fockline_core::{AmplitudeRecord, PureState};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Formats `x` with 17 significant digits in exponent notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `f64` that serializes through [`format_f64`]; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl From<f64> for Float {
    fn from(x: f64) -> Self {
        Float(x)
    }
}

#[derive(Debug, Serialize)]
pub struct AmplitudeEntry {
    pub occupations: Vec<u32>,
    pub re: Float,
    pub im: Float,
}

impl From<AmplitudeRecord> for AmplitudeEntry {
    fn from(r: AmplitudeRecord) -> Self {
        Self {
            occupations: r.occupations,
            re: Float(r.re),
            im: Float(r.im),
        }
    }
}

/// State as a list of `{occupations, re, im}` sorted by occupations.
pub fn state_entries(state: &PureState) -> Vec<AmplitudeEntry> {
    state.to_records().into_iter().map(Into::into).collect()
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// `{"records": [...], "summary": {...}}` with one compact record per line.
pub fn records_json<R: Serialize, S: Serialize>(records: &[R], summary: &S) -> io::Result<String> {
    let mut out = String::from("{\n\"records\": [\n");
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        out.push_str(&serde_json::to_string(r).map_err(io::Error::other)?);
    }
    out.push_str("\n],\n\"summary\": ");
    out.push_str(&serde_json::to_string_pretty(summary).map_err(io::Error::other)?);
    out.push_str("\n}\n");
    Ok(out)
}

/// CSV with a header row and LF line endings.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> io::Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).map_err(io::Error::other)?;
    for row in rows {
        writer.write_record(row).map_err(io::Error::other)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}
