//! File formats: TOML topology and scenario files, CSV tracklet, event and
//! truth records, JSON reports.
//!
//! Every float written to CSV uses six fixed decimals and `NA` marks an
//! unknown value. Readers reject unknown columns, unsorted records and
//! malformed fields with the offending line number.

mod events;
mod report;
mod scenario;
mod topology;
mod tracklets;
mod truth;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use events::{events_to_string, read_events, write_events, EVENT_HEADER};
pub use report::{summary_table, write_json, RunReport, SummaryRow};
pub use scenario::{parse_scenario, parse_scenario_as, read_scenario, read_scenario_as, write_scenario};
pub use topology::{parse_topology, read_topology, write_topology, Topology};
pub use tracklets::{
    read_tracklets, updates_from_states, write_tracklets, TrackletRecord, TRACKLET_HEADER,
};
pub use truth::{
    read_truth_dir, read_truth_handovers, read_truth_pairs, read_truth_samples, write_truth_dir,
    write_truth_handovers, write_truth_pairs, write_truth_samples,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Self {
        IoError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
    }

    pub(crate) fn invalid(path: &Path, message: impl Into<String>) -> Self {
        IoError::Invalid { path: path.to_path_buf(), message: message.into() }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub(crate) fn f6(x: f64) -> String {
    format!("{x:.6}")
}

pub(crate) fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "NA".into())
}

pub(crate) fn opt_f6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_else(|| "NA".into())
}

/// Line/column of a byte offset, both 1-based.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Maps a TOML deserialization error to a positioned parse error.
pub(crate) fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> IoError {
    let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((1, 1));
    IoError::parse(path, line, column, e.message().to_string())
}

/// Reader over simple comma-separated records with a fixed header.
pub(crate) struct Records {
    path: PathBuf,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Records {
    pub fn read(path: &Path, header: &[&str]) -> Result<Self, IoError> {
        let text = read_text(path)?;
        Self::parse(path, &text, header)
    }

    pub fn parse(path: &Path, text: &str, header: &[&str]) -> Result<Self, IoError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(text.as_bytes());
        let got = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        if got.iter().ne(header.iter().copied()) {
            return Err(IoError::parse(
                path,
                1,
                1,
                format!("expected header '{}', got '{}'", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        let mut rows = Vec::new();
        for r in rdr.records() {
            let r = r.map_err(|e| csv_error(path, e))?;
            let line = r.position().map_or(0, |p| p.line() as usize);
            rows.push((line, r));
        }
        Ok(Self { path: path.to_path_buf(), rows })
    }

    pub fn rows(&self) -> impl Iterator<Item = Field<'_>> {
        self.rows.iter().map(|(line, rec)| Field { path: &self.path, line: *line, rec })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    IoError::parse(path, line, 1, e.to_string())
}

/// One record with typed accessors that report the failing column.
pub(crate) struct Field<'a> {
    path: &'a Path,
    pub line: usize,
    rec: &'a csv::StringRecord,
}

impl Field<'_> {
    fn raw(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    pub fn err(&self, col: usize, msg: impl Into<String>) -> IoError {
        IoError::parse(self.path, self.line, col + 1, msg)
    }

    pub fn parse<T: std::str::FromStr>(&self, col: usize, what: &str) -> Result<T, IoError> {
        let s = self.raw(col);
        s.parse().map_err(|_| self.err(col, format!("invalid {what} '{s}'")))
    }

    pub fn opt<T: std::str::FromStr>(&self, col: usize, what: &str) -> Result<Option<T>, IoError> {
        if self.raw(col) == "NA" {
            Ok(None)
        } else {
            self.parse(col, what).map(Some)
        }
    }

    pub fn float(&self, col: usize, what: &str) -> Result<f64, IoError> {
        let v: f64 = self.parse(col, what)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(col, format!("non-finite {what}")))
        }
    }

    pub fn opt_float(&self, col: usize, what: &str) -> Result<Option<f64>, IoError> {
        if self.raw(col) == "NA" {
            Ok(None)
        } else {
            self.float(col, what).map(Some)
        }
    }

    pub fn str(&self, col: usize) -> &str {
        self.raw(col)
    }
}
