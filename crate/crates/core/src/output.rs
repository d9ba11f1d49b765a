//! Run artifacts: CSV time series and the `summary.json` record.
//!
//! Column order is part of the file contract:
//!
//! | file              | columns                                                    |
//! |-------------------|------------------------------------------------------------|
//! | `fields.csv`      | `t, x, h, u`                                               |
//! | `diagnostics.csv` | `t, mass, momentum, energy, min_phix, sobolev_h, sobolev_u`|
//! | `compare.csv`     | `t, sup_dh, sup_du, l2_dh, l2_du`                          |
//! | `converge.csv`    | `resolution, error, observed_order`                        |
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never observes a half-written artifact. Non-finite numbers are
//! refused rather than written.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::diagnostics::DiagnosticsRecord;
use crate::eulerian::EulerianState;

pub const FIELDS_FILE: &str = "fields.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const CONVERGE_FILE: &str = "converge.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub sup_dh: f64,
    pub sup_du: f64,
    pub l2_dh: f64,
    pub l2_du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergeRow {
    /// Grid size, or number of time steps for a dt ladder.
    pub resolution: f64,
    pub error: f64,
    /// Order observed against the previous row; empty on the first row.
    pub observed_order: Option<f64>,
}

/// Fills `observed_order` from consecutive `(resolution, error)` pairs.
pub fn converge_rows(resolutions: &[f64], errors: &[f64]) -> Vec<ConvergeRow> {
    resolutions
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(i, (&resolution, &error))| {
            let observed_order = (i > 0)
                .then(|| (errors[i - 1] / error).ln() / (resolution / resolutions[i - 1]).ln())
                .filter(|o| o.is_finite());
            ConvergeRow { resolution, error, observed_order }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    /// `completed`, `monotonicity_loss`, `step_rejected`, `solver_failure`,
    /// `config_error`, `compare_failed` or `io_error`.
    pub termination: String,
    /// Human-readable reason when the run did not complete.
    pub message: Option<String>,
    /// Time of the last recorded state.
    pub final_time: f64,
    pub wall_seconds: f64,
    /// Effective configuration after command-line overrides; feeding it back
    /// reproduces the run exactly. Absent when the file could not be parsed.
    pub config: Option<ScenarioConfig>,
    pub diagnostics_final: Option<DiagnosticsRecord>,
    pub error_metrics: BTreeMap<String, f64>,
}

impl Summary {
    pub fn new(termination: &str) -> Self {
        Self {
            termination: termination.to_string(),
            message: None,
            final_time: 0.0,
            wall_seconds: 0.0,
            config: None,
            diagnostics_final: None,
            error_metrics: BTreeMap::new(),
        }
    }

    /// Adds a metric; non-finite values are dropped so the JSON stays clean.
    pub fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.error_metrics.insert(name.to_string(), value);
        }
    }
}

fn non_finite(what: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("refusing to write non-finite value in {what}"))
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, &target) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(target)
}

fn to_csv<R: Serialize>(rows: impl IntoIterator<Item = R>, header: &[&str]) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn fields_csv(times: &[f64], states: &[EulerianState]) -> io::Result<Vec<u8>> {
    let mut rows = Vec::new();
    for (&t, s) in times.iter().zip(states) {
        let x = s.grid().nodes();
        for ((x, h), u) in x.iter().zip(s.h().values()).zip(s.u().values()) {
            if !(h.is_finite() && u.is_finite() && t.is_finite()) {
                return Err(non_finite(FIELDS_FILE));
            }
            rows.push((t, *x, *h, *u));
        }
    }
    to_csv(rows, &["t", "x", "h", "u"])
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> io::Result<Vec<u8>> {
    if records.iter().any(|r| !r.is_finite()) {
        return Err(non_finite(DIAGNOSTICS_FILE));
    }
    let rows = records
        .iter()
        .map(|r| (r.t, r.mass, r.momentum, r.energy, r.min_phix, r.sobolev_h, r.sobolev_u));
    to_csv(rows, &["t", "mass", "momentum", "energy", "min_phix", "sobolev_h", "sobolev_u"])
}

pub fn compare_csv(rows: &[CompareRow]) -> io::Result<Vec<u8>> {
    if rows
        .iter()
        .any(|r| ![r.t, r.sup_dh, r.sup_du, r.l2_dh, r.l2_du].iter().all(|v| v.is_finite()))
    {
        return Err(non_finite(COMPARE_FILE));
    }
    to_csv(rows.iter().map(|r| (r.t, r.sup_dh, r.sup_du, r.l2_dh, r.l2_du)), &["t", "sup_dh", "sup_du", "l2_dh", "l2_du"])
}

pub fn converge_csv(rows: &[ConvergeRow]) -> io::Result<Vec<u8>> {
    if rows.iter().any(|r| !(r.resolution.is_finite() && r.error.is_finite())) {
        return Err(non_finite(CONVERGE_FILE));
    }
    to_csv(
        rows.iter().map(|r| (r.resolution, r.error, r.observed_order)),
        &["resolution", "error", "observed_order"],
    )
}

/// Pretty-printed JSON; `serde_json` already maps non-finite floats to `null`.
pub fn summary_json(summary: &Summary) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(summary).expect("summary is always serializable");
    bytes.push(b'\n');
    bytes
}
