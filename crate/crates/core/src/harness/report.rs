// Copyright 2026 The driverloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::AccuracyReport;
use crate::mitigation::AnonymityReport;
use crate::polyrecover::RecoveryTrial;

use super::experiments::AttackTrial;
use super::sweep::SweepReport;

/// One persisted per-trial row of a sweep. Columns that do not apply to the
/// row's mode are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub map: String,
    pub zone_side_m: u64,
    pub mode: String,
    pub trial: u32,
    pub driver: usize,
    pub zone_x: Option<i64>,
    pub zone_y: Option<i64>,
    pub rider_x: Option<i64>,
    pub rider_y: Option<i64>,
    /// `|S'|`; empty for accuracy rows and dropped mitigation trials.
    pub candidates: Option<u64>,
    pub hit: Option<bool>,
    pub within_one_minute: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub map: String,
    pub zone_side_m: u64,
    pub zone_area_km2: f64,
    pub mode: String,
    pub trials: u64,
    pub avg: Option<f64>,
    pub exact_pct: Option<f64>,
    pub mean_anonymity: Option<f64>,
    pub accuracy_pct: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

/// Wall-clock cost of one attack, kept apart from the reports so those stay
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub zone_side_m: u64,
    pub mode: String,
    pub trial: u32,
    pub driver: usize,
    pub disclosed: u64,
    pub elapsed_us: u64,
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Header-only output still needs the header; serde only emits it with
/// the first row.
fn write_header<W: Write>(writer: W, header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Serialize)]
struct AttackRow {
    trial: u32,
    driver: usize,
    candidates: usize,
    hit: bool,
    exact: bool,
}

/// `trial,driver,candidates,hit,exact`
pub fn write_attack_csv<W: Write>(writer: W, trials: &[AttackTrial]) -> Result<()> {
    if trials.is_empty() {
        return write_header(writer, &["trial", "driver", "candidates", "hit", "exact"]);
    }
    write_rows(
        writer,
        trials.iter().map(|t| AttackRow {
            trial: t.trial,
            driver: t.driver,
            candidates: t.candidates.len(),
            hit: t.hit,
            exact: t.exact(),
        }),
    )
}

#[derive(Serialize)]
struct MitigationRow {
    trial: u32,
    candidates: usize,
    hit: bool,
}

/// `trial,candidates,hit`, one row per kept trial.
pub fn write_mitigation_csv<W: Write>(writer: W, report: &AnonymityReport) -> Result<()> {
    let rows: Vec<MitigationRow> = report
        .trials
        .iter()
        .filter(|t| !t.dropped)
        .map(|t| MitigationRow {
            trial: t.trial,
            candidates: t.candidates,
            hit: t.hit,
        })
        .collect();
    if rows.is_empty() {
        return write_header(writer, &["trial", "candidates", "hit"]);
    }
    write_rows(writer, rows)
}

/// `trial,selected,fastest,t_selected_s,t_fastest_s,within_one_minute`
pub fn write_accuracy_csv<W: Write>(writer: W, report: &AccuracyReport) -> Result<()> {
    write_rows(writer, &report.trials)
}

#[derive(Serialize)]
struct RecoveryRow {
    trial: u32,
    polynomial: String,
    true_inputs: String,
    explanations: usize,
    candidate_polynomials: usize,
    recovered: bool,
    unique: bool,
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

/// `trial,polynomial,true_inputs,explanations,candidate_polynomials,recovered,unique`;
/// list fields are space separated, coefficients lowest degree first.
pub fn write_polyrecover_csv<W: Write>(writer: W, trials: &[RecoveryTrial]) -> Result<()> {
    write_rows(
        writer,
        trials.iter().map(|t| RecoveryRow {
            trial: t.trial,
            polynomial: join(&t.polynomial.0),
            true_inputs: join(&t.true_inputs),
            explanations: t.explanations,
            candidate_polynomials: t.candidate_polynomials,
            recovered: t.recovered,
            unique: t.unique,
        }),
    )
}

pub fn read_trial_records(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .collect::<std::result::Result<Vec<TrialRecord>, _>>()
        .map_err(Error::from)
}

/// Paths the sweep writes next to `aggregate`: `<stem>.trials.csv` and
/// `<stem>.timings.csv`.
pub fn sibling_paths(aggregate: &Path) -> (PathBuf, PathBuf) {
    let stem = aggregate
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep");
    let dir = aggregate.parent().unwrap_or(Path::new(""));
    (
        dir.join(format!("{stem}.trials.csv")),
        dir.join(format!("{stem}.timings.csv")),
    )
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// Writes the aggregate, per-trial and timing CSVs; returns their paths.
pub fn write_sweep_reports(
    report: &SweepReport,
    aggregate: impl AsRef<Path>,
) -> Result<[PathBuf; 3]> {
    let aggregate = aggregate.as_ref();
    let (trials, timings) = sibling_paths(aggregate);
    write_rows(create(aggregate)?, &report.rows)?;
    if report.trials.is_empty() {
        write_header(
            create(&trials)?,
            &[
                "map",
                "zone_side_m",
                "mode",
                "trial",
                "driver",
                "zone_x",
                "zone_y",
                "rider_x",
                "rider_y",
                "candidates",
                "hit",
                "within_one_minute",
            ],
        )?;
    } else {
        write_rows(create(&trials)?, &report.trials)?;
    }
    if report.timings.is_empty() {
        write_header(
            create(&timings)?,
            &[
                "zone_side_m",
                "mode",
                "trial",
                "driver",
                "disclosed",
                "elapsed_us",
            ],
        )?;
    } else {
        write_rows(create(&timings)?, &report.timings)?;
    }
    Ok([aggregate.to_path_buf(), trials, timings])
}
