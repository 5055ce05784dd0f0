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

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matching::{evaluate_accuracy, AccuracyConfig, MatchingMode};
use crate::mitigation::{run_mitigated_experiment, MitigationConfig, ObfuscationParams};
use crate::roadnet::RoadNetwork;

use super::config::{ExperimentConfig, Pipeline};
use super::experiments::{run_attack_experiment, AttackExperiment};
use super::report::{AggregateRow, TimingRecord, TrialRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// One row per (zone side, mode) cell, in configuration order.
    pub rows: Vec<AggregateRow>,
    pub trials: Vec<TrialRecord>,
    pub timings: Vec<TimingRecord>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Recomputes one cell's statistics from its per-trial rows. Sums are
/// integers; each statistic is a single division.
pub fn aggregate(map: &str, zone_side_m: u64, mode: &str, records: &[TrialRecord]) -> AggregateRow {
    let side = zone_side_m as f64;
    let mut row = AggregateRow {
        map: map.to_string(),
        zone_side_m,
        zone_area_km2: side * side / 1e6,
        mode: mode.to_string(),
        trials: records.len() as u64,
        avg: None,
        exact_pct: None,
        mean_anonymity: None,
        accuracy_pct: None,
        status: "ok".into(),
    };
    let counted: Vec<u64> = records.iter().filter_map(|r| r.candidates).collect();
    let n = counted.len() as u64;
    let total: u64 = counted.iter().sum();
    if mode.starts_with("accuracy") {
        let within: Vec<bool> = records.iter().filter_map(|r| r.within_one_minute).collect();
        let hits = within.iter().filter(|&&w| w).count() as u64;
        row.accuracy_pct = ratio(100 * hits, within.len() as u64);
    } else if mode.starts_with("mitigated") {
        row.mean_anonymity = ratio(total, n);
    } else {
        let exact = counted.iter().filter(|&&c| c == 1).count() as u64;
        row.avg = ratio(total, n);
        row.exact_pct = ratio(100 * exact, n);
    }
    row
}

struct Cell {
    mode: String,
    trials: Vec<TrialRecord>,
    timings: Vec<TimingRecord>,
}

fn attack_cell(
    net: &RoadNetwork,
    cfg: &ExperimentConfig,
    map: &str,
    side: u64,
    p: u32,
) -> Result<Cell> {
    let mut exp = AttackExperiment::new(side, cfg.trials_per_size, cfg.master_seed);
    exp.norm_exponent = p;
    exp.attack = cfg.attack();
    exp.fixed_rider = cfg.fixed_rider;
    exp.fixed_driver = cfg.fixed_driver;
    let mode = if p == 2 {
        "attack".to_string()
    } else {
        format!("pnorm{p}")
    };
    let trials = run_attack_experiment(net, &exp)?;
    Ok(Cell {
        trials: trials
            .iter()
            .map(|t| TrialRecord {
                map: map.to_string(),
                zone_side_m: side,
                mode: mode.clone(),
                trial: t.trial,
                driver: t.driver,
                zone_x: Some(t.zone.min_corner.x),
                zone_y: Some(t.zone.min_corner.y),
                rider_x: Some(t.rider.x),
                rider_y: Some(t.rider.y),
                candidates: Some(t.candidates.len() as u64),
                hit: Some(t.hit),
                within_one_minute: None,
            })
            .collect(),
        timings: trials
            .iter()
            .map(|t| TimingRecord {
                zone_side_m: side,
                mode: mode.clone(),
                trial: t.trial,
                driver: t.driver,
                disclosed: t.disclosed,
                elapsed_us: t.elapsed_us,
            })
            .collect(),
        mode,
    })
}

fn mitigated_cell(
    net: &RoadNetwork,
    cfg: &ExperimentConfig,
    map: &str,
    side: u64,
    radius: f64,
) -> Result<Cell> {
    let config = MitigationConfig {
        zone_side_m: side,
        params: ObfuscationParams::with_slack(radius, cfg.filter_slack_m)?,
        trials: cfg.trials_per_size,
        seed: cfg.master_seed,
        edge_policy: cfg.edge_policy,
    };
    let report = run_mitigated_experiment(net, &config)?;
    let mode = "mitigated".to_string();
    Ok(Cell {
        trials: report
            .trials
            .iter()
            .map(|t| TrialRecord {
                map: map.to_string(),
                zone_side_m: side,
                mode: mode.clone(),
                trial: t.trial,
                driver: 0,
                zone_x: Some(t.zone.min_corner.x),
                zone_y: Some(t.zone.min_corner.y),
                rider_x: Some(t.rider.x),
                rider_y: Some(t.rider.y),
                candidates: (!t.dropped).then_some(t.candidates as u64),
                hit: (!t.dropped).then_some(t.hit),
                within_one_minute: None,
            })
            .collect(),
        timings: Vec::new(),
        mode,
    })
}

fn accuracy_cell(
    net: &RoadNetwork,
    cfg: &ExperimentConfig,
    map: &str,
    side: u64,
    mode: MatchingMode,
) -> Result<Cell> {
    let config = AccuracyConfig {
        zone_side_m: side,
        drivers: cfg.drivers,
        radius_m: cfg.obfuscation_radius_m.unwrap_or(0.0),
        trials: cfg.trials_per_size,
        seed: cfg.master_seed,
        model: cfg.travel_model()?,
    };
    let report = evaluate_accuracy(net, &config, mode)?;
    let mode = match mode {
        MatchingMode::Oride => "accuracy-oride",
        MatchingMode::Mitigated => "accuracy-mitigated",
    }
    .to_string();
    Ok(Cell {
        trials: report
            .trials
            .iter()
            .map(|t| TrialRecord {
                map: map.to_string(),
                zone_side_m: side,
                mode: mode.clone(),
                trial: t.trial,
                driver: t.selected,
                zone_x: None,
                zone_y: None,
                rider_x: None,
                rider_y: None,
                candidates: None,
                hit: None,
                within_one_minute: Some(t.within_one_minute),
            })
            .collect(),
        timings: Vec::new(),
        mode,
    })
}

fn cell_modes(cfg: &ExperimentConfig) -> Vec<String> {
    match cfg.pipeline {
        Pipeline::Attack => vec!["attack".into()],
        Pipeline::Pnorm => vec![format!("pnorm{}", cfg.pnorm_p.unwrap_or(2))],
        Pipeline::Mitigated => vec!["mitigated".into()],
        Pipeline::Accuracy => {
            let mut m = vec!["accuracy-oride".to_string()];
            if cfg.obfuscation_radius_m.is_some() {
                m.push("accuracy-mitigated".into());
            }
            m
        }
    }
}

fn run_cell(
    net: &RoadNetwork,
    cfg: &ExperimentConfig,
    map: &str,
    side: u64,
    mode: &str,
) -> Result<Cell> {
    match cfg.pipeline {
        Pipeline::Attack => attack_cell(net, cfg, map, side, 2),
        Pipeline::Pnorm => attack_cell(net, cfg, map, side, cfg.pnorm_p.unwrap_or(2)),
        Pipeline::Mitigated => {
            mitigated_cell(net, cfg, map, side, cfg.obfuscation_radius_m.unwrap_or(0.0))
        }
        Pipeline::Accuracy => {
            let m = if mode == "accuracy-oride" {
                MatchingMode::Oride
            } else {
                MatchingMode::Mitigated
            };
            accuracy_cell(net, cfg, map, side, m)
        }
    }
}

/// Loads the configured roads and runs every cell.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let net = cfg.road_source.load(cfg.cell_size_m)?;
    run_sweep_on(&net, cfg)
}

/// Runs every (zone side, mode) cell against an already loaded network. A
/// failing cell becomes a `failed:` row and the sweep moves on.
pub fn run_sweep_on(net: &RoadNetwork, cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let map = cfg.road_source.to_string();
    let mut report = SweepReport {
        rows: Vec::new(),
        trials: Vec::new(),
        timings: Vec::new(),
    };
    for &side in &cfg.zone_sides_m {
        for mode in cell_modes(cfg) {
            match run_cell(net, cfg, &map, side, &mode) {
                Ok(cell) => {
                    report
                        .rows
                        .push(aggregate(&map, side, &cell.mode, &cell.trials));
                    report.trials.extend(cell.trials);
                    report.timings.extend(cell.timings);
                }
                Err(e) => {
                    log::warn!("cell side={side} mode={mode} failed: {e}");
                    let mut row = aggregate(&map, side, &mode, &[]);
                    row.status = format!("failed: {e}");
                    report.rows.push(row);
                }
            }
        }
    }
    Ok(report)
}
