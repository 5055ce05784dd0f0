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

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::RiderAttack;
use crate::error::{Error, Result};
use crate::geometry::{pnorm_value, PlanarPoint};
use crate::roadnet::{RoadNetwork, Zone};

use super::{sample_drivers, sample_scene, trial_stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackExperiment {
    pub zone_side_m: u64,
    pub trials: u32,
    pub drivers_per_trial: usize,
    pub seed: u64,
    /// 2 for the Euclidean attack.
    pub norm_exponent: u32,
    pub attack: RiderAttack,
    /// Replaces the sampled rider.
    pub fixed_rider: Option<PlanarPoint>,
    /// Replaces the sampled driver; needs `drivers_per_trial == 1`.
    pub fixed_driver: Option<PlanarPoint>,
}

impl AttackExperiment {
    pub fn new(zone_side_m: u64, trials: u32, seed: u64) -> Self {
        Self {
            zone_side_m,
            trials,
            drivers_per_trial: 1,
            seed,
            norm_exponent: 2,
            attack: RiderAttack::default(),
            fixed_rider: None,
            fixed_driver: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackTrial {
    pub trial: u32,
    pub driver: usize,
    pub zone: Zone,
    pub rider: PlanarPoint,
    pub truth: PlanarPoint,
    pub disclosed: u64,
    /// Lattice points before the zone and road filters.
    pub lattice_points: usize,
    pub candidates: Vec<PlanarPoint>,
    pub hit: bool,
    /// Wall-clock time of enumeration plus filtering, in microseconds.
    pub elapsed_us: u64,
}

impl AttackTrial {
    pub fn exact(&self) -> bool {
        self.candidates.len() == 1
    }
}

/// Random zones, uniform riders, on-road drivers, one attack per driver.
/// Output is ordered by (trial, driver) regardless of scheduling.
pub fn run_attack_experiment(
    net: &RoadNetwork,
    exp: &AttackExperiment,
) -> Result<Vec<AttackTrial>> {
    if exp.trials == 0 || exp.drivers_per_trial == 0 {
        return Err(Error::InvalidParameter(
            "need at least one trial and one driver".into(),
        ));
    }
    if exp.fixed_driver.is_some() && exp.drivers_per_trial != 1 {
        return Err(Error::InvalidParameter(
            "a fixed driver needs exactly one driver per trial".into(),
        ));
    }
    let per_trial = (0..exp.trials)
        .into_par_iter()
        .map(|t| attack_trial(net, exp, t))
        .collect::<Vec<_>>()
        // Sequential pass so the reported error is the lowest-index one.
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub(crate) fn attack_trial(
    net: &RoadNetwork,
    exp: &AttackExperiment,
    t: u32,
) -> Result<Vec<AttackTrial>> {
    let stream = trial_stream(exp.seed, exp.zone_side_m, t);
    let mut scene = sample_scene(net, exp.zone_side_m, 0, &stream)?;
    scene.rider = exp.fixed_rider.unwrap_or(scene.rider);
    let drivers = if exp.drivers_per_trial == 1 {
        vec![exp.fixed_driver.unwrap_or(scene.driver)]
    } else {
        sample_drivers(net, scene.zone, &stream, exp.drivers_per_trial)?
    };
    drivers
        .into_iter()
        .enumerate()
        .map(|(i, truth)| {
            let disclosed = pnorm_value(exp.norm_exponent, truth - scene.rider)
                .ok_or_else(|| Error::InvalidParameter("disclosed value overflows".into()))?;
            let start = Instant::now();
            let lattice = exp.attack.enumerator.pnorm(exp.norm_exponent, disclosed)?;
            let candidates = crate::attack::filter_candidates(
                &lattice,
                scene.zone,
                scene.rider,
                net,
                exp.attack.on_road_threshold_m,
            );
            let elapsed_us = start.elapsed().as_micros() as u64;
            Ok(AttackTrial {
                trial: t,
                driver: i,
                zone: scene.zone,
                rider: scene.rider,
                truth,
                disclosed,
                lattice_points: lattice.len(),
                hit: candidates.binary_search(&truth).is_ok(),
                candidates,
                elapsed_us,
            })
        })
        .collect()
}
