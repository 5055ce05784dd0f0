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

//! The rider-side location-harvesting attack.
//!
//! Given the rider's own position, her zone, and the exact integer distance
//! disclosed for each driver, every lattice point on the matching circle is
//! a candidate. Candidates outside the zone or off the road network are
//! discarded; whatever survives is the prediction set for that driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    check_exponent, pnorm_value, LatticeEnumerator, LatticeSolutionSet, PlanarPoint,
};
use crate::roadnet::{RoadNetwork, Zone, ON_ROAD_THRESHOLD_M};

/// One ride request as seen by the attack harness. `drivers` is the ground
/// truth and is only used to score the attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RideSnapshot {
    zone: Zone,
    rider: PlanarPoint,
    drivers: Vec<PlanarPoint>,
    disclosed: Vec<u64>,
    norm_exponent: u32,
}

impl RideSnapshot {
    /// Builds a Euclidean snapshot and checks it against the network.
    pub fn new(
        zone: Zone,
        rider: PlanarPoint,
        drivers: Vec<PlanarPoint>,
        net: &RoadNetwork,
    ) -> Result<Self> {
        Self::with_exponent(zone, rider, drivers, 2, net)
    }

    pub fn with_exponent(
        zone: Zone,
        rider: PlanarPoint,
        drivers: Vec<PlanarPoint>,
        p: u32,
        net: &RoadNetwork,
    ) -> Result<Self> {
        check_exponent(p)?;
        let disclosed = drivers
            .iter()
            .map(|d| {
                pnorm_value(p, *d - rider)
                    .ok_or_else(|| Error::InvalidSnapshot(format!("distance to {d} overflows")))
            })
            .collect::<Result<Vec<_>>>()?;
        let snap = Self {
            zone,
            rider,
            drivers,
            disclosed,
            norm_exponent: p,
        };
        snap.validate(net)?;
        Ok(snap)
    }

    pub fn validate(&self, net: &RoadNetwork) -> Result<()> {
        if self.drivers.is_empty() {
            return Err(Error::InvalidSnapshot("no drivers".into()));
        }
        if self.drivers.len() != self.disclosed.len() {
            return Err(Error::InvalidSnapshot(
                "one disclosed value per driver".into(),
            ));
        }
        if !self.zone.contains(self.rider) {
            return Err(Error::InvalidSnapshot(format!(
                "rider {} outside zone",
                self.rider
            )));
        }
        for (i, (d, &n)) in self.drivers.iter().zip(&self.disclosed).enumerate() {
            if !self.zone.contains(*d) {
                return Err(Error::InvalidSnapshot(format!(
                    "driver {i} at {d} outside zone"
                )));
            }
            if !net.is_on_road(*d, ON_ROAD_THRESHOLD_M) {
                return Err(Error::InvalidSnapshot(format!(
                    "driver {i} at {d} is off road"
                )));
            }
            if pnorm_value(self.norm_exponent, *d - self.rider) != Some(n) {
                return Err(Error::InvalidSnapshot(format!(
                    "disclosed value {i} does not match"
                )));
            }
        }
        Ok(())
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    pub fn rider(&self) -> PlanarPoint {
        self.rider
    }

    pub fn drivers(&self) -> &[PlanarPoint] {
        &self.drivers
    }

    pub fn disclosed(&self) -> &[u64] {
        &self.disclosed
    }

    pub fn norm_exponent(&self) -> u32 {
        self.norm_exponent
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub driver_index: usize,
    /// Sorted, absolute planar coordinates.
    pub candidates: Vec<PlanarPoint>,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, p: &PlanarPoint) -> bool {
        self.candidates.binary_search(p).is_ok()
    }

    pub fn is_exact(&self) -> bool {
        self.candidates.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub predictions: Vec<PredictionSet>,
    /// Mean prediction-set size.
    pub avg: f64,
    /// Percentage of drivers pinned to exactly one location.
    pub exact_pct: f64,
    /// Whether each driver's true location is in its prediction set.
    pub hits: Vec<bool>,
}

impl AttackReport {
    pub fn from_predictions(predictions: Vec<PredictionSet>, truth: &[PlanarPoint]) -> Self {
        let n = predictions.len();
        // Integer totals, one division each.
        let total: usize = predictions.iter().map(PredictionSet::len).sum();
        let exact = predictions.iter().filter(|p| p.is_exact()).count();
        let hits = predictions
            .iter()
            .zip(truth)
            .map(|(p, t)| p.contains(t))
            .collect();
        let (avg, exact_pct) = if n == 0 {
            (0.0, 0.0)
        } else {
            (total as f64 / n as f64, (100 * exact) as f64 / n as f64)
        };
        Self {
            predictions,
            avg,
            exact_pct,
            hits,
        }
    }
}

/// Attack parameters: the lattice bound and the on-road threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiderAttack {
    pub enumerator: LatticeEnumerator,
    pub on_road_threshold_m: f64,
}

impl Default for RiderAttack {
    fn default() -> Self {
        Self {
            enumerator: LatticeEnumerator::default(),
            on_road_threshold_m: ON_ROAD_THRESHOLD_M,
        }
    }
}

impl RiderAttack {
    pub fn with_threshold(on_road_threshold_m: f64) -> Self {
        Self {
            on_road_threshold_m,
            ..Self::default()
        }
    }

    pub fn predict(
        &self,
        zone: Zone,
        rider: PlanarPoint,
        d: u64,
        net: &RoadNetwork,
    ) -> Result<Vec<PlanarPoint>> {
        let lattice = self.enumerator.circle(d)?;
        Ok(filter_candidates(
            &lattice,
            zone,
            rider,
            net,
            self.on_road_threshold_m,
        ))
    }

    pub fn predict_pnorm(
        &self,
        zone: Zone,
        rider: PlanarPoint,
        p: u32,
        d: u64,
        net: &RoadNetwork,
    ) -> Result<Vec<PlanarPoint>> {
        let lattice = self.enumerator.pnorm(p, d)?;
        Ok(filter_candidates(
            &lattice,
            zone,
            rider,
            net,
            self.on_road_threshold_m,
        ))
    }

    /// Runs the attack against every driver of the snapshot, in parallel.
    /// Predictions come back in driver order.
    pub fn run(&self, snapshot: &RideSnapshot, net: &RoadNetwork) -> Result<AttackReport> {
        let p = snapshot.norm_exponent;
        let predictions = snapshot
            .disclosed
            .par_iter()
            .enumerate()
            .map(|(i, &d)| {
                Ok(PredictionSet {
                    driver_index: i,
                    candidates: self.predict_pnorm(snapshot.zone, snapshot.rider, p, d, net)?,
                })
            })
            .collect::<Vec<_>>()
            // Sequential pass so the reported error is the lowest-index one.
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(AttackReport::from_predictions(
            predictions,
            &snapshot.drivers,
        ))
    }
}

/// Lattice offsets shifted to the rider, kept if in-zone and within
/// `threshold_m` of a road centerline.
pub(crate) fn filter_candidates(
    lattice: &LatticeSolutionSet,
    zone: Zone,
    rider: PlanarPoint,
    net: &RoadNetwork,
    threshold_m: f64,
) -> Vec<PlanarPoint> {
    // Offsets are sorted, so shifted points come out sorted too.
    lattice
        .iter()
        .map(|o| rider + *o)
        .filter(|p| zone.contains(*p) && net.distance_to_road(*p) <= threshold_m)
        .collect()
}

pub fn predict_driver(
    zone: Zone,
    rider: PlanarPoint,
    d: u64,
    net: &RoadNetwork,
) -> Result<Vec<PlanarPoint>> {
    RiderAttack::default().predict(zone, rider, d, net)
}

pub fn run_attack(snapshot: &RideSnapshot, net: &RoadNetwork) -> Result<AttackReport> {
    if snapshot.norm_exponent != 2 {
        return Err(Error::InvalidSnapshot(format!(
            "snapshot disclosed {}-norm values",
            snapshot.norm_exponent
        )));
    }
    RiderAttack::default().run(snapshot, net)
}

pub fn run_attack_pnorm(
    snapshot: &RideSnapshot,
    p: u32,
    net: &RoadNetwork,
) -> Result<AttackReport> {
    check_exponent(p)?;
    if snapshot.norm_exponent != p {
        return Err(Error::InvalidSnapshot(format!(
            "snapshot disclosed {}-norm values, attack expects {p}",
            snapshot.norm_exponent
        )));
    }
    RiderAttack::default().run(snapshot, net)
}
