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

//! Driver-side location obfuscation and the attack adapted to it.
//!
//! Each driver discloses a random integer point within radius `R` of her true
//! position. The rider can no longer demand that candidates sit on a road,
//! only that some road passes within `R` of them.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::filter_candidates;
use crate::error::{Error, Result};
use crate::geometry::{LatticeEnumerator, PlanarPoint};
use crate::harness::{sample_scene, trial_stream, TrialScene};
use crate::roadnet::{RoadNetwork, Zone, ON_ROAD_THRESHOLD_M};
use crate::seeding::Substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationParams {
    /// Public obfuscation radius `R` in meters.
    pub radius_m: f64,
    /// Extra distance the rider adds to `R` when filtering. Zero gives the
    /// plain road-within-`R` filter.
    pub filter_slack_m: f64,
}

impl ObfuscationParams {
    /// Slack defaults to the on-road threshold, since true positions are only
    /// known to lie within it of a centerline.
    pub fn new(radius_m: f64) -> Result<Self> {
        Self::with_slack(radius_m, ON_ROAD_THRESHOLD_M)
    }

    pub fn with_slack(radius_m: f64, filter_slack_m: f64) -> Result<Self> {
        if !(radius_m.is_finite() && radius_m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "obfuscation radius {radius_m}"
            )));
        }
        if !(filter_slack_m.is_finite() && filter_slack_m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "filter slack {filter_slack_m}"
            )));
        }
        Ok(Self {
            radius_m,
            filter_slack_m,
        })
    }

    pub fn filter_radius(&self) -> f64 {
        self.radius_m + self.filter_slack_m
    }
}

/// A uniformly random integer point of the closed disk of radius `R` around
/// `true_loc`, by rejection from the bounding square. May land off road or
/// outside the zone.
pub fn obfuscate<R: Rng + ?Sized>(
    true_loc: PlanarPoint,
    params: &ObfuscationParams,
    rng: &mut R,
) -> PlanarPoint {
    let r = params.radius_m.floor() as i64;
    if r == 0 {
        return true_loc;
    }
    let r2 = params.radius_m * params.radius_m;
    loop {
        let dx = rng.random_range(-r..=r);
        let dy = rng.random_range(-r..=r);
        if ((dx * dx + dy * dy) as f64) <= r2 {
            return PlanarPoint::new(true_loc.x + dx, true_loc.y + dy);
        }
    }
}

pub fn predict_driver_mitigated(
    zone: Zone,
    rider: PlanarPoint,
    d: u64,
    net: &RoadNetwork,
    params: &ObfuscationParams,
) -> Result<Vec<PlanarPoint>> {
    predict_driver_mitigated_with(&LatticeEnumerator::default(), zone, rider, d, net, params)
}

pub fn predict_driver_mitigated_with(
    enumerator: &LatticeEnumerator,
    zone: Zone,
    rider: PlanarPoint,
    d: u64,
    net: &RoadNetwork,
    params: &ObfuscationParams,
) -> Result<Vec<PlanarPoint>> {
    let lattice = enumerator.circle(d)?;
    Ok(filter_candidates(
        &lattice,
        zone,
        rider,
        net,
        params.filter_radius(),
    ))
}

/// What to do when the obfuscated point leaves the zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EdgePolicy {
    /// Sample drivers at least `ceil(R)` inside the zone so it never happens.
    #[default]
    Pad,
    /// Keep the trial; the zone filter then discards the true candidate.
    Keep,
    /// Drop the trial from the statistics.
    Drop,
}

impl std::str::FromStr for EdgePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pad" => Ok(EdgePolicy::Pad),
            "keep" => Ok(EdgePolicy::Keep),
            "drop" => Ok(EdgePolicy::Drop),
            other => Err(Error::InvalidParameter(format!(
                "unknown edge policy `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationConfig {
    pub zone_side_m: u64,
    pub params: ObfuscationParams,
    pub trials: u32,
    pub seed: u64,
    pub edge_policy: EdgePolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MitigatedTrial {
    pub trial: u32,
    pub zone: Zone,
    pub rider: PlanarPoint,
    pub driver: PlanarPoint,
    pub disclosed_point: PlanarPoint,
    pub candidates: usize,
    /// The disclosed point survived the rider's filter.
    pub hit: bool,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnonymityReport {
    pub trials: Vec<MitigatedTrial>,
    /// `|S'|` for each kept trial, in trial order.
    pub per_driver_candidates: Vec<usize>,
    pub mean_anonymity: f64,
}

impl AnonymityReport {
    pub fn from_trials(trials: Vec<MitigatedTrial>) -> Self {
        let per_driver_candidates: Vec<usize> = trials
            .iter()
            .filter(|t| !t.dropped)
            .map(|t| t.candidates)
            .collect();
        let total: usize = per_driver_candidates.iter().sum();
        let mean_anonymity = if per_driver_candidates.is_empty() {
            0.0
        } else {
            total as f64 / per_driver_candidates.len() as f64
        };
        Self {
            trials,
            per_driver_candidates,
            mean_anonymity,
        }
    }

    /// Standard error of the mean anonymity.
    pub fn standard_error(&self) -> f64 {
        let n = self.per_driver_candidates.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_anonymity;
        let var = self
            .per_driver_candidates
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}

/// Obfuscated-driver trials: random zone, uniform rider, on-road driver who
/// discloses an obfuscated point, then the road-within-`R` attack.
pub fn run_mitigated_experiment(
    net: &RoadNetwork,
    config: &MitigationConfig,
) -> Result<AnonymityReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            mitigated_trial(
                net,
                config,
                &trial_stream(config.seed, config.zone_side_m, t),
                t,
            )
        })
        .collect::<Vec<_>>()
        // Sequential pass so the reported error is the lowest-index one.
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(AnonymityReport::from_trials(trials))
}

pub(crate) fn mitigated_trial(
    net: &RoadNetwork,
    config: &MitigationConfig,
    stream: &Substream,
    trial: u32,
) -> Result<MitigatedTrial> {
    let margin = match config.edge_policy {
        EdgePolicy::Pad => config.params.radius_m.ceil() as u64,
        EdgePolicy::Keep | EdgePolicy::Drop => 0,
    };
    let TrialScene {
        zone,
        rider,
        driver,
    } = sample_scene(net, config.zone_side_m, margin, stream)?;
    let disclosed_point = obfuscate(driver, &config.params, &mut stream.named("obfuscate").rng());
    let dropped = config.edge_policy == EdgePolicy::Drop && !zone.contains(disclosed_point);
    let d = rider.squared_distance(disclosed_point);
    let candidates = predict_driver_mitigated(zone, rider, d, net, &config.params)?;
    Ok(MitigatedTrial {
        trial,
        zone,
        rider,
        driver,
        disclosed_point,
        candidates: candidates.len(),
        hit: candidates.binary_search(&disclosed_point).is_ok(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::RiderAttack;
    use crate::roadnet::{generate_manhattan_grid, RoadSegment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_radius_is_identity() {
        let p = PlanarPoint::new(12, -7);
        let params = ObfuscationParams::new(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(obfuscate(p, &params, &mut rng), p);
        }
    }

    #[test]
    fn obfuscation_stays_in_disk() {
        let p = PlanarPoint::new(1000, 1000);
        let params = ObfuscationParams::new(50.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            assert!(
                obfuscate(p, &params, &mut rng).distance(p)
                    <= 50.0 + std::f64::consts::FRAC_1_SQRT_2
            );
        }
    }

    #[test]
    fn rejects_negative_radius() {
        assert!(ObfuscationParams::new(-1.0).is_err());
        assert!(ObfuscationParams::new(f64::NAN).is_err());
    }

    #[test]
    fn zero_radius_reduces_to_attack() {
        let net =
            RoadNetwork::build(generate_manhattan_grid(10, 6, 6, PlanarPoint::new(0, 0)).unwrap())
                .unwrap();
        let zone = Zone::new(PlanarPoint::new(0, 0), 60).unwrap();
        let plain = RiderAttack::default();
        let strict = RiderAttack::with_threshold(0.0);
        let params = ObfuscationParams::new(0.0).unwrap();
        let bare = ObfuscationParams::with_slack(0.0, 0.0).unwrap();
        for (rx, ry, d) in [(13, 27, 25u64), (30, 30, 100), (5, 5, 65), (0, 0, 3600)] {
            let rider = PlanarPoint::new(rx, ry);
            assert_eq!(
                predict_driver_mitigated(zone, rider, d, &net, &params).unwrap(),
                plain.predict(zone, rider, d, &net).unwrap()
            );
            assert_eq!(
                predict_driver_mitigated(zone, rider, d, &net, &bare).unwrap(),
                strict.predict(zone, rider, d, &net).unwrap()
            );
        }
    }

    #[test]
    fn park_points_are_excluded() {
        // Roads ring a 1 km park; its center is 500 m from any road.
        let c = |x, y| PlanarPoint::new(x, y);
        let net = RoadNetwork::build(vec![
            RoadSegment::new("s", c(0, 0), c(1000, 0)),
            RoadSegment::new("e", c(1000, 0), c(1000, 1000)),
            RoadSegment::new("n", c(1000, 1000), c(0, 1000)),
            RoadSegment::new("w", c(0, 1000), c(0, 0)),
        ])
        .unwrap();
        let zone = Zone::new(c(0, 0), 1000).unwrap();
        let rider = c(500, 400);
        let params = ObfuscationParams::new(50.0).unwrap();
        // Candidates at distance 100: the lattice point (500, 500) sits in the park.
        let s = predict_driver_mitigated(zone, rider, 100 * 100, &net, &params).unwrap();
        assert!(!s.contains(&c(500, 500)));
        assert!(s.is_empty());
        // A point 30 m from the south road survives.
        let s = predict_driver_mitigated(zone, c(500, 130), 100 * 100, &net, &params).unwrap();
        assert!(s.contains(&c(500, 30)));
    }

    #[test]
    fn edge_policy_parses() {
        assert_eq!("pad".parse::<EdgePolicy>().unwrap(), EdgePolicy::Pad);
        assert!("nope".parse::<EdgePolicy>().is_err());
    }
}
