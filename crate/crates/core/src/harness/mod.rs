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

//! Experiment orchestration: seeded scene sampling, the per-trial pipelines,
//! parameter sweeps and their CSV reports.

mod config;
mod experiments;
mod report;
mod sweep;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::roadnet::{RoadNetwork, RoadSampler, Zone};
use crate::seeding::Substream;

pub use config::{
    canonical_key, parse_pairs, ExperimentConfig, Pipeline, RoadSource, DEFAULT_TRIALS,
    DEFAULT_ZONE_SIDES_M,
};
pub use experiments::{run_attack_experiment, AttackExperiment, AttackTrial};
pub use report::{
    read_trial_records, sibling_paths, write_accuracy_csv, write_attack_csv, write_mitigation_csv,
    write_polyrecover_csv, write_sweep_reports, AggregateRow, TimingRecord, TrialRecord,
};
pub use sweep::{aggregate, run_sweep, run_sweep_on, SweepReport};

/// Zone placements tried before giving up on finding road.
pub const MAX_ZONE_ATTEMPTS: u64 = 1000;

/// The stream for one trial of one zone size. Every experiment addresses
/// trials this way, so runs that differ only in the pipeline see the same
/// zones, riders and drivers.
pub fn trial_stream(master_seed: u64, zone_side_m: u64, trial: u32) -> Substream {
    Substream::root(master_seed)
        .child("side", zone_side_m)
        .child("trial", trial as u64)
}

/// Uniformly placed square zone of side `side_m` inside the network's
/// bounding box, retried until the zone shrunk by `margin` contains road.
pub fn sample_zone<R: Rng + ?Sized>(
    net: &RoadNetwork,
    side_m: u64,
    margin: u64,
    rng: &mut R,
) -> Result<Zone> {
    let (min, max) = net.bounding_box();
    let ext_x = (max.x - min.x) as u64;
    let ext_y = (max.y - min.y) as u64;
    let extent = ext_x.max(ext_y);
    if side_m == 0 {
        return Err(Error::InvalidParameter("zone side must be positive".into()));
    }
    if side_m > extent {
        return Err(Error::ZoneTooLarge {
            side: side_m,
            extent,
        });
    }
    // An axis narrower than the zone is covered entirely.
    let range = |lo: i64, hi: i64| {
        let s = side_m as i64;
        if hi - lo >= s {
            (lo, hi - s)
        } else {
            (hi - s, lo)
        }
    };
    let (x0, x1) = range(min.x, max.x);
    let (y0, y1) = range(min.y, max.y);
    for _ in 0..MAX_ZONE_ATTEMPTS {
        let corner = PlanarPoint::new(rng.random_range(x0..=x1), rng.random_range(y0..=y1));
        let zone = Zone::new(corner, side_m)?;
        let Some(region) = zone.inset(margin) else {
            return Err(Error::InvalidParameter(format!(
                "margin {margin} m leaves nothing of a {side_m} m zone"
            )));
        };
        if RoadSampler::new(net, region).is_ok() {
            return Ok(zone);
        }
    }
    Err(Error::NoRoadInZone {
        attempts: MAX_ZONE_ATTEMPTS,
    })
}

/// Uniform integer point of the closed zone.
pub fn sample_rider<R: Rng + ?Sized>(zone: Zone, rng: &mut R) -> PlanarPoint {
    let s = zone.side_m as i64;
    PlanarPoint::new(
        zone.min_corner.x + rng.random_range(0..=s),
        zone.min_corner.y + rng.random_range(0..=s),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialScene {
    pub zone: Zone,
    pub rider: PlanarPoint,
    pub driver: PlanarPoint,
}

/// Zone, rider and one on-road driver, each from its own named substream.
/// The driver is sampled at least `driver_margin` meters inside the zone.
pub fn sample_scene(
    net: &RoadNetwork,
    side_m: u64,
    driver_margin: u64,
    stream: &Substream,
) -> Result<TrialScene> {
    let zone = sample_zone(net, side_m, driver_margin, &mut stream.named("zone").rng())?;
    let rider = sample_rider(zone, &mut stream.named("rider").rng());
    let region = zone.inset(driver_margin).expect("checked by sample_zone");
    let driver = RoadSampler::new(net, region)?.sample(&mut stream.child("driver", 0).rng())?;
    Ok(TrialScene {
        zone,
        rider,
        driver,
    })
}

/// `n` on-road drivers in `region`; driver `i` uses substream `driver/i`.
pub fn sample_drivers(
    net: &RoadNetwork,
    region: Zone,
    stream: &Substream,
    n: usize,
) -> Result<Vec<PlanarPoint>> {
    let sampler = RoadSampler::new(net, region)?;
    (0..n)
        .map(|i| sampler.sample(&mut stream.child("driver", i as u64).rng()))
        .collect()
}
