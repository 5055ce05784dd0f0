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

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

use super::{RoadNetwork, Zone, ON_ROAD_THRESHOLD_M};

pub const MAX_SAMPLE_ATTEMPTS: u64 = 1_000_000;

/// Length-weighted sampler over the parts of the network inside one zone.
#[derive(Debug, Clone)]
pub struct RoadSampler<'a> {
    net: &'a RoadNetwork,
    zone: Zone,
    pieces: Vec<((f64, f64), (f64, f64))>,
    weights: WeightedIndex<f64>,
    total_length: f64,
}

impl<'a> RoadSampler<'a> {
    pub fn new(net: &'a RoadNetwork, zone: Zone) -> Result<Self> {
        let min = zone.min_corner.to_f64();
        let max = zone.max_corner().to_f64();
        let mut pieces = Vec::new();
        let mut lengths = Vec::new();
        for i in net.segments_near_rect(min, max) {
            let s = &net.segments()[i];
            if let Some((p, q)) = clip_to_rect(s.a.to_f64(), s.b.to_f64(), min, max) {
                let len = ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt();
                if len > 0.0 {
                    pieces.push((p, q));
                    lengths.push(len);
                }
            }
        }
        let total_length = lengths.iter().sum();
        let weights =
            WeightedIndex::new(&lengths).map_err(|_| Error::NoRoadInZone { attempts: 0 })?;
        Ok(Self {
            net,
            zone,
            pieces,
            weights,
            total_length,
        })
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    /// Total road length inside the zone, in meters.
    pub fn road_length(&self) -> f64 {
        self.total_length
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PlanarPoint> {
        for _ in 0..MAX_SAMPLE_ATTEMPTS {
            let (p, q) = self.pieces[self.weights.sample(rng)];
            let t: f64 = rng.random();
            let x = p.0 + t * (q.0 - p.0);
            let y = p.1 + t * (q.1 - p.1);
            let cand = PlanarPoint::new(x.round() as i64, y.round() as i64);
            if self.zone.contains(cand) && self.net.is_on_road(cand, ON_ROAD_THRESHOLD_M) {
                return Ok(cand);
            }
        }
        Err(Error::NoRoadInZone {
            attempts: MAX_SAMPLE_ATTEMPTS,
        })
    }
}

/// One integer on-road point inside `zone`, length-weighted over the roads.
pub fn sample_on_road<R: Rng + ?Sized>(
    net: &RoadNetwork,
    zone: Zone,
    rng: &mut R,
) -> Result<PlanarPoint> {
    RoadSampler::new(net, zone)?.sample(rng)
}

/// Liang-Barsky clip of segment `a`-`b` against a closed rectangle.
fn clip_to_rect(
    a: (f64, f64),
    b: (f64, f64),
    min: (f64, f64),
    max: (f64, f64),
) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, a.0 - min.0),
        (dx, max.0 - a.0),
        (-dy, a.1 - min.1),
        (dy, max.1 - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (a.0 + t0 * dx, a.1 + t0 * dy),
        (a.0 + t1 * dx, a.1 + t1 * dy),
    ))
}
