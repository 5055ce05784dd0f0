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

//! Ride-matching accuracy under a constant-speed road travel model.
//!
//! The service picks the driver with the smallest squared Euclidean distance
//! (to the true or to the obfuscated location). A trial counts as accurate
//! when that driver's travel time to the rider is within one minute of the
//! fastest driver's.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::harness::{sample_drivers, sample_rider, sample_zone, trial_stream};
use crate::mitigation::{obfuscate, ObfuscationParams};
use crate::roadnet::RoadNetwork;
use crate::seeding::Substream;

pub const DEFAULT_SPEED_MPS: f64 = 8.33;
pub const DEFAULT_DRIVERS: usize = 400;
pub const ACCURACY_WINDOW_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AccessPenalty {
    /// Off-graph distance covered at the travel speed.
    AtTravelSpeed,
    Seconds(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelModel {
    pub speed_mps: f64,
    pub access: AccessPenalty,
}

impl Default for TravelModel {
    fn default() -> Self {
        Self {
            speed_mps: DEFAULT_SPEED_MPS,
            access: AccessPenalty::AtTravelSpeed,
        }
    }
}

impl TravelModel {
    pub fn new(speed_mps: f64) -> Result<Self> {
        if !(speed_mps.is_finite() && speed_mps > 0.0) {
            return Err(Error::InvalidParameter(format!("speed {speed_mps}")));
        }
        Ok(Self {
            speed_mps,
            access: AccessPenalty::AtTravelSpeed,
        })
    }

    fn access_seconds(&self, off_graph_m: f64) -> f64 {
        match self.access {
            AccessPenalty::AtTravelSpeed => off_graph_m / self.speed_mps,
            AccessPenalty::Seconds(s) => s,
        }
    }
}

/// Where a point joins the road graph.
#[derive(Debug, Clone, Copy)]
struct Entry {
    segment: usize,
    /// Distance along the segment from its first endpoint.
    along: f64,
    length: f64,
    off_graph: f64,
}

fn entry(net: &RoadNetwork, p: PlanarPoint) -> Entry {
    let (x, y) = p.to_f64();
    let near = net.nearest(x, y);
    let length = net.segments()[near.segment].length();
    Entry {
        segment: near.segment,
        along: near.t * length,
        length,
        off_graph: near.distance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest road distances from one point to every graph node.
#[derive(Debug, Clone)]
pub struct RouteField<'a> {
    net: &'a RoadNetwork,
    source: Entry,
    dist: Vec<f64>,
}

impl<'a> RouteField<'a> {
    pub fn from_point(net: &'a RoadNetwork, from: PlanarPoint) -> Self {
        let source = entry(net, from);
        let g = net.graph();
        let mut dist = vec![f64::INFINITY; g.nodes.len()];
        let mut heap = BinaryHeap::new();
        let (u, v) = g.ends[source.segment];
        for (node, d) in [(u, source.along), (v, source.length - source.along)] {
            if d < dist[node as usize] {
                dist[node as usize] = d;
                heap.push(HeapItem(d, node));
            }
        }
        while let Some(HeapItem(d, node)) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            let (lo, hi) = (
                g.offsets[node as usize] as usize,
                g.offsets[node as usize + 1] as usize,
            );
            for &(next, w) in &g.adj[lo..hi] {
                let nd = d + w;
                if nd < dist[next as usize] {
                    dist[next as usize] = nd;
                    heap.push(HeapItem(nd, next));
                }
            }
        }
        Self { net, source, dist }
    }

    /// Road distance in meters between graph entries, excluding access legs.
    fn road_distance(&self, target: &Entry) -> f64 {
        let (u, v) = self.net.graph().ends[target.segment];
        let via_u = self.dist[u as usize] + target.along;
        let via_v = self.dist[v as usize] + (target.length - target.along);
        let mut best = via_u.min(via_v);
        if target.segment == self.source.segment {
            best = best.min((target.along - self.source.along).abs());
        }
        best
    }

    pub fn travel_time(&self, to: PlanarPoint, model: &TravelModel) -> Result<f64> {
        let target = entry(self.net, to);
        let road = self.road_distance(&target);
        if !road.is_finite() {
            return Err(Error::Unreachable);
        }
        Ok(road / model.speed_mps
            + model.access_seconds(self.source.off_graph)
            + model.access_seconds(target.off_graph))
    }
}

/// Seconds to drive between two points along the road graph.
pub fn travel_time(
    net: &RoadNetwork,
    from: PlanarPoint,
    to: PlanarPoint,
    model: &TravelModel,
) -> Result<f64> {
    RouteField::from_point(net, from).travel_time(to, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchingMode {
    /// Select on true driver locations.
    Oride,
    /// Select on obfuscated driver locations.
    Mitigated,
}

impl std::str::FromStr for MatchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oride" => Ok(MatchingMode::Oride),
            "mitigated" => Ok(MatchingMode::Mitigated),
            other => Err(Error::InvalidParameter(format!(
                "unknown matching mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyConfig {
    pub zone_side_m: u64,
    pub drivers: usize,
    pub radius_m: f64,
    pub trials: u32,
    pub seed: u64,
    pub model: TravelModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTrial {
    pub trial: u32,
    pub selected: usize,
    pub fastest: usize,
    pub t_selected_s: f64,
    pub t_fastest_s: f64,
    pub within_one_minute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub trials: Vec<AccuracyTrial>,
    pub within_one_minute_pct: f64,
}

impl AccuracyReport {
    pub fn from_trials(trials: Vec<AccuracyTrial>) -> Self {
        let hits = trials.iter().filter(|t| t.within_one_minute).count();
        let within_one_minute_pct = if trials.is_empty() {
            0.0
        } else {
            (100 * hits) as f64 / trials.len() as f64
        };
        Self {
            trials,
            within_one_minute_pct,
        }
    }
}

pub fn evaluate_accuracy(
    net: &RoadNetwork,
    config: &AccuracyConfig,
    mode: MatchingMode,
) -> Result<AccuracyReport> {
    if config.trials == 0 || config.drivers == 0 {
        return Err(Error::InvalidParameter(
            "need at least one trial and one driver".into(),
        ));
    }
    let params = ObfuscationParams::new(config.radius_m)?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            accuracy_trial(
                net,
                config,
                mode,
                &params,
                &trial_stream(config.seed, config.zone_side_m, t),
                t,
            )
        })
        .collect::<Vec<_>>()
        // Sequential pass so the reported error is the lowest-index one.
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyReport::from_trials(trials))
}

fn accuracy_trial(
    net: &RoadNetwork,
    config: &AccuracyConfig,
    mode: MatchingMode,
    params: &ObfuscationParams,
    stream: &Substream,
    trial: u32,
) -> Result<AccuracyTrial> {
    let zone = sample_zone(net, config.zone_side_m, 0, &mut stream.named("zone").rng())?;
    let rider = sample_rider(zone, &mut stream.named("rider").rng());
    let drivers = sample_drivers(net, zone, stream, config.drivers)?;
    let disclosed: Vec<PlanarPoint> = match mode {
        MatchingMode::Oride => drivers.clone(),
        MatchingMode::Mitigated => {
            let mut rng = stream.named("obfuscate").rng();
            drivers
                .iter()
                .map(|d| obfuscate(*d, params, &mut rng))
                .collect()
        }
    };
    // min_by_key keeps the first minimum: ties go to the lowest index.
    let selected = disclosed
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| rider.squared_distance(**p))
        .map(|(i, _)| i)
        .expect("at least one driver");

    let field = RouteField::from_point(net, rider);
    let times: Vec<f64> = drivers
        .iter()
        .map(|d| {
            field
                .travel_time(*d, &config.model)
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let (fastest, t_fastest) =
        times
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, t)| if t < acc.1 { (i, t) } else { acc },
            );
    if !t_fastest.is_finite() {
        return Err(Error::Unreachable);
    }
    let t_selected = times[selected];
    Ok(AccuracyTrial {
        trial,
        selected,
        fastest,
        t_selected_s: t_selected,
        t_fastest_s: t_fastest,
        within_one_minute: (t_selected - t_fastest).abs() <= ACCURACY_WINDOW_S,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::{generate_manhattan_grid, RoadSegment};

    fn p(x: i64, y: i64) -> PlanarPoint {
        PlanarPoint::new(x, y)
    }

    #[test]
    fn straight_road() {
        let net = RoadNetwork::build(vec![RoadSegment::new("r", p(0, 0), p(1000, 0))]).unwrap();
        let m = TravelModel::new(10.0).unwrap();
        assert_eq!(travel_time(&net, p(0, 0), p(1000, 0), &m).unwrap(), 100.0);
        assert_eq!(travel_time(&net, p(300, 0), p(300, 0), &m).unwrap(), 0.0);
        // Off-graph by 20 m on both ends.
        let t = travel_time(&net, p(300, 20), p(300, 20), &m).unwrap();
        assert!(t <= 2.0 * 20.0 / 10.0 + 1e-12);
    }

    #[test]
    fn routes_around_the_block() {
        let net = RoadNetwork::build(generate_manhattan_grid(100, 1, 1, p(0, 0)).unwrap()).unwrap();
        let m = TravelModel::new(1.0).unwrap();
        assert_eq!(travel_time(&net, p(50, 0), p(50, 100), &m).unwrap(), 200.0);
        assert_eq!(travel_time(&net, p(0, 0), p(100, 100), &m).unwrap(), 200.0);
    }

    #[test]
    fn symmetric() {
        let net = RoadNetwork::build(generate_manhattan_grid(70, 4, 5, p(0, 0)).unwrap()).unwrap();
        let m = TravelModel::default();
        for (a, b) in [
            (p(13, 40), p(300, 222)),
            (p(-50, -50), p(400, 500)),
            (p(70, 70), p(71, 70)),
        ] {
            let ab = travel_time(&net, a, b, &m).unwrap();
            let ba = travel_time(&net, b, a, &m).unwrap();
            assert!((ab - ba).abs() < 1e-9, "{ab} vs {ba}");
        }
    }

    #[test]
    fn disconnected_components() {
        let net = RoadNetwork::build(vec![
            RoadSegment::new("a", p(0, 0), p(100, 0)),
            RoadSegment::new("b", p(0, 500), p(100, 500)),
        ])
        .unwrap();
        assert!(matches!(
            travel_time(&net, p(10, 0), p(10, 500), &TravelModel::default()),
            Err(Error::Unreachable)
        ));
    }

    #[test]
    fn single_driver_is_always_accurate() {
        let net =
            RoadNetwork::build(generate_manhattan_grid(100, 10, 10, p(0, 0)).unwrap()).unwrap();
        let cfg = AccuracyConfig {
            zone_side_m: 500,
            drivers: 1,
            radius_m: 50.0,
            trials: 10,
            seed: 1,
            model: TravelModel::default(),
        };
        for mode in [MatchingMode::Oride, MatchingMode::Mitigated] {
            assert_eq!(
                evaluate_accuracy(&net, &cfg, mode)
                    .unwrap()
                    .within_one_minute_pct,
                100.0
            );
        }
    }
}
