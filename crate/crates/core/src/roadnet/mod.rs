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

//! Immutable road network: centerline segments, a uniform grid index for
//! exact nearest-road queries, and the endpoint graph used for routing.

mod generate;
mod index;
mod ingest;
mod sample;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

pub use generate::{generate_city, generate_manhattan_grid, CitySpec};
pub use index::GridIndex;
pub use ingest::{ingest, read_planar_csv, write_planar_csv, IngestOptions, Ingested, RoadFormat};
pub use sample::{sample_on_road, RoadSampler, MAX_SAMPLE_ATTEMPTS};

/// Lateral distance from a centerline within which a point counts as on road.
pub const ON_ROAD_THRESHOLD_M: f64 = 3.0;
pub const DEFAULT_CELL_SIZE_M: f64 = 250.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoadSegment {
    pub id: String,
    pub a: PlanarPoint,
    pub b: PlanarPoint,
}

impl RoadSegment {
    pub fn new(id: impl Into<String>, a: PlanarPoint, b: PlanarPoint) -> Self {
        Self {
            id: id.into(),
            a,
            b,
        }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }
}

/// Axis-aligned square with closed boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zone {
    pub min_corner: PlanarPoint,
    pub side_m: u64,
}

impl Zone {
    pub fn new(min_corner: PlanarPoint, side_m: u64) -> Result<Self> {
        if side_m == 0 {
            return Err(Error::InvalidParameter("zone side must be positive".into()));
        }
        Ok(Self { min_corner, side_m })
    }

    pub fn max_corner(&self) -> PlanarPoint {
        let s = self.side_m as i64;
        PlanarPoint::new(self.min_corner.x + s, self.min_corner.y + s)
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        let max = self.max_corner();
        (self.min_corner.x..=max.x).contains(&p.x) && (self.min_corner.y..=max.y).contains(&p.y)
    }

    pub fn contains_f64(&self, x: f64, y: f64) -> bool {
        let max = self.max_corner();
        x >= self.min_corner.x as f64
            && x <= max.x as f64
            && y >= self.min_corner.y as f64
            && y <= max.y as f64
    }

    /// The zone shrunk by `margin` on every side, if anything is left.
    pub fn inset(&self, margin: u64) -> Option<Zone> {
        let side = self.side_m.checked_sub(2 * margin)?;
        if side == 0 {
            return None;
        }
        let m = margin as i64;
        Some(Zone {
            min_corner: PlanarPoint::new(self.min_corner.x + m, self.min_corner.y + m),
            side_m: side,
        })
    }

    pub fn area_km2(&self) -> f64 {
        (self.side_m as f64 / 1000.0).powi(2)
    }
}

/// Closest point of a segment to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestRoad {
    pub segment: usize,
    /// Position along the segment in `[0, 1]`.
    pub t: f64,
    pub point: (f64, f64),
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Graph {
    pub nodes: Vec<PlanarPoint>,
    /// Endpoint node ids per segment.
    pub ends: Vec<(u32, u32)>,
    /// CSR adjacency: neighbours of node `i` are `adj[offsets[i]..offsets[i + 1]]`.
    pub offsets: Vec<u32>,
    pub adj: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
pub struct RoadNetwork {
    segments: Vec<RoadSegment>,
    index: GridIndex,
    graph: Graph,
    min: PlanarPoint,
    max: PlanarPoint,
}

impl RoadNetwork {
    pub fn build(segments: Vec<RoadSegment>) -> Result<Self> {
        Self::build_with_cell_size(segments, DEFAULT_CELL_SIZE_M)
    }

    pub fn build_with_cell_size(mut segments: Vec<RoadSegment>, cell_size_m: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(Error::InvalidParameter(format!("cell size {cell_size_m}")));
        }
        segments.sort_by(|l, r| l.id.cmp(&r.id));
        for w in segments.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::DuplicateSegmentId(w[0].id.clone()));
            }
        }
        let mut min = segments[0].a;
        let mut max = segments[0].a;
        for s in &segments {
            if s.a == s.b {
                return Err(Error::DegenerateSegment(s.id.clone()));
            }
            for p in [s.a, s.b] {
                min = PlanarPoint::new(min.x.min(p.x), min.y.min(p.y));
                max = PlanarPoint::new(max.x.max(p.x), max.y.max(p.y));
            }
        }
        let index = GridIndex::build(&segments, min, max, cell_size_m);
        let graph = build_graph(&segments);
        Ok(Self {
            segments,
            index,
            graph,
            min,
            max,
        })
    }

    /// Segments in canonical (id-sorted) order.
    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn bounding_box(&self) -> (PlanarPoint, PlanarPoint) {
        (self.min, self.max)
    }

    pub fn node_count(&self) -> usize {
        self.graph.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.ends.len()
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub(crate) fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn nearest(&self, x: f64, y: f64) -> NearestRoad {
        self.index.nearest(&self.segments, x, y)
    }

    pub fn distance_to_road(&self, p: PlanarPoint) -> f64 {
        self.distance_to_road_f64(p.x as f64, p.y as f64)
    }

    pub fn distance_to_road_f64(&self, x: f64, y: f64) -> f64 {
        self.nearest(x, y).distance
    }

    pub fn is_on_road(&self, p: PlanarPoint, threshold_m: f64) -> bool {
        self.distance_to_road(p) <= threshold_m
    }

    pub fn is_on_road_f64(&self, x: f64, y: f64, threshold_m: f64) -> bool {
        self.distance_to_road_f64(x, y) <= threshold_m
    }

    /// Whether any road centerline lies within `r_m` of `p`.
    pub fn has_road_within(&self, p: PlanarPoint, r_m: f64) -> bool {
        self.distance_to_road(p) <= r_m
    }

    /// Segment indices whose grid cells overlap the closed rectangle.
    pub(crate) fn segments_near_rect(&self, min: (f64, f64), max: (f64, f64)) -> Vec<usize> {
        self.index.segments_in_rect(min, max)
    }
}

fn build_graph(segments: &[RoadSegment]) -> Graph {
    // Endpoints are integral, so snapping within 0.5 m is coordinate equality.
    let mut ids: HashMap<PlanarPoint, u32> = HashMap::new();
    let mut nodes = Vec::new();
    let mut node = |p: PlanarPoint| -> u32 {
        *ids.entry(p).or_insert_with(|| {
            nodes.push(p);
            (nodes.len() - 1) as u32
        })
    };
    let ends: Vec<(u32, u32)> = segments.iter().map(|s| (node(s.a), node(s.b))).collect();

    let mut degree = vec![0u32; nodes.len() + 1];
    for &(u, v) in &ends {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let mut offsets = vec![0u32; nodes.len() + 1];
    for i in 0..nodes.len() {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    let mut fill = offsets.clone();
    let mut adj = vec![(0u32, 0.0f64); ends.len() * 2];
    for (s, &(u, v)) in segments.iter().zip(&ends) {
        let len = s.length();
        adj[fill[u as usize] as usize] = (v, len);
        fill[u as usize] += 1;
        adj[fill[v as usize] as usize] = (u, len);
        fill[v as usize] += 1;
    }
    Graph {
        nodes,
        ends,
        offsets,
        adj,
    }
}

/// Closest point on segment `a`-`b` to `(x, y)` as `(t, point, distance)`.
pub fn point_segment_distance(
    a: PlanarPoint,
    b: PlanarPoint,
    x: f64,
    y: f64,
) -> (f64, (f64, f64), f64) {
    let (ax, ay) = a.to_f64();
    let (bx, by) = b.to_f64();
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let (px, py) = if t == 0.0 {
        (ax, ay)
    } else if t == 1.0 {
        (bx, by)
    } else {
        (ax + t * dx, ay + t * dy)
    };
    let dist = if t > 0.0 && t < 1.0 {
        // Perpendicular distance from the cross product keeps axis-aligned
        // cases exact.
        ((x - ax) * dy - (y - ay) * dx).abs() / len2.sqrt()
    } else {
        ((x - px).powi(2) + (y - py).powi(2)).sqrt()
    };
    (t, (px, py), dist)
}
