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

use crate::geometry::PlanarPoint;

use super::{point_segment_distance, NearestRoad, RoadSegment};

const MAX_CELLS: usize = 1 << 22;

/// Uniform grid over the network bounding box. Each cell lists the segments
/// passing within half a cell diagonal of its center, which is a superset of
/// the segments crossing it, so query results are exact.
#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: (f64, f64),
    cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    pub(crate) fn build(
        segments: &[RoadSegment],
        min: PlanarPoint,
        max: PlanarPoint,
        cell_size: f64,
    ) -> Self {
        let w = (max.x - min.x) as f64;
        let h = (max.y - min.y) as f64;
        let mut cell = cell_size;
        let dims = |c: f64| ((w / c).floor() as usize + 1, (h / c).floor() as usize + 1);
        while {
            let (nx, ny) = dims(cell);
            nx.saturating_mul(ny) > MAX_CELLS
        } {
            cell *= 2.0;
        }
        let (nx, ny) = dims(cell);
        let origin = min.to_f64();

        let half_diag = cell * std::f64::consts::FRAC_1_SQRT_2;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); nx * ny];
        for (i, s) in segments.iter().enumerate() {
            let (ax, ay) = s.a.to_f64();
            let (bx, by) = s.b.to_f64();
            let cx0 = ((ax.min(bx) - origin.0) / cell).floor() as usize;
            let cx1 = (((ax.max(bx) - origin.0) / cell).floor() as usize).min(nx - 1);
            let cy0 = ((ay.min(by) - origin.1) / cell).floor() as usize;
            let cy1 = (((ay.max(by) - origin.1) / cell).floor() as usize).min(ny - 1);
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    let mx = origin.0 + (cx as f64 + 0.5) * cell;
                    let my = origin.1 + (cy as f64 + 0.5) * cell;
                    let (_, _, d) = point_segment_distance(s.a, s.b, mx, my);
                    if d <= half_diag + 1e-9 {
                        buckets[cy * nx + cx].push(i as u32);
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(nx * ny + 1);
        let mut items = Vec::new();
        offsets.push(0);
        for b in buckets {
            items.extend(b);
            offsets.push(items.len() as u32);
        }
        GridIndex {
            origin,
            cell,
            nx,
            ny,
            offsets,
            items,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let k = cy * self.nx + cx;
        &self.items[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }

    fn clamp_cell(&self, x: f64, y: f64) -> (usize, usize) {
        let fx = ((x - self.origin.0) / self.cell).floor();
        let fy = ((y - self.origin.1) / self.cell).floor();
        let cx = fx.clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = fy.clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    /// Exact nearest segment; ties go to the lowest segment index.
    pub(crate) fn nearest(&self, segments: &[RoadSegment], x: f64, y: f64) -> NearestRoad {
        let (cx, cy) = self.clamp_cell(x, y);
        let mut best: Option<NearestRoad> = None;
        let max_ring = self.nx.max(self.ny);
        let consider = |i: u32, best: &mut Option<NearestRoad>| {
            let s = &segments[i as usize];
            let (t, point, distance) = point_segment_distance(s.a, s.b, x, y);
            let better = match best {
                None => true,
                Some(b) => {
                    distance < b.distance || (distance == b.distance && (i as usize) < b.segment)
                }
            };
            if better {
                *best = Some(NearestRoad {
                    segment: i as usize,
                    t,
                    point,
                    distance,
                });
            }
        };
        for ring in 0..=max_ring {
            let r = ring as isize;
            let (cx, cy) = (cx as isize, cy as isize);
            for dy in -r..=r {
                let ty = cy + dy;
                if ty < 0 || ty >= self.ny as isize {
                    continue;
                }
                let on_edge_row = dy.abs() == r;
                let step = if on_edge_row { 1 } else { (2 * r).max(1) };
                let mut dx = -r;
                while dx <= r {
                    let tx = cx + dx;
                    if tx >= 0 && tx < self.nx as isize {
                        for &i in self.bucket(tx as usize, ty as usize) {
                            consider(i, &mut best);
                        }
                    }
                    dx += step;
                }
            }
            // Unvisited cells are at least `ring` whole cells away; strict so
            // equal-distance ties are all seen.
            if let Some(b) = best {
                if b.distance < ring as f64 * self.cell {
                    break;
                }
            }
        }
        best.unwrap_or_else(|| {
            // Unreachable for a non-empty network; fall back to a scan.
            let mut b = None;
            for i in 0..segments.len() {
                consider(i as u32, &mut b);
            }
            b.expect("road network has at least one segment")
        })
    }

    pub(crate) fn segments_in_rect(&self, min: (f64, f64), max: (f64, f64)) -> Vec<usize> {
        let (cx0, cy0) = self.clamp_cell(min.0, min.1);
        let (cx1, cy1) = self.clamp_cell(max.0, max.1);
        let mut out: Vec<usize> = Vec::new();
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                out.extend(self.bucket(cx, cy).iter().map(|&i| i as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
