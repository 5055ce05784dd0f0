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

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

use super::RoadSegment;

/// Axis-aligned street grid of `rows x cols` blocks, one segment per block
/// side: `(rows + 1) * cols` horizontal plus `(cols + 1) * rows` vertical.
pub fn generate_manhattan_grid(
    spacing_m: u64,
    rows: u32,
    cols: u32,
    origin: PlanarPoint,
) -> Result<Vec<RoadSegment>> {
    Ok(grid_edges(spacing_m, rows, cols, origin)?
        .into_iter()
        .map(|e| e.segment)
        .collect())
}

struct GridEdge {
    segment: RoadSegment,
    u: usize,
    v: usize,
    /// Row and column of the edge's lower-left node.
    r: u32,
    c: u32,
    horizontal: bool,
}

fn grid_edges(spacing_m: u64, rows: u32, cols: u32, origin: PlanarPoint) -> Result<Vec<GridEdge>> {
    if spacing_m == 0 {
        return Err(Error::InvalidParameter(
            "grid spacing must be positive".into(),
        ));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(
            "grid needs at least one row and column".into(),
        ));
    }
    let s = spacing_m as i64;
    let node = |r: u32, c: u32| (r * (cols + 1) + c) as usize;
    let at = |r: u32, c: u32| PlanarPoint::new(origin.x + c as i64 * s, origin.y + r as i64 * s);
    let mut out = Vec::with_capacity(((rows + 1) * cols + (cols + 1) * rows) as usize);
    for r in 0..=rows {
        for c in 0..cols {
            out.push(GridEdge {
                segment: RoadSegment::new(format!("h{r}_{c}"), at(r, c), at(r, c + 1)),
                u: node(r, c),
                v: node(r, c + 1),
                r,
                c,
                horizontal: true,
            });
        }
    }
    for c in 0..=cols {
        for r in 0..rows {
            out.push(GridEdge {
                segment: RoadSegment::new(format!("v{c}_{r}"), at(r, c), at(r + 1, c)),
                u: node(r, c),
                v: node(r + 1, c),
                r,
                c,
                horizontal: false,
            });
        }
    }
    Ok(out)
}

/// A street grid with some block sides missing, the way real street plans
/// have dead ends, parks and superblocks. A random spanning tree of the grid
/// is always kept, so the result is connected.
///
/// Barriers (rivers, rail lines, freeways) run mid-block every
/// `barrier_every` blocks in both directions and can only be crossed every
/// `crossing_every` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CitySpec {
    pub spacing_m: u64,
    pub rows: u32,
    pub cols: u32,
    pub origin: PlanarPoint,
    /// Share of the non-tree block sides that are dropped, in `[0, 1]`.
    pub removal_fraction: f64,
    pub seed: u64,
    /// Blocks between barrier lines; 0 for none.
    pub barrier_every: u32,
    /// Blocks between crossings of a barrier. Regions a barrier grid would
    /// wall in completely get one extra crossing.
    pub crossing_every: u32,
}

impl CitySpec {
    pub fn new(spacing_m: u64, rows: u32, cols: u32, removal_fraction: f64, seed: u64) -> Self {
        Self {
            spacing_m,
            rows,
            cols,
            origin: PlanarPoint::new(0, 0),
            removal_fraction,
            seed,
            barrier_every: 0,
            crossing_every: 1,
        }
    }

    pub fn with_barriers(mut self, barrier_every: u32, crossing_every: u32) -> Self {
        self.barrier_every = barrier_every;
        self.crossing_every = crossing_every;
        self
    }

    fn blocked(&self, e: &GridEdge) -> bool {
        if self.barrier_every == 0 {
            return false;
        }
        // A horizontal edge from column c crosses the barrier between c and c + 1.
        let (across, along) = if e.horizontal { (e.c, e.r) } else { (e.r, e.c) };
        (across + 1) % self.barrier_every == 0 && along % self.crossing_every != 0
    }
}

pub fn generate_city(spec: &CitySpec) -> Result<Vec<RoadSegment>> {
    if !(0.0..=1.0).contains(&spec.removal_fraction) {
        return Err(Error::InvalidParameter(format!(
            "removal fraction {} outside [0, 1]",
            spec.removal_fraction
        )));
    }
    if spec.barrier_every > 0 && spec.crossing_every == 0 {
        return Err(Error::InvalidParameter(
            "barriers need crossing_every >= 1".into(),
        ));
    }
    let edges = grid_edges(spec.spacing_m, spec.rows, spec.cols, spec.origin)?;
    let n_nodes = ((spec.rows + 1) * (spec.cols + 1)) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Open edges first, then barrier edges: a barrier edge only enters the
    // tree as an extra crossing for a region that would be cut off.
    let (mut order, mut blocked): (Vec<usize>, Vec<usize>) =
        (0..edges.len()).partition(|&i| !spec.blocked(&edges[i]));
    order.shuffle(&mut rng);
    blocked.shuffle(&mut rng);
    let open = order.len();
    order.extend(blocked);

    // Randomised Kruskal picks the tree; everything else is removable.
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut keep = vec![false; edges.len()];
    let mut spare = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let (a, b) = (find(&mut parent, edges[i].u), find(&mut parent, edges[i].v));
        if a != b {
            parent[a] = b;
            keep[i] = true;
        } else if k < open {
            spare.push(i);
        }
    }
    let drop = (spare.len() as f64 * spec.removal_fraction).round() as usize;
    for &i in &spare[drop..] {
        keep[i] = true;
    }
    Ok(edges
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e.segment))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::RoadNetwork;

    #[test]
    fn grid_counts() {
        let o = PlanarPoint::new(0, 0);
        assert_eq!(generate_manhattan_grid(100, 2, 2, o).unwrap().len(), 12);
        assert_eq!(generate_manhattan_grid(100, 1, 1, o).unwrap().len(), 4);
        let big = generate_manhattan_grid(100, 10, 10, o).unwrap();
        assert_eq!(big.len(), 2 * 10 * 11);
        let net = RoadNetwork::build(big).unwrap();
        assert_eq!(net.node_count(), 121);
        assert_eq!(net.edge_count(), 220);
    }

    #[test]
    fn grid_rejects_zero_spacing() {
        assert!(generate_manhattan_grid(0, 2, 2, PlanarPoint::new(0, 0)).is_err());
        assert!(generate_manhattan_grid(10, 0, 2, PlanarPoint::new(0, 0)).is_err());
    }

    #[test]
    fn city_is_deterministic_and_thinned() {
        let spec = CitySpec::new(100, 20, 20, 0.5, 3);
        let a = generate_city(&spec).unwrap();
        let b = generate_city(&spec).unwrap();
        assert_eq!(a, b);
        let full = 2 * 20 * 21;
        let tree = 21 * 21 - 1;
        assert_eq!(
            a.len(),
            tree + (full - tree) - ((full - tree) as f64 * 0.5).round() as usize
        );
    }

    #[test]
    fn barriers_force_detours() {
        use crate::matching::{travel_time, TravelModel};
        // Barrier between block columns 4 and 5, crossings every 10 rows.
        let spec = CitySpec::new(100, 20, 20, 0.0, 1).with_barriers(5, 10);
        let net = RoadNetwork::build(generate_city(&spec).unwrap()).unwrap();
        assert!(net.segments().iter().all(|s| s.id != "h7_4"));
        assert!(net.segments().iter().any(|s| s.id == "h10_4"));
        let model = TravelModel::new(1.0).unwrap();
        let at_crossing = travel_time(
            &net,
            PlanarPoint::new(400, 1000),
            PlanarPoint::new(500, 1000),
            &model,
        )
        .unwrap();
        assert_eq!(at_crossing, 100.0);
        // 100 m apart as the crow flies; the nearest crossing is 300 m away.
        let t = travel_time(
            &net,
            PlanarPoint::new(400, 700),
            PlanarPoint::new(500, 700),
            &model,
        )
        .unwrap();
        assert!(t >= 700.0, "{t}");
    }

    #[test]
    fn walled_in_regions_stay_connected() {
        // Crossings every 16 blocks leave the 8-block cells between them
        // without any of their own.
        let spec = CitySpec::new(50, 40, 40, 0.2, 1).with_barriers(8, 16);
        let net = RoadNetwork::build(generate_city(&spec).unwrap()).unwrap();
        let g = net.graph();
        let mut seen = vec![false; g.nodes.len()];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &(m, _) in
                &g.adj[g.offsets[n as usize] as usize..g.offsets[n as usize + 1] as usize]
            {
                if !seen[m as usize] {
                    seen[m as usize] = true;
                    stack.push(m);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
