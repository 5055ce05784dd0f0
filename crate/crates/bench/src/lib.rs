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

//! Shared fixtures for the benchmarks.

use driverloc_core::roadnet::generate_manhattan_grid;
use driverloc_core::{PlanarPoint, RoadNetwork};

/// A square street grid with roughly `2 * blocks^2` segments.
pub fn grid_network(spacing_m: u64, blocks: u32) -> RoadNetwork {
    let segments = generate_manhattan_grid(spacing_m, blocks, blocks, PlanarPoint::new(0, 0))
        .expect("valid grid");
    RoadNetwork::build(segments).expect("valid network")
}
