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

//! Road ingestion against the projection oracle, and the spatial index
//! against a linear scan.

use std::collections::HashSet;
use std::path::Path;

use proptest::prelude::*;

use driverloc_core::roadnet::{
    ingest, point_segment_distance, write_planar_csv, IngestOptions, RoadFormat, RoadSegment,
};
use driverloc_core::{Hemisphere, PlanarPoint, RoadNetwork};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn check_against_oracle(geojson: &str, oracle: &str, zone: u8) -> Vec<RoadSegment> {
    let ing = ingest(
        fixture(geojson),
        RoadFormat::GeoJson,
        &IngestOptions::default(),
    )
    .unwrap();
    assert_eq!(ing.utm, Some((zone, Hemisphere::North)));
    let mut reader = csv::Reader::from_path(fixture(oracle)).unwrap();
    let oracle: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    let vertices: HashSet<PlanarPoint> = ing.segments.iter().flat_map(|s| [s.a, s.b]).collect();
    for (e, n) in oracle {
        let v = PlanarPoint::new(e.round() as i64, n.round() as i64);
        assert!(vertices.contains(&v), "no vertex at ({e}, {n})");
    }
    ing.segments
}

#[test]
fn synthetic_geojson_matches_oracle() {
    let segs = check_against_oracle("midtown.geojson", "midtown_utm_oracle.csv", 18);
    // 6 avenues x 21 streets; every intersection lies on two linestrings.
    assert_eq!(segs.len(), 2 * 126 - 27);
}

#[test]
fn osm_extract_matches_oracle() {
    let segs = check_against_oracle("helsinki.geojson", "helsinki_utm_oracle.csv", 35);
    RoadNetwork::build(segs).unwrap();
}

#[test]
fn planar_csv_round_trips() {
    let ing = ingest(
        fixture("midtown.geojson"),
        RoadFormat::GeoJson,
        &IngestOptions::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roads.csv");
    write_planar_csv(std::fs::File::create(&path).unwrap(), &ing.segments).unwrap();
    let back = ingest(&path, RoadFormat::Csv, &IngestOptions::default()).unwrap();
    assert_eq!(back.segments, ing.segments);
    assert_eq!(back.utm, None);
}

#[test]
fn pinned_zone_reprojects() {
    let opts = IngestOptions {
        pin_zone: Some((17, Hemisphere::North)),
    };
    let ing = ingest(fixture("midtown.geojson"), RoadFormat::GeoJson, &opts).unwrap();
    assert_eq!(ing.utm, Some((17, Hemisphere::North)));
    // One zone west the easting sits well past the false easting.
    assert!(ing.segments.iter().all(|s| s.a.x > 1_000_000));
}

fn segments() -> impl Strategy<Value = Vec<RoadSegment>> {
    prop::collection::vec((0i64..2000, 0i64..2000, -300i64..300, -300i64..300), 1..40).prop_map(
        |v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (x, y, dx, dy))| {
                    let b = if (dx, dy) == (0, 0) {
                        (x + 1, y)
                    } else {
                        (x + dx, y + dy)
                    };
                    RoadSegment::new(
                        format!("s{i}"),
                        PlanarPoint::new(x, y),
                        PlanarPoint::new(b.0, b.1),
                    )
                })
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_agrees_with_linear_scan(
        segs in segments(),
        cell in prop::sample::select(vec![10.0, 97.0, 250.0, 5000.0]),
        queries in prop::collection::vec((-500.0f64..2500.0, -500.0f64..2500.0), 20),
    ) {
        let net = RoadNetwork::build_with_cell_size(segs.clone(), cell).unwrap();
        for (x, y) in queries {
            let brute = segs
                .iter()
                .map(|s| point_segment_distance(s.a, s.b, x, y).2)
                .fold(f64::INFINITY, f64::min);
            let got = net.distance_to_road_f64(x, y);
            prop_assert!((got - brute).abs() < 1e-9, "{got} vs {brute} at ({x}, {y})");
            prop_assert_eq!(net.is_on_road_f64(x, y, 3.0), brute <= 3.0);
        }
    }
}
