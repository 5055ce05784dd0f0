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

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::projection::{project_in_zone, zone_for_longitude, GeoPoint, Hemisphere};

use super::RoadSegment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoadFormat {
    /// `road_id,x1,y1,x2,y2` in integer meters.
    Csv,
    /// FeatureCollection of (Multi)LineString features in WGS84 lon/lat.
    GeoJson,
}

impl RoadFormat {
    /// `.geojson` and `.json` are GeoJSON; anything else is planar CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("geojson") || e.eq_ignore_ascii_case("json") => {
                RoadFormat::GeoJson
            }
            _ => RoadFormat::Csv,
        }
    }
}

impl FromStr for RoadFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RoadFormat::Csv),
            "geojson" | "json" => Ok(RoadFormat::GeoJson),
            other => Err(Error::InvalidParameter(format!(
                "unknown road format `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Project everything into this zone instead of failing on mixed zones.
    pub pin_zone: Option<(u8, Hemisphere)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub segments: Vec<RoadSegment>,
    /// UTM frame used for geodetic input.
    pub utm: Option<(u8, Hemisphere)>,
}

pub fn ingest(
    path: impl AsRef<Path>,
    format: RoadFormat,
    opts: &IngestOptions,
) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        RoadFormat::Csv => Ok(Ingested {
            segments: parse_planar_csv(BufReader::new(file), &path.display().to_string())?,
            utm: None,
        }),
        RoadFormat::GeoJson => {
            let mut text = String::new();
            BufReader::new(file)
                .read_to_string(&mut text)
                .map_err(|e| Error::io(path, e))?;
            parse_geojson(&text, opts)
        }
    }
}

pub fn read_planar_csv(path: impl AsRef<Path>) -> Result<Vec<RoadSegment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_planar_csv(BufReader::new(file), &path.display().to_string())
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    road_id: String,
    x1: i64,
    y1: i64,
    x2: i64,
    y2: i64,
}

pub(crate) fn parse_planar_csv<R: Read>(reader: R, source: &str) -> Result<Vec<RoadSegment>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(format!("{source}: header"), e))?;
    let expected = ["road_id", "x1", "y1", "x2", "y2"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            format!("{source}: header"),
            format!("expected `{}`", expected.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        // Row 1 is the header.
        let row = row.map_err(|e| Error::parse(format!("{source}: row {}", i + 2), e))?;
        out.push(RoadSegment::new(
            row.road_id,
            PlanarPoint::new(row.x1, row.y1),
            PlanarPoint::new(row.x2, row.y2),
        ));
    }
    Ok(out)
}

pub fn write_planar_csv<W: Write>(writer: W, segments: &[RoadSegment]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in segments {
        wtr.serialize(CsvRow {
            road_id: s.id.clone(),
            x1: s.a.x,
            y1: s.a.y,
            x2: s.b.x,
            y2: s.b.y,
        })?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub(crate) fn parse_geojson(text: &str, opts: &IngestOptions) -> Result<Ingested> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::parse("geojson", e))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::parse(
            "geojson",
            "top level is not a FeatureCollection",
        ));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("geojson", "missing `features` array"))?;

    let mut lines: Vec<(String, Vec<GeoPoint>)> = Vec::new();
    for (fi, f) in features.iter().enumerate() {
        let ctx = || format!("geojson feature {fi}");
        let id = match f
            .get("properties")
            .and_then(|p| p.get("id"))
            .or_else(|| f.get("id"))
        {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => format!("f{fi}"),
        };
        let geom = f
            .get("geometry")
            .ok_or_else(|| Error::parse(ctx(), "missing geometry"))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| Error::parse(ctx(), "missing coordinates"))?;
        match geom.get("type").and_then(Value::as_str) {
            Some("LineString") => lines.push((id, parse_line(coords, &ctx())?)),
            Some("MultiLineString") => {
                let parts = coords
                    .as_array()
                    .ok_or_else(|| Error::parse(ctx(), "coordinates are not an array"))?;
                for (pi, part) in parts.iter().enumerate() {
                    lines.push((format!("{id}.{pi}"), parse_line(part, &ctx())?));
                }
            }
            other => {
                return Err(Error::parse(
                    ctx(),
                    format!("unsupported geometry {other:?}"),
                ))
            }
        }
    }

    let frame = match opts.pin_zone {
        Some(f) => f,
        None => natural_frame(&lines)?,
    };
    let mut segments = Vec::new();
    for (id, pts) in &lines {
        let planar = pts
            .iter()
            .map(|g| project_in_zone(*g, frame.0, frame.1).map(|u| u.planar()))
            .collect::<Result<Vec<_>>>()?;
        let mut k = 0;
        for w in planar.windows(2) {
            if w[0] != w[1] {
                segments.push(RoadSegment::new(format!("{id}:{k}"), w[0], w[1]));
                k += 1;
            }
        }
    }
    Ok(Ingested {
        segments,
        utm: Some(frame),
    })
}

fn parse_line(coords: &Value, ctx: &str) -> Result<Vec<GeoPoint>> {
    let arr = coords
        .as_array()
        .ok_or_else(|| Error::parse(ctx, "coordinates are not an array"))?;
    if arr.len() < 2 {
        return Err(Error::parse(ctx, "line needs at least two positions"));
    }
    arr.iter()
        .map(|pos| {
            let lon = pos.get(0).and_then(Value::as_f64);
            let lat = pos.get(1).and_then(Value::as_f64);
            match (lon, lat) {
                (Some(lon), Some(lat)) => GeoPoint::new(lat, lon).map_err(|e| Error::parse(ctx, e)),
                _ => Err(Error::parse(ctx, format!("bad position {pos}"))),
            }
        })
        .collect()
}

fn natural_frame(lines: &[(String, Vec<GeoPoint>)]) -> Result<(u8, Hemisphere)> {
    let mut zone: Option<u8> = None;
    let mut lat_sum = 0.0;
    let mut count = 0usize;
    for g in lines.iter().flat_map(|(_, pts)| pts) {
        let z = zone_for_longitude(g.longitude_deg);
        match zone {
            None => zone = Some(z),
            Some(first) if first != z => return Err(Error::MixedUtmZones { first, second: z }),
            _ => {}
        }
        lat_sum += g.latitude_deg;
        count += 1;
    }
    let zone = zone.ok_or_else(|| Error::parse("geojson", "no features"))?;
    Ok((zone, Hemisphere::of(lat_sum / count as f64)))
}
