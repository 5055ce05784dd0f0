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

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::RiderAttack;
use crate::error::{Error, Result};
use crate::geometry::{check_exponent, PlanarPoint};
use crate::matching::{TravelModel, DEFAULT_DRIVERS, DEFAULT_SPEED_MPS};
use crate::mitigation::EdgePolicy;
use crate::roadnet::{
    generate_city, generate_manhattan_grid, ingest, CitySpec, IngestOptions, RoadFormat,
    RoadNetwork, DEFAULT_CELL_SIZE_M, ON_ROAD_THRESHOLD_M,
};

/// Square roots of 1, 2, 4, 9, 25, 100, 400 and 900 km².
pub const DEFAULT_ZONE_SIDES_M: [u64; 8] = [1000, 1414, 2000, 3000, 5000, 10000, 20000, 30000];
pub const DEFAULT_TRIALS: u32 = 30;

/// Where the road network comes from.
///
/// Textual forms: a file path (`.geojson`/`.json` read as GeoJSON, anything
/// else as planar CSV), `grid:SPACING:ROWSxCOLS`, or
/// `city:SPACING:ROWSxCOLS:REMOVAL:SEED[:BARRIER:CROSSING]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RoadSource {
    File {
        path: PathBuf,
        format: RoadFormat,
    },
    Grid {
        spacing_m: u64,
        rows: u32,
        cols: u32,
    },
    City(CitySpec),
}

fn parse_dims(s: &str) -> Result<(u32, u32)> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| Error::parse("road_source", format!("expected ROWSxCOLS, got `{s}`")))?;
    Ok((parse_num(r, "rows")?, parse_num(c, "cols")?))
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(what, format!("invalid value `{s}`")))
}

impl FromStr for RoadSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("grid:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [spacing, dims] = parts[..] else {
                return Err(Error::parse(
                    "road_source",
                    "expected grid:SPACING:ROWSxCOLS",
                ));
            };
            let (rows, cols) = parse_dims(dims)?;
            return Ok(RoadSource::Grid {
                spacing_m: parse_num(spacing, "spacing")?,
                rows,
                cols,
            });
        }
        if let Some(rest) = s.strip_prefix("city:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let (spacing, dims, removal, seed, barriers) = match parts[..] {
                [a, b, c, d] => (a, b, c, d, None),
                [a, b, c, d, e, f] => (a, b, c, d, Some((e, f))),
                _ => {
                    return Err(Error::parse(
                        "road_source",
                        "expected city:SPACING:ROWSxCOLS:REMOVAL:SEED[:BARRIER:CROSSING]",
                    ))
                }
            };
            let (rows, cols) = parse_dims(dims)?;
            let mut spec = CitySpec::new(
                parse_num(spacing, "spacing")?,
                rows,
                cols,
                parse_num(removal, "removal")?,
                parse_num(seed, "seed")?,
            );
            if let Some((b, c)) = barriers {
                spec = spec.with_barriers(parse_num(b, "barrier")?, parse_num(c, "crossing")?);
            }
            return Ok(RoadSource::City(spec));
        }
        if s.is_empty() {
            return Err(Error::parse("road_source", "empty"));
        }
        let path = PathBuf::from(s);
        let format = RoadFormat::from_path(&path);
        Ok(RoadSource::File { path, format })
    }
}

impl fmt::Display for RoadSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoadSource::File { path, .. } => write!(f, "{}", path.display()),
            RoadSource::Grid {
                spacing_m,
                rows,
                cols,
            } => write!(f, "grid:{spacing_m}:{rows}x{cols}"),
            RoadSource::City(c) => {
                write!(
                    f,
                    "city:{}:{}x{}:{}:{}",
                    c.spacing_m, c.rows, c.cols, c.removal_fraction, c.seed
                )?;
                if c.barrier_every > 0 {
                    write!(f, ":{}:{}", c.barrier_every, c.crossing_every)?;
                }
                Ok(())
            }
        }
    }
}

impl RoadSource {
    pub fn load(&self, cell_size_m: f64) -> Result<RoadNetwork> {
        let segments = match self {
            RoadSource::File { path, format } => {
                ingest(path, *format, &IngestOptions::default())?.segments
            }
            RoadSource::Grid {
                spacing_m,
                rows,
                cols,
            } => generate_manhattan_grid(*spacing_m, *rows, *cols, PlanarPoint::new(0, 0))?,
            RoadSource::City(spec) => generate_city(spec)?,
        };
        RoadNetwork::build_with_cell_size(segments, cell_size_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    Attack,
    Mitigated,
    Pnorm,
    Accuracy,
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "attack" => Ok(Pipeline::Attack),
            "mitigated" | "mitigate" => Ok(Pipeline::Mitigated),
            "pnorm" => Ok(Pipeline::Pnorm),
            "accuracy" => Ok(Pipeline::Accuracy),
            other => Err(Error::InvalidParameter(format!(
                "unknown pipeline `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Attack => "attack",
            Pipeline::Mitigated => "mitigated",
            Pipeline::Pnorm => "pnorm",
            Pipeline::Accuracy => "accuracy",
        })
    }
}

/// Everything a sweep depends on. Two equal configs produce byte-identical
/// reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub road_source: RoadSource,
    pub zone_sides_m: Vec<u64>,
    pub trials_per_size: u32,
    pub pipeline: Pipeline,
    pub obfuscation_radius_m: Option<f64>,
    pub pnorm_p: Option<u32>,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub drivers: usize,
    pub speed_mps: f64,
    pub on_road_threshold_m: f64,
    pub filter_slack_m: f64,
    pub edge_policy: EdgePolicy,
    pub cell_size_m: f64,
    /// Pins the rider instead of sampling it; used to replay fixed scenes.
    pub fixed_rider: Option<PlanarPoint>,
    pub fixed_driver: Option<PlanarPoint>,
}

impl ExperimentConfig {
    pub fn new(road_source: RoadSource) -> Self {
        Self {
            road_source,
            zone_sides_m: DEFAULT_ZONE_SIDES_M.to_vec(),
            trials_per_size: DEFAULT_TRIALS,
            pipeline: Pipeline::Attack,
            obfuscation_radius_m: None,
            pnorm_p: None,
            master_seed: 0,
            output_path: None,
            drivers: DEFAULT_DRIVERS,
            speed_mps: DEFAULT_SPEED_MPS,
            on_road_threshold_m: ON_ROAD_THRESHOLD_M,
            filter_slack_m: ON_ROAD_THRESHOLD_M,
            edge_policy: EdgePolicy::Pad,
            cell_size_m: DEFAULT_CELL_SIZE_M,
            fixed_rider: None,
            fixed_driver: None,
        }
    }

    /// Reads a flat `key = value` file. Blank lines and `#` comments are
    /// skipped; `road_source` is required.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let source = pairs
            .iter()
            .rev()
            .find(|(k, _)| canonical_key(k) == "road_source")
            .ok_or_else(|| Error::parse("config", "missing road_source"))?;
        let mut cfg = Self::new(source.1.parse()?);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key by name; CLI flags go through here too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let opt = |v: &str| v.is_empty() || v == "none";
        let canonical = canonical_key(key);
        let key = canonical.as_str();
        match key {
            "road_source" => self.road_source = value.parse()?,
            "zone_sides_m" => {
                self.zone_sides_m = value
                    .split(',')
                    .map(|s| parse_num(s, key))
                    .collect::<Result<Vec<u64>>>()?
            }
            "trials_per_size" => self.trials_per_size = parse_num(value, key)?,
            "pipeline" => self.pipeline = value.parse()?,
            "obfuscation_radius_m" => {
                self.obfuscation_radius_m = if opt(value) {
                    None
                } else {
                    Some(parse_num(value, key)?)
                }
            }
            "pnorm_p" => {
                self.pnorm_p = if opt(value) {
                    None
                } else {
                    Some(parse_num(value, key)?)
                }
            }
            "master_seed" => self.master_seed = parse_num(value, key)?,
            "output_path" => {
                self.output_path = if opt(value) {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "drivers" => self.drivers = parse_num(value, key)?,
            "speed_mps" => self.speed_mps = parse_num(value, key)?,
            "on_road_threshold_m" => self.on_road_threshold_m = parse_num(value, key)?,
            "filter_slack_m" => self.filter_slack_m = parse_num(value, key)?,
            "edge_policy" => self.edge_policy = value.parse()?,
            "cell_size_m" => self.cell_size_m = parse_num(value, key)?,
            "fixed_rider" => {
                self.fixed_rider = if opt(value) {
                    None
                } else {
                    Some(parse_point(value)?)
                }
            }
            "fixed_driver" => {
                self.fixed_driver = if opt(value) {
                    None
                } else {
                    Some(parse_point(value)?)
                }
            }
            other => return Err(Error::parse("config", format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.zone_sides_m.is_empty() || self.zone_sides_m.contains(&0) {
            return Err(Error::InvalidParameter(
                "zone sides must be positive".into(),
            ));
        }
        if self.trials_per_size == 0 {
            return Err(Error::InvalidParameter(
                "trials_per_size must be at least 1".into(),
            ));
        }
        if self.drivers == 0 {
            return Err(Error::InvalidParameter("drivers must be at least 1".into()));
        }
        if let Some(r) = self.obfuscation_radius_m {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidParameter(format!("obfuscation radius {r}")));
            }
        }
        if self.pipeline == Pipeline::Mitigated && self.obfuscation_radius_m.is_none() {
            return Err(Error::InvalidParameter(
                "mitigated pipeline needs obfuscation_radius_m".into(),
            ));
        }
        if self.pipeline == Pipeline::Pnorm {
            check_exponent(
                self.pnorm_p.ok_or_else(|| {
                    Error::InvalidParameter("pnorm pipeline needs pnorm_p".into())
                })?,
            )?;
        }
        if !(self.on_road_threshold_m.is_finite() && self.on_road_threshold_m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {}",
                self.on_road_threshold_m
            )));
        }
        if !(self.cell_size_m.is_finite() && self.cell_size_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cell size {}",
                self.cell_size_m
            )));
        }
        TravelModel::new(self.speed_mps)?;
        Ok(())
    }

    pub fn attack(&self) -> RiderAttack {
        RiderAttack::with_threshold(self.on_road_threshold_m)
    }

    pub fn travel_model(&self) -> Result<TravelModel> {
        TravelModel::new(self.speed_mps)
    }
}

/// The `key = value` pairs of a flat config text, in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::parse(format!("config line {}", i + 1), "expected key = value")
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Maps CLI flag spellings onto config keys: `--zone-side` and `zone_side`
/// both mean `zone_sides_m`.
pub fn canonical_key(key: &str) -> String {
    let key = key.trim().trim_start_matches("--").replace('-', "_");
    match key.as_str() {
        "seed" => "master_seed",
        "trials" => "trials_per_size",
        "out" => "output_path",
        "radius" => "obfuscation_radius_m",
        "roads" => "road_source",
        "zone_side" | "zone_sides" => "zone_sides_m",
        "pnorm" => "pnorm_p",
        "speed" => "speed_mps",
        "threshold" => "on_road_threshold_m",
        "filter_slack" => "filter_slack_m",
        "rider" => "fixed_rider",
        "driver" => "fixed_driver",
        other => other,
    }
    .to_string()
}

fn parse_point(s: &str) -> Result<PlanarPoint> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::parse("point", format!("expected X,Y, got `{s}`")))?;
    Ok(PlanarPoint::new(parse_num(x, "x")?, parse_num(y, "y")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nroad_source = grid:100:20x20\nzone_sides_m = 1000, 2000\ntrials_per_size = 5\n\
             pipeline = mitigated\nobfuscation_radius_m = 50\nmaster_seed = 7\n",
        )
        .unwrap();
        assert_eq!(
            cfg.road_source,
            RoadSource::Grid {
                spacing_m: 100,
                rows: 20,
                cols: 20
            }
        );
        assert_eq!(cfg.zone_sides_m, vec![1000, 2000]);
        assert_eq!(cfg.trials_per_size, 5);
        assert_eq!(cfg.pipeline, Pipeline::Mitigated);
        assert_eq!(cfg.obfuscation_radius_m, Some(50.0));
        assert_eq!(cfg.master_seed, 7);
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::parse("road_source = roads.csv").unwrap();
        assert_eq!(cfg.zone_sides_m, DEFAULT_ZONE_SIDES_M);
        assert_eq!(cfg.trials_per_size, 30);
        assert!(matches!(
            cfg.road_source,
            RoadSource::File {
                format: RoadFormat::Csv,
                ..
            }
        ));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("zone_sides_m = 100").is_err());
        assert!(ExperimentConfig::parse("road_source = a.csv\nzone_sides_m = 0").is_err());
        assert!(ExperimentConfig::parse("road_source = a.csv\ntrials_per_size = 0").is_err());
        assert!(
            ExperimentConfig::parse("road_source = a.csv\npipeline = pnorm\npnorm_p = 3").is_err()
        );
        assert!(ExperimentConfig::parse("road_source = a.csv\nbogus = 1").is_err());
        assert!(ExperimentConfig::parse("road_source = a.csv\nno equals sign").is_err());
    }

    #[test]
    fn flag_spellings_are_accepted() {
        let cfg = ExperimentConfig::parse(
            "roads = grid:10:2x2\nseed = 5\ntrials = 3\nzone-side = 20\nradius = 10",
        )
        .unwrap();
        assert_eq!(cfg.master_seed, 5);
        assert_eq!(cfg.trials_per_size, 3);
        assert_eq!(cfg.zone_sides_m, vec![20]);
        assert_eq!(cfg.obfuscation_radius_m, Some(10.0));
    }

    #[test]
    fn source_round_trips_through_text() {
        for s in [
            "grid:25:4x6",
            "city:100:30x30:0.25:9",
            "city:50:40x40:0.2:1:6:8",
            "maps/la.geojson",
        ] {
            assert_eq!(s.parse::<RoadSource>().unwrap().to_string(), s);
        }
    }
}
