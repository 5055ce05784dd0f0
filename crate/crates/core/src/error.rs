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

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice parameter {n} exceeds the configured bound {max}")]
    ParameterTooLarge { n: u64, max: u64 },

    #[error("norm exponent {0} is not a positive even integer")]
    InvalidExponent(u32),

    #[error("latitude {0}° is outside the UTM band [-80°, 84°]")]
    OutOfBand(f64),

    #[error("invalid geodetic coordinate ({lat}, {lon})")]
    InvalidGeoPoint { lat: f64, lon: f64 },

    #[error("planar point is outside the valid range of UTM zone {zone}")]
    OutOfRange { zone: u8 },

    #[error("invalid UTM zone {0}")]
    InvalidZone(u8),

    #[error("road network has no segments")]
    EmptyNetwork,

    #[error("duplicate road segment id `{0}`")]
    DuplicateSegmentId(String),

    #[error("degenerate road segment `{0}` (zero length)")]
    DegenerateSegment(String),

    #[error("no road inside zone after {attempts} attempts")]
    NoRoadInZone { attempts: u64 },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("input spans UTM zones {first} and {second}")]
    MixedUtmZones { first: u8, second: u8 },

    #[error("no path between the two locations on the road graph")]
    Unreachable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ride snapshot is malformed: {0}")]
    InvalidSnapshot(String),

    #[error("zone side {side} m does not fit map extent {extent} m")]
    ZoneTooLarge { side: u64, extent: u64 },

    #[error("no polynomial in the model explains the outputs")]
    Inconsistent,

    #[error("more than {cap} consistent explanations")]
    AmbiguityLimitExceeded { cap: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
