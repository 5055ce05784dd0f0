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

//! WGS84 transverse Mercator (UTM) projection to integer meters.
//!
//! Uses the sixth-order Krüger series in the third flattening, which is
//! accurate to well under a millimetre within a zone, so the only error of
//! note is the final rounding to whole meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;
const SCALE: f64 = 0.9996;
const FALSE_EASTING: f64 = 500_000.0;
const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;
const MAX_ABS_LATITUDE: f64 = 84.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl GeoPoint {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        let ok = latitude_deg.is_finite()
            && longitude_deg.is_finite()
            && (-90.0..=90.0).contains(&latitude_deg)
            && (-180.0..=180.0).contains(&longitude_deg);
        if !ok {
            return Err(Error::InvalidGeoPoint {
                lat: latitude_deg,
                lon: longitude_deg,
            });
        }
        Ok(Self {
            latitude_deg,
            longitude_deg,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hemisphere {
    North,
    South,
}

impl Hemisphere {
    pub fn of(latitude_deg: f64) -> Self {
        if latitude_deg >= 0.0 {
            Hemisphere::North
        } else {
            Hemisphere::South
        }
    }

    fn false_northing(self) -> f64 {
        match self {
            Hemisphere::North => 0.0,
            Hemisphere::South => FALSE_NORTHING_SOUTH,
        }
    }
}

/// Planar coordinates rounded to whole meters, tagged with their UTM zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UtmPoint {
    pub zone: u8,
    pub hemisphere: Hemisphere,
    pub easting_m: i64,
    pub northing_m: i64,
}

impl UtmPoint {
    pub fn planar(&self) -> PlanarPoint {
        PlanarPoint::new(self.easting_m, self.northing_m)
    }
}

/// Standard 6° zone number for a longitude. Regional exceptions (Norway,
/// Svalbard) are not applied.
pub fn zone_for_longitude(longitude_deg: f64) -> u8 {
    let lon = if longitude_deg >= 180.0 {
        longitude_deg - 360.0
    } else {
        longitude_deg
    };
    let z = ((lon + 180.0) / 6.0).floor() as i32 + 1;
    z.clamp(1, 60) as u8
}

pub fn central_meridian(zone: u8) -> f64 {
    zone as f64 * 6.0 - 183.0
}

/// Projects into the point's own zone and hemisphere.
pub fn project(g: GeoPoint) -> Result<UtmPoint> {
    project_in_zone(
        g,
        zone_for_longitude(g.longitude_deg),
        Hemisphere::of(g.latitude_deg),
    )
}

/// Projects into a pinned zone and hemisphere frame.
pub fn project_in_zone(g: GeoPoint, zone: u8, hemisphere: Hemisphere) -> Result<UtmPoint> {
    let (e, n) = project_unrounded(g, zone, hemisphere)?;
    Ok(UtmPoint {
        zone,
        hemisphere,
        easting_m: e.round() as i64,
        northing_m: n.round() as i64,
    })
}

/// Easting and northing before rounding.
pub fn project_unrounded(g: GeoPoint, zone: u8, hemisphere: Hemisphere) -> Result<(f64, f64)> {
    if !(1..=60).contains(&zone) {
        return Err(Error::InvalidZone(zone));
    }
    if g.latitude_deg.abs() > MAX_ABS_LATITUDE {
        return Err(Error::OutOfBand(g.latitude_deg));
    }
    let s = Series::get();
    let phi = g.latitude_deg.to_radians();
    let mut dlon = g.longitude_deg - central_meridian(zone);
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    let lam = dlon.to_radians();

    let sin_phi = phi.sin();
    let t = (sin_phi.atanh() - s.e * (s.e * sin_phi).atanh()).sinh();
    let xi_p = t.atan2(lam.cos());
    let eta_p = (lam.sin() / (1.0 + t * t).sqrt()).atanh();

    let mut xi = xi_p;
    let mut eta = eta_p;
    for (j, a) in s.alpha.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
        eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
    }
    let easting = FALSE_EASTING + SCALE * s.big_a * eta;
    let northing = hemisphere.false_northing() + SCALE * s.big_a * xi;
    Ok((easting, northing))
}

pub fn unproject(p: UtmPoint) -> Result<GeoPoint> {
    unproject_unrounded(
        p.zone,
        p.hemisphere,
        p.easting_m as f64,
        p.northing_m as f64,
    )
}

pub fn unproject_unrounded(
    zone: u8,
    hemisphere: Hemisphere,
    easting: f64,
    northing: f64,
) -> Result<GeoPoint> {
    if !(1..=60).contains(&zone) {
        return Err(Error::InvalidZone(zone));
    }
    if !(0.0..=1_000_000.0).contains(&easting)
        || !(-FALSE_NORTHING_SOUTH..=FALSE_NORTHING_SOUTH).contains(&northing)
    {
        return Err(Error::OutOfRange { zone });
    }
    let s = Series::get();
    let xi = (northing - hemisphere.false_northing()) / (SCALE * s.big_a);
    let eta = (easting - FALSE_EASTING) / (SCALE * s.big_a);

    let mut xi_p = xi;
    let mut eta_p = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi_p -= b * (k * xi).sin() * (k * eta).cosh();
        eta_p -= b * (k * xi).cos() * (k * eta).sinh();
    }
    let sinh_eta = eta_p.sinh();
    let cos_xi = xi_p.cos();
    let tau_p = xi_p.sin() / (sinh_eta * sinh_eta + cos_xi * cos_xi).sqrt();
    let lam = sinh_eta.atan2(cos_xi);

    let tau = conformal_to_geodetic_tangent(tau_p, s.e);
    let lat = tau.atan().to_degrees();
    let mut lon = central_meridian(zone) + lam.to_degrees();
    if lon >= 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    GeoPoint::new(lat, lon)
}

/// Newton iteration for tan(φ) from the conformal-latitude tangent.
fn conformal_to_geodetic_tangent(tau_p: f64, e: f64) -> f64 {
    let e2m = 1.0 - e * e;
    let mut tau = tau_p;
    for _ in 0..8 {
        let tau1 = (1.0 + tau * tau).sqrt();
        let sig = (e * (e * tau / tau1).atanh()).sinh();
        let taupa = (1.0 + sig * sig).sqrt() * tau - sig * tau1;
        let dtau =
            (tau_p - taupa) / (1.0 + taupa * taupa).sqrt() * (1.0 + e2m * tau * tau) / (e2m * tau1);
        tau += dtau;
        if dtau.abs() < 1e-14 * tau.abs().max(1.0) {
            break;
        }
    }
    tau
}

struct Series {
    e: f64,
    big_a: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

impl Series {
    fn get() -> &'static Series {
        static SERIES: std::sync::OnceLock<Series> = std::sync::OnceLock::new();
        SERIES.get_or_init(Series::wgs84)
    }

    fn wgs84() -> Series {
        let f = WGS84_F;
        let n = f / (2.0 - f);
        let n2 = n * n;
        let n3 = n2 * n;
        let n4 = n3 * n;
        let n5 = n4 * n;
        let n6 = n5 * n;
        let big_a = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        let alpha = [
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0
                + 7891.0 * n6 / 37800.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0
                - 1983433.0 * n6 / 1935360.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0
                + 15061.0 * n5 / 26880.0
                + 167603.0 * n6 / 181440.0,
            49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
            34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
            212378941.0 * n6 / 319334400.0,
        ];
        let beta = [
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0
                + 96199.0 * n6 / 604800.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0
                - 1118711.0 * n6 / 3870720.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
            4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 - 830251.0 * n6 / 7257600.0,
            4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0,
            20648693.0 * n6 / 638668800.0,
        ];
        Series {
            e: (f * (2.0 - f)).sqrt(),
            big_a,
            alpha,
            beta,
        }
    }
}
