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

//! Integer lattice points on circles `x² + y² = n` and on even p-norm
//! curves `|x|^p + |y|^p = n`.
//!
//! Membership decisions are made with exact integer roots only. Solutions are
//! generated from one canonical representative per dihedral orbit
//! (`0 <= x <= y`) and expanded afterwards, so the axis and diagonal cases
//! never produce duplicates.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `n`: twice the squared diagonal term of a 60 km grid.
pub const DEFAULT_MAX_N: u64 = 2 * 60_000 * 60_000;

/// A point in the integer planar frame (easting, northing in meters).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct PlanarPoint {
    pub x: i64,
    pub y: i64,
}

impl PlanarPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn squared_distance(self, other: PlanarPoint) -> u64 {
        let dx = self.x.abs_diff(other.x);
        let dy = self.y.abs_diff(other.y);
        dx * dx + dy * dy
    }

    pub fn distance(self, other: PlanarPoint) -> f64 {
        (self.squared_distance(other) as f64).sqrt()
    }

    pub fn to_f64(self) -> (f64, f64) {
        (self.x as f64, self.y as f64)
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add<LatticeOffset> for PlanarPoint {
    type Output = PlanarPoint;

    fn add(self, o: LatticeOffset) -> PlanarPoint {
        PlanarPoint::new(self.x + o.dx, self.y + o.dy)
    }
}

impl Sub for PlanarPoint {
    type Output = LatticeOffset;

    fn sub(self, other: PlanarPoint) -> LatticeOffset {
        LatticeOffset::new(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeOffset {
    pub dx: i64,
    pub dy: i64,
}

impl LatticeOffset {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Self { dx, dy }
    }
}

/// All integer offsets on one curve, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSolutionSet {
    parameter_n: u64,
    norm_exponent: u32,
    offsets: Vec<LatticeOffset>,
}

impl LatticeSolutionSet {
    pub fn parameter_n(&self) -> u64 {
        self.parameter_n
    }

    pub fn norm_exponent(&self) -> u32 {
        self.norm_exponent
    }

    pub fn offsets(&self) -> &[LatticeOffset] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, o: &LatticeOffset) -> bool {
        self.offsets.binary_search(o).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatticeOffset> {
        self.offsets.iter()
    }
}

impl<'a> IntoIterator for &'a LatticeSolutionSet {
    type Item = &'a LatticeOffset;
    type IntoIter = std::slice::Iter<'a, LatticeOffset>;

    fn into_iter(self) -> Self::IntoIter {
        self.offsets.iter()
    }
}

/// Enumerator with a configurable upper bound on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeEnumerator {
    max_n: u64,
}

impl Default for LatticeEnumerator {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl LatticeEnumerator {
    pub fn with_max_n(max_n: u64) -> Self {
        Self { max_n }
    }

    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    fn check_bound(&self, n: u64) -> Result<()> {
        if n > self.max_n {
            return Err(Error::ParameterTooLarge { n, max: self.max_n });
        }
        Ok(())
    }

    /// The bound for exponent `p` covers the same coordinate range as
    /// `max_n` does for circles: `2 r^p` with `r = isqrt(max_n / 2)`.
    pub fn max_n_for(&self, p: u32) -> u64 {
        if p == 2 {
            return self.max_n;
        }
        let r = (self.max_n / 2).isqrt();
        r.checked_pow(p)
            .and_then(|v| v.checked_mul(2))
            .unwrap_or(u64::MAX)
    }

    /// Every `(x, y)` with `x² + y² = n`. Runs in `O(√n)`.
    pub fn circle(&self, n: u64) -> Result<LatticeSolutionSet> {
        self.check_bound(n)?;
        let mut offsets = Vec::new();
        // x <= y  <=>  2x² <= n
        let x_max = (n / 2).isqrt();
        for x in 0..=x_max {
            let rem = n - x * x;
            let y = rem.isqrt();
            if y * y == rem {
                push_orbit(&mut offsets, x as i64, y as i64);
            }
        }
        Ok(finish(n, 2, offsets))
    }

    /// Every `(x, y)` with `|x|^p + |y|^p = n` for even `p >= 2`.
    pub fn pnorm(&self, p: u32, n: u64) -> Result<LatticeSolutionSet> {
        check_exponent(p)?;
        if p == 2 {
            return self.circle(n);
        }
        let max = self.max_n_for(p);
        if n > max {
            return Err(Error::ParameterTooLarge { n, max });
        }
        let mut offsets = Vec::new();
        let mut x: u64 = 0;
        // x <= y  <=>  2 x^p <= n
        while let Some(xp) = x
            .checked_pow(p)
            .filter(|xp| xp.checked_mul(2).is_some_and(|t| t <= n))
        {
            let rem = n - xp;
            let y = integer_root(rem, p);
            if y.checked_pow(p) == Some(rem) {
                push_orbit(&mut offsets, x as i64, y as i64);
            }
            x += 1;
        }
        Ok(finish(n, p, offsets))
    }
}

pub fn enumerate_circle(n: u64) -> Result<LatticeSolutionSet> {
    LatticeEnumerator::default().circle(n)
}

pub fn enumerate_pnorm(p: u32, n: u64) -> Result<LatticeSolutionSet> {
    LatticeEnumerator::default().pnorm(p, n)
}

/// Maps a solution of `|x|^p + |y|^p = n` (with `p = 2q`) to the solution
/// `(x^q, y^q)` of `x² + y² = n`, keeping the signs.
pub fn embed_pnorm_into_circle(p: u32, solution: LatticeOffset) -> Result<LatticeOffset> {
    check_exponent(p)?;
    let q = p / 2;
    let lift = |v: i64| -> Result<i64> {
        let mag = v
            .unsigned_abs()
            .checked_pow(q)
            .and_then(|m| i64::try_from(m).ok())
            .ok_or_else(|| Error::InvalidParameter(format!("{v}^{q} overflows")))?;
        Ok(if v < 0 { -mag } else { mag })
    };
    Ok(LatticeOffset::new(lift(solution.dx)?, lift(solution.dy)?))
}

/// `|dx|^p + |dy|^p`, or `None` on overflow.
pub fn pnorm_value(p: u32, offset: LatticeOffset) -> Option<u64> {
    let a = offset.dx.unsigned_abs().checked_pow(p)?;
    let b = offset.dy.unsigned_abs().checked_pow(p)?;
    a.checked_add(b)
}

pub(crate) fn check_exponent(p: u32) -> Result<()> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// Largest `r` with `r^p <= n`.
pub fn integer_root(n: u64, p: u32) -> u64 {
    match p {
        0 => panic!("zeroth root"),
        1 => return n,
        2 => return n.isqrt(),
        _ => {}
    }
    if n < 2 {
        return n;
    }
    // Float estimate, then walk to the exact answer.
    let mut r = (n as f64).powf(1.0 / p as f64).round() as u64;
    while r > 0 && r.checked_pow(p).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(p).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

fn push_orbit(out: &mut Vec<LatticeOffset>, x: i64, y: i64) {
    for (a, b) in [(x, y), (y, x)] {
        for sa in [1, -1] {
            for sb in [1, -1] {
                out.push(LatticeOffset::new(sa * a, sb * b));
            }
        }
    }
}

fn finish(n: u64, p: u32, mut offsets: Vec<LatticeOffset>) -> LatticeSolutionSet {
    offsets.sort_unstable();
    offsets.dedup();
    LatticeSolutionSet {
        parameter_n: n,
        norm_exponent: p,
        offsets,
    }
}
