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

//! Inverting a secret monotone integer polynomial applied to the disclosed
//! distances, at parameters small enough for exhaustive search.
//!
//! All coefficients are positive, so `F` is strictly increasing on
//! `[0, ∞)` whenever its degree is at least one. For each candidate
//! coefficient vector every output has at most one preimage, found by
//! binary search over the public input range. A coefficient vector is
//! consistent when every output has a preimage.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::Substream;

/// Upper limit on coefficient-vector × output × bisection-step evaluations.
pub const MAX_SEARCH_EVALUATIONS: u128 = 1_000_000_000;
pub const DEFAULT_AMBIGUITY_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub degree: u32,
    /// Coefficients lie in `[1, 2^alpha - 1]`.
    pub coeff_bits: u32,
    /// Inputs lie in `[0, 2^beta - 1]`.
    pub input_bits: u32,
}

impl NoiseModel {
    pub fn new(degree: u32, coeff_bits: u32, input_bits: u32) -> Result<Self> {
        let m = Self {
            degree,
            coeff_bits,
            input_bits,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::InvalidParameter(
                "polynomial degree must be at least 1".into(),
            ));
        }
        if self.coeff_bits == 0 || self.coeff_bits > 32 {
            return Err(Error::InvalidParameter(format!(
                "coefficient bits {}",
                self.coeff_bits
            )));
        }
        if self.input_bits == 0 || self.input_bits > 62 {
            return Err(Error::InvalidParameter(format!(
                "input bits {}",
                self.input_bits
            )));
        }
        Ok(())
    }

    pub fn max_coeff(&self) -> u64 {
        (1u64 << self.coeff_bits) - 1
    }

    pub fn max_input(&self) -> u64 {
        (1u64 << self.input_bits) - 1
    }

    /// Number of coefficient vectors in the model.
    pub fn polynomial_count(&self) -> u128 {
        (self.max_coeff() as u128).saturating_pow(self.degree + 1)
    }

    /// Worst-case evaluations to explain `outputs` values.
    pub fn search_cost(&self, outputs: usize) -> u128 {
        self.polynomial_count()
            .saturating_mul(outputs.max(1) as u128)
            .saturating_mul(self.input_bits as u128 + 1)
    }
}

/// Coefficients `c_0..=c_d`, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<u64>);

impl Polynomial {
    pub fn eval(&self, x: u64) -> BigUint {
        let x = BigUint::from(x);
        self.0
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &c| acc * &x + BigUint::from(c))
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// The unique `x` in `[0, max_input]` with `F(x) = y`, if any.
    pub fn preimage(&self, y: &BigUint, max_input: u64) -> Option<u64> {
        let (mut lo, mut hi) = (0u64, max_input);
        if self.eval(lo) > *y || self.eval(hi) < *y {
            return None;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) < *y {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        (self.eval(lo) == *y).then_some(lo)
    }
}

pub fn sample_monotone_poly<R: Rng + ?Sized>(
    model: &NoiseModel,
    rng: &mut R,
) -> Result<Polynomial> {
    model.validate()?;
    Ok(Polynomial(
        (0..=model.degree)
            .map(|_| rng.random_range(1..=model.max_coeff()))
            .collect(),
    ))
}

/// One input list together with every polynomial that produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub inputs: Vec<u64>,
    pub polynomials: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Distinct consistent input lists, each aligned with the outputs, sorted.
    pub explanations: Vec<Explanation>,
    pub candidate_polynomials: usize,
}

impl RecoveryResult {
    pub fn recovered_inputs(&self) -> Vec<&[u64]> {
        self.explanations
            .iter()
            .map(|e| e.inputs.as_slice())
            .collect()
    }

    /// The input list when exactly one explanation exists.
    pub fn unique_inputs(&self) -> Option<&[u64]> {
        match self.explanations.as_slice() {
            [only] => Some(&only.inputs),
            _ => None,
        }
    }

    pub fn contains_inputs(&self, inputs: &[u64]) -> bool {
        self.explanations.iter().any(|e| e.inputs == inputs)
    }
}

pub fn recover_inputs(outputs: &[BigUint], model: &NoiseModel) -> Result<RecoveryResult> {
    recover_inputs_capped(outputs, model, DEFAULT_AMBIGUITY_CAP)
}

pub fn recover_inputs_capped(
    outputs: &[BigUint],
    model: &NoiseModel,
    cap: usize,
) -> Result<RecoveryResult> {
    model.validate()?;
    if outputs.is_empty() {
        return Err(Error::InvalidParameter("no outputs to explain".into()));
    }
    let cost = model.search_cost(outputs.len());
    if cost > MAX_SEARCH_EVALUATIONS {
        return Err(Error::InvalidParameter(format!(
            "search needs ~{cost} evaluations, above the desk-scale limit {MAX_SEARCH_EVALUATIONS}"
        )));
    }

    // Explain distinct outputs in ascending order, smallest first: F(0) = c_0
    // bounds the constant term and a failing small output prunes early.
    let mut distinct: Vec<&BigUint> = outputs.iter().collect();
    distinct.sort();
    distinct.dedup();
    let min_out = distinct[0].clone();
    let max_c = model.max_coeff();
    let c0_limit = if min_out < BigUint::from(max_c) {
        u64::try_from(&min_out).unwrap_or(max_c)
    } else {
        max_c
    };
    let higher = model.degree as usize;
    let higher_count = max_c.pow(higher as u32);

    let consistent: Vec<(Polynomial, Vec<u64>)> = (1..=c0_limit)
        .into_par_iter()
        .flat_map_iter(|c0| {
            let distinct = &distinct;
            (0..higher_count).filter_map(move |k| {
                let mut coeffs = Vec::with_capacity(higher + 1);
                coeffs.push(c0);
                let mut rest = k;
                for _ in 0..higher {
                    coeffs.push(rest % max_c + 1);
                    rest /= max_c;
                }
                let poly = Polynomial(coeffs);
                let mut pre = Vec::with_capacity(distinct.len());
                for y in distinct.iter() {
                    pre.push(poly.preimage(y, model.max_input())?);
                }
                let inputs = outputs
                    .iter()
                    .map(|y| pre[distinct.binary_search(&y).expect("output is listed")])
                    .collect();
                Some((poly, inputs))
            })
        })
        .collect();

    if consistent.is_empty() {
        return Err(Error::Inconsistent);
    }
    let candidate_polynomials = consistent.len();
    let mut explanations: Vec<Explanation> = Vec::new();
    let mut sorted = consistent;
    sorted.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    for (poly, inputs) in sorted {
        match explanations.last_mut() {
            Some(e) if e.inputs == inputs => e.polynomials.push(poly),
            _ => {
                if explanations.len() == cap {
                    return Err(Error::AmbiguityLimitExceeded { cap });
                }
                explanations.push(Explanation {
                    inputs,
                    polynomials: vec![poly],
                });
            }
        }
    }
    Ok(RecoveryResult {
        explanations,
        candidate_polynomials,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryTrial {
    pub trial: u32,
    pub polynomial: Polynomial,
    pub true_inputs: Vec<u64>,
    pub explanations: usize,
    pub candidate_polynomials: usize,
    pub recovered: bool,
    pub unique: bool,
}

/// Draws a random polynomial and random inputs per trial, then recovers.
pub fn run_recovery_trials(
    model: &NoiseModel,
    outputs_per_trial: usize,
    trials: u32,
    seed: u64,
) -> Result<Vec<RecoveryTrial>> {
    let root = Substream::root(seed).named("polyrecover");
    (0..trials)
        .map(|t| {
            let stream = root.child("trial", t as u64);
            let polynomial = sample_monotone_poly(model, &mut stream.named("poly").rng())?;
            let mut rng = stream.named("inputs").rng();
            let true_inputs: Vec<u64> = (0..outputs_per_trial)
                .map(|_| rng.random_range(0..=model.max_input()))
                .collect();
            let outputs: Vec<BigUint> = true_inputs.iter().map(|&x| polynomial.eval(x)).collect();
            let result = recover_inputs(&outputs, model)?;
            Ok(RecoveryTrial {
                trial: t,
                recovered: result.contains_inputs(&true_inputs),
                unique: result.unique_inputs().is_some(),
                explanations: result.explanations.len(),
                candidate_polynomials: result.candidate_polynomials,
                polynomial,
                true_inputs,
            })
        })
        .collect()
}

pub fn is_strictly_increasing(poly: &Polynomial, upto: u64) -> bool {
    let mut prev = poly.eval(0);
    for x in 1..=upto {
        let next = poly.eval(x);
        if next <= prev {
            return false;
        }
        prev = next;
    }
    true
}
