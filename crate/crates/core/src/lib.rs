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

//! Location-harvesting attack on privacy-preserving ride hailing, its
//! obfuscation countermeasure, and the experiment harness around both.
//!
//! Everything works in integer planar meters: inputs are projected to UTM and
//! rounded once, and the attack enumerates integer lattice points.

pub mod attack;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matching;
pub mod mitigation;
pub mod polyrecover;
pub mod projection;
pub mod roadnet;
pub mod seeding;

pub use attack::{
    predict_driver, run_attack, run_attack_pnorm, AttackReport, PredictionSet, RideSnapshot,
    RiderAttack,
};
pub use error::{Error, Result};
pub use geometry::{
    enumerate_circle, enumerate_pnorm, LatticeEnumerator, LatticeOffset, LatticeSolutionSet,
    PlanarPoint,
};
pub use harness::{run_sweep, ExperimentConfig, Pipeline, RoadSource, SweepReport};
pub use matching::{evaluate_accuracy, AccuracyConfig, AccuracyReport, MatchingMode, TravelModel};
pub use mitigation::{
    obfuscate, predict_driver_mitigated, run_mitigated_experiment, AnonymityReport,
    ObfuscationParams,
};
pub use polyrecover::{recover_inputs, NoiseModel, Polynomial, RecoveryResult};
pub use projection::{project, unproject, GeoPoint, Hemisphere, UtmPoint};
pub use roadnet::{RoadNetwork, RoadSegment, Zone};
