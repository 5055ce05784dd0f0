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

//! Named, hierarchical RNG substreams derived from one master seed.
//!
//! Every random quantity in an experiment is drawn from a stream addressed
//! by a path such as `cell 3 / trial 17 / driver`. Adding cells or trials
//! never shifts the randomness of existing ones, and results do not depend
//! on the order in which workers pick up trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    key: [u8; 32],
}

impl Substream {
    pub fn root(master_seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"driverloc/root");
        h.update(master_seed.to_le_bytes());
        Self::from_digest(h)
    }

    pub fn child(&self, label: &str, index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        Self::from_digest(h)
    }

    pub fn named(&self, label: &str) -> Self {
        self.child(label, 0)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }

    fn from_digest(h: Sha256) -> Self {
        let mut key = [0u8; 32];
        key.copy_from_slice(&h.finalize());
        Self { key }
    }
}
