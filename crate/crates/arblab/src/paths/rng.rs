//! Counter-derived random streams.
//!
//! The increment stream for a path is a pure function of
//! `(master_seed, path_index)`: every path owns an independent ChaCha stream,
//! so batches can be generated in any order or in parallel and still produce
//! bit-identical paths.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Identifies one path's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub path_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self { master_seed, path_index }
    }

    /// The generator for this path.
    pub fn stream(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.path_index ^ 0x9e37_79b9_7f4a_7c15);
        rng
    }

    /// A second, independent stream for the same path (used by overlays such
    /// as future-infimum sampling so they do not perturb the value stream).
    pub fn overlay_stream(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed ^ 0xd1b5_4a32_d192_ed03);
        rng.set_stream(self.path_index ^ 0x2545_f491_4f6c_dd1d);
        rng
    }
}
