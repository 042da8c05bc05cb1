//! Deterministic random streams.
//!
//! A campaign has one master seed. Each run derives its own key by hashing the
//! master seed together with the run identifier, and each pair inside a run
//! draws from its own ChaCha stream selected by the pair index. Results are
//! therefore independent of how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type RandomStream = ChaCha8Rng;

/// Stream reserved for event-time emission within a run.
pub const EMISSION_STREAM: u64 = u64::MAX;
/// Stream reserved for intensity-reduction procedures.
pub const REDUCTION_STREAM: u64 = u64::MAX - 1;

/// Key material for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed([u8; 32]);

impl RunSeed {
    pub fn derive(master_seed: u64, run_id: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"spce-run-seed");
        hasher.update(master_seed.to_le_bytes());
        hasher.update((run_id.len() as u64).to_le_bytes());
        hasher.update(run_id.as_bytes());
        RunSeed(hasher.finalize().into())
    }

    /// Stream `index` of this run's key.
    pub fn stream(&self, index: u64) -> RandomStream {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Convenience for tests and one-off draws: stream 0 of a plain `u64` seed.
pub fn seeded(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}
