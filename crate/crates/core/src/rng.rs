//! Reproducible random streams.
//!
//! Every trial draws from its own ChaCha8 stream, selected by `(seed, domain, index)`.
//! ChaCha is counter based, so a trial's draws do not depend on which worker runs
//! it or on how many other trials ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Stream domains keep solver and harness streams apart under one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Rounding = 0,
    Sampling = 1,
    Solver = 2,
    Subsets = 3,
}

/// The generator for trial `index` in `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) ^ index);
    rng
}

/// A seed from the system clock, for runs that do not ask for reproducibility.
pub fn time_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}
