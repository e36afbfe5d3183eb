//! Per-trial seed derivation.
//!
//! Every Monte Carlo trial owns a generator seeded from
//! `(master_seed, experiment_id, trial_index)`, so results do not depend on
//! how trials are spread across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator used for all simulation streams.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit id for an experiment name (FNV-1a).
pub fn experiment_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn trial_seed(master_seed: u64, experiment: u64, trial: u64) -> u64 {
    let a = mix64(master_seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let b = mix64(a ^ experiment.wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix64(b ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn trial_rng(master_seed: u64, experiment: u64, trial: u64) -> SimRng {
    SimRng::seed_from_u64(trial_seed(master_seed, experiment, trial))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Runs `trials` independent trials on the rayon pool, each with its own
/// derived generator; results come back in trial order.
pub fn par_trials<T, F>(master_seed: u64, experiment: &str, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync,
{
    let id = experiment_id(experiment);
    (0..trials)
        .into_par_iter()
        .map(|t| f(t, &mut trial_rng(master_seed, id, t)))
        .collect()
}
