//! Fixtures shared by the benchmarks.

use tmsv_core::budget::{self, Arm};
use tmsv_core::synth::SynthConfig;

/// Deployed-fiber synthesis settings with a record of `duration` seconds.
pub fn deployed_config(duration: f64, seed: u64) -> SynthConfig {
    let b = budget::deployed_budget();
    SynthConfig {
        t_b: b.optical_transmittance(Arm::C43).expect("valid budget"),
        t_c: b.optical_transmittance(Arm::C45).expect("valid budget"),
        electronics_noise_db: b.electronics_noise_db,
        duration,
        rng_seed: seed,
        ..SynthConfig::default()
    }
}

/// Deterministic pseudo-noise of length `n`.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}
