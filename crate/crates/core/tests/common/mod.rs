//! Reference implementations used only by tests. They avoid the library's
//! matrix types and code paths on purpose.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tmsv_core::budget::{Arm, ChannelBudget};
use tmsv_core::synth::SynthConfig;

pub type Mat8 = [[f64; 8]; 8];

fn identity8() -> Mat8 {
    let mut m = [[0.0; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mul(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut c = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            c[i][j] = (0..8).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn transpose(a: &Mat8) -> Mat8 {
    let mut t = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// Four modes a, b, c, d: squeeze (b, c), then mix b with a and c with d.
/// Returns the 8x8 covariance (vacuum = identity).
pub fn oracle_covariance(r: f64, t_b: f64, t_c: f64) -> Mat8 {
    let (ch, sh) = (r.cosh(), r.sinh());
    let mut s = identity8();
    // q_b' = ch q_b + sh q_c, p_b' = ch p_b - sh p_c, and symmetrically
    s[2][2] = ch;
    s[2][4] = sh;
    s[3][3] = ch;
    s[3][5] = -sh;
    s[4][4] = ch;
    s[4][2] = sh;
    s[5][5] = ch;
    s[5][3] = -sh;

    let mut bs = identity8();
    let mut mix = |x: usize, y: usize, t: f64| {
        let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
        for k in 0..2 {
            bs[2 * x + k][2 * x + k] = a;
            bs[2 * x + k][2 * y + k] = b;
            bs[2 * y + k][2 * x + k] = -b;
            bs[2 * y + k][2 * y + k] = a;
        }
    };
    mix(1, 0, t_b);
    mix(2, 3, t_c);

    let total = mul(&bs, &s);
    mul(&total, &transpose(&total))
}

/// Variances of `(q_b - q_c)/√2` and `(q_b + q_c)/√2` from the oracle
/// covariance.
pub fn oracle_joint_q(r: f64, t_b: f64, t_c: f64) -> (f64, f64) {
    let v = oracle_covariance(r, t_b, t_c);
    let (vb, vc, cbc) = (v[2][2], v[4][4], v[2][4]);
    (0.5 * (vb + vc - 2.0 * cbc), 0.5 * (vb + vc + 2.0 * cbc))
}

pub fn oracle_levels_db(r: f64, t_b: f64, t_c: f64) -> (f64, f64) {
    let (minus, plus) = oracle_joint_q(r, t_b, t_c);
    (10.0 * minus.log10(), 10.0 * plus.log10())
}

/// Bessel J_n by trapezoidal quadrature of `(1/π)∫_0^π cos(nτ - x sin τ) dτ`,
/// which converges exponentially for this periodic integrand.
pub fn oracle_bessel(n: i32, x: f64) -> f64 {
    let steps = 4000;
    let h = std::f64::consts::PI / steps as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..steps).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(std::f64::consts::PI))) * h / std::f64::consts::PI
}

/// Straight two-pass unbiased variance.
pub fn direct_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Synthesis settings for a budget: optical loss in the arms, electronics
/// noise added at the detector.
pub fn config_for(budget: &ChannelBudget, seed: u64) -> SynthConfig {
    SynthConfig {
        t_b: budget.optical_transmittance(Arm::C43).unwrap(),
        t_c: budget.optical_transmittance(Arm::C45).unwrap(),
        electronics_noise_db: budget.electronics_noise_db,
        rng_seed: seed,
        ..SynthConfig::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
