//! Synthetic dual-detector homodyne traces.
//!
//! Each sample pair is drawn from the zero-mean Gaussian with
//!
//! ```text
//! Var1 = T_b cosh 2r + 1 - T_b
//! Var2 = T_c cosh 2r + 1 - T_c
//! Cov  = sqrt(T_b T_c) sinh 2r cos(θ_b(t) + θ_c(t))
//! ```
//!
//! (vacuum variance 1), i.e. the rotated-quadrature covariance of the lossy
//! two-mode squeezer. Both channels then pass through the same detector
//! band-pass, are scaled to volts, get independent white electronics noise,
//! and detector 2 is circularly delayed. The trigger pulse lands on each
//! monitor channel.
//!
//! Random numbers come from ChaCha8 streams keyed by `(purpose, block)`, so
//! blocks can be generated in any order or in parallel and the output is
//! identical to sequential generation.

mod filter;
mod phase;

pub use filter::BandPass;
pub use phase::{PhaseKind, PhaseModel};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default scale: 25 mV rms of shot noise sits comfortably inside an 8-bit
/// oscilloscope range at 50 mV/div.
pub const DEFAULT_SHOT_NOISE_VOLTS_RMS: f64 = 0.025;
/// LO power at which `shot_noise_volts_rms` is specified.
pub const DEFAULT_LO_POWER_W: f64 = 1e-3;

/// Samples per independently seeded RNG block.
const BLOCK: usize = 1 << 16;
/// Samples sharing one evaluation of the LO phase.
const PHASE_STEP: usize = 64;
/// Filter warm-up in units of the high-pass time constant.
const WARMUP_TIME_CONSTANTS: f64 = 40.0;

const STREAM_PAIR: u64 = 0;
const STREAM_ELECTRONICS_1: u64 = 1;
const STREAM_ELECTRONICS_2: u64 = 2;
const STREAM_PHASE_B: u64 = 3;
const STREAM_PHASE_C: u64 = 4;

/// Salt mixed into the seed of beam-blocked (shot-noise) acquisitions so
/// they are independent of the signal acquisition with the same seed.
const SHOT_NOISE_SALT: u64 = 0x5a17_0000_0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorBand {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for DetectorBand {
    fn default() -> Self {
        DetectorBand {
            low_hz: 2.5e5,
            high_hz: 1.5e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerPulse {
    /// Full width at half maximum of the pulse, seconds.
    pub width_s: f64,
    pub amplitude_v: f64,
    /// Pulse centre as a fraction of the record (0.5 = centre).
    pub position: f64,
}

impl Default for TriggerPulse {
    fn default() -> Self {
        TriggerPulse {
            width_s: 2e-8,
            amplitude_v: 2.0,
            position: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub r: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub detector_band: DetectorBand,
    /// Shot noise above electronics noise, dB, for each detector. `None`
    /// disables electronics noise.
    pub electronics_noise_db: Option<f64>,
    pub phase_b: PhaseModel,
    pub phase_c: PhaseModel,
    /// Circular delay of detector 2, raw samples.
    pub relative_delay_samples: i64,
    pub trigger: TriggerPulse,
    pub shot_noise_volts_rms: f64,
    pub lo_power_w: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            r: 0.986,
            t_b: 1.0,
            t_c: 1.0,
            sample_rate: 5e8,
            duration: 4e-3,
            detector_band: DetectorBand::default(),
            electronics_noise_db: Some(13.0),
            // θ_b + θ_c = π puts q1 + q2 at the squeezed quadrature
            phase_b: PhaseModel::constant(std::f64::consts::FRAC_PI_2),
            phase_c: PhaseModel::constant(std::f64::consts::FRAC_PI_2),
            relative_delay_samples: 0,
            trigger: TriggerPulse::default(),
            shot_noise_volts_rms: DEFAULT_SHOT_NOISE_VOLTS_RMS,
            lo_power_w: DEFAULT_LO_POWER_W,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.r,
            self.t_b,
            self.t_c,
            self.sample_rate,
            self.duration,
            self.shot_noise_volts_rms,
            self.lo_power_w,
            self.trigger.width_s,
            self.trigger.amplitude_v,
            self.trigger.position,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("synthesis parameters must be finite"));
        }
        for (name, t) in [("t_b", self.t_b), ("t_c", self.t_c)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("{name} = {t} outside [0, 1]")));
            }
        }
        if self.sample_rate <= 0.0 || self.duration <= 0.0 || self.n_samples() < 8 {
            return Err(Error::invalid("record must hold at least 8 samples"));
        }
        let nyquist = 0.5 * self.sample_rate;
        let band = self.detector_band;
        if !(band.low_hz > 0.0 && band.low_hz < band.high_hz && band.high_hz < nyquist) {
            return Err(Error::invalid(format!(
                "detector band [{}, {}] Hz must satisfy 0 < low < high < Nyquist ({nyquist} Hz)",
                band.low_hz, band.high_hz
            )));
        }
        if let Some(db) = self.electronics_noise_db {
            if !db.is_finite() {
                return Err(Error::invalid("electronics noise ratio must be finite or null"));
            }
        }
        if self.shot_noise_volts_rms <= 0.0 || self.lo_power_w <= 0.0 {
            return Err(Error::invalid("shot-noise scale and LO power must be positive"));
        }
        if self.trigger.width_s < 0.0 || !(0.0..=1.0).contains(&self.trigger.position) {
            return Err(Error::invalid(
                "trigger width must be >= 0 and position in [0, 1]",
            ));
        }
        self.phase_b.validate()?;
        self.phase_c.validate()
    }

    fn electronics_rms(&self) -> f64 {
        self.electronics_noise_db
            .map_or(0.0, |db| self.shot_noise_volts_rms * 10f64.powf(-db / 20.0))
    }

    pub fn band_pass(&self) -> BandPass {
        BandPass::butterworth4(
            self.detector_band.low_hz,
            self.detector_band.high_hz,
            self.sample_rate,
        )
    }

    fn warmup_samples(&self) -> usize {
        let tau = self.sample_rate / (2.0 * std::f64::consts::PI * self.detector_band.low_hz);
        (WARMUP_TIME_CONSTANTS * tau).ceil() as usize
    }

    /// Sample index of the trigger pulse centre.
    pub fn trigger_index(&self) -> usize {
        let n = self.n_samples();
        ((self.trigger.position * n as f64).round() as usize).min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceRole {
    Signal,
    ShotNoise,
}

/// Metadata describing how a trace was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TraceMeta {
    Synthetic {
        detector: u8,
        role: TraceRole,
        config: Box<SynthConfig>,
    },
    Measured,
}

/// One oscilloscope acquisition: detector output plus trigger monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrace {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub monitor: Vec<f64>,
    pub meta: TraceMeta,
}

impl RawTrace {
    pub fn measured(samples: Vec<f64>, monitor: Vec<f64>, sample_rate: f64) -> Self {
        RawTrace {
            samples,
            sample_rate,
            monitor,
            meta: TraceMeta::Measured,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn block_rng(seed: u64, purpose: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) | block);
    rng
}

/// Fills `out` with standard normals from the `(seed, purpose)` stream family.
fn fill_normals(out: &mut [f64], seed: u64, purpose: u64) {
    out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
        let mut rng = block_rng(seed, purpose, b as u64);
        for v in chunk {
            *v = rng.sample(StandardNormal);
        }
    });
}

struct Levels {
    shot_rms: f64,
    electronics_rms: f64,
}

fn generate(
    config: &SynthConfig,
    seed: u64,
    levels: Levels,
    role: TraceRole,
) -> Result<(RawTrace, RawTrace)> {
    config.validate()?;
    let n = config.n_samples();
    let warmup = config.warmup_samples();
    let total = n + warmup;
    let fs = config.sample_rate;

    // cos(θ_b + θ_c) on the coarse phase grid
    let steps = total.div_ceil(PHASE_STEP);
    let dt = PHASE_STEP as f64 / fs;
    let t0 = -(warmup as f64) / fs;
    let theta_b = config
        .phase_b
        .realize(t0, dt, steps, &mut block_rng(seed, STREAM_PHASE_B, 0));
    let theta_c = config
        .phase_c
        .realize(t0, dt, steps, &mut block_rng(seed, STREAM_PHASE_C, 0));
    let cos_sum: Vec<f64> = theta_b.iter().zip(&theta_c).map(|(b, c)| (b + c).cos()).collect();

    let (c2r, s2r) = ((2.0 * config.r).cosh(), (2.0 * config.r).sinh());
    let var1 = config.t_b * c2r + 1.0 - config.t_b;
    let var2 = config.t_c * c2r + 1.0 - config.t_c;
    let cov_amp = (config.t_b * config.t_c).sqrt() * s2r;
    let sd1 = var1.sqrt();

    let mut ch1 = vec![0.0; total];
    let mut ch2 = vec![0.0; total];
    let mut z = vec![0.0; 2 * total];
    fill_normals(&mut z, seed, STREAM_PAIR);
    ch1.par_chunks_mut(BLOCK)
        .zip(ch2.par_chunks_mut(BLOCK))
        .enumerate()
        .for_each(|(b, (c1, c2))| {
            let start = b * BLOCK;
            for (k, (x1, x2)) in c1.iter_mut().zip(c2.iter_mut()).enumerate() {
                let i = start + k;
                let cov = cov_amp * cos_sum[i / PHASE_STEP];
                let (z1, z2) = (z[2 * i], z[2 * i + 1]);
                let l21 = cov / sd1;
                let l22 = (var2 - l21 * l21).max(0.0).sqrt();
                *x1 = sd1 * z1;
                *x2 = l21 * z1 + l22 * z2;
            }
        });
    drop(z);

    let filter = config.band_pass();
    let gain = levels.shot_rms / filter.noise_gain(warmup.max(1 << 14) * 4);
    rayon::join(|| filter.apply(&mut ch1), || filter.apply(&mut ch2));

    let finish = |mut ch: Vec<f64>, purpose: u64| -> Vec<f64> {
        ch.drain(..warmup);
        ch.iter_mut().for_each(|v| *v *= gain);
        if levels.electronics_rms > 0.0 {
            let mut e = vec![0.0; n];
            fill_normals(&mut e, seed, purpose);
            for (v, e) in ch.iter_mut().zip(e) {
                *v += levels.electronics_rms * e;
            }
        }
        ch
    };
    let out1 = finish(ch1, STREAM_ELECTRONICS_1);
    let mut out2 = finish(ch2, STREAM_ELECTRONICS_2);
    let shift = config.relative_delay_samples.rem_euclid(n as i64) as usize;
    out2.rotate_right(shift);

    let monitor = trigger_monitor(config);
    let trace = |samples: Vec<f64>, detector: u8| RawTrace {
        samples,
        sample_rate: fs,
        monitor: monitor.clone(),
        meta: TraceMeta::Synthetic {
            detector,
            role,
            config: Box::new(config.clone()),
        },
    };
    Ok((trace(out1, 1), trace(out2, 2)))
}

/// Monitor channel: a Hann-shaped pulse whose FWHM is the configured width,
/// centred on the trigger index.
fn trigger_monitor(config: &SynthConfig) -> Vec<f64> {
    let n = config.n_samples();
    let mut monitor = vec![0.0; n];
    let centre = config.trigger_index() as i64;
    let half = (config.trigger.width_s * config.sample_rate).round() as i64;
    if half == 0 {
        monitor[centre as usize] = config.trigger.amplitude_v;
        return monitor;
    }
    for k in -half..=half {
        let i = centre + k;
        if (0..n as i64).contains(&i) {
            let w = 0.5 * (1.0 + (std::f64::consts::PI * k as f64 / half as f64).cos());
            monitor[i as usize] = config.trigger.amplitude_v * w;
        }
    }
    monitor
}

/// Signal acquisition on both detectors.
pub fn synthesize_pair(config: &SynthConfig) -> Result<(RawTrace, RawTrace)> {
    let levels = Levels {
        shot_rms: config.shot_noise_volts_rms,
        electronics_rms: config.electronics_rms(),
    };
    generate(config, config.rng_seed, levels, TraceRole::Signal)
}

/// Beam-blocked acquisition: the same chain with the squeezer off (`r = 0`).
/// Uses a salted seed, so it is independent of [`synthesize_pair`] for the
/// same `rng_seed`.
pub fn synthesize_shot_noise(config: &SynthConfig) -> Result<(RawTrace, RawTrace)> {
    let vacuum = SynthConfig {
        r: 0.0,
        ..config.clone()
    };
    let levels = Levels {
        shot_rms: vacuum.shot_noise_volts_rms,
        electronics_rms: vacuum.electronics_rms(),
    };
    generate(
        &vacuum,
        config.rng_seed ^ SHOT_NOISE_SALT,
        levels,
        TraceRole::ShotNoise,
    )
}

/// Detector-1 raw variance (V^2) of beam-blocked acquisitions at each LO
/// power. Shot-noise variance scales linearly with power from its value at
/// `config.lo_power_w`; the electronics floor stays fixed.
pub fn shot_noise_power_sweep(powers: &[f64], config: &SynthConfig) -> Result<Vec<(f64, f64)>> {
    if let Some(p) = powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::invalid(format!("LO power {p} must be positive")));
    }
    let vacuum = SynthConfig {
        r: 0.0,
        ..config.clone()
    };
    let electronics_rms = vacuum.electronics_rms();
    powers
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let levels = Levels {
                shot_rms: vacuum.shot_noise_volts_rms * (p / vacuum.lo_power_w).sqrt(),
                electronics_rms,
            };
            let seed = (vacuum.rng_seed ^ SHOT_NOISE_SALT).wrapping_add(1 + i as u64);
            let (t1, _) = generate(&vacuum, seed, levels, TraceRole::ShotNoise)?;
            Ok((p, sample_variance(&t1.samples)))
        })
        .collect()
}

/// Unbiased sample variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
