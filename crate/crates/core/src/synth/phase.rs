//! Local-oscillator phase trajectories.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of a phase burst.
const BURST_SECONDS: f64 = 20e-6;
/// Per-step relaxation of the burst phase back to zero between bursts.
const BURST_DECAY: f64 = 0.97;
/// Bursts are clipped at this many rms.
const BURST_CLIP: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// `offset + amplitude sin(2π f t)`: slow environmental drift.
    DriftSinusoid,
    /// `offset + amplitude tri(f t)`: piezo driven by a triangle wave.
    TriangleSweep,
    Constant,
    /// Constant offset plus random-walk bursts arriving at `frequency_hz`.
    NoiseInjected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseModel {
    pub kind: PhaseKind,
    #[serde(default)]
    pub frequency_hz: f64,
    #[serde(default)]
    pub amplitude_rad: f64,
    #[serde(default)]
    pub offset_rad: f64,
    /// rms of transient phase bursts; 0 disables them.
    #[serde(default)]
    pub transient_jitter_rms: f64,
    /// Mean burst arrival rate for kinds other than `noise_injected`.
    #[serde(default = "default_burst_rate")]
    pub burst_rate_hz: f64,
}

fn default_burst_rate() -> f64 {
    2e3
}

impl PhaseModel {
    pub fn constant(offset_rad: f64) -> Self {
        PhaseModel {
            kind: PhaseKind::Constant,
            frequency_hz: 0.0,
            amplitude_rad: 0.0,
            offset_rad,
            transient_jitter_rms: 0.0,
            burst_rate_hz: default_burst_rate(),
        }
    }

    pub fn triangle(frequency_hz: f64, amplitude_rad: f64, offset_rad: f64) -> Self {
        PhaseModel {
            kind: PhaseKind::TriangleSweep,
            frequency_hz,
            amplitude_rad,
            ..PhaseModel::constant(offset_rad)
        }
    }

    pub fn drift(frequency_hz: f64, amplitude_rad: f64, offset_rad: f64) -> Self {
        PhaseModel {
            kind: PhaseKind::DriftSinusoid,
            frequency_hz,
            amplitude_rad,
            ..PhaseModel::constant(offset_rad)
        }
    }

    pub fn noise_injected(offset_rad: f64, burst_rate_hz: f64, rms: f64) -> Self {
        PhaseModel {
            kind: PhaseKind::NoiseInjected,
            frequency_hz: burst_rate_hz,
            transient_jitter_rms: rms,
            ..PhaseModel::constant(offset_rad)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.frequency_hz,
            self.amplitude_rad,
            self.offset_rad,
            self.transient_jitter_rms,
            self.burst_rate_hz,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("phase model parameters must be finite"));
        }
        if self.frequency_hz < 0.0 || self.amplitude_rad < 0.0 || self.transient_jitter_rms < 0.0 {
            return Err(Error::invalid(
                "phase frequency, amplitude and jitter must be non-negative",
            ));
        }
        Ok(())
    }

    /// Deterministic part of the phase at time `t`.
    pub fn base(&self, t: f64) -> f64 {
        let u = self.frequency_hz * t;
        match self.kind {
            PhaseKind::Constant | PhaseKind::NoiseInjected => self.offset_rad,
            PhaseKind::DriftSinusoid => {
                self.offset_rad + self.amplitude_rad * (2.0 * std::f64::consts::PI * u).sin()
            }
            PhaseKind::TriangleSweep => self.offset_rad + self.amplitude_rad * triangle(u),
        }
    }

    fn burst_rate(&self) -> f64 {
        match self.kind {
            PhaseKind::NoiseInjected => self.frequency_hz,
            _ => self.burst_rate_hz,
        }
    }

    /// Phase sampled every `dt` seconds for `steps` steps starting at `t0`.
    pub fn realize(&self, t0: f64, dt: f64, steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out: Vec<f64> = (0..steps).map(|i| self.base(t0 + dt * i as f64)).collect();
        let rms = self.transient_jitter_rms;
        if rms > 0.0 && self.burst_rate() > 0.0 {
            let p_start = (self.burst_rate() * dt).min(1.0);
            let burst_steps = ((BURST_SECONDS / dt).ceil() as usize).max(1);
            let step_sigma = rms * (2.0 / burst_steps as f64).sqrt();
            let mut jitter = 0.0f64;
            let mut remaining = 0usize;
            for v in out.iter_mut() {
                if remaining == 0 && rng.random::<f64>() < p_start {
                    remaining = burst_steps;
                }
                if remaining > 0 {
                    let z: f64 = rng.sample(StandardNormal);
                    jitter = (jitter + step_sigma * z).clamp(-BURST_CLIP * rms, BURST_CLIP * rms);
                    remaining -= 1;
                } else {
                    jitter *= BURST_DECAY;
                }
                *v += jitter;
            }
        }
        out
    }
}

/// Unit triangle wave: 0 at u = 0, +1 at u = 1/4, -1 at u = 3/4.
fn triangle(u: f64) -> f64 {
    let x = (u + 0.25).rem_euclid(1.0);
    1.0 - 4.0 * (x - 0.5).abs()
}
