//! Distributed two-mode squeezed vacuum: prediction, synthesis and recovery.
//!
//! The crate is organised around the measurement chain:
//!
//! * [`gaussian`]: covariance-matrix algebra for N bosonic modes and the
//!   closed-form joint-quadrature variances of a lossy two-mode squeezer.
//! * [`budget`]: dB loss ledgers reduced to arm transmittances and predicted
//!   (anti-)squeezing.
//! * [`synth`]: seeded dual-detector oscilloscope traces with band-limited
//!   correlated shot noise, electronics noise and trigger pulses.
//! * [`dsp`]: the post-processing chain (4-sample averaging, trigger-region
//!   discard, shot-noise normalisation, rolling variance, delay search).
//! * [`calibration`]: squeezing-vs-pump-power fits and shot-noise linearity.
//! * [`sideband`]: Jacobi–Anger sideband powers, drive power and THD/SFDR.
//! * [`io`]: trace, sweep and peak-list file formats.
//!
//! Quadrature variances inside [`gaussian`] use the vacuum-variance-1
//! convention; [`dsp`] produces quadratures with vacuum variance 1/2. Both
//! report squeezing as a dB ratio against an identically processed vacuum
//! reference, so the two conventions agree on every reported level.

pub mod bessel;
pub mod budget;
pub mod calibration;
pub mod dsp;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod optimize;
pub mod sideband;
pub mod synth;

pub use budget::{Arm, ChannelBudget, LossItem, ScenarioPrediction};
pub use calibration::{FitParameter, FitResult, PowerSweepPoint, SqueezeParams, SweepBranch};
pub use dsp::{
    Combination, DelaySearch, QuadratureTrace, RollingVarianceSeries, ShotNoiseStats, SqueezingReport,
};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, JointVariances, SqueezingLevels, SymplecticMap};
pub use sideband::{PeakKind, SidebandDrive, SpectralPeak};
pub use synth::{PhaseKind, PhaseModel, RawTrace, SynthConfig, TraceMeta};

/// Converts a linear power ratio to dB.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Converts dB to a linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
