//! Electro-optic sideband generation and RF spectral purity metrics.
//!
//! A phase modulation `φ(t) = Θ sin(Δω t)` splits a carrier into sidebands
//! `n Δω` with amplitudes `J_n(Θ)` (Jacobi–Anger), so the relative optical
//! power in sideband `n` is `J_n(Θ)^2`.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::optimize::golden_section_min;

/// Angular tolerance of [`optimal_theta`].
pub const THETA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandDrive {
    /// Modulation depth Θ, radians.
    pub theta: f64,
    /// Half-wave voltage at the drive frequency, volts.
    pub v_pi: f64,
    pub drive_freq_hz: f64,
    pub load_ohms: f64,
}

impl SidebandDrive {
    pub fn new(theta: f64, v_pi: f64) -> Self {
        SidebandDrive {
            theta,
            v_pi,
            drive_freq_hz: 25e9,
            load_ohms: 50.0,
        }
    }
}

/// `|J_n(Θ)|^2` for `n = 0..=n_max`.
pub fn sideband_powers(theta: f64, n_max: usize) -> Vec<f64> {
    (0..=n_max as i32).map(|n| bessel_j(n, theta).powi(2)).collect()
}

/// Modulation depth maximising `|J_n(Θ)|` inside `range`.
///
/// Fails with [`Error::NoBracket`] when the best point sits on an end of the
/// range, i.e. the range does not contain an interior maximum.
pub fn optimal_theta(n: i32, range: (f64, f64)) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid(format!("sideband order must be >= 1, got {n}")));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("bad search range [{lo}, {hi}]")));
    }
    let (theta, _) = golden_section_min(|t| -bessel_j(n, t).abs(), lo, hi, THETA_TOL);
    let edge = 10.0 * THETA_TOL;
    if theta - lo < edge || hi - theta < edge {
        return Err(Error::NoBracket(format!(
            "|J_{n}| is largest at the edge of [{lo}, {hi}]"
        )));
    }
    Ok(theta)
}

/// RF drive power in dBm: `V_peak = Θ V_π / π`, `P = V_peak^2 / (2 R)`.
pub fn rf_power_required(drive: &SidebandDrive) -> f64 {
    let v_peak = drive.theta * drive.v_pi / std::f64::consts::PI;
    let watts = v_peak * v_peak / (2.0 * drive.load_ohms);
    10.0 * (watts * 1e3).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakKind {
    Fundamental,
    Harmonic,
    Spur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub freq_hz: f64,
    pub power_dbm: f64,
    pub kind: PeakKind,
}

impl SpectralPeak {
    pub fn new(freq_hz: f64, power_dbm: f64, kind: PeakKind) -> Self {
        SpectralPeak {
            freq_hz,
            power_dbm,
            kind,
        }
    }
}

fn fundamental(peaks: &[SpectralPeak]) -> Result<&SpectralPeak> {
    let mut it = peaks.iter().filter(|p| p.kind == PeakKind::Fundamental);
    let first = it
        .next()
        .ok_or_else(|| Error::invalid("peak list has no fundamental"))?;
    if it.next().is_some() {
        return Err(Error::invalid("peak list has more than one fundamental"));
    }
    Ok(first)
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Total harmonic distortion in dBc: summed harmonic power over the
/// fundamental. Spurs are excluded. No harmonics yields `-inf`.
pub fn thd(peaks: &[SpectralPeak]) -> Result<f64> {
    let fund = fundamental(peaks)?;
    let harmonic_mw: f64 = peaks
        .iter()
        .filter(|p| p.kind == PeakKind::Harmonic)
        .map(|p| dbm_to_mw(p.power_dbm))
        .sum();
    if harmonic_mw == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (harmonic_mw / dbm_to_mw(fund.power_dbm)).log10())
}

/// Spur-free dynamic range in dBc: fundamental minus the strongest
/// harmonic or spur.
pub fn sfdr(peaks: &[SpectralPeak]) -> Result<f64> {
    let fund = fundamental(peaks)?;
    let worst = peaks
        .iter()
        .filter(|p| p.kind != PeakKind::Fundamental)
        .map(|p| p.power_dbm)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))))
        .ok_or_else(|| Error::invalid("SFDR needs at least one harmonic or spur"))?;
    Ok(fund.power_dbm - worst)
}
