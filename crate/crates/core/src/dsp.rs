//! Post-processing of homodyne oscilloscope records.
//!
//! Raw records lose their central trigger region, are averaged in groups of
//! four samples and normalised against beam-blocked statistics:
//!
//! ```text
//! q[k] = (V_avg[k] - SN_m) * sqrt((1/2) / SN_var)
//! ```
//!
//! so vacuum has mean 0 and variance 1/2. Joint quadratures are
//! `(q1 ± q2)/√2`; squeezing is read from their rolling variances relative
//! to the shot-noise traces combined in exactly the same way.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::RawTrace;
use crate::to_db;

/// Fraction of the record discarded around the trigger pulse.
pub const TRIGGER_DISCARD_FRACTION: f64 = 0.05;
/// Raw samples averaged into one quadrature sample.
pub const SAMPLES_PER_QUADRATURE: usize = 4;
/// Vacuum quadrature variance after normalisation.
pub const VACUUM_VARIANCE: f64 = 0.5;
/// Sliding sums are rebuilt from scratch this often.
const RENORMALIZE_EVERY: usize = 100_000;

/// Averages adjacent groups of four samples; a trailing partial group is
/// dropped.
pub fn average4(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < SAMPLES_PER_QUADRATURE {
        return Err(Error::invalid(format!(
            "need at least {SAMPLES_PER_QUADRATURE} samples to average, got {}",
            raw.len()
        )));
    }
    Ok(raw
        .chunks_exact(SAMPLES_PER_QUADRATURE)
        .map(|c| c.iter().sum::<f64>() / SAMPLES_PER_QUADRATURE as f64)
        .collect())
}

/// Removes `count` samples centred in `v` and joins the two halves.
pub fn discard_central(v: &[f64], count: usize) -> Result<Vec<f64>> {
    if count > v.len() {
        return Err(Error::invalid(format!(
            "cannot discard {count} samples from a record of {}",
            v.len()
        )));
    }
    let start = (v.len() - count) / 2;
    let mut out = Vec::with_capacity(v.len() - count);
    out.extend_from_slice(&v[..start]);
    out.extend_from_slice(&v[start + count..]);
    Ok(out)
}

/// Drops the central `fraction` of the record.
pub fn discard_central_fraction(v: &[f64], fraction: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "discard fraction {fraction} outside [0, 1]"
        )));
    }
    discard_central(v, (fraction * v.len() as f64).round() as usize)
}

/// Drops the central 5 % of a raw record (10^5 of 2×10^6 samples).
pub fn discard_trigger_region(v: &[f64]) -> Result<Vec<f64>> {
    discard_central_fraction(v, TRIGGER_DISCARD_FRACTION)
}

/// Trigger-region discard followed by four-sample averaging.
pub fn preprocess(raw: &RawTrace) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    average4(&discard_trigger_region(&raw.samples)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotNoiseStats {
    pub mean: f64,
    pub variance: f64,
    pub n_samples: usize,
}

impl ShotNoiseStats {
    /// Mean and unbiased variance of preprocessed beam-blocked samples.
    pub fn from_samples(v_avg: &[f64]) -> Result<Self> {
        if v_avg.len() < 2 {
            return Err(Error::invalid("shot-noise statistics need at least two samples"));
        }
        let n = v_avg.len() as f64;
        let mean = v_avg.iter().sum::<f64>() / n;
        let variance = v_avg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let stats = ShotNoiseStats {
            mean,
            variance,
            n_samples: v_avg.len(),
        };
        stats.validate()?;
        Ok(stats)
    }

    fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "shot-noise variance {} must be positive",
                self.variance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTrace {
    pub q: Vec<f64>,
    /// Quadrature samples per second (raw rate / 4).
    pub quadrature_rate: f64,
}

impl QuadratureTrace {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

pub fn normalize(v_avg: &[f64], sn: &ShotNoiseStats, quadrature_rate: f64) -> Result<QuadratureTrace> {
    sn.validate()?;
    let scale = (VACUUM_VARIANCE / sn.variance).sqrt();
    Ok(QuadratureTrace {
        q: v_avg.iter().map(|v| (v - sn.mean) * scale).collect(),
        quadrature_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    Q1PlusQ2,
    Q1MinusQ2,
    SnPlus,
    SnMinus,
}

impl Combination {
    fn sign(self) -> f64 {
        match self {
            Combination::Q1PlusQ2 | Combination::SnPlus => 1.0,
            Combination::Q1MinusQ2 | Combination::SnMinus => -1.0,
        }
    }
}

/// `(q1 ± q2)/√2` over the common length.
pub fn combine(q1: &[f64], q2: &[f64], combination: Combination) -> Vec<f64> {
    let s = combination.sign();
    q1.iter()
        .zip(q2)
        .map(|(a, b)| (a + s * b) * std::f64::consts::FRAC_1_SQRT_2)
        .collect()
}

/// Unbiased variance of every length-`window` run of `x`.
///
/// Streams shifted sums of `x` and `x^2`; the sums and the shift are rebuilt
/// from the current window every 10^5 steps to bound drift.
pub fn rolling_variance(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::invalid(format!(
            "rolling window must be >= 2, got {window}"
        )));
    }
    if window > x.len() {
        return Err(Error::invalid(format!(
            "rolling window {window} exceeds series length {}",
            x.len()
        )));
    }
    let w = window as f64;
    let n_out = x.len() - window + 1;
    let mut out = Vec::with_capacity(n_out);

    let rebuild = |start: usize| -> (f64, f64, f64) {
        let win = &x[start..start + window];
        let shift = win.iter().sum::<f64>() / w;
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in win {
            let d = v - shift;
            s1 += d;
            s2 += d * d;
        }
        (shift, s1, s2)
    };

    let (mut shift, mut s1, mut s2) = rebuild(0);
    for i in 0..n_out {
        if i > 0 {
            if i % RENORMALIZE_EVERY == 0 {
                (shift, s1, s2) = rebuild(i);
            } else {
                let old = x[i - 1] - shift;
                let new = x[i + window - 1] - shift;
                s1 += new - old;
                s2 += new * new - old * old;
            }
        }
        out.push(((s2 - s1 * s1 / w) / (w - 1.0)).max(0.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingVarianceSeries {
    pub window: usize,
    pub combination: Combination,
    pub values: Vec<f64>,
}

impl RollingVarianceSeries {
    pub fn new(q1: &[f64], q2: &[f64], combination: Combination, window: usize) -> Result<Self> {
        if q1.len() != q2.len() {
            return Err(Error::DimensionMismatch {
                expected: q1.len(),
                found: q2.len(),
            });
        }
        Ok(RollingVarianceSeries {
            window,
            combination,
            values: rolling_variance(&combine(q1, q2, combination), window)?,
        })
    }
}

/// `|V+ - V-| / (V+ + V-)` per window.
fn visibility(plus: &[f64], minus: &[f64]) -> Result<Vec<f64>> {
    plus.iter()
        .zip(minus)
        .map(|(p, m)| {
            let total = p + m;
            if total <= 0.0 {
                Err(Error::DegenerateInput(
                    "joint variances vanish; inputs are constant".into(),
                ))
            } else {
                Ok((p - m).abs() / total)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySearch {
    /// Shift `d` such that `q1[k]` pairs with `q2[k + d]`.
    pub optimal_delay: i64,
    /// Mean absolute visibility at the optimum.
    pub objective: f64,
    /// `(delay, objective)` for every candidate, ascending delay.
    pub candidates: Vec<(i64, f64)>,
}

/// Length of the aligned overlap kept for every candidate delay.
pub fn aligned_len(k: usize, max_delay: usize) -> usize {
    k.saturating_sub(2 * max_delay)
}

/// `q1[D..K-D]` paired with `q2[D+d..K-D+d]`.
pub fn align<'a>(
    q1: &'a [f64],
    q2: &'a [f64],
    delay: i64,
    max_delay: usize,
) -> Result<(&'a [f64], &'a [f64])> {
    let k = q1.len().min(q2.len());
    if delay.unsigned_abs() as usize > max_delay {
        return Err(Error::invalid(format!(
            "delay {delay} exceeds max delay {max_delay}"
        )));
    }
    let len = aligned_len(k, max_delay);
    if len == 0 {
        return Err(Error::invalid(format!(
            "max delay {max_delay} leaves no overlap in {k} samples"
        )));
    }
    let start2 = (max_delay as i64 + delay) as usize;
    Ok((&q1[max_delay..max_delay + len], &q2[start2..start2 + len]))
}

/// Mean visibility between the rolling variances of `q1 + q2` and `q1 - q2`
/// for one candidate delay.
fn delay_objective(q1: &[f64], q2: &[f64], delay: i64, max_delay: usize, window: usize) -> Result<f64> {
    let (a, b) = align(q1, q2, delay, max_delay)?;
    let plus = rolling_variance(&combine(a, b, Combination::Q1PlusQ2), window)?;
    let minus = rolling_variance(&combine(a, b, Combination::Q1MinusQ2), window)?;
    let vis = visibility(&plus, &minus)?;
    Ok(vis.iter().sum::<f64>() / vis.len() as f64)
}

/// Direct search for the relative delay maximising the mean absolute
/// visibility of the joint rolling variances. Ties go to the smallest
/// `|d|`, then to the negative delay.
pub fn delay_search(q1: &[f64], q2: &[f64], max_delay: usize, window: usize) -> Result<DelaySearch> {
    let k = q1.len().min(q2.len());
    let len = aligned_len(k, max_delay);
    if window < 2 || window > len {
        return Err(Error::invalid(format!(
            "window {window} must lie in [2, {len}] for {k} samples and max delay {max_delay}"
        )));
    }
    let constant = |q: &[f64]| q.iter().all(|v| *v == q[0]);
    if constant(&q1[..k]) && constant(&q2[..k]) {
        return Err(Error::DegenerateInput(
            "both quadrature series are constant".into(),
        ));
    }
    let d = max_delay as i64;
    let candidates: Vec<(i64, f64)> = (-d..=d)
        .into_par_iter()
        .map(|delay| delay_objective(q1, q2, delay, max_delay, window).map(|obj| (delay, obj)))
        .collect::<Result<_>>()?;

    let rank = |delay: i64| (delay.unsigned_abs(), delay > 0);
    let (optimal_delay, objective) = candidates
        .iter()
        .copied()
        .fold(None, |best: Option<(i64, f64)>, (delay, obj)| match best {
            None => Some((delay, obj)),
            Some((bd, bo)) => {
                if obj > bo || (obj == bo && rank(delay) < rank(bd)) {
                    Some((delay, obj))
                } else {
                    Some((bd, bo))
                }
            }
        })
        .expect("at least one candidate");
    Ok(DelaySearch {
        optimal_delay,
        objective,
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub error_db: f64,
    /// Mean joint shot-noise rolling variance used as the 0 dB level.
    pub sn_reference: f64,
}

/// Rolling series behind a [`SqueezingReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointSeries {
    pub plus: RollingVarianceSeries,
    pub minus: RollingVarianceSeries,
    pub sn_plus: RollingVarianceSeries,
    pub sn_minus: RollingVarianceSeries,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Rolling variances of the signal and shot-noise joint quadratures.
pub fn joint_series(q1: &[f64], q2: &[f64], sn1: &[f64], sn2: &[f64], window: usize) -> Result<JointSeries> {
    if sn1.is_empty() || sn2.is_empty() {
        return Err(Error::invalid("a shot-noise reference is required"));
    }
    Ok(JointSeries {
        plus: RollingVarianceSeries::new(q1, q2, Combination::Q1PlusQ2, window)?,
        minus: RollingVarianceSeries::new(q1, q2, Combination::Q1MinusQ2, window)?,
        sn_plus: RollingVarianceSeries::new(sn1, sn2, Combination::SnPlus, window)?,
        sn_minus: RollingVarianceSeries::new(sn1, sn2, Combination::SnMinus, window)?,
    })
}

impl JointSeries {
    pub fn report(&self) -> Result<SqueezingReport> {
        let sn = self.sn_plus.values.iter().chain(&self.sn_minus.values).copied();
        let (reference, spread) = mean_std(sn);
        if reference.is_nan() || reference <= 0.0 {
            return Err(Error::DegenerateInput(
                "shot-noise reference variance is zero".into(),
            ));
        }
        let signal = self.plus.values.iter().chain(&self.minus.values).copied();
        let lo = signal.clone().fold(f64::INFINITY, f64::min);
        let hi = signal.fold(f64::NEG_INFINITY, f64::max);
        Ok(SqueezingReport {
            squeezing_db: to_db(lo / reference),
            antisqueezing_db: to_db(hi / reference),
            error_db: to_db(1.0 + spread / reference),
            sn_reference: reference,
        })
    }
}

/// Squeezing and anti-squeezing from delay-aligned quadratures: extremes of
/// the joint rolling variances over the mean joint shot-noise level. The
/// error is one standard deviation of the shot-noise rolling series.
pub fn squeezing_report(
    q1: &[f64],
    q2: &[f64],
    sn1: &[f64],
    sn2: &[f64],
    window: usize,
) -> Result<SqueezingReport> {
    joint_series(q1, q2, sn1, sn2, window)?.report()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayVariance {
    pub delay: i64,
    pub v_plus: f64,
    pub v_minus: f64,
}

fn window_variance(a: &[f64], b: &[f64], sign: f64) -> f64 {
    let n = a.len() as f64;
    let vals = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x + sign * y) * std::f64::consts::FRAC_1_SQRT_2);
    let mean = vals.clone().sum::<f64>() / n;
    vals.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Joint variances of the single window `q1[at..at+window]` against
/// `q2[at+d..at+d+window]` for each delay `d`.
pub fn variance_vs_delay(
    q1: &[f64],
    q2: &[f64],
    window: usize,
    at_index: usize,
    delays: &[i64],
) -> Result<Vec<DelayVariance>> {
    if window < 2 {
        return Err(Error::invalid(format!("window must be >= 2, got {window}")));
    }
    if at_index + window > q1.len() {
        return Err(Error::invalid(format!(
            "window [{at_index}, {}) exceeds {} samples",
            at_index + window,
            q1.len()
        )));
    }
    let a = &q1[at_index..at_index + window];
    delays
        .iter()
        .map(|&delay| {
            let start = at_index as i64 + delay;
            if start < 0 || start as usize + window > q2.len() {
                return Err(Error::invalid(format!(
                    "delay {delay} moves the window outside the second trace"
                )));
            }
            let b = &q2[start as usize..start as usize + window];
            Ok(DelayVariance {
                delay,
                v_plus: window_variance(a, b, 1.0),
                v_minus: window_variance(a, b, -1.0),
            })
        })
        .collect()
}

/// Full width at half maximum, in delay samples, of the correlation feature
/// `|V+ - V-|` in a variance-vs-delay profile with unit delay spacing.
pub fn coherence_fwhm(profile: &[DelayVariance]) -> Result<f64> {
    if profile.len() < 3 {
        return Err(Error::invalid("profile too short for a width estimate"));
    }
    if profile.windows(2).any(|w| w[1].delay != w[0].delay + 1) {
        return Err(Error::invalid("profile delays must be consecutive integers"));
    }
    let contrast: Vec<f64> = profile.iter().map(|p| (p.v_plus - p.v_minus).abs()).collect();
    let (peak, &top) = contrast
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let half = 0.5 * top;
    let crossing = |from: usize, step: isize| -> Option<f64> {
        let mut i = from as isize;
        loop {
            let next = i + step;
            if next < 0 || next as usize >= contrast.len() {
                return None;
            }
            let (ci, cn) = (contrast[i as usize], contrast[next as usize]);
            if cn <= half {
                let frac = (ci - half) / (ci - cn);
                return Some(i as f64 + step as f64 * frac);
            }
            i = next;
        }
    };
    match (crossing(peak, -1), crossing(peak, 1)) {
        (Some(left), Some(right)) => Ok(right - left),
        _ => Err(Error::DegenerateInput(
            "correlation feature does not fall to half maximum inside the profile".into(),
        )),
    }
}

/// Voltage variance of an RF power reading across `load_ohms`.
pub fn band_power_to_variance(power_dbm: f64, load_ohms: f64) -> Result<f64> {
    if load_ohms.is_nan() || load_ohms <= 0.0 {
        return Err(Error::invalid(format!("load {load_ohms} Ω must be positive")));
    }
    Ok(10f64.powf((power_dbm - 30.0) / 10.0) * load_ohms)
}

/// Parameters of a full analysis run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSettings {
    pub window: usize,
    pub max_delay: usize,
    /// Half-span of the variance-vs-delay profile around the optimum.
    #[serde(default = "default_profile_span")]
    pub profile_span: usize,
}

fn default_profile_span() -> usize {
    40
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            window: 10_000,
            max_delay: 100,
            profile_span: default_profile_span(),
        }
    }
}

/// Everything produced by [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    pub quadrature_rate: f64,
    pub delay: DelaySearch,
    pub report: SqueezingReport,
    pub series: JointSeries,
    pub profile: Vec<DelayVariance>,
    pub fwhm_samples: Option<f64>,
}

/// Quadratures of a signal/beam-blocked pair for one detector, both
/// normalised with the beam-blocked statistics.
pub fn detector_quadratures(
    signal: &RawTrace,
    shot_noise: &RawTrace,
) -> Result<(QuadratureTrace, QuadratureTrace)> {
    if signal.sample_rate != shot_noise.sample_rate {
        return Err(Error::invalid(format!(
            "sample rates differ: {} vs {} Hz",
            signal.sample_rate, shot_noise.sample_rate
        )));
    }
    let rate = signal.sample_rate / SAMPLES_PER_QUADRATURE as f64;
    let sn_avg = preprocess(shot_noise)?;
    let stats = ShotNoiseStats::from_samples(&sn_avg)?;
    let sig = normalize(&preprocess(signal)?, &stats, rate)?;
    let sn = normalize(&sn_avg, &stats, rate)?;
    Ok((sig, sn))
}

/// Runs the complete chain on two signal records and their beam-blocked
/// references.
pub fn analyze(
    signal: (&RawTrace, &RawTrace),
    shot_noise: (&RawTrace, &RawTrace),
    settings: &AnalysisSettings,
) -> Result<Analysis> {
    if signal.0.sample_rate != signal.1.sample_rate {
        return Err(Error::invalid(format!(
            "detector sample rates differ: {} vs {} Hz",
            signal.0.sample_rate, signal.1.sample_rate
        )));
    }
    let (q1, sn1) = detector_quadratures(signal.0, shot_noise.0)?;
    let (q2, sn2) = detector_quadratures(signal.1, shot_noise.1)?;
    let delay = delay_search(&q1.q, &q2.q, settings.max_delay, settings.window)?;
    let (a, b) = align(&q1.q, &q2.q, delay.optimal_delay, settings.max_delay)?;
    let series = joint_series(a, b, &sn1.q, &sn2.q, settings.window)?;
    let report = series.report()?;

    // profile the delay dependence at the window of strongest correlation
    let strongest = series
        .plus
        .values
        .iter()
        .zip(&series.minus.values)
        .map(|(p, m)| (p - m).abs())
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map_or(0, |(i, _)| i);
    let at_index = strongest + settings.max_delay;
    let span = settings.profile_span as i64;
    let delays: Vec<i64> = (delay.optimal_delay - span..=delay.optimal_delay + span).collect();
    let profile = variance_vs_delay(&q1.q, &q2.q, settings.window, at_index, &delays).unwrap_or_default();
    let fwhm_samples = coherence_fwhm(&profile).ok();

    Ok(Analysis {
        quadrature_rate: q1.quadrature_rate,
        delay,
        report,
        series,
        profile,
        fwhm_samples,
    })
}
