//! Squeezing-parameter extraction from pump-power sweeps, and linear
//! shot-noise calibration fits.
//!
//! The squeezing parameter follows `r = sqrt(a L^2 (P_W / η_W) η_P)`. Sweeps
//! of squeezing and anti-squeezing versus pump power are fitted jointly by
//! folding the squeezing branch onto negative powers: for `P <= 0` the
//! squeezed level at `|P|` is predicted, for `P > 0` the anti-squeezed one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::analytic_squeezing;
use crate::optimize::grid_then_golden_min;

/// Arm transmittances of the configuration the pump sweep was taken in.
pub const SWEEP_T_B: f64 = 0.3097;
pub const SWEEP_T_C: f64 = 0.2576;

/// Lower bound of the η_P search interval.
pub const ETA_P_MIN: f64 = 1e-6;
/// Bracket width at which the η_P search stops.
pub const ETA_P_TOL: f64 = 1e-9;
/// Grid points scanned before the golden-section refinement.
pub const ETA_P_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeParams {
    /// Nonlinear efficiency, 1/(W cm^2).
    pub a: f64,
    /// Crystal length, cm.
    #[serde(rename = "L")]
    pub length_cm: f64,
    /// Waveguide transmission.
    pub eta_w: f64,
    /// Pump coupling into the waveguide.
    pub eta_p: f64,
    /// Pump power measured after the waveguide, W.
    pub p_w: f64,
}

impl SqueezeParams {
    /// PPLN source of the reference configuration at about 0.7 W pump.
    pub fn reference() -> Self {
        SqueezeParams {
            a: 0.24,
            length_cm: 2.5,
            eta_w: 0.53,
            eta_p: 0.49019,
            p_w: 0.7008,
        }
    }

    pub fn with_eta_p(self, eta_p: f64) -> Self {
        SqueezeParams { eta_p, ..self }
    }

    pub fn with_power(self, p_w: f64) -> Self {
        SqueezeParams { p_w, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.length_cm > 0.0) {
            return Err(Error::invalid("nonlinearity and crystal length must be positive"));
        }
        for (name, v) in [("eta_w", self.eta_w), ("eta_p", self.eta_p)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} = {v} outside (0, 1]")));
            }
        }
        if !(self.p_w >= 0.0 && self.p_w.is_finite()) {
            return Err(Error::invalid(format!("pump power {} W is invalid", self.p_w)));
        }
        Ok(())
    }
}

pub fn r_from_power(params: &SqueezeParams) -> Result<f64> {
    params.validate()?;
    Ok((params.a * params.length_cm.powi(2) * (params.p_w / params.eta_w) * params.eta_p).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepBranch {
    Squeezed,
    Antisqueezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepPoint {
    pub p_w: f64,
    pub level_db: f64,
    pub branch: SweepBranch,
}

impl PowerSweepPoint {
    /// Power with the squeezing branch folded onto the negative axis.
    pub fn signed_power(&self) -> f64 {
        match self.branch {
            SweepBranch::Squeezed => -self.p_w,
            SweepBranch::Antisqueezed => self.p_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParameter {
    EtaP(f64),
    Line { slope: f64, intercept: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameter: FitParameter,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn eta_p(&self) -> Option<f64> {
        match self.parameter {
            FitParameter::EtaP(v) => Some(v),
            FitParameter::Line { .. } => None,
        }
    }
}

/// `1 - SS_res / SS_tot`. A constant data set with zero residuals counts as
/// a perfect fit (1); constant data with nonzero residuals gives 0.
pub fn coefficient_of_determination(y: &[f64], residuals: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Predicted level in dB for a signed pump power.
pub fn piecewise_model(p_signed: f64, eta_p: f64, t_b: f64, t_c: f64, params: &SqueezeParams) -> Result<f64> {
    let r = r_from_power(&params.with_eta_p(eta_p).with_power(p_signed.abs()))?;
    let levels = analytic_squeezing(r, t_b, t_c)?;
    Ok(if p_signed <= 0.0 {
        levels.squeezing_db
    } else {
        levels.antisqueezing_db
    })
}

/// Noiseless sweep generated by [`piecewise_model`]: one squeezed and one
/// anti-squeezed point per power.
pub fn model_sweep(
    powers: &[f64],
    eta_p: f64,
    t_b: f64,
    t_c: f64,
    params: &SqueezeParams,
) -> Result<Vec<PowerSweepPoint>> {
    let mut out = Vec::with_capacity(2 * powers.len());
    for &p in powers {
        for branch in [SweepBranch::Squeezed, SweepBranch::Antisqueezed] {
            let signed = if branch == SweepBranch::Squeezed { -p } else { p };
            out.push(PowerSweepPoint {
                p_w: p,
                level_db: piecewise_model(signed, eta_p, t_b, t_c, params)?,
                branch,
            });
        }
    }
    Ok(out)
}

/// Unweighted least-squares fit of η_P in dB space.
///
/// `params` supplies `a`, `L` and `η_W`; its `eta_p` and `p_w` are ignored.
pub fn fit_eta_p(
    points: &[PowerSweepPoint],
    t_b: f64,
    t_c: f64,
    params: &SqueezeParams,
) -> Result<FitResult> {
    if points.is_empty() {
        return Err(Error::invalid("no sweep points to fit"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| p.p_w.is_nan() || p.p_w < 0.0 || !p.level_db.is_finite())
    {
        return Err(Error::invalid(format!("bad sweep point {p:?}")));
    }
    if points.iter().all(|p| p.p_w == 0.0) {
        return Err(Error::Unidentifiable(
            "every sweep point has zero pump power, so η_P has no effect".into(),
        ));
    }
    params.with_eta_p(1.0).with_power(0.0).validate()?;

    let residuals_at = |eta: f64| -> Vec<f64> {
        points
            .iter()
            .map(|p| {
                // validated above; model evaluation cannot fail inside (0, 1]
                let model = piecewise_model(p.signed_power(), eta, t_b, t_c, params).unwrap_or(f64::NAN);
                p.level_db - model
            })
            .collect()
    };
    let sse = |eta: f64| residuals_at(eta).iter().map(|r| r * r).sum::<f64>();
    let (eta, _) = grid_then_golden_min(sse, ETA_P_MIN, 1.0, ETA_P_GRID, ETA_P_TOL);
    let residuals = residuals_at(eta);
    let levels: Vec<f64> = points.iter().map(|p| p.level_db).collect();
    Ok(FitResult {
        parameter: FitParameter::EtaP(eta),
        r_squared: coefficient_of_determination(&levels, &residuals),
        residuals,
    })
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("a line needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all x values are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (slope * a + intercept))
        .collect();
    Ok(FitResult {
        parameter: FitParameter::Line { slope, intercept },
        r_squared: coefficient_of_determination(y, &residuals),
        residuals,
    })
}
