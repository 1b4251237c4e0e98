//! Subcommand implementations. Each returns the report to print; file
//! outputs are written atomically.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use tmsv_core::calibration::{fit_eta_p, r_from_power, SqueezeParams};
use tmsv_core::dsp::{self, Analysis, AnalysisSettings};
use tmsv_core::io::{self, TraceFormat};
use tmsv_core::sideband::{optimal_theta, rf_power_required, sfdr, sideband_powers, thd, SidebandDrive};
use tmsv_core::synth::{synthesize_pair, synthesize_shot_noise};
use tmsv_core::{Error, Result};

use crate::report::Report;
use crate::scenario::ScenarioFile;

pub const TRACE_NAMES: [&str; 4] = ["signal_1", "signal_2", "shot_noise_1", "shot_noise_2"];

pub fn expect(scenario: &ScenarioFile) -> Result<Report> {
    let p = scenario.prediction()?;
    Ok(Report::new()
        .with("name", p.name)
        .number("r", p.r)
        .number("t_b", p.t_b)
        .number("t_c", p.t_c)
        .number("squeezing_db", p.squeezing_db)
        .number("antisqueezing_db", p.antisqueezing_db))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Writes two signal traces, two beam-blocked traces and a metadata file.
pub fn simulate(scenario: &ScenarioFile, seed: u64, out_dir: &Path, format: TraceFormat) -> Result<Report> {
    let cfg = scenario.synth_config(seed)?;
    let (s1, s2) = synthesize_pair(&cfg)?;
    let (n1, n2) = synthesize_shot_noise(&cfg)?;
    create_dir(out_dir)?;
    let mut files = Vec::new();
    for (name, trace) in TRACE_NAMES.iter().zip([&s1, &s2, &n1, &n2]) {
        let file = format!("{name}.{}", format.extension());
        io::write_trace(&out_dir.join(&file), trace)?;
        files.push(file);
    }
    let prediction = scenario.prediction()?;
    let meta = json!({
        "scenario": scenario.name,
        "seed": seed,
        "n_samples": cfg.n_samples(),
        "sample_rate": cfg.sample_rate,
        "files": files,
        "analysis": scenario.analysis,
        "prediction": prediction,
        "config": cfg,
    });
    io::write_json(&out_dir.join("simulation.json"), &meta)?;
    Ok(Report::new()
        .with("scenario", scenario.name.clone())
        .with("seed", seed)
        .with("n_samples", cfg.n_samples())
        .with("out_dir", out_dir.display().to_string())
        .with("files", files))
}

/// Paths of the four traces written by [`simulate`] into `dir`.
pub fn simulated_paths(dir: &Path, format: TraceFormat) -> Vec<PathBuf> {
    TRACE_NAMES
        .iter()
        .map(|n| dir.join(format!("{n}.{}", format.extension())))
        .collect()
}

pub struct AnalyzeInputs<'a> {
    pub traces: [&'a Path; 2],
    pub shot_noise: [&'a Path; 2],
    pub sample_rate: Option<f64>,
}

fn series_csv(a: &Analysis, stride: usize) -> String {
    let s = &a.series;
    let n = [&s.plus, &s.minus, &s.sn_plus, &s.sn_minus]
        .iter()
        .map(|r| r.values.len())
        .min()
        .unwrap_or(0);
    let mut out = String::from("time_ms,V_plus,V_minus,V_SN_plus,V_SN_minus\n");
    for i in (0..n).step_by(stride.max(1)) {
        let t_ms = i as f64 / a.quadrature_rate * 1e3;
        out.push_str(&format!(
            "{t_ms},{},{},{},{}\n",
            s.plus.values[i], s.minus.values[i], s.sn_plus.values[i], s.sn_minus.values[i]
        ));
    }
    out
}

/// Full post-processing run. With `out_dir`, writes `report.json` and the
/// rolling-variance series `series.csv`.
pub fn analyze(
    inputs: &AnalyzeInputs,
    settings: &AnalysisSettings,
    out_dir: Option<&Path>,
    stride: usize,
) -> Result<Report> {
    let read = |p: &Path| io::read_trace(p, inputs.sample_rate);
    let (s1, s2) = (read(inputs.traces[0])?, read(inputs.traces[1])?);
    let (n1, n2) = (read(inputs.shot_noise[0])?, read(inputs.shot_noise[1])?);
    for t in [&s2, &n1, &n2] {
        if t.sample_rate != s1.sample_rate {
            return Err(Error::InvalidArgument(format!(
                "sample rates differ: {} vs {} Hz",
                s1.sample_rate, t.sample_rate
            )));
        }
    }
    let a = dsp::analyze((&s1, &s2), (&n1, &n2), settings)?;
    let fwhm_ns = a.fwhm_samples.map_or(f64::NAN, |w| w / a.quadrature_rate * 1e9);
    let report = Report::new()
        .with("optimal_delay", a.delay.optimal_delay)
        .number("squeezing_db", a.report.squeezing_db)
        .number("antisqueezing_db", a.report.antisqueezing_db)
        .number("error_db", a.report.error_db)
        .number("fwhm_samples", a.fwhm_samples.unwrap_or(f64::NAN))
        .number("fwhm_ns", fwhm_ns)
        .with("window", settings.window)
        .with("max_delay", settings.max_delay)
        .number("sn_reference", a.report.sn_reference);
    if let Some(dir) = out_dir {
        create_dir(dir)?;
        io::write_atomic(
            &dir.join("report.json"),
            report.render(crate::report::Format::Json).as_bytes(),
        )?;
        io::write_atomic(&dir.join("series.csv"), series_csv(&a, stride).as_bytes())?;
    }
    Ok(report)
}

pub fn fit(sweep: &Path, t_b: f64, t_c: f64, params: &SqueezeParams) -> Result<Report> {
    let points = io::read_sweep(sweep)?;
    let result = fit_eta_p(&points, t_b, t_c, params)?;
    let eta_p = result.eta_p().expect("η_P fit");
    let p_max = points.iter().map(|p| p.p_w).fold(0.0, f64::max);
    let r = r_from_power(&params.with_eta_p(eta_p).with_power(p_max))?;
    Ok(Report::new()
        .number("eta_p", eta_p)
        .number("r_at_pmax", r)
        .number("r_squared", result.r_squared))
}

pub enum SidebandDepth {
    Theta(f64),
    Optimize { order: i32, range: (f64, f64) },
}

pub fn sideband(depth: SidebandDepth, v_pi: f64, order: i32) -> Result<Report> {
    if !(v_pi > 0.0 && v_pi.is_finite()) {
        return Err(Error::InvalidArgument(format!("V_pi = {v_pi} must be positive")));
    }
    let (theta, order) = match depth {
        SidebandDepth::Theta(t) if t.is_finite() && t >= 0.0 => (t, order),
        SidebandDepth::Theta(t) => return Err(Error::InvalidArgument(format!("theta = {t} must be >= 0"))),
        SidebandDepth::Optimize { order, range } => (optimal_theta(order, range)?, order),
    };
    if order < 0 {
        return Err(Error::InvalidArgument(format!(
            "sideband order {order} must be >= 0"
        )));
    }
    let power = sideband_powers(theta, order as usize)[order as usize];
    Ok(Report::new()
        .with("order", order)
        .number("theta_rad", theta)
        .number("sideband_power", power)
        .number("v_pi", v_pi)
        .number(
            "rf_power_dbm",
            rf_power_required(&SidebandDrive::new(theta, v_pi)),
        ))
}

pub fn rf_metrics(peaks: &Path) -> Result<Report> {
    let peaks = io::read_peaks(peaks)?;
    Ok(Report::new()
        .number("thd_dbc", thd(&peaks)?)
        .number("sfdr_dbc", sfdr(&peaks)?))
}
