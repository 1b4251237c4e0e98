//! Scenario documents: a loss budget, the squeezing strength and optional
//! synthesis and analysis settings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tmsv_core::budget::{predict, Arm, ChannelBudget};
use tmsv_core::calibration::{r_from_power, SqueezeParams};
use tmsv_core::dsp::AnalysisSettings;
use tmsv_core::synth::{DetectorBand, PhaseModel, SynthConfig, TriggerPulse};
use tmsv_core::{Error, Result, ScenarioPrediction};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthOverrides {
    pub sample_rate: Option<f64>,
    pub duration: Option<f64>,
    pub detector_band: Option<DetectorBand>,
    pub phase_b: Option<PhaseModel>,
    pub phase_c: Option<PhaseModel>,
    pub relative_delay_samples: Option<i64>,
    pub trigger: Option<TriggerPulse>,
    pub shot_noise_volts_rms: Option<f64>,
    pub lo_power_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub budget: ChannelBudget,
    /// Squeezing parameter; give either this or `pump`.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub pump: Option<SqueezeParams>,
    #[serde(default)]
    pub synth: SynthOverrides,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let scenario: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Format {
            path: origin.to_string(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        scenario.squeezing_parameter()?;
        scenario.budget.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn squeezing_parameter(&self) -> Result<f64> {
        match (self.r, &self.pump) {
            (Some(r), None) if r.is_finite() && r >= 0.0 => Ok(r),
            (Some(r), None) => Err(Error::InvalidArgument(format!("r = {r} must be finite and >= 0"))),
            (None, Some(pump)) => r_from_power(pump),
            (Some(_), Some(_)) => Err(Error::InvalidArgument("give either r or pump, not both".into())),
            (None, None) => Err(Error::InvalidArgument("scenario needs r or pump".into())),
        }
    }

    pub fn prediction(&self) -> Result<ScenarioPrediction> {
        let mut p = predict(&self.budget, self.squeezing_parameter()?)?;
        p.name = self.name.clone();
        Ok(p)
    }

    /// Synthesis settings: optical loss in the arms, electronics noise at
    /// the detectors, then the scenario overrides.
    pub fn synth_config(&self, seed: u64) -> Result<SynthConfig> {
        let o = &self.synth;
        let base = SynthConfig::default();
        let cfg = SynthConfig {
            r: self.squeezing_parameter()?,
            t_b: self.budget.optical_transmittance(Arm::C43)?,
            t_c: self.budget.optical_transmittance(Arm::C45)?,
            electronics_noise_db: self.budget.electronics_noise_db,
            sample_rate: o.sample_rate.unwrap_or(base.sample_rate),
            duration: o.duration.unwrap_or(base.duration),
            detector_band: o.detector_band.unwrap_or(base.detector_band),
            phase_b: o.phase_b.unwrap_or(base.phase_b),
            phase_c: o.phase_c.unwrap_or(base.phase_c),
            relative_delay_samples: o.relative_delay_samples.unwrap_or(0),
            trigger: o.trigger.unwrap_or(base.trigger),
            shot_noise_volts_rms: o.shot_noise_volts_rms.unwrap_or(base.shot_noise_volts_rms),
            lo_power_w: o.lo_power_w.unwrap_or(base.lo_power_w),
            rng_seed: seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
