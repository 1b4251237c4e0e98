//! Loss ledgers for the two squeezed arms.
//!
//! Arm `C43` carries mode b and arm `C45` carries mode c of the two-mode
//! squeezer. Electronics noise enters as one more multiplicative
//! transmittance per arm (vacuum admixture), `T_eff = 1 - 10^(-ratio/10)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::analytic_squeezing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    C43,
    C45,
    #[serde(rename = "both")]
    Both,
}

impl Arm {
    fn covers(self, arm: Arm) -> bool {
        self == Arm::Both || self == arm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossItem {
    pub label: String,
    pub loss_db: f64,
    pub arm: Arm,
}

impl LossItem {
    pub fn new(label: impl Into<String>, loss_db: f64, arm: Arm) -> Self {
        LossItem {
            label: label.into(),
            loss_db,
            arm,
        }
    }
}

/// Whole-chain losses as quoted for a configuration, electronics included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmTotals {
    #[serde(rename = "C43")]
    pub c43: f64,
    #[serde(rename = "C45")]
    pub c45: f64,
}

/// Itemised loss ledger for both arms.
///
/// When `stated_total_db` is present it is authoritative for prediction and
/// the items are kept as documentation of where the loss comes from; the
/// quoted totals already contain the electronics contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBudget {
    pub name: String,
    #[serde(default)]
    pub items: Vec<LossItem>,
    /// Shot noise above electronics noise, dB. `None` means noiseless
    /// electronics.
    #[serde(default)]
    pub electronics_noise_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated_total_db: Option<ArmTotals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPrediction {
    pub name: String,
    pub r: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
}

/// `T = 10^(-loss/10)`.
pub fn db_to_transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Inverse of [`db_to_transmittance`]: loss in dB, positive for `T < 1`.
pub fn transmittance_to_db(t: f64) -> f64 {
    -10.0 * t.log10()
}

/// Equivalent transmittance of electronics noise sitting `ratio_db` below
/// shot noise.
pub fn electronics_effective_transmittance(ratio_db: f64) -> Result<f64> {
    if ratio_db.is_nan() || ratio_db <= 0.0 {
        return Err(Error::invalid(format!(
            "electronics noise ratio must be positive, got {ratio_db} dB"
        )));
    }
    Ok(1.0 - 10f64.powf(-ratio_db / 10.0))
}

impl ChannelBudget {
    pub fn new(name: impl Into<String>, items: Vec<LossItem>, electronics_noise_db: Option<f64>) -> Self {
        ChannelBudget {
            name: name.into(),
            items,
            electronics_noise_db,
            stated_total_db: None,
        }
    }

    pub fn with_stated_totals(mut self, c43: f64, c45: f64) -> Self {
        self.stated_total_db = Some(ArmTotals { c43, c45 });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for item in &self.items {
            if !item.loss_db.is_finite() || item.loss_db < 0.0 {
                return Err(Error::invalid(format!(
                    "loss item '{}' has invalid loss {} dB",
                    item.label, item.loss_db
                )));
            }
        }
        let elec = self.electronics_loss_db()?;
        if let Some(totals) = self.stated_total_db {
            for (arm, total) in [("C43", totals.c43), ("C45", totals.c45)] {
                if !total.is_finite() || total < elec {
                    return Err(Error::invalid(format!(
                        "stated total {total} dB for {arm} is below the electronics loss {elec:.3} dB"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sum of the items that apply to `arm`.
    pub fn total_db(&self, arm: Arm) -> f64 {
        self.items
            .iter()
            .filter(|item| item.arm.covers(arm))
            .map(|item| item.loss_db)
            .sum()
    }

    pub fn electronics_transmittance(&self) -> Result<f64> {
        self.electronics_noise_db
            .map_or(Ok(1.0), electronics_effective_transmittance)
    }

    pub fn electronics_loss_db(&self) -> Result<f64> {
        Ok(transmittance_to_db(self.electronics_transmittance()?))
    }

    /// Whole-chain loss of `arm` (C43 or C45), electronics included.
    pub fn arm_loss_db(&self, arm: Arm) -> Result<f64> {
        if let Some(totals) = self.stated_total_db {
            return match arm {
                Arm::C43 => Ok(totals.c43),
                Arm::C45 => Ok(totals.c45),
                Arm::Both => Err(Error::invalid("arm loss is defined per arm")),
            };
        }
        if arm == Arm::Both {
            return Err(Error::invalid("arm loss is defined per arm"));
        }
        Ok(self.total_db(arm) + self.electronics_loss_db()?)
    }

    pub fn arm_transmittance(&self, arm: Arm) -> Result<f64> {
        Ok(db_to_transmittance(self.arm_loss_db(arm)?))
    }

    /// Arm transmittance with the electronics term removed: the purely
    /// optical part that a trace synthesiser models as loss, leaving the
    /// electronics to be added as physical noise.
    pub fn optical_transmittance(&self, arm: Arm) -> Result<f64> {
        Ok((self.arm_transmittance(arm)? / self.electronics_transmittance()?).min(1.0))
    }

    /// Returns a copy with one more item appended.
    pub fn with_item(&self, item: LossItem) -> Self {
        let mut out = self.clone();
        out.items.push(item);
        out
    }
}

/// Predicted (anti-)squeezing of `budget` for squeezing parameter `r`.
pub fn predict(budget: &ChannelBudget, r: f64) -> Result<ScenarioPrediction> {
    budget.validate()?;
    let t_b = budget.arm_transmittance(Arm::C43)?;
    let t_c = budget.arm_transmittance(Arm::C45)?;
    let levels = analytic_squeezing(r, t_b, t_c)?;
    Ok(ScenarioPrediction {
        name: budget.name.clone(),
        r,
        t_b,
        t_c,
        squeezing_db: levels.squeezing_db,
        antisqueezing_db: levels.antisqueezing_db,
    })
}

/// Standalone budget document: a ledger plus the squeezing parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetFile {
    pub name: String,
    #[serde(default)]
    pub items: Vec<LossItem>,
    #[serde(default)]
    pub electronics_noise_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated_total_db: Option<ArmTotals>,
    pub r: f64,
}

impl BudgetFile {
    pub fn budget(&self) -> ChannelBudget {
        ChannelBudget {
            name: self.name.clone(),
            items: self.items.clone(),
            electronics_noise_db: self.electronics_noise_db,
            stated_total_db: self.stated_total_db,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Loss items common to both arms before distribution: coupling, waveguide
/// propagation and detection efficiency.
fn source_items() -> Vec<LossItem> {
    vec![
        LossItem::new("waveguide-to-fiber coupling", 2.3, Arm::Both),
        LossItem::new(
            "waveguide propagation (0.2 dB/cm, pairs born mid-guide)",
            0.25,
            Arm::Both,
        ),
        LossItem::new("detection efficiency", 0.5, Arm::Both),
        LossItem::new("homodyne beamsplitter transmission", 0.4, Arm::C43),
        LossItem::new("homodyne beamsplitter transmission", 0.5, Arm::C45),
        LossItem::new("optics between waveguide and detector", 1.5, Arm::C43),
        LossItem::new("optics between waveguide and detector", 2.3, Arm::C45),
    ]
}

/// Reference configuration: no added fiber, spectrum-analyser electronics
/// 15 dB below shot noise, totals 5.09 dB (C43) and 5.89 dB (C45).
pub fn reference_budget() -> ChannelBudget {
    ChannelBudget::new("reference", source_items(), Some(15.0)).with_stated_totals(5.09, 5.89)
}

/// Reference configuration plus 5-km spools on each channel.
pub fn spools_5km_budget() -> ChannelBudget {
    let mut items = source_items();
    items.push(LossItem::new("5-km fiber spool", 1.1, Arm::C43));
    items.push(LossItem::new("5-km fiber spool", 1.2, Arm::C45));
    ChannelBudget::new("spools5km", items, Some(15.0)).with_stated_totals(6.19, 7.09)
}

/// Deployed campus fiber, oscilloscope electronics 13 dB below shot noise.
pub fn deployed_budget() -> ChannelBudget {
    ChannelBudget::new("deployed", Vec::new(), Some(13.0)).with_stated_totals(9.77, 7.97)
}
