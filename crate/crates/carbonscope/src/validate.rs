//! Industry validation suite: evaluates the shipped industry scenarios and
//! compares them against the published per-device embodied figures.
//!
//! "Embodied per device" is the embodied carbon attributable to keeping one
//! deployed position running for one application, including replacement
//! provisioning: `C_emb_total / (N_app * N_vol)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::param::ParamEval;
use crate::platform::total_cfp;
use crate::scenario::builtin;

/// Published references. The TPUv4 report gives 172 kg CO2-eq embodied per
/// device with a 22/78 embodied/operational split; the H100 board report
/// implies about 109 kg per GPU.
pub const TPU_EMBODIED_TARGET_KG: f64 = 172.0;
pub const TPU_EMBODIED_SHARE_TARGET: f64 = 0.22;
pub const H100_EMBODIED_TARGET_KG: f64 = 109.0;
/// Relative tolerance on embodied comparisons.
pub const EMBODIED_REL_TOL: f64 = 0.15;
/// Absolute tolerance on the embodied share, in points.
pub const SHARE_ABS_TOL: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationMetric {
    pub label: String,
    pub estimate: f64,
    pub target: Option<f64>,
    /// Relative deviation from the target when one exists.
    pub delta: Option<f64>,
    pub within_tolerance: Option<bool>,
    /// Gating metrics decide the suite's exit status.
    pub gating: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub platform: String,
    pub metrics: Vec<ValidationMetric>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.metrics
            .iter()
            .filter(|m| m.gating)
            .all(|m| m.within_tolerance.unwrap_or(false))
    }
}

pub const VALIDATION_CASES: [&str; 4] = ["tpu_v4", "h100", "i9", "agilex7"];

fn canonical(case: &str) -> Result<(&'static str, &'static str)> {
    match case {
        "tpu_v4" | "industry_tpu" | "tpu" => Ok(("tpu_v4", "industry_tpu")),
        "h100" | "industry_h100" => Ok(("h100", "industry_h100")),
        "i9" | "industry_i9" => Ok(("i9", "industry_i9")),
        "agilex7" | "industry_agilex7" => Ok(("agilex7", "industry_agilex7")),
        other => Err(Error::Invalid(format!(
            "unknown validation case `{other}` (available: {})",
            VALIDATION_CASES.join(", ")
        ))),
    }
}

/// Run one industry validation case.
pub fn run_case(case: &str) -> Result<CaseReport> {
    let (case, scenario_name) = canonical(case)?;
    let file = builtin(scenario_name)?;
    let spec = &file.platforms[0];
    let breakdown = total_cfp(spec, &file.scenario, &ParamEval::Expected)?;

    let positions = file.scenario.n_vol as f64;
    let per_device_embodied = breakdown.embodied() / (f64::from(file.scenario.n_app) * positions);
    let embodied_share = breakdown.embodied() / breakdown.total;
    let operational_share = breakdown.operational / breakdown.total;

    let rel_metric = |label: &str, estimate: f64, target: f64, gating: bool| {
        let delta = (estimate - target) / target;
        ValidationMetric {
            label: label.to_string(),
            estimate,
            target: Some(target),
            delta: Some(delta),
            within_tolerance: Some(delta.abs() <= EMBODIED_REL_TOL),
            gating,
        }
    };
    let info_metric = |label: &str, estimate: f64| ValidationMetric {
        label: label.to_string(),
        estimate,
        target: None,
        delta: None,
        within_tolerance: None,
        gating: false,
    };

    let metrics = match case {
        "tpu_v4" => vec![
            rel_metric(
                "embodied per device (kg CO2-eq)",
                per_device_embodied,
                TPU_EMBODIED_TARGET_KG,
                true,
            ),
            ValidationMetric {
                label: "embodied share of total".to_string(),
                estimate: embodied_share,
                target: Some(TPU_EMBODIED_SHARE_TARGET),
                delta: Some(embodied_share - TPU_EMBODIED_SHARE_TARGET),
                within_tolerance: Some(
                    (embodied_share - TPU_EMBODIED_SHARE_TARGET).abs() <= SHARE_ABS_TOL,
                ),
                gating: true,
            },
            info_metric("operational share of total", operational_share),
        ],
        "h100" => vec![
            rel_metric(
                "embodied per device (kg CO2-eq)",
                per_device_embodied,
                H100_EMBODIED_TARGET_KG,
                true,
            ),
            info_metric("embodied share of total", embodied_share),
        ],
        "i9" => vec![
            info_metric("embodied per device (kg CO2-eq)", per_device_embodied),
            info_metric(
                "memory share of per-device embodied",
                breakdown.memory / breakdown.embodied(),
            ),
            info_metric("operational share of total", operational_share),
        ],
        "agilex7" => vec![
            info_metric("embodied per device (kg CO2-eq)", per_device_embodied),
            info_metric("operational share of total", operational_share),
        ],
        _ => unreachable!(),
    };

    Ok(CaseReport {
        case: case.to_string(),
        platform: spec.name.clone(),
        metrics,
    })
}

/// Run the whole industry suite.
pub fn run_all() -> Result<Vec<CaseReport>> {
    VALIDATION_CASES.iter().map(|c| run_case(c)).collect()
}
