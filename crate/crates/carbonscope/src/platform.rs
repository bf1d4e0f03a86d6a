//! Composes embodied and deployment fragments into total lifecycle CFP per
//! platform and scenario, including multi-application device generations.

use serde::{Deserialize, Serialize};

use crate::deploy::{deployment_cfp, OperationProfile, ReconfigProfile};
use crate::embodied::{
    embodied_cfp, n_proc, DesignHouseProfile, EolProfile, MemoryProfile, PackageProfile,
    RetireProfile, TechnologyProfile, TestProfile,
};
use crate::error::{Error, Result};
use crate::param::ParamEval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatformKind {
    Asic,
    Fpga,
    Gpu,
    Cpu,
}

impl PlatformKind {
    pub fn is_reconfigurable(&self) -> bool {
        !matches!(self, PlatformKind::Asic)
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlatformKind::Asic => "ASIC",
            PlatformKind::Fpga => "FPGA",
            PlatformKind::Gpu => "GPU",
            PlatformKind::Cpu => "CPU",
        }
    }
}

/// One device design under comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub name: String,
    pub kind: PlatformKind,
    pub die_area_mm2: f64,
    pub p_use_w: f64,
    pub n_gates: f64,
    pub cores_capacity_gates: f64,
    pub technology: TechnologyProfile,
    pub design_house: DesignHouseProfile,
    pub package: PackageProfile,
    pub test: TestProfile,
    pub retire: RetireProfile,
    pub eol: EolProfile,
    pub memory: MemoryProfile,
    pub reconfig: ReconfigProfile,
    /// Applications one device generation of this platform can serve before
    /// a redesign is needed (the `k` in GPU_kApp). Ignored for ASICs.
    pub apps_per_device: Option<u32>,
}

/// The usage question: how many applications, for how long, at what volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentScenario {
    pub n_app: u32,
    pub t_i_yr: f64,
    pub n_vol: u64,
    pub f_use: f64,
    pub app_size_gates: f64,
    /// Scenario-wide default for platforms that do not set their own.
    pub apps_per_device: Option<u32>,
    pub carbon_intensity_use_kg_per_kwh: crate::param::ParamDistribution,
    pub aging: crate::deploy::AgingModel,
    /// Whether operational carbon scales with the devices per application.
    pub scale_op_by_nproc: bool,
    /// Simpson panels for the aging-energy integral.
    pub energy_steps: u32,
}

/// Carbon result in kg CO2-eq, decomposed by lifecycle stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CfpBreakdown {
    pub design: f64,
    pub manufacturing: f64,
    pub package: f64,
    pub test: f64,
    pub retire: f64,
    pub memory: f64,
    pub eol_replacement: f64,
    pub operational: f64,
    pub reconfiguration: f64,
    pub total: f64,
}

impl CfpBreakdown {
    pub fn embodied(&self) -> f64 {
        self.design
            + self.manufacturing
            + self.package
            + self.test
            + self.retire
            + self.memory
            + self.eol_replacement
    }

    pub fn component_sum(&self) -> f64 {
        self.embodied() + self.operational + self.reconfiguration
    }

    fn finalize(mut self) -> Self {
        self.total = self.component_sum();
        self
    }
}

/// Device generations needed for `n_app` applications with `apps_per_device`
/// applications per generation.
pub fn device_generations(n_app: u32, apps_per_device: u32) -> u32 {
    debug_assert!(n_app >= 1 && apps_per_device >= 1);
    n_app.div_ceil(apps_per_device)
}

/// Effective applications-per-generation for a platform in a scenario.
/// ASICs are always one design per application; processors default to full
/// reuse across every application.
pub fn effective_apps_per_device(spec: &PlatformSpec, scenario: &DeploymentScenario) -> u32 {
    match spec.kind {
        PlatformKind::Asic => 1,
        _ => spec
            .apps_per_device
            .or(scenario.apps_per_device)
            .unwrap_or(scenario.n_app)
            .clamp(1, scenario.n_app.max(1)),
    }
}

/// Derive a scaled testcase: area and power multiplied, everything else
/// inherited.
pub fn build_testcase(base: &PlatformSpec, area_ratio: f64, power_ratio: f64) -> PlatformSpec {
    assert!(area_ratio > 0.0 && power_ratio > 0.0);
    let mut spec = base.clone();
    spec.die_area_mm2 *= area_ratio;
    spec.p_use_w *= power_ratio;
    spec
}

/// Total lifecycle CFP of one platform over a deployment scenario.
///
/// ASIC: every application gets a fresh design and manufacturing run whose
/// devices live for that application's lifetime. Processors: applications
/// are grouped onto device generations; each generation carries design and
/// manufacturing once, replacements are provisioned over the generation's
/// deployment span capped at the support window, and the aging clock runs
/// across the applications a generation serves.
pub fn total_cfp(
    spec: &PlatformSpec,
    scenario: &DeploymentScenario,
    eval: &ParamEval,
) -> Result<CfpBreakdown> {
    if scenario.n_app < 1 {
        return Err(Error::Invalid("scenario.n_app must be >= 1".into()));
    }
    if scenario.n_vol < 1 {
        return Err(Error::Invalid("scenario.n_vol must be >= 1".into()));
    }
    if !scenario.t_i_yr.is_finite() || scenario.t_i_yr <= 0.0 {
        return Err(Error::Invalid("scenario.t_i_yr must be > 0".into()));
    }

    let k = effective_apps_per_device(spec, scenario);
    let gens = device_generations(scenario.n_app, k);
    let procs = n_proc(scenario.app_size_gates, spec.cores_capacity_gates)?;
    let op = OperationProfile {
        p_use_w: spec.p_use_w,
        f_use: scenario.f_use,
        carbon_intensity_use_kg_per_kwh: scenario.carbon_intensity_use_kg_per_kwh.clone(),
        aging: scenario.aging,
    };

    let mut acc = CfpBreakdown::default();
    let mut apps_left = scenario.n_app;
    for _ in 0..gens {
        let apps_in_gen = apps_left.min(k);
        apps_left -= apps_in_gen;
        let deploy_span_yr = f64::from(apps_in_gen) * scenario.t_i_yr;
        let provision_yr = deploy_span_yr.min(spec.eol.support_window_yr);

        let emb = embodied_cfp(
            spec,
            scenario.app_size_gates,
            scenario.n_vol,
            provision_yr,
            eval,
        )?;
        acc.design += emb.design;
        acc.manufacturing += emb.manufacturing;
        acc.package += emb.package;
        acc.test += emb.test;
        acc.retire += emb.retire;
        acc.memory += emb.memory;
        acc.eol_replacement += emb.eol_replacement;

        let dep = deployment_cfp(
            &op,
            &spec.reconfig,
            scenario.n_vol,
            procs,
            apps_in_gen,
            0.0,
            scenario.t_i_yr,
            scenario.energy_steps,
            scenario.scale_op_by_nproc,
            eval,
        );
        acc.operational += dep.operational;
        acc.reconfiguration += dep.reconfiguration;
    }
    Ok(acc.finalize())
}
