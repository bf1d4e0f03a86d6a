//! Embodied carbon: design, manufacturing, packaging, testing, retirement,
//! memory, and expected end-of-life replacement counts.
//!
//! Units are part of every field name. Carbon is kg CO2-eq throughout;
//! retire rates arrive in MTCO2E per ton of device mass and are converted
//! through the configured per-device mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{DrawSlot, ParamDistribution, ParamEval};
use crate::platform::PlatformSpec;

/// Process-node manufacturing profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyProfile {
    pub node_name: String,
    /// Fab energy per unit area, kWh/cm².
    pub epa_kwh_per_cm2: ParamDistribution,
    /// Direct greenhouse-gas emissions per processed wafer, kg CO2-eq/wafer.
    pub gpa_kg_per_wafer: ParamDistribution,
    pub wafer_area_cm2: f64,
    /// Defect density, defects/cm².
    pub defect_density_per_cm2: ParamDistribution,
    /// Negative-binomial clustering parameter.
    pub alpha: f64,
    pub materials_new_kg_per_cm2: f64,
    pub materials_recycled_kg_per_cm2: f64,
    pub recycled_fraction_rho: f64,
    pub fab_carbon_intensity_kg_per_kwh: ParamDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignHouseProfile {
    /// Design-house electricity use per year, GWh.
    pub annual_energy_gwh: f64,
    pub total_employees: u64,
    pub design_carbon_intensity_kg_per_kwh: ParamDistribution,
    /// Average staffing on this chip.
    pub employees_on_chip: f64,
    pub gates_per_project: f64,
    /// Per-IP design/verification durations, years.
    pub ip_durations_yr: Vec<f64>,
    pub soc_duration_yr: f64,
}

impl DesignHouseProfile {
    /// Project duration: IP blocks plus top-level SoC integration.
    pub fn project_duration_yr(&self) -> f64 {
        self.ip_durations_yr.iter().sum::<f64>() + self.soc_duration_yr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestProfile {
    /// Per-unit ATE time for each test type, hours.
    pub test_times_hr: Vec<f64>,
    pub slots: u32,
    pub overhead_hr: f64,
    pub ate_power_w: f64,
    pub test_carbon_intensity_kg_per_kwh: ParamDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetireProfile {
    pub recycle_fraction_delta: f64,
    pub recycle_credit_mtco2e_per_ton: ParamDistribution,
    pub discard_cost_mtco2e_per_ton: ParamDistribution,
    pub device_mass_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EolProfile {
    pub lambda_fail_per_yr: ParamDistribution,
    pub lambda_obsol_per_yr: ParamDistribution,
    pub lambda_upgrade_per_yr: ParamDistribution,
    /// Replacement-provisioning window: failed or obsolete units are replaced
    /// only while the fleet is inside this support period.
    #[serde(default = "default_support_window")]
    pub support_window_yr: f64,
}

fn default_support_window() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryProfile {
    pub cfp_kg_per_gb: ParamDistribution,
    pub capacity_gb: f64,
}

/// Affine package model: fixed assembly cost plus a per-area term. The
/// coefficients are calibration data standing in for an external monolithic
/// package model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageProfile {
    pub fixed_cfp_kg: f64,
    pub per_area_kg_per_cm2: f64,
}

/// One-time design CFP in kg for a chip of `n_gates`, scaled by the share of
/// a typical project it represents and the staffing-years it consumes.
pub fn design_cfp(profile: &DesignHouseProfile, n_gates: f64, eval: &ParamEval) -> Result<f64> {
    if profile.gates_per_project <= 0.0 {
        return Err(Error::Invalid(
            "design_house.gates_per_project must be > 0".into(),
        ));
    }
    if profile.total_employees == 0 {
        return Err(Error::Invalid("design_house.total_employees must be > 0".into()));
    }
    let ci = eval.value_nonneg(
        &profile.design_carbon_intensity_kg_per_kwh,
        DrawSlot::DesignCi,
    );
    // GWh/yr -> kWh/yr, spread over the whole company.
    let kwh_per_employee_yr = profile.annual_energy_gwh * 1.0e6 / profile.total_employees as f64;
    let cfp_per_employee_yr = kwh_per_employee_yr * ci;
    Ok(cfp_per_employee_yr
        * profile.employees_on_chip
        * (n_gates / profile.gates_per_project)
        * profile.project_duration_yr())
}

/// Negative-binomial die yield `(1 + A*D0/alpha)^(-alpha)`.
pub fn die_yield(area_cm2: f64, d0_per_cm2: f64, alpha: f64) -> f64 {
    debug_assert!(area_cm2 >= 0.0 && d0_per_cm2 >= 0.0 && alpha > 0.0);
    (1.0 + area_cm2 * d0_per_cm2 / alpha).powf(-alpha)
}

/// Manufacturing CFP per cm² at unit-area yield.
pub fn cfpa(tech: &TechnologyProfile, eval: &ParamEval) -> f64 {
    cfpa_at_area(tech, 1.0, eval)
}

/// CFPA with the yield divisor evaluated at a specific die area. The energy,
/// gas, and materials numerator stays per-cm²; yield loss inflates it.
pub fn cfpa_at_area(tech: &TechnologyProfile, yield_area_cm2: f64, eval: &ParamEval) -> f64 {
    let ci = eval.value_nonneg(&tech.fab_carbon_intensity_kg_per_kwh, DrawSlot::FabCi);
    let epa = eval.value_nonneg(&tech.epa_kwh_per_cm2, DrawSlot::Epa);
    let gpa = eval.value_nonneg(&tech.gpa_kg_per_wafer, DrawSlot::Gpa);
    let d0 = eval.value_nonneg(&tech.defect_density_per_cm2, DrawSlot::DefectDensity);
    let c_gas = gpa / tech.wafer_area_cm2;
    let c_materials = tech.recycled_fraction_rho * tech.materials_recycled_kg_per_cm2
        + (1.0 - tech.recycled_fraction_rho) * tech.materials_new_kg_per_cm2;
    let y = die_yield(yield_area_cm2, d0, tech.alpha);
    (ci * epa + c_gas + c_materials) / y
}

/// Manufacturing CFP in kg for one die. Yield is evaluated at the full die
/// area, matching die-level yield rather than unit-area yield.
pub fn manufacturing_cfp(die_area_mm2: f64, tech: &TechnologyProfile, eval: &ParamEval) -> f64 {
    debug_assert!(die_area_mm2 >= 0.0);
    let area_cm2 = die_area_mm2 / 100.0;
    if area_cm2 == 0.0 {
        return 0.0;
    }
    cfpa_at_area(tech, area_cm2, eval) * area_cm2
}

/// Package CFP in kg for one device.
pub fn package_cfp(die_area_mm2: f64, pkg: &PackageProfile) -> f64 {
    debug_assert!(die_area_mm2 >= 0.0);
    pkg.fixed_cfp_kg + pkg.per_area_kg_per_cm2 * die_area_mm2 / 100.0
}

/// Retire CFP in kg per device; negative when the recycling credit wins.
/// Rates in MTCO2E/ton convert via the device mass (1 MTCO2E = 1000 kg,
/// 1 ton = 1e6 g, net factor mass_g / 1000).
pub fn retire_cfp(profile: &RetireProfile, eval: &ParamEval) -> f64 {
    let delta = profile.recycle_fraction_delta;
    let c_recycle = eval.value_nonneg(&profile.recycle_credit_mtco2e_per_ton, DrawSlot::RecycleCredit);
    let c_dis = eval.value_nonneg(&profile.discard_cost_mtco2e_per_ton, DrawSlot::DiscardCost);
    ((1.0 - delta) * c_dis - delta * c_recycle) * profile.device_mass_g / 1000.0
}

/// Total ATE occupancy in hours for a lot of `n_units` devices.
pub fn testing_total_time(test: &TestProfile, n_units: u64) -> f64 {
    let per_type: f64 = test
        .test_times_hr
        .iter()
        .map(|t| n_units as f64 / f64::from(test.slots) * t)
        .sum();
    per_type + test.overhead_hr
}

/// Per-device testing CFP in kg. Replacement devices are physically
/// manufactured and tested, so they extend the lot (rounded up) and share
/// the total.
pub fn testing_cfp_per_device(
    test: &TestProfile,
    n_vol: u64,
    n_eol: f64,
    eval: &ParamEval,
) -> Result<f64> {
    let total_units = n_vol as f64 + n_eol;
    if total_units <= 0.0 {
        return Err(Error::Invalid(
            "testing requires at least one tested unit".into(),
        ));
    }
    let tested = n_vol + n_eol.ceil() as u64;
    let ci = eval.value_nonneg(&test.test_carbon_intensity_kg_per_kwh, DrawSlot::TestCi);
    let total_cfp = ci * (test.ate_power_w / 1000.0) * testing_total_time(test, tested);
    Ok(total_cfp / total_units)
}

/// Off-chip memory CFP in kg per device.
pub fn memory_cfp(mem: &MemoryProfile, eval: &ParamEval) -> f64 {
    debug_assert!(mem.capacity_gb >= 0.0);
    eval.value_nonneg(&mem.cfp_kg_per_gb, DrawSlot::MemCfpPerGb) * mem.capacity_gb
}

/// Sampled total end-of-life replacement rate, per year.
pub fn eol_rate(eol: &EolProfile, eval: &ParamEval) -> f64 {
    eval.value_nonneg(&eol.lambda_fail_per_yr, DrawSlot::LambdaFail)
        + eval.value_nonneg(&eol.lambda_obsol_per_yr, DrawSlot::LambdaObsol)
        + eval.value_nonneg(&eol.lambda_upgrade_per_yr, DrawSlot::LambdaUpgrade)
}

/// Expected number of device replacements over the fleet:
/// `N_vol * T_life * lambda_EOL`.
pub fn expected_replacements(n_vol: u64, t_life_yr: f64, eol: &EolProfile, eval: &ParamEval) -> f64 {
    debug_assert!(t_life_yr >= 0.0);
    n_vol as f64 * t_life_yr * eol_rate(eol, eval)
}

/// Devices of one type needed to host an application at iso-performance.
pub fn n_proc(app_size_gates: f64, cores_capacity_gates: f64) -> Result<u32> {
    if cores_capacity_gates <= 0.0 {
        return Err(Error::Invalid("cores_capacity_gates must be > 0".into()));
    }
    if app_size_gates <= 0.0 {
        return Err(Error::Invalid("app_size_gates must be > 0".into()));
    }
    Ok((app_size_gates / cores_capacity_gates).ceil() as u32)
}

/// Per-device embodied components in kg, already multiplied by the number of
/// devices an application requires.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DeviceCfp {
    pub manufacturing: f64,
    pub package: f64,
    pub retire: f64,
    pub test: f64,
    pub memory: f64,
}

impl DeviceCfp {
    pub fn total(&self) -> f64 {
        self.manufacturing + self.package + self.retire + self.test + self.memory
    }
}

/// Embodied CFP per deployed unit of an application:
/// `N_proc * (C_mfg + C_pkg + C_retire + C_test + C_mem)`, where `N_proc`
/// comes from the application size against this platform's capacity.
pub fn per_device_cfp(
    spec: &PlatformSpec,
    app_size_gates: f64,
    n_vol: u64,
    n_eol: f64,
    eval: &ParamEval,
) -> Result<DeviceCfp> {
    let procs = f64::from(n_proc(app_size_gates, spec.cores_capacity_gates)?);
    Ok(DeviceCfp {
        manufacturing: procs * manufacturing_cfp(spec.die_area_mm2, &spec.technology, eval),
        package: procs * package_cfp(spec.die_area_mm2, &spec.package),
        retire: procs * retire_cfp(&spec.retire, eval),
        test: procs * testing_cfp_per_device(&spec.test, n_vol, n_eol, eval)?,
        memory: procs * memory_cfp(&spec.memory, eval),
    })
}

/// Embodied fragment for one device generation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmbodiedFragment {
    pub design: f64,
    pub manufacturing: f64,
    pub package: f64,
    pub test: f64,
    pub retire: f64,
    pub memory: f64,
    /// Embodied carbon of the expected replacement devices.
    pub eol_replacement: f64,
    pub n_eol: f64,
}

impl EmbodiedFragment {
    pub fn total(&self) -> f64 {
        self.design
            + self.manufacturing
            + self.package
            + self.test
            + self.retire
            + self.memory
            + self.eol_replacement
    }
}

/// Embodied CFP of one generation: design once, plus `(N_vol + N_EOL)`
/// devices. The replacement share is recorded separately.
pub fn embodied_cfp(
    spec: &PlatformSpec,
    app_size_gates: f64,
    n_vol: u64,
    t_life_yr: f64,
    eval: &ParamEval,
) -> Result<EmbodiedFragment> {
    assert!(n_vol >= 1, "embodied_cfp requires n_vol >= 1");
    let n_eol = expected_replacements(n_vol, t_life_yr, &spec.eol, eval);
    let device = per_device_cfp(spec, app_size_gates, n_vol, n_eol, eval)?;
    let v = n_vol as f64;
    Ok(EmbodiedFragment {
        design: design_cfp(&spec.design_house, spec.n_gates, eval)?,
        manufacturing: v * device.manufacturing,
        package: v * device.package,
        test: v * device.test,
        retire: v * device.retire,
        memory: v * device.memory,
        eol_replacement: n_eol * device.total(),
        n_eol,
    })
}
