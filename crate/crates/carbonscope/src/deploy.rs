//! Operational carbon with reliability-aware aging, plus the
//! reconfiguration / application-development overhead.

use serde::{Deserialize, Serialize};

use crate::param::{DrawSlot, ParamDistribution, ParamEval};

/// Mean Gregorian year (365.25 days).
pub const HOURS_PER_YEAR: f64 = 8766.0;
pub const HOURS_PER_MONTH: f64 = 730.5;

/// Multiplicative energy-efficiency degradation over device age.
/// `PowerLaw` gives `gamma(t) = 1 + k * t^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgingModel {
    None,
    PowerLaw { k: f64, n: f64 },
}

impl AgingModel {
    pub fn is_none(&self) -> bool {
        matches!(self, AgingModel::None)
    }
}

/// Field-operation parameters for one platform in one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationProfile {
    pub p_use_w: f64,
    pub f_use: f64,
    pub carbon_intensity_use_kg_per_kwh: ParamDistribution,
    pub aging: AgingModel,
}

/// Per-application development and per-device configuration effort.
/// Development times are months; configuration time is hours per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconfigProfile {
    pub t_sw_dev_mo: f64,
    pub t_compile_mo: f64,
    pub t_reg_mo: f64,
    pub t_app_config_hr: f64,
    pub dev_system_power_w: f64,
    pub dev_carbon_intensity_kg_per_kwh: ParamDistribution,
}

pub fn aging_factor(model: &AgingModel, t_yr: f64) -> f64 {
    debug_assert!(t_yr >= 0.0);
    match model {
        AgingModel::None => 1.0,
        AgingModel::PowerLaw { k, n } => 1.0 + k * t_yr.powf(*n),
    }
}

/// `∫ gamma(t) dt` over `[t0, t1]` in years. Composite Simpson's rule over
/// `n_steps` panels; exact closed form when there is no aging.
pub fn aging_integral(model: &AgingModel, t0_yr: f64, t1_yr: f64, n_steps: u32) -> f64 {
    debug_assert!(0.0 <= t0_yr && t0_yr <= t1_yr);
    if t1_yr == t0_yr {
        return 0.0;
    }
    if model.is_none() {
        return t1_yr - t0_yr;
    }
    // Simpson needs an even panel count.
    let panels = (n_steps.max(2) + n_steps % 2) as u64;
    let h = (t1_yr - t0_yr) / panels as f64;
    let mut acc = aging_factor(model, t0_yr) + aging_factor(model, t1_yr);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * aging_factor(model, t0_yr + i as f64 * h);
    }
    acc * h / 3.0
}

/// Lifetime energy in kWh: `P_use * f_use * ∫ gamma`, hours at 8766 per year.
/// With no aging this is the exact closed form `P * f * T * 8766 / 1000`.
pub fn lifetime_energy(op: &OperationProfile, t_life_yr: f64, n_steps: u32) -> f64 {
    lifetime_energy_window(op, 0.0, t_life_yr, n_steps)
}

/// Energy over a device-age window `[age0, age1]`, used when a reused
/// processor runs several applications back to back.
pub fn lifetime_energy_window(op: &OperationProfile, age0_yr: f64, age1_yr: f64, n_steps: u32) -> f64 {
    if op.aging.is_none() {
        return op.p_use_w * op.f_use * (age1_yr - age0_yr) * HOURS_PER_YEAR / 1000.0;
    }
    op.p_use_w * op.f_use * aging_integral(&op.aging, age0_yr, age1_yr, n_steps) * HOURS_PER_YEAR
        / 1000.0
}

/// Operational CFP in kg over `[0, t_life_yr]`.
pub fn operational_cfp(op: &OperationProfile, t_life_yr: f64, n_steps: u32, eval: &ParamEval) -> f64 {
    operational_cfp_window(op, 0.0, t_life_yr, n_steps, eval)
}

pub fn operational_cfp_window(
    op: &OperationProfile,
    age0_yr: f64,
    age1_yr: f64,
    n_steps: u32,
    eval: &ParamEval,
) -> f64 {
    let ci = eval.value_nonneg(&op.carbon_intensity_use_kg_per_kwh, DrawSlot::UseCi);
    ci * lifetime_energy_window(op, age0_yr, age1_yr, n_steps)
}

/// Total reconfiguration time in hours: per-application development months
/// plus per-deployed-device configuration time.
pub fn reconfig_time(rc: &ReconfigProfile, n_app: u32, n_vol: u64) -> f64 {
    f64::from(n_app) * (rc.t_sw_dev_mo + rc.t_compile_mo + rc.t_reg_mo) * HOURS_PER_MONTH
        + n_vol as f64 * rc.t_app_config_hr
}

/// Reconfiguration CFP in kg: development-system power times carbon
/// intensity times the reconfiguration time.
pub fn reconfig_cfp(rc: &ReconfigProfile, n_app: u32, n_vol: u64, eval: &ParamEval) -> f64 {
    let ci = eval.value_nonneg(&rc.dev_carbon_intensity_kg_per_kwh, DrawSlot::DevCi);
    ci * (rc.dev_system_power_w / 1000.0) * reconfig_time(rc, n_app, n_vol)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DeploymentFragment {
    pub operational: f64,
    pub reconfiguration: f64,
}

impl DeploymentFragment {
    pub fn total(&self) -> f64 {
        self.operational + self.reconfiguration
    }
}

/// Deployment CFP for a segment of `n_app_segment` applications run back to
/// back on one device generation, each lasting `t_i_yr`. The aging clock
/// starts at `age_start_yr`. Operational carbon scales with the fleet volume
/// and, when `scale_op_by_nproc` is set, with the devices per application.
#[allow(clippy::too_many_arguments)]
pub fn deployment_cfp(
    op: &OperationProfile,
    rc: &ReconfigProfile,
    n_vol: u64,
    n_proc: u32,
    n_app_segment: u32,
    age_start_yr: f64,
    t_i_yr: f64,
    n_steps: u32,
    scale_op_by_nproc: bool,
    eval: &ParamEval,
) -> DeploymentFragment {
    let proc_factor = if scale_op_by_nproc {
        f64::from(n_proc)
    } else {
        1.0
    };
    let mut operational = 0.0;
    for j in 0..n_app_segment {
        let a0 = age_start_yr + f64::from(j) * t_i_yr;
        let c_op = operational_cfp_window(op, a0, a0 + t_i_yr, n_steps, eval);
        operational += n_vol as f64 * proc_factor * c_op;
    }
    let reconfiguration = reconfig_cfp(rc, n_app_segment, n_vol, eval);
    DeploymentFragment {
        operational,
        reconfiguration,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamDistribution;

    fn op(p: f64, f: f64, ci: f64, aging: AgingModel) -> OperationProfile {
        OperationProfile {
            p_use_w: p,
            f_use: f,
            carbon_intensity_use_kg_per_kwh: ParamDistribution::point_mass(ci),
            aging,
        }
    }

    #[test]
    fn no_degradation_factor_is_one() {
        assert_eq!(aging_factor(&AgingModel::None, 0.0), 1.0);
        assert_eq!(aging_factor(&AgingModel::None, 37.5), 1.0);
    }

    #[test]
    fn power_law_factor_hand_value() {
        let m = AgingModel::PowerLaw { k: 0.05, n: 0.5 };
        assert!((aging_factor(&m, 4.0) - 1.1).abs() < 1e-12);
        assert_eq!(aging_factor(&m, 0.0), 1.0);
    }

    #[test]
    fn closed_form_energy_is_exact_without_aging() {
        let e = lifetime_energy(&op(10.0, 0.2, 0.475, AgingModel::None), 2.0, 4);
        assert_eq!(e, 10.0 * 0.2 * 2.0 * HOURS_PER_YEAR / 1000.0);
        assert!((e - 35.064).abs() < 1e-9);
        assert_eq!(lifetime_energy(&op(10.0, 0.2, 0.475, AgingModel::None), 0.0, 4), 0.0);
    }

    #[test]
    fn simpson_matches_linear_antiderivative() {
        let aging = AgingModel::PowerLaw { k: 0.1, n: 1.0 };
        let o = op(1000.0, 1.0, 1.0, aging);
        let got = lifetime_energy(&o, 2.0, 64);
        let expect = 1000.0 * (2.0 + 0.1 * 4.0 / 2.0) * HOURS_PER_YEAR / 1000.0;
        assert!((got - expect).abs() / expect < 1e-6);
    }

    #[test]
    fn simpson_matches_bruteforce_trapezoid_for_defaults() {
        let aging = AgingModel::PowerLaw { k: 0.05, n: 0.2 };
        for t in [0.5, 2.0, 10.0] {
            let simpson = aging_integral(&aging, 0.0, t, 10_000);
            let oracle = crate::oracle::integrate_energy_bruteforce(&aging, t, 1_000_000);
            assert!(
                (simpson - oracle).abs() / oracle < 1e-6,
                "t={t}: {simpson} vs {oracle}"
            );
        }
    }

    #[test]
    fn operational_cfp_hand_values() {
        let o = op(10.0, 0.2, 0.475, AgingModel::None);
        let c = operational_cfp(&o, 2.0, 4, &ParamEval::Expected);
        assert!((c - 16.6554).abs() < 1e-9);

        let free = op(10.0, 0.2, 0.0, AgingModel::None);
        assert_eq!(operational_cfp(&free, 2.0, 4, &ParamEval::Expected), 0.0);
    }

    #[test]
    fn aging_never_reduces_operational_cfp() {
        let base = op(25.0, 0.5, 0.4, AgingModel::None);
        let aged = op(25.0, 0.5, 0.4, AgingModel::PowerLaw { k: 0.05, n: 0.2 });
        for t in [0.5, 1.0, 3.0, 8.0] {
            let a = operational_cfp(&aged, t, 512, &ParamEval::Expected);
            let b = operational_cfp(&base, t, 512, &ParamEval::Expected);
            assert!(a >= b, "t={t}");
        }
    }

    fn rc(sw: f64, comp: f64, reg: f64, cfg_hr: f64, power: f64, ci: f64) -> ReconfigProfile {
        ReconfigProfile {
            t_sw_dev_mo: sw,
            t_compile_mo: comp,
            t_reg_mo: reg,
            t_app_config_hr: cfg_hr,
            dev_system_power_w: power,
            dev_carbon_intensity_kg_per_kwh: ParamDistribution::point_mass(ci),
        }
    }

    #[test]
    fn reconfig_time_hand_values() {
        let r = rc(1.0, 0.6, 0.4, 0.0, 200.0, 0.475);
        assert_eq!(reconfig_time(&r, 0, 0), 0.0);
        assert!((reconfig_time(&r, 1, 0) - 1461.0).abs() < 1e-9);
    }

    #[test]
    fn reconfig_cfp_hand_value() {
        let r = rc(1.0, 0.6, 0.4, 0.0, 200.0, 0.475);
        let c = reconfig_cfp(&r, 1, 0, &ParamEval::Expected);
        assert!((c - 138.795).abs() < 1e-6);

        let silent = rc(1.0, 0.6, 0.4, 0.0, 0.0, 0.475);
        assert_eq!(reconfig_cfp(&silent, 3, 1000, &ParamEval::Expected), 0.0);
    }

    #[test]
    fn deployment_composes_operational_and_reconfig() {
        let o = op(10.0, 0.2, 0.475, AgingModel::None);
        let r = rc(0.0, 0.0, 0.0, 0.0, 200.0, 0.475);
        let d = deployment_cfp(&o, &r, 1, 1, 1, 0.0, 2.0, 16, true, &ParamEval::Expected);
        assert!((d.operational - 16.6554).abs() < 1e-9);
        assert_eq!(d.reconfiguration, 0.0);

        // Reconfiguration-only scenario.
        let idle = op(0.0, 0.2, 0.475, AgingModel::None);
        let busy = rc(1.0, 0.6, 0.4, 0.0, 200.0, 0.475);
        let d = deployment_cfp(&idle, &busy, 1000, 2, 1, 0.0, 2.0, 16, true, &ParamEval::Expected);
        assert_eq!(d.operational, 0.0);
        assert!((d.reconfiguration - 138.795).abs() < 1e-6);
    }

    #[test]
    fn cumulative_age_makes_later_apps_cost_more() {
        let o = op(10.0, 0.5, 0.5, AgingModel::PowerLaw { k: 0.05, n: 0.2 });
        let first = operational_cfp_window(&o, 0.0, 2.0, 512, &ParamEval::Expected);
        let later = operational_cfp_window(&o, 6.0, 8.0, 512, &ParamEval::Expected);
        assert!(later > first);
    }
}
