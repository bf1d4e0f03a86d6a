//! Acceptance suite: every criterion runs at its stated tolerance against
//! the shipped calibration scenarios and prints one pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use carbonscope::analysis::{
    integer_grid, linear_grid, log_grid, monte_carlo, prob_a_less_b, sweep_1d, CrossDirection,
    Mode, SweepVar,
};
use carbonscope::deploy::{aging_factor, lifetime_energy, AgingModel, OperationProfile};
use carbonscope::embodied::{die_yield, retire_cfp, RetireProfile};
use carbonscope::oracle::{integrate_energy_bruteforce, simulate_replacements};
use carbonscope::output::{config_hash, write_sweep, Sidecar};
use carbonscope::param::{ParamDistribution, ParamEval};
use carbonscope::platform::total_cfp;
use carbonscope::scenario::builtin;
use carbonscope::validate;

struct Criterion {
    id: u32,
    label: &'static str,
}

impl Criterion {
    fn new(id: u32, label: &'static str) -> Self {
        Criterion { id, label }
    }

    fn check(&self, ok: bool, detail: &str) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("criterion {} [{}] {}: {}", self.id, status, self.label, detail);
        assert!(ok, "criterion {} failed: {detail}", self.id);
    }
}

/// First application count at which the challenger (series B) beats the
/// incumbent (series A) in an expected-mode 1..=hi sweep.
fn napp_crossover(case: &str, k_apps: Option<u32>, hi: u64) -> Option<f64> {
    let mut file = builtin(case).unwrap();
    if let Some(k) = k_apps {
        file.platforms[0].apps_per_device = Some(k);
    }
    let report = sweep_1d(
        &file.platforms[0],
        &file.platforms[1],
        &file.scenario,
        SweepVar::NApp,
        &integer_grid(1, hi),
        Mode::Expected,
        1,
        0,
    )
    .unwrap();
    report.first_b_dominates()
}

#[test]
fn criterion_1_fpga_vs_asic_application_crossovers() {
    let c = Criterion::new(1, "A2F crossovers for DNN / Crypto / ImgProc");

    // The calibration files pin the sweep constants.
    let dnn = builtin("dnn").unwrap();
    assert_eq!(dnn.scenario.t_i_yr, 2.0);
    assert_eq!(dnn.scenario.n_vol, 1_000_000);
    assert_eq!(dnn.scenario.f_use, 0.2);
    let lambda = |spec: &carbonscope::PlatformSpec| {
        spec.eol.lambda_fail_per_yr.expected_value()
            + spec.eol.lambda_obsol_per_yr.expected_value()
            + spec.eol.lambda_upgrade_per_yr.expected_value()
    };
    assert!((lambda(&dnn.platforms[0]) - 0.3).abs() < 2e-3);
    assert!((lambda(&dnn.platforms[1]) - 0.13).abs() < 2e-3);

    let dnn_cross = napp_crossover("dnn", None, 8);
    let crypto_cross = napp_crossover("crypto", None, 8);
    let imgproc_cross = napp_crossover("imgproc", None, 8);

    let ok = matches!(dnn_cross, Some(x) if (2.0..=4.0).contains(&x))
        && crypto_cross == Some(1.0)
        && matches!(imgproc_cross, Some(x) if (5.0..=7.0).contains(&x));
    c.check(
        ok,
        &format!(
            "DNN at {dnn_cross:?} (want 3±1), Crypto at {crypto_cross:?} (want 1), \
             ImgProc at {imgproc_cross:?} (want 6±1)"
        ),
    );
}

#[test]
fn criterion_2_single_vs_five_app_ratio() {
    let c = Criterion::new(2, "DNN FPGA/ASIC totals at 1 and 5 applications");
    let file = builtin("dnn").unwrap();
    let ratio_at = |n_app: f64| {
        let s = SweepVar::NApp.apply(&file.scenario, n_app);
        let asic = total_cfp(&file.platforms[0], &s, &ParamEval::Expected).unwrap();
        let fpga = total_cfp(&file.platforms[1], &s, &ParamEval::Expected).unwrap();
        fpga.total / asic.total
    };
    let r1 = ratio_at(1.0);
    let r5 = ratio_at(5.0);
    let ok = (2.2..=3.1).contains(&r1) && (0.44..=0.64).contains(&r5);
    c.check(
        ok,
        &format!("ratio(1 app) = {r1:.3} (want 2.2..3.1), ratio(5 apps) = {r5:.3} (want 0.44..0.64)"),
    );
}

#[test]
fn criterion_3_imgproc_volume_crossover() {
    let c = Criterion::new(3, "ImgProc F2A volume crossover at 900K ± 20%");
    let file = builtin("imgproc").unwrap();
    let grid = log_grid(1.0e3, 1.0e7, 80);
    let report = sweep_1d(
        &file.platforms[0],
        &file.platforms[1],
        &file.scenario,
        SweepVar::NVol,
        &grid,
        Mode::Expected,
        1,
        0,
    )
    .unwrap();
    let f2a = report
        .crossings
        .iter()
        .find(|cr| cr.direction == CrossDirection::BtoA)
        .map(|cr| cr.interpolated_x);
    let ok = matches!(f2a, Some(x) if (720_000.0..=1_080_000.0).contains(&x));
    c.check(ok, &format!("F2A at n_vol = {f2a:?} (want 720K..1.08M)"));
}

#[test]
fn criterion_4_gpu_deployment_crossovers() {
    let c = Criterion::new(4, "G2F crossovers vs applications per GPU generation");

    let hp2 = napp_crossover("rnn_hp", Some(2), 32);
    let hp5 = napp_crossover("rnn_hp", Some(5), 32);
    let ee2 = napp_crossover("rnn_ee", Some(2), 32);
    let ee3 = napp_crossover("rnn_ee", Some(3), 32);
    let ee4 = napp_crossover("rnn_ee", Some(4), 32);
    let ee5 = napp_crossover("rnn_ee", Some(5), 32);

    let near = |x: Option<f64>, want: f64, tol: f64| matches!(x, Some(v) if (v - want).abs() <= tol);
    let ok = near(hp2, 5.0, 1.0)
        && near(hp5, 11.0, 1.0)
        && near(ee2, 13.0, 2.0)
        && near(ee3, 22.0, 2.0)
        && near(ee4, 29.0, 2.0)
        && ee5.is_none();
    c.check(
        ok,
        &format!(
            "high-perf k=2 at {hp2:?} (want 5±1), k=5 at {hp5:?} (want 11±1); \
             energy-eff k=2..5 at {ee2:?}/{ee3:?}/{ee4:?}/{ee5:?} (want 13±2, 22±2, 29±2, none ≤ 32)"
        ),
    );
}

#[test]
fn criterion_5_cpu_randgen_crossovers() {
    let c = Criterion::new(5, "C2F crossover at 2 apps and 0.6 yr lifetime");
    let cross_napp = napp_crossover("randgen", None, 8);

    let file = builtin("randgen").unwrap();
    let report = sweep_1d(
        &file.platforms[0],
        &file.platforms[1],
        &file.scenario,
        SweepVar::TI,
        &linear_grid(0.2, 2.4, 12),
        Mode::Expected,
        1,
        0,
    )
    .unwrap();
    let t_cross = report
        .crossings
        .iter()
        .find(|cr| cr.direction == CrossDirection::AtoB)
        .map(|cr| cr.interpolated_x);

    let ok = matches!(cross_napp, Some(x) if (1.0..=3.0).contains(&x))
        && matches!(t_cross, Some(t) if (0.4..=0.8).contains(&t));
    c.check(
        ok,
        &format!("n_app crossover at {cross_napp:?} (want 2±1), T_i crossover at {t_cross:?} (want 0.6±0.2)"),
    );
}

#[test]
fn criterion_6_industry_validation() {
    let c = Criterion::new(6, "TPUv4 and H100 embodied estimates vs published figures");
    let tpu = validate::run_case("tpu_v4").unwrap();
    let h100 = validate::run_case("h100").unwrap();
    let detail = {
        let fmt = |r: &carbonscope::validate::CaseReport| {
            r.metrics
                .iter()
                .filter(|m| m.gating)
                .map(|m| format!("{} = {:.3} (target {:?})", m.label, m.estimate, m.target))
                .collect::<Vec<_>>()
                .join("; ")
        };
        format!("{} | {}", fmt(&tpu), fmt(&h100))
    };
    c.check(tpu.passed() && h100.passed(), &detail);
}

#[test]
fn criterion_7_oracle_equivalence() {
    let c = Criterion::new(7, "closed forms vs Poisson simulation and trapezoid integration");

    // Replacement expectation vs discrete-event simulation at 1e6 trials.
    let mut sim_ok = true;
    let mut sim_detail = String::new();
    for (lambda, t) in [(0.05, 2.0), (0.3, 2.0), (0.2, 10.0)] {
        let closed: f64 = lambda * t;
        let sim = simulate_replacements(t, lambda, 1_000_000, 2024);
        let within = (sim.mean_replacements - closed).abs() <= 3.0 * sim.stderr;
        sim_ok &= within;
        sim_detail.push_str(&format!(
            "λT={:.1}: sim {:.4} vs {:.1} (3se {:.4}); ",
            closed,
            sim.mean_replacements,
            closed,
            3.0 * sim.stderr
        ));
    }

    // Simpson energy integral vs the analytic antiderivative.
    let mut simpson_ok = true;
    for (k, n, t) in [(0.05, 0.2, 10.0), (0.05, 0.2, 2.0), (0.1, 1.0, 2.0)] {
        let op = OperationProfile {
            p_use_w: 1000.0,
            f_use: 1.0,
            carbon_intensity_use_kg_per_kwh: ParamDistribution::point_mass(1.0),
            aging: AgingModel::PowerLaw { k, n },
        };
        let simpson = lifetime_energy(&op, t, 10_000);
        let analytic = 1000.0 * (t + k * t.powf(n + 1.0) / (n + 1.0)) * 8766.0 / 1000.0;
        simpson_ok &= (simpson - analytic).abs() / analytic <= 1e-6;
    }

    // And the two numeric routes against each other.
    let aging = AgingModel::PowerLaw { k: 0.05, n: 0.2 };
    let trapezoid = integrate_energy_bruteforce(&aging, 10.0, 1_000_000);
    let op = OperationProfile {
        p_use_w: 1.0,
        f_use: 1.0,
        carbon_intensity_use_kg_per_kwh: ParamDistribution::point_mass(1.0),
        aging,
    };
    let simpson = lifetime_energy(&op, 10.0, 10_000) / (8766.0 / 1000.0);
    let routes_agree = (simpson - trapezoid).abs() / trapezoid <= 1e-6;

    c.check(
        sim_ok && simpson_ok && routes_agree,
        &format!("{sim_detail}Simpson vs analytic ≤ 1e-6; Simpson vs trapezoid ≤ 1e-6"),
    );
}

#[test]
fn criterion_8_property_suite() {
    let c = Criterion::new(8, "model properties and determinism");
    let mut fails: Vec<String> = Vec::new();

    // Yield: Y(0) = 1 and strict monotone decrease in area and defects.
    if die_yield(0.0, 0.3, 2.0) != 1.0 {
        fails.push("Y(0) != 1".into());
    }
    let mut prev = 1.0;
    for i in 1..=50 {
        let y = die_yield(0.2 * i as f64, 0.25, 2.0);
        if y >= prev {
            fails.push("yield not decreasing in area".into());
            break;
        }
        prev = y;
    }
    if die_yield(3.0, 0.35, 2.0) >= die_yield(3.0, 0.15, 2.0) {
        fails.push("yield not decreasing in defect density".into());
    }

    // Breakdown components sum to the total within 1e-9 relative, in both
    // expected and sampled evaluation.
    let file = builtin("dnn").unwrap();
    for spec in &file.platforms {
        for eval in [
            ParamEval::Expected,
            ParamEval::Sample(carbonscope::SampleContext::new(7, 11)),
        ] {
            let b = total_cfp(spec, &file.scenario, &eval).unwrap();
            if (b.component_sum() - b.total).abs() > 1e-9 * b.total.abs() {
                fails.push(format!("breakdown sum mismatch for {}", spec.name));
            }
        }
    }

    // No aging: exact closed form.
    let op = OperationProfile {
        p_use_w: 10.0,
        f_use: 0.2,
        carbon_intensity_use_kg_per_kwh: ParamDistribution::point_mass(0.475),
        aging: AgingModel::None,
    };
    if lifetime_energy(&op, 2.0, 8) != 10.0 * 0.2 * 2.0 * 8766.0 / 1000.0 {
        fails.push("closed-form energy not exact for gamma = 1".into());
    }
    if aging_factor(&AgingModel::None, 5.0) != 1.0 {
        fails.push("gamma(t) != 1 for no-aging model".into());
    }

    // FPGA/ASIC ratio non-increasing in application count on the DNN config.
    let report = sweep_1d(
        &file.platforms[0],
        &file.platforms[1],
        &file.scenario,
        SweepVar::NApp,
        &integer_grid(1, 8),
        Mode::Expected,
        1,
        0,
    )
    .unwrap();
    let fpga_over_asic: Vec<f64> = report
        .series_b
        .iter()
        .zip(&report.series_a)
        .map(|(b, a)| b / a)
        .collect();
    if fpga_over_asic.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        fails.push(format!("FPGA/ASIC ratio not non-increasing: {fpga_over_asic:?}"));
    }

    // Retire CFP sign at the recycle-fraction extremes.
    let retire = |delta: f64| RetireProfile {
        recycle_fraction_delta: delta,
        recycle_credit_mtco2e_per_ton: ParamDistribution::point_mass(18.74),
        discard_cost_mtco2e_per_ton: ParamDistribution::point_mass(1.055),
        device_mass_g: 50.0,
    };
    if retire_cfp(&retire(0.0), &ParamEval::Expected) <= 0.0 {
        fails.push("retire CFP not positive at delta = 0".into());
    }
    if retire_cfp(&retire(1.0), &ParamEval::Expected) >= 0.0 {
        fails.push("retire CFP not negative at delta = 1".into());
    }

    // Seed determinism: byte-identical CSV output at 1 and 8 threads.
    let sweep_bytes = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let report = sweep_1d(
                &file.platforms[0],
                &file.platforms[1],
                &file.scenario,
                SweepVar::NApp,
                &integer_grid(1, 6),
                Mode::Mc,
                400,
                42,
            )
            .unwrap();
            let dir = tempfile::tempdir().unwrap();
            let sidecar = Sidecar {
                seed: 42,
                config_sha256: config_hash(&file),
                mode: Mode::Mc,
                n_samples: 400,
            };
            let path = write_sweep(&report, dir.path(), "det", &sidecar).unwrap();
            std::fs::read(path).unwrap()
        })
    };
    if sweep_bytes(1) != sweep_bytes(8) {
        fails.push("sweep CSV differs across thread counts".into());
    }

    let mc_one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| monte_carlo(&[&file.platforms[1]], &file.scenario, 500, 9).unwrap());
    let mc_many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| monte_carlo(&[&file.platforms[1]], &file.scenario, 500, 9).unwrap());
    if mc_one[0].mean.total.to_bits() != mc_many[0].mean.total.to_bits()
        || mc_one[0].stddev_total.to_bits() != mc_many[0].stddev_total.to_bits()
    {
        fails.push("Monte Carlo estimate differs across thread counts".into());
    }

    // Self-comparison probability at n = 1e4.
    let p_self = prob_a_less_b(
        &file.platforms[1],
        &file.platforms[1],
        &file.scenario,
        10_000,
        3,
    )
    .unwrap();
    if (p_self - 0.5).abs() > 3.0 / (10_000f64).sqrt() {
        fails.push(format!("prob(x,x) = {p_self} not 0.5 ± 0.03"));
    }

    c.check(fails.is_empty(), &format!("violations: {fails:?}"));
}

#[test]
fn criterion_9_probabilistic_crossover_curve() {
    let c = Criterion::new(9, "P(FPGA < ASIC) ordering along the DNN application sweep");
    let file = builtin("dnn").unwrap();
    let p_at = |n_app: f64| {
        let s = SweepVar::NApp.apply(&file.scenario, n_app);
        prob_a_less_b(&file.platforms[1], &file.platforms[0], &s, 10_000, 0).unwrap()
    };
    let p1 = p_at(1.0);
    let p2 = p_at(2.0);
    let p5 = p_at(5.0);
    let ok = p1 <= 0.02 && p2 > 0.0 && p2 >= p1 && p5 >= 0.9;
    c.check(
        ok,
        &format!("P(1 app) = {p1:.4} (~0), P(2 apps) = {p2:.4} (> 0), P(5 apps) = {p5:.4} (≥ 0.9)"),
    );
}
