//! Command-line surface: estimate, compare, sweep, heatmap, prob, validate,
//! and a hidden oracle subcommand for debugging the test oracles.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carbonscope::analysis::{
    integer_grid, linear_grid, log_grid, monte_carlo, prob_a_less_b, sweep_1d, sweep_2d, Mode,
    SweepVar,
};
use carbonscope::deploy::AgingModel;
use carbonscope::error::{Error, Result};
use carbonscope::oracle;
use carbonscope::output::{self, Sidecar};
use carbonscope::param::ParamEval;
use carbonscope::platform::{total_cfp, CfpBreakdown, PlatformSpec};
use carbonscope::scenario::{self, ScenarioFile};
use carbonscope::validate;

#[derive(Parser)]
#[command(
    name = "carbonscope",
    version,
    about = "Lifecycle carbon footprint estimation and platform crossover analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Path to a scenario JSON file.
    #[arg(long, conflicts_with = "case")]
    scenario: Option<PathBuf>,
    /// Name of a built-in testcase (dnn, imgproc, crypto, rnn_hp, rnn_ee,
    /// lhcb, randgen, llama2, fir, industry_{tpu,h100,i9,agilex7}).
    #[arg(long)]
    case: Option<String>,
    /// Override the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioFile> {
        let mut file = match (&self.scenario, &self.case) {
            (Some(path), None) => scenario::load_scenario(path),
            (None, Some(name)) => scenario::builtin(name),
            (None, None) => Err(Error::Invalid(
                "pass either --scenario <file> or --case <name>".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap enforces exclusivity"),
        }?;
        if let Some(seed) = self.seed {
            file.analysis.seed = seed;
        }
        Ok(file)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one platform's lifecycle CFP breakdown.
    Estimate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Platform name to evaluate (default: every platform in the file).
        #[arg(long)]
        platform: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
        /// Evaluate in expected or Monte Carlo mode (default: scenario's).
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
    /// Compare two platforms: totals, ratio, and crossover verdict.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// First platform name (default: first in file).
        #[arg(long)]
        a: Option<String>,
        /// Second platform name (default: second in file).
        #[arg(long)]
        b: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
    },
    /// Sweep one scenario variable and write the series plus crossings.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Variable to sweep: n_app, t_i, n_vol, f_use.
        #[arg(long)]
        var: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Grid points (default: one per integer step, or 16).
        #[arg(long)]
        points: Option<usize>,
        /// Log-space the grid (default for n_vol).
        #[arg(long)]
        log: bool,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: DataFormat,
    },
    /// Pairwise sweep of two variables: ratio grid plus ratio=1 locus.
    Heatmap {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        var_x: String,
        #[arg(long)]
        from_x: f64,
        #[arg(long)]
        to_x: f64,
        #[arg(long, default_value_t = 16)]
        points_x: usize,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        var_y: String,
        #[arg(long)]
        from_y: f64,
        #[arg(long)]
        to_y: f64,
        #[arg(long, default_value_t = 16)]
        points_y: usize,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: DataFormat,
    },
    /// Probability that platform A beats platform B along a swept variable.
    Prob {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        var: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        n_samples: Option<u64>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: DataFormat,
    },
    /// Run the industry validation suite against published figures.
    Validate {
        /// Single case: tpu_v4, h100, i9, agilex7 (default: all).
        #[arg(long)]
        case: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
    },
    /// Resolve a scenario (inheritance applied) and print it.
    Dump {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Debug access to the test oracles.
    #[command(hide = true)]
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Expected,
    Mc,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Expected => Mode::Expected,
            CliMode::Mc => Mode::Mc,
        }
    }
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Poisson replacement simulation.
    Replacements {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        t_life: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Trapezoid aging-energy integral.
    Integrate {
        #[arg(long, default_value_t = 0.05)]
        k: f64,
        #[arg(long, default_value_t = 0.2)]
        n: f64,
        #[arg(long)]
        t_life: f64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// `CARBONSCOPE_THREADS` caps analysis parallelism; results are identical at
/// any thread count.
fn init_thread_pool() {
    if let Ok(threads) = std::env::var("CARBONSCOPE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            scenario,
            platform,
            format,
            mode,
        } => estimate(scenario, platform, format, mode),
        Command::Compare {
            scenario,
            a,
            b,
            format,
        } => compare(scenario, a, b, format),
        Command::Sweep {
            scenario,
            var,
            from,
            to,
            points,
            log,
            mode,
            a,
            b,
            out_dir,
            format,
        } => sweep(scenario, var, from, to, points, log, mode, a, b, out_dir, format),
        Command::Heatmap {
            scenario,
            var_x,
            from_x,
            to_x,
            points_x,
            log_x,
            var_y,
            from_y,
            to_y,
            points_y,
            log_y,
            a,
            b,
            out_dir,
            format,
        } => heatmap(
            scenario,
            (var_x, from_x, to_x, points_x, log_x),
            (var_y, from_y, to_y, points_y, log_y),
            a,
            b,
            out_dir,
            format,
        ),
        Command::Prob {
            scenario,
            var,
            from,
            to,
            points,
            n_samples,
            a,
            b,
            out_dir,
            format,
        } => prob(scenario, var, from, to, points, n_samples, a, b, out_dir, format),
        Command::Validate { case, format } => run_validate(case, format),
        Command::Dump { scenario } => {
            print!("{}", scenario.load()?.dump());
            Ok(())
        }
        Command::Oracle { which } => run_oracle(which),
    }
}

fn pick_pair<'a>(
    file: &'a ScenarioFile,
    a: Option<&str>,
    b: Option<&str>,
) -> Result<(&'a PlatformSpec, &'a PlatformSpec)> {
    let first = match a {
        Some(name) => file.platform(name)?,
        None => file
            .platforms
            .first()
            .ok_or_else(|| Error::Invalid("scenario declares no platforms".into()))?,
    };
    let second = match b {
        Some(name) => file.platform(name)?,
        None => file
            .platforms
            .get(1)
            .ok_or_else(|| Error::Invalid("comparison needs two platforms".into()))?,
    };
    Ok((first, second))
}

fn breakdown_rows(b: &CfpBreakdown) -> Vec<(&'static str, f64)> {
    vec![
        ("design", b.design),
        ("manufacturing", b.manufacturing),
        ("package", b.package),
        ("test", b.test),
        ("retire", b.retire),
        ("memory", b.memory),
        ("eol_replacement", b.eol_replacement),
        ("embodied subtotal", b.embodied()),
        ("operational", b.operational),
        ("reconfiguration", b.reconfiguration),
        ("total", b.total),
    ]
}

fn print_breakdown(name: &str, b: &CfpBreakdown) {
    println!("platform: {name}");
    println!("{:<22} {:>18}", "component", "kg CO2-eq");
    for (label, value) in breakdown_rows(b) {
        println!("{label:<22} {value:>18.4}");
    }
    println!();
}

fn estimate(
    args: ScenarioArgs,
    platform: Option<String>,
    format: TextFormat,
    mode: Option<CliMode>,
) -> Result<()> {
    let file = args.load()?;
    let mode: Mode = mode.map(Into::into).unwrap_or(file.analysis.mode);
    let selected: Vec<&PlatformSpec> = match &platform {
        Some(name) => vec![file.platform(name)?],
        None => file.platforms.iter().collect(),
    };

    let mut results = Vec::new();
    for spec in &selected {
        let breakdown = match mode {
            Mode::Expected => total_cfp(spec, &file.scenario, &ParamEval::Expected)?,
            Mode::Mc => {
                let est = monte_carlo(
                    &[spec],
                    &file.scenario,
                    file.analysis.n_samples,
                    file.analysis.seed,
                )?;
                est.into_iter().next().unwrap().mean
            }
        };
        results.push((spec.name.clone(), breakdown));
    }

    match format {
        TextFormat::Text => {
            for (name, b) in &results {
                print_breakdown(name, b);
            }
        }
        TextFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = results
                .iter()
                .map(|(name, b)| (name.clone(), serde_json::to_value(b).unwrap()))
                .collect();
            println!("{}", serde_json::to_string_pretty(&map).unwrap());
        }
    }
    Ok(())
}

fn compare(
    args: ScenarioArgs,
    a: Option<String>,
    b: Option<String>,
    format: TextFormat,
) -> Result<()> {
    let file = args.load()?;
    let (spec_a, spec_b) = pick_pair(&file, a.as_deref(), b.as_deref())?;
    let ba = total_cfp(spec_a, &file.scenario, &ParamEval::Expected)?;
    let bb = total_cfp(spec_b, &file.scenario, &ParamEval::Expected)?;

    // Crossover verdict from an application-count sweep around the scenario.
    let hi = file.scenario.n_app.max(8) as u64;
    let grid = integer_grid(1, hi.max(2));
    let report = sweep_1d(
        spec_a,
        spec_b,
        &file.scenario,
        SweepVar::NApp,
        &grid,
        Mode::Expected,
        file.analysis.n_samples,
        file.analysis.seed,
    )?;
    let verdict = match report.first_b_dominates() {
        Some(x) => format!(
            "{} overtakes {} at n_app = {x} (swept 1..={})",
            spec_b.name, spec_a.name, hi
        ),
        None => format!("{} never overtakes {} within n_app 1..={}", spec_b.name, spec_a.name, hi),
    };

    match format {
        TextFormat::Text => {
            print_breakdown(&spec_a.name, &ba);
            print_breakdown(&spec_b.name, &bb);
            println!("ratio {}/{}: {:.4}", spec_a.name, spec_b.name, ba.total / bb.total);
            println!("crossover: {verdict}");
        }
        TextFormat::Json => {
            let out = serde_json::json!({
                spec_a.name.clone(): ba,
                spec_b.name.clone(): bb,
                "ratio_a_over_b": ba.total / bb.total,
                "verdict": verdict,
                "n_app_sweep": report,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
    }
    Ok(())
}

fn build_grid(var: SweepVar, from: f64, to: f64, points: Option<usize>, log: bool) -> Result<Vec<f64>> {
    if to <= from {
        return Err(Error::InvalidGrid);
    }
    let use_log = log || (var == SweepVar::NVol && points.is_none());
    if var.is_integer() && !use_log {
        let n = points.unwrap_or((to - from) as usize + 1).max(2);
        if n as f64 > to - from {
            return Ok(integer_grid(from as u64, to as u64));
        }
        return Ok(linear_grid(from, to, n));
    }
    let n = points.unwrap_or(16).max(2);
    Ok(if use_log {
        log_grid(from, to, n)
    } else {
        linear_grid(from, to, n)
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    args: ScenarioArgs,
    var: String,
    from: f64,
    to: f64,
    points: Option<usize>,
    log: bool,
    mode: Option<CliMode>,
    a: Option<String>,
    b: Option<String>,
    out_dir: PathBuf,
    format: DataFormat,
) -> Result<()> {
    let file = args.load()?;
    let variable = SweepVar::parse(&var)?;
    let grid = build_grid(variable, from, to, points, log)?;
    let (spec_a, spec_b) = pick_pair(&file, a.as_deref(), b.as_deref())?;
    let mode: Mode = mode.map(Into::into).unwrap_or(file.analysis.mode);
    let report = sweep_1d(
        spec_a,
        spec_b,
        &file.scenario,
        variable,
        &grid,
        mode,
        file.analysis.n_samples,
        file.analysis.seed,
    )?;
    let sidecar = Sidecar {
        seed: file.analysis.seed,
        config_sha256: output::config_hash(&file),
        mode,
        n_samples: file.analysis.n_samples,
    };
    let stem = format!("sweep_{}", variable.name());
    match format {
        DataFormat::Csv => {
            let path = output::write_sweep(&report, &out_dir, &stem, &sidecar)?;
            println!("wrote {}", path.display());
        }
        DataFormat::Json => {
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!("{stem}.json"));
            let body = serde_json::json!({ "report": report, "meta": sidecar });
            std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap())?;
            println!("wrote {}", path.display());
        }
    }
    for c in &report.crossings {
        println!(
            "crossing at {} = {} ({:?})",
            report.variable_name, c.interpolated_x, c.direction
        );
    }
    if report.crossings.is_empty() {
        println!("no crossing in range");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn heatmap(
    args: ScenarioArgs,
    x: (String, f64, f64, usize, bool),
    y: (String, f64, f64, usize, bool),
    a: Option<String>,
    b: Option<String>,
    out_dir: PathBuf,
    format: DataFormat,
) -> Result<()> {
    let file = args.load()?;
    let var_x = SweepVar::parse(&x.0)?;
    let var_y = SweepVar::parse(&y.0)?;
    let x_grid = build_grid(var_x, x.1, x.2, Some(x.3), x.4)?;
    let y_grid = build_grid(var_y, y.1, y.2, Some(y.3), y.4)?;
    let (spec_a, spec_b) = pick_pair(&file, a.as_deref(), b.as_deref())?;
    let grid = sweep_2d(
        spec_a,
        spec_b,
        &file.scenario,
        var_x,
        var_y,
        &x_grid,
        &y_grid,
    )?;
    let sidecar = Sidecar {
        seed: file.analysis.seed,
        config_sha256: output::config_hash(&file),
        mode: Mode::Expected,
        n_samples: file.analysis.n_samples,
    };
    let stem = format!("heatmap_{}_{}", var_x.name(), var_y.name());
    match format {
        DataFormat::Csv => {
            let path = output::write_heatmap(&grid, &out_dir, &stem, &sidecar)?;
            println!("wrote {}", path.display());
        }
        DataFormat::Json => {
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!("{stem}.json"));
            let body = serde_json::json!({ "heatmap": grid, "meta": sidecar });
            std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap())?;
            println!("wrote {}", path.display());
        }
    }
    if grid.degenerate {
        println!("platforms indistinguishable: locus omitted");
    } else {
        println!("locus points: {}", grid.locus.len());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn prob(
    args: ScenarioArgs,
    var: String,
    from: f64,
    to: f64,
    points: Option<usize>,
    n_samples: Option<u64>,
    a: Option<String>,
    b: Option<String>,
    out_dir: PathBuf,
    format: DataFormat,
) -> Result<()> {
    let file = args.load()?;
    let variable = SweepVar::parse(&var)?;
    let grid = build_grid(variable, from, to, points, false)?;
    let (spec_a, spec_b) = pick_pair(&file, a.as_deref(), b.as_deref())?;
    let n = n_samples.unwrap_or(file.analysis.n_samples);
    let mut curve = Vec::with_capacity(grid.len());
    for &gx in &grid {
        let s = variable.apply(&file.scenario, gx);
        let p = prob_a_less_b(spec_a, spec_b, &s, n, file.analysis.seed)?;
        curve.push((gx, p));
    }
    let sidecar = Sidecar {
        seed: file.analysis.seed,
        config_sha256: output::config_hash(&file),
        mode: Mode::Mc,
        n_samples: n,
    };
    let stem = format!("prob_{}", variable.name());
    match format {
        DataFormat::Csv => {
            let path = output::write_prob(variable.name(), &curve, &out_dir, &stem, &sidecar)?;
            println!("wrote {}", path.display());
        }
        DataFormat::Json => {
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!("{stem}.json"));
            let body = serde_json::json!({ "curve": curve, "meta": sidecar });
            std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run_validate(case: Option<String>, format: TextFormat) -> Result<()> {
    let reports = match case {
        Some(c) => vec![validate::run_case(&c)?],
        None => validate::run_all()?,
    };

    match format {
        TextFormat::Text => {
            for r in &reports {
                println!("case {} ({}):", r.case, r.platform);
                for m in &r.metrics {
                    let target = m
                        .target
                        .map(|t| format!(" target {t:.3}"))
                        .unwrap_or_default();
                    let delta = m
                        .delta
                        .map(|d| format!(" delta {:+.1}%", d * 100.0))
                        .unwrap_or_default();
                    let status = match m.within_tolerance {
                        Some(true) => " [ok]",
                        Some(false) => " [FAIL]",
                        None => " [info]",
                    };
                    println!("  {:<38} {:>12.4}{target}{delta}{status}", m.label, m.estimate);
                }
            }
        }
        TextFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&reports).unwrap());
        }
    }

    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.case.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::ValidationFailure(format!(
            "cases outside tolerance: {}",
            failed.join(", ")
        )))
    }
}

fn run_oracle(which: OracleCommand) -> Result<()> {
    match which {
        OracleCommand::Replacements {
            lambda,
            t_life,
            trials,
            seed,
        } => {
            let r = oracle::simulate_replacements(t_life, lambda, trials, seed);
            println!(
                "trials {} mean {} stderr {} closed_form {}",
                r.trials,
                r.mean_replacements,
                r.stderr,
                lambda * t_life
            );
        }
        OracleCommand::Integrate { k, n, t_life, steps } => {
            let aging = AgingModel::PowerLaw { k, n };
            let v = oracle::integrate_energy_bruteforce(&aging, t_life, steps);
            let analytic = t_life + k * t_life.powf(n + 1.0) / (n + 1.0);
            println!("trapezoid {v} analytic {analytic}");
        }
    }
    Ok(())
}
