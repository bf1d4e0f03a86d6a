//! Monte Carlo estimation, expected-value sweeps with crossover detection,
//! 2-D ratio heatmaps with the ratio=1 locus, and dominance probabilities.
//!
//! Grid points and samples evaluate independently; reductions are ordered by
//! index, so results are identical at any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{ParamEval, SampleContext};
use crate::platform::{total_cfp, CfpBreakdown, DeploymentScenario, PlatformSpec};

/// How sweep points are evaluated: at expected parameter values, or as the
/// mean of a full Monte Carlo propagation. The two differ where parameters
/// enter nonlinearly (the yield divisor); expected mode is the default for
/// crossover reproduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Expected,
    Mc,
}

/// Scenario variable swept by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    NApp,
    TI,
    NVol,
    FUse,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::NApp => "n_app",
            SweepVar::TI => "t_i",
            SweepVar::NVol => "n_vol",
            SweepVar::FUse => "f_use",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n_app" => Ok(SweepVar::NApp),
            "t_i" => Ok(SweepVar::TI),
            "n_vol" => Ok(SweepVar::NVol),
            "f_use" => Ok(SweepVar::FUse),
            other => Err(Error::Invalid(format!(
                "unknown sweep variable `{other}` (expected n_app, t_i, n_vol, f_use)"
            ))),
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, SweepVar::NApp | SweepVar::NVol)
    }

    pub fn apply(&self, scenario: &DeploymentScenario, x: f64) -> DeploymentScenario {
        let mut s = scenario.clone();
        match self {
            SweepVar::NApp => s.n_app = x.round().max(1.0) as u32,
            SweepVar::TI => s.t_i_yr = x,
            SweepVar::NVol => s.n_vol = x.round().max(1.0) as u64,
            SweepVar::FUse => s.f_use = x,
        }
        s
    }
}

/// Monte Carlo summary for one platform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: CfpBreakdown,
    pub stddev_total: f64,
    /// (probability, value) pairs for p in {0.05, 0.25, 0.5, 0.75, 0.95}.
    pub quantiles: Vec<(f64, f64)>,
    pub n_samples: u64,
    pub seed: u64,
}

pub const QUANTILE_PROBS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Which platform the cost advantage passes to at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossDirection {
    /// B was cheaper before the crossing, A is cheaper after.
    BtoA,
    /// A was cheaper before the crossing, B is cheaper after.
    AtoB,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crossing {
    /// Index of the right-hand grid point of the sign change.
    pub index: usize,
    /// Interpolated crossing location for continuous variables; for integer
    /// variables, the smallest grid value where the ordering has flipped.
    pub interpolated_x: f64,
    pub direction: CrossDirection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub variable_name: String,
    pub grid: Vec<f64>,
    pub series_a: Vec<f64>,
    pub series_b: Vec<f64>,
    pub crossings: Vec<Crossing>,
}

impl CrossoverReport {
    /// Smallest grid value at which platform B is strictly cheaper than A,
    /// if any. This is how "crossover at N applications" statements are read
    /// when B already dominates at the first grid point.
    pub fn first_b_dominates(&self) -> Option<f64> {
        self.grid
            .iter()
            .zip(self.series_a.iter().zip(&self.series_b))
            .find(|(_, (a, b))| b < a)
            .map(|(x, _)| *x)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.series_a
            .iter()
            .zip(&self.series_b)
            .map(|(a, b)| a / b)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub x_name: String,
    pub y_name: String,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// `ratio[iy][ix] = total_a / total_b`.
    pub ratio: Vec<Vec<f64>>,
    /// Interpolated points where the ratio crosses 1.
    pub locus: Vec<(f64, f64)>,
    /// Set when the two platforms are indistinguishable everywhere, in which
    /// case the locus is meaningless and emitted empty.
    pub degenerate: bool,
}

fn evaluate_total(
    spec: &PlatformSpec,
    scenario: &DeploymentScenario,
    mode: Mode,
    n_samples: u64,
    seed: u64,
) -> Result<f64> {
    match mode {
        Mode::Expected => Ok(total_cfp(spec, scenario, &ParamEval::Expected)?.total),
        Mode::Mc => {
            let totals = sample_totals(spec, scenario, n_samples, seed)?;
            Ok(totals.iter().sum::<f64>() / totals.len() as f64)
        }
    }
}

fn sample_totals(
    spec: &PlatformSpec,
    scenario: &DeploymentScenario,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let eval = ParamEval::Sample(SampleContext::new(seed, i));
            Ok(total_cfp(spec, scenario, &eval)?.total)
        })
        .collect()
}

/// Monte Carlo estimate per platform. Sample `i` uses `SampleContext(seed, i)`
/// on every platform, so paired comparisons share random numbers.
pub fn monte_carlo(
    specs: &[&PlatformSpec],
    scenario: &DeploymentScenario,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if n_samples < 1 {
        return Err(Error::Invalid("n_samples must be >= 1".into()));
    }
    specs
        .iter()
        .map(|spec| {
            let breakdowns: Vec<CfpBreakdown> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let eval = ParamEval::Sample(SampleContext::new(seed, i));
                    total_cfp(spec, scenario, &eval)
                })
                .collect::<Result<_>>()?;

            let n = n_samples as f64;
            let mut mean = CfpBreakdown::default();
            for b in &breakdowns {
                mean.design += b.design;
                mean.manufacturing += b.manufacturing;
                mean.package += b.package;
                mean.test += b.test;
                mean.retire += b.retire;
                mean.memory += b.memory;
                mean.eol_replacement += b.eol_replacement;
                mean.operational += b.operational;
                mean.reconfiguration += b.reconfiguration;
                mean.total += b.total;
            }
            for f in [
                &mut mean.design,
                &mut mean.manufacturing,
                &mut mean.package,
                &mut mean.test,
                &mut mean.retire,
                &mut mean.memory,
                &mut mean.eol_replacement,
                &mut mean.operational,
                &mut mean.reconfiguration,
                &mut mean.total,
            ] {
                *f /= n;
            }

            let mut totals: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();
            let var = if n_samples > 1 {
                totals.iter().map(|t| (t - mean.total).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            totals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let quantiles = QUANTILE_PROBS
                .iter()
                .map(|&p| (p, quantile_sorted(&totals, p)))
                .collect();

            Ok(McEstimate {
                mean,
                stddev_total: var.sqrt(),
                quantiles,
                n_samples,
                seed,
            })
        })
        .collect()
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Fraction of paired samples in which platform A's total is below B's.
/// Ties count one half.
pub fn prob_a_less_b(
    spec_a: &PlatformSpec,
    spec_b: &PlatformSpec,
    scenario: &DeploymentScenario,
    n_samples: u64,
    seed: u64,
) -> Result<f64> {
    if n_samples < 1 {
        return Err(Error::Invalid("n_samples must be >= 1".into()));
    }
    let score: f64 = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let eval = ParamEval::Sample(SampleContext::new(seed, i));
            let a = total_cfp(spec_a, scenario, &eval)?.total;
            let b = total_cfp(spec_b, scenario, &eval)?.total;
            Ok(if a < b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            })
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(score / n_samples as f64)
}

/// Evaluate both platforms along a grid of one scenario variable and detect
/// every ordering flip.
#[allow(clippy::too_many_arguments)]
pub fn sweep_1d(
    spec_a: &PlatformSpec,
    spec_b: &PlatformSpec,
    scenario: &DeploymentScenario,
    variable: SweepVar,
    grid: &[f64],
    mode: Mode,
    n_samples: u64,
    seed: u64,
) -> Result<CrossoverReport> {
    validate_grid(grid)?;
    let points: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let s = variable.apply(scenario, x);
            Ok((
                evaluate_total(spec_a, &s, mode, n_samples, seed)?,
                evaluate_total(spec_b, &s, mode, n_samples, seed)?,
            ))
        })
        .collect::<Result<_>>()?;

    let series_a: Vec<f64> = points.iter().map(|p| p.0).collect();
    let series_b: Vec<f64> = points.iter().map(|p| p.1).collect();
    let crossings = detect_crossings(grid, &series_a, &series_b, variable.is_integer());
    Ok(CrossoverReport {
        variable_name: variable.name().to_string(),
        grid: grid.to_vec(),
        series_a,
        series_b,
        crossings,
    })
}

fn detect_crossings(
    grid: &[f64],
    series_a: &[f64],
    series_b: &[f64],
    integer_variable: bool,
) -> Vec<Crossing> {
    let mut crossings = Vec::new();
    for i in 1..grid.len() {
        let d0 = series_a[i - 1] - series_b[i - 1];
        let d1 = series_a[i] - series_b[i];
        let crossed = (d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0);
        if !crossed {
            continue;
        }
        // d0 < 0: A was cheaper before, so the advantage passes to B.
        let direction = if d0 < 0.0 {
            CrossDirection::AtoB
        } else {
            CrossDirection::BtoA
        };
        let interpolated_x = if integer_variable {
            grid[i]
        } else {
            grid[i - 1] + (grid[i] - grid[i - 1]) * d0 / (d0 - d1)
        };
        crossings.push(Crossing {
            index: i,
            interpolated_x,
            direction,
        });
    }
    crossings
}

/// 2-D expected-value ratio grid with the ratio=1 locus traced by marching
/// squares on log(ratio).
pub fn sweep_2d(
    spec_a: &PlatformSpec,
    spec_b: &PlatformSpec,
    scenario: &DeploymentScenario,
    var_x: SweepVar,
    var_y: SweepVar,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<HeatmapGrid> {
    validate_grid(x_grid)?;
    validate_grid(y_grid)?;
    let cells: Vec<Vec<f64>> = y_grid
        .par_iter()
        .map(|&y| {
            x_grid
                .iter()
                .map(|&x| {
                    let s = var_y.apply(&var_x.apply(scenario, x), y);
                    let a = total_cfp(spec_a, &s, &ParamEval::Expected)?.total;
                    let b = total_cfp(spec_b, &s, &ParamEval::Expected)?.total;
                    if !(a > 0.0 && b > 0.0) {
                        return Err(Error::Invalid(
                            "heatmap requires strictly positive totals".into(),
                        ));
                    }
                    Ok(a / b)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let degenerate = cells
        .iter()
        .flatten()
        .all(|r| (r.ln()).abs() < 1e-9);
    let locus = if degenerate {
        Vec::new()
    } else {
        trace_locus(x_grid, y_grid, &cells)
    };
    Ok(HeatmapGrid {
        x_name: var_x.name().to_string(),
        y_name: var_y.name().to_string(),
        x_grid: x_grid.to_vec(),
        y_grid: y_grid.to_vec(),
        ratio: cells,
        locus,
        degenerate,
    })
}

/// Edge interpolation points where log(ratio) changes sign, deduplicated and
/// sorted. Each grid-cell edge contributes at most one point.
fn trace_locus(x_grid: &[f64], y_grid: &[f64], ratio: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    let f = |ix: usize, iy: usize| ratio[iy][ix].ln();
    // Horizontal edges.
    for (iy, &y) in y_grid.iter().enumerate() {
        for ix in 1..x_grid.len() {
            let (f0, f1) = (f(ix - 1, iy), f(ix, iy));
            if f0 * f1 < 0.0 {
                let t = f0 / (f0 - f1);
                points.push((x_grid[ix - 1] + t * (x_grid[ix] - x_grid[ix - 1]), y));
            }
        }
    }
    // Vertical edges.
    for (ix, &x) in x_grid.iter().enumerate() {
        for iy in 1..y_grid.len() {
            let (f0, f1) = (f(ix, iy - 1), f(ix, iy));
            if f0 * f1 < 0.0 {
                let t = f0 / (f0 - f1);
                points.push((x, y_grid[iy - 1] + t * (y_grid[iy] - y_grid[iy - 1])));
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    points
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// Evenly spaced grid, inclusive of both ends.
pub fn linear_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && to > from);
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Log-spaced grid, inclusive of both ends. Default shape for volume sweeps.
pub fn log_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && from > 0.0 && to > from);
    let (lf, lt) = (from.ln(), to.ln());
    (0..points)
        .map(|i| (lf + (lt - lf) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Integer grid `from..=to` as f64 values.
pub fn integer_grid(from: u64, to: u64) -> Vec<f64> {
    (from..=to).map(|i| i as f64).collect()
}
