//! Brute-force cross-checks used by the test suite: a discrete-event
//! replacement simulation and a fine-grained trapezoid integrator. Both stay
//! independent of the closed-form / Simpson paths they validate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::deploy::{aging_factor, AgingModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplacementSimResult {
    pub trials: u64,
    pub mean_replacements: f64,
    pub stderr: f64,
}

/// Simulate replacement events as a homogeneous Poisson process of rate
/// `lambda_total` over `[0, t_life_yr]`, one trial per device lifetime.
/// Event counts come from exponential inter-arrival times, not from the
/// closed-form mean this oracle exists to check.
pub fn simulate_replacements(
    t_life_yr: f64,
    lambda_total: f64,
    trials: u64,
    seed: u64,
) -> ReplacementSimResult {
    assert!(t_life_yr >= 0.0 && lambda_total >= 0.0 && trials >= 1);
    if lambda_total == 0.0 || t_life_yr == 0.0 {
        return ReplacementSimResult {
            trials,
            mean_replacements: 0.0,
            stderr: 0.0,
        };
    }
    // Per-trial substreams keep the reduction order-independent.
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut t = 0.0f64;
            let mut events = 0u64;
            loop {
                let u: f64 = rng.gen::<f64>();
                // Guard against ln(0).
                let dt = -(1.0 - u).max(f64::MIN_POSITIVE).ln() / lambda_total;
                t += dt;
                if t > t_life_yr {
                    break;
                }
                events += 1;
            }
            events
        })
        .collect();

    let n = trials as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = if trials > 1 {
        counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    ReplacementSimResult {
        trials,
        mean_replacements: mean,
        stderr: (var / n).sqrt(),
    }
}

/// Trapezoid-rule value of the aging integral `∫ gamma(t) dt` over
/// `[0, t_life_yr]`, in years. Reference for `deploy::lifetime_energy`.
pub fn integrate_energy_bruteforce(aging: &AgingModel, t_life_yr: f64, steps: u64) -> f64 {
    assert!(steps >= 10_000, "oracle requires at least 1e4 panels");
    if t_life_yr == 0.0 {
        return 0.0;
    }
    let h = t_life_yr / steps as f64;
    let mut acc = 0.5 * (aging_factor(aging, 0.0) + aging_factor(aging, t_life_yr));
    for i in 1..steps {
        acc += aging_factor(aging, i as f64 * h);
    }
    acc * h
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&trial.to_le_bytes());
    bytes[16..24].copy_from_slice(&(seed ^ 0xa5a5_a5a5_5a5a_5a5a).to_le_bytes());
    bytes[24..32].copy_from_slice(&trial.wrapping_mul(0x2545_f491_4f6c_dd1d).to_le_bytes());
    ChaCha12Rng::from_seed(bytes)
}
