//! carbonscope estimates the full lifecycle carbon footprint (embodied plus
//! operational) of computing platforms — ASIC, FPGA, GPU, CPU — under
//! parameter uncertainty, and locates the deployment regimes where the
//! sustainability ordering between two platforms flips.
//!
//! The crate is organized along the model's seams:
//!
//! * [`param`] — uncertain inputs as distributions with seeded sampling
//! * [`embodied`] — design, manufacturing, package, test, retire, memory,
//!   and end-of-life replacement counts
//! * [`deploy`] — operational energy with aging, and reconfiguration effort
//! * [`platform`] — per-platform lifecycle composition
//! * [`analysis`] — Monte Carlo, sweeps, crossovers, heatmaps
//! * [`scenario`] — JSON scenario ingestion and built-in testcases
//! * [`oracle`] — brute-force cross-checks used by the test suite
//! * [`validate`] — industry validation suite

pub mod analysis;
pub mod deploy;
pub mod embodied;
pub mod error;
pub mod oracle;
pub mod output;
pub mod param;
pub mod platform;
pub mod scenario;
pub mod validate;

pub use error::{Error, Result};
pub use param::{BandwidthRule, DrawSlot, ParamDistribution, ParamEval, SampleContext};
pub use platform::{CfpBreakdown, DeploymentScenario, PlatformKind, PlatformSpec};
pub use scenario::{builtin, load_scenario, ScenarioFile};
