//! Scenario ingestion: JSON parsing, `extends` inheritance, ratio-based
//! `from_baseline` testcase construction, unit-suffixed field validation
//! with key-path errors, and byte-stable dumping of resolved scenarios.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Mode;
use crate::deploy::{AgingModel, ReconfigProfile};
use crate::embodied::{
    DesignHouseProfile, EolProfile, MemoryProfile, PackageProfile, RetireProfile,
    TechnologyProfile, TestProfile,
};
use crate::error::{Error, Result};
use crate::param::{ParamDistribution, RawDistribution};
use crate::platform::{DeploymentScenario, PlatformKind, PlatformSpec};

/// A fully resolved scenario: inheritance applied, sample files loaded,
/// every invariant checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub version: String,
    pub platforms: Vec<PlatformSpec>,
    pub scenario: DeploymentScenario,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_n_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_energy_steps")]
    pub energy_steps: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            mode: default_mode(),
            n_samples: default_n_samples(),
            seed: 0,
            energy_steps: default_energy_steps(),
        }
    }
}

fn default_mode() -> Mode {
    Mode::Expected
}
fn default_n_samples() -> u64 {
    10_000
}
fn default_energy_steps() -> u32 {
    512
}

impl ScenarioFile {
    pub fn platform(&self, name: &str) -> Result<&PlatformSpec> {
        self.platforms
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPlatform(name.to_string()))
    }

    /// Serialize the resolved scenario. Dump output parses back into an
    /// identical resolved scenario (inheritance gone, samples inline).
    pub fn dump(&self) -> String {
        let raw = RawScenarioFile::from_resolved(self);
        let mut out = serde_json::to_string_pretty(&raw).expect("scenario serializes");
        out.push('\n');
        out
    }
}

// ---------------------------------------------------------------------------
// Raw (wire) representation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarioFile {
    version: String,
    platforms: Vec<RawPlatform>,
    scenario: RawScenario,
    #[serde(default)]
    analysis: AnalysisConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlatform {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<PlatformKind>,
    /// Inherit every unset section from the named platform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extends: Option<String>,
    /// Scale area and power from the named platform (iso-performance ratios).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from_baseline: Option<FromBaseline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    die_area_mm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_use_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_gates: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cores_capacity_gates: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    technology: Option<RawTechnology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    design_house: Option<RawDesignHouse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    package: Option<PackageProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    test: Option<RawTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    retire: Option<RawRetire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eol: Option<RawEol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    memory: Option<RawMemory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reconfig: Option<RawReconfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    apps_per_device: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FromBaseline {
    platform: String,
    area_ratio: f64,
    power_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTechnology {
    node_name: String,
    epa_kwh_per_cm2: RawDistribution,
    gpa_kg_per_wafer: RawDistribution,
    wafer_area_cm2: f64,
    defect_density_per_cm2: RawDistribution,
    alpha: f64,
    materials_new_kg_per_cm2: f64,
    materials_recycled_kg_per_cm2: f64,
    recycled_fraction_rho: f64,
    fab_carbon_intensity_kg_per_kwh: RawDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesignHouse {
    annual_energy_gwh: f64,
    total_employees: u64,
    design_carbon_intensity_kg_per_kwh: RawDistribution,
    employees_on_chip: f64,
    gates_per_project: f64,
    ip_durations_yr: Vec<f64>,
    soc_duration_yr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTest {
    test_times_hr: Vec<f64>,
    slots: u32,
    overhead_hr: f64,
    ate_power_w: f64,
    test_carbon_intensity_kg_per_kwh: RawDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRetire {
    recycle_fraction_delta: f64,
    recycle_credit_mtco2e_per_ton: RawDistribution,
    discard_cost_mtco2e_per_ton: RawDistribution,
    device_mass_g: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEol {
    lambda_fail_per_yr: RawDistribution,
    lambda_obsol_per_yr: RawDistribution,
    lambda_upgrade_per_yr: RawDistribution,
    #[serde(default = "default_support_window")]
    support_window_yr: f64,
}

fn default_support_window() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMemory {
    cfp_kg_per_gb: RawDistribution,
    capacity_gb: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReconfig {
    t_sw_dev_mo: f64,
    t_compile_mo: f64,
    t_reg_mo: f64,
    t_app_config_hr: f64,
    dev_system_power_w: f64,
    dev_carbon_intensity_kg_per_kwh: RawDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n_app: u32,
    t_i_yr: f64,
    n_vol: u64,
    f_use: f64,
    app_size_gates: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    apps_per_device: Option<u32>,
    operation: RawOperation,
    /// Default reconfiguration profile for platforms that do not declare one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reconfig: Option<RawReconfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperation {
    carbon_intensity_use_kg_per_kwh: RawDistribution,
    aging: AgingModel,
    #[serde(default = "default_true")]
    scale_op_by_nproc: bool,
}

fn default_true() -> bool {
    true
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Load and fully resolve a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| {
        Error::schema(
            path.display().to_string(),
            format!("cannot read scenario file: {e}"),
        )
    })?;
    let base_dir = path.parent().map(PathBuf::from);
    load_scenario_str(&content, base_dir.as_deref(), &path.display().to_string())
}

/// Resolve a scenario from an in-memory JSON string. `base_dir` anchors
/// relative `samples_file` references; builtins pass `None` and must inline
/// their samples.
pub fn load_scenario_str(
    content: &str,
    base_dir: Option<&Path>,
    display_path: &str,
) -> Result<ScenarioFile> {
    let raw: RawScenarioFile = serde_json::from_str(content).map_err(|e| Error::Json {
        path: display_path.to_string(),
        source: e,
    })?;
    resolve(raw, base_dir)
}

fn resolve(raw: RawScenarioFile, base_dir: Option<&Path>) -> Result<ScenarioFile> {
    if raw.version != "1" {
        return Err(Error::schema(
            "version",
            format!("unsupported scenario version `{}` (expected \"1\")", raw.version),
        ));
    }

    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, p) in raw.platforms.iter().enumerate() {
        if index.insert(p.name.clone(), i).is_some() {
            return Err(Error::schema(
                format!("platforms[{i}].name"),
                format!("duplicate platform name `{}`", p.name),
            ));
        }
    }

    // Apply `extends` chains (acyclic, section-level inheritance).
    let mut merged: HashMap<String, RawPlatform> = HashMap::new();
    for p in &raw.platforms {
        merge_extends(&p.name, &raw.platforms, &index, &mut merged, &mut Vec::new())?;
    }

    // Apply `from_baseline` ratios after inheritance, in dependency order.
    let mut scaled: HashMap<String, RawPlatform> = HashMap::new();
    for p in &raw.platforms {
        apply_baseline(&p.name, &merged, &mut scaled, &mut Vec::new())?;
    }

    let scenario = resolve_scenario(&raw.scenario, &raw.analysis, base_dir)?;
    let default_reconfig = raw
        .scenario
        .reconfig
        .as_ref()
        .map(|rc| resolve_reconfig(rc, "scenario.reconfig", base_dir))
        .transpose()?;

    let mut platforms = Vec::with_capacity(raw.platforms.len());
    for p in &raw.platforms {
        let spec = build_platform(
            &scaled[&p.name],
            default_reconfig.as_ref(),
            base_dir,
        )?;
        platforms.push(spec);
    }

    validate_scenario_invariants(&raw.scenario, &raw.analysis)?;

    Ok(ScenarioFile {
        version: raw.version,
        platforms,
        scenario,
        analysis: raw.analysis,
    })
}

fn merge_extends(
    name: &str,
    platforms: &[RawPlatform],
    index: &HashMap<String, usize>,
    merged: &mut HashMap<String, RawPlatform>,
    stack: &mut Vec<String>,
) -> Result<()> {
    if merged.contains_key(name) {
        return Ok(());
    }
    if stack.iter().any(|s| s == name) {
        return Err(Error::CyclicExtends(name.to_string()));
    }
    let i = *index
        .get(name)
        .ok_or_else(|| Error::UnknownPlatform(name.to_string()))?;
    let mut platform = platforms[i].clone();
    if let Some(parent_name) = platform.extends.clone() {
        stack.push(name.to_string());
        merge_extends(&parent_name, platforms, index, merged, stack)?;
        stack.pop();
        let parent = merged[&parent_name].clone();
        platform.kind = platform.kind.or(parent.kind);
        platform.die_area_mm2 = platform.die_area_mm2.or(parent.die_area_mm2);
        platform.p_use_w = platform.p_use_w.or(parent.p_use_w);
        platform.n_gates = platform.n_gates.or(parent.n_gates);
        platform.cores_capacity_gates =
            platform.cores_capacity_gates.or(parent.cores_capacity_gates);
        platform.technology = platform.technology.or(parent.technology);
        platform.design_house = platform.design_house.or(parent.design_house);
        platform.package = platform.package.or(parent.package);
        platform.test = platform.test.or(parent.test);
        platform.retire = platform.retire.or(parent.retire);
        platform.eol = platform.eol.or(parent.eol);
        platform.memory = platform.memory.or(parent.memory);
        platform.reconfig = platform.reconfig.or(parent.reconfig);
        // apps_per_device and from_baseline stay per-platform.
    }
    merged.insert(name.to_string(), platform);
    Ok(())
}

fn apply_baseline(
    name: &str,
    merged: &HashMap<String, RawPlatform>,
    scaled: &mut HashMap<String, RawPlatform>,
    stack: &mut Vec<String>,
) -> Result<()> {
    if scaled.contains_key(name) {
        return Ok(());
    }
    if stack.iter().any(|s| s == name) {
        return Err(Error::CyclicExtends(name.to_string()));
    }
    let mut platform = merged
        .get(name)
        .cloned()
        .ok_or_else(|| Error::UnknownPlatform(name.to_string()))?;
    if let Some(fb) = platform.from_baseline.clone() {
        if fb.area_ratio <= 0.0 || fb.power_ratio <= 0.0 {
            return Err(Error::schema(
                format!("platforms({name}).from_baseline"),
                "area_ratio and power_ratio must be > 0",
            ));
        }
        stack.push(name.to_string());
        apply_baseline(&fb.platform, merged, scaled, stack)?;
        stack.pop();
        let base = &scaled[&fb.platform];
        let base_area = base.die_area_mm2.ok_or_else(|| {
            Error::schema(
                format!("platforms({}).die_area_mm2", fb.platform),
                "baseline platform must declare die_area_mm2",
            )
        })?;
        let base_power = base.p_use_w.ok_or_else(|| {
            Error::schema(
                format!("platforms({}).p_use_w", fb.platform),
                "baseline platform must declare p_use_w",
            )
        })?;
        platform.die_area_mm2 = Some(base_area * fb.area_ratio);
        platform.p_use_w = Some(base_power * fb.power_ratio);
    }
    scaled.insert(name.to_string(), platform);
    Ok(())
}

// ---------------------------------------------------------------------------
// Section resolution and validation
// ---------------------------------------------------------------------------

fn resolve_dist(
    raw: &RawDistribution,
    path: &str,
    base_dir: Option<&Path>,
) -> Result<ParamDistribution> {
    let mut raw = raw.clone();
    if let RawDistribution::Kde {
        samples,
        samples_file: Some(file),
        bandwidth,
    } = &raw
    {
        if samples.is_some() {
            return Err(Error::schema(
                path,
                "kde takes either `samples` or `samples_file`, not both",
            ));
        }
        let dir = base_dir.ok_or_else(|| {
            Error::schema(path, "samples_file is not available in embedded scenarios")
        })?;
        let loaded = read_samples_csv(&dir.join(file))
            .map_err(|e| Error::schema(path, format!("cannot load `{file}`: {e}")))?;
        raw = RawDistribution::Kde {
            samples: Some(loaded),
            samples_file: None,
            bandwidth: bandwidth.clone(),
        };
    }
    ParamDistribution::try_from(raw).map_err(|e| Error::schema(path, e.to_string()))
}

/// Single-column CSV with header `value`.
pub fn read_samples_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    {
        let headers = reader.headers()?;
        if headers.len() != 1 || headers.get(0) != Some("value") {
            return Err(Error::Invalid(format!(
                "{}: sample files must have a single `value` column",
                path.display()
            )));
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = record.get(0).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| {
            Error::Invalid(format!("{}: bad sample value `{field}`", path.display()))
        })?;
        out.push(v);
    }
    Ok(out)
}

fn check(cond: bool, path: &str, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::schema(path, msg))
    }
}

fn resolve_technology(
    raw: &RawTechnology,
    prefix: &str,
    base_dir: Option<&Path>,
) -> Result<TechnologyProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(raw.wafer_area_cm2 > 0.0, &p("wafer_area_cm2"), "must be > 0")?;
    check(raw.alpha > 0.0, &p("alpha"), "must be > 0")?;
    check(
        (0.0..=1.0).contains(&raw.recycled_fraction_rho),
        &p("recycled_fraction_rho"),
        "must lie in [0, 1]",
    )?;
    check(
        raw.materials_new_kg_per_cm2 >= 0.0,
        &p("materials_new_kg_per_cm2"),
        "must be >= 0",
    )?;
    check(
        raw.materials_recycled_kg_per_cm2 >= 0.0,
        &p("materials_recycled_kg_per_cm2"),
        "must be >= 0",
    )?;
    check(
        raw.materials_recycled_kg_per_cm2 <= raw.materials_new_kg_per_cm2,
        &p("materials_recycled_kg_per_cm2"),
        "recycled materials CFP cannot exceed new-materials CFP",
    )?;
    Ok(TechnologyProfile {
        node_name: raw.node_name.clone(),
        epa_kwh_per_cm2: resolve_dist(&raw.epa_kwh_per_cm2, &p("epa_kwh_per_cm2"), base_dir)?,
        gpa_kg_per_wafer: resolve_dist(&raw.gpa_kg_per_wafer, &p("gpa_kg_per_wafer"), base_dir)?,
        wafer_area_cm2: raw.wafer_area_cm2,
        defect_density_per_cm2: resolve_dist(
            &raw.defect_density_per_cm2,
            &p("defect_density_per_cm2"),
            base_dir,
        )?,
        alpha: raw.alpha,
        materials_new_kg_per_cm2: raw.materials_new_kg_per_cm2,
        materials_recycled_kg_per_cm2: raw.materials_recycled_kg_per_cm2,
        recycled_fraction_rho: raw.recycled_fraction_rho,
        fab_carbon_intensity_kg_per_kwh: resolve_dist(
            &raw.fab_carbon_intensity_kg_per_kwh,
            &p("fab_carbon_intensity_kg_per_kwh"),
            base_dir,
        )?,
    })
}

fn resolve_design_house(
    raw: &RawDesignHouse,
    prefix: &str,
    base_dir: Option<&Path>,
) -> Result<DesignHouseProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(raw.total_employees > 0, &p("total_employees"), "must be > 0")?;
    check(raw.gates_per_project > 0.0, &p("gates_per_project"), "must be > 0")?;
    check(raw.annual_energy_gwh >= 0.0, &p("annual_energy_gwh"), "must be >= 0")?;
    check(raw.employees_on_chip >= 0.0, &p("employees_on_chip"), "must be >= 0")?;
    check(
        raw.ip_durations_yr.iter().all(|d| *d >= 0.0) && raw.soc_duration_yr >= 0.0,
        &p("ip_durations_yr"),
        "durations must be >= 0",
    )?;
    Ok(DesignHouseProfile {
        annual_energy_gwh: raw.annual_energy_gwh,
        total_employees: raw.total_employees,
        design_carbon_intensity_kg_per_kwh: resolve_dist(
            &raw.design_carbon_intensity_kg_per_kwh,
            &p("design_carbon_intensity_kg_per_kwh"),
            base_dir,
        )?,
        employees_on_chip: raw.employees_on_chip,
        gates_per_project: raw.gates_per_project,
        ip_durations_yr: raw.ip_durations_yr.clone(),
        soc_duration_yr: raw.soc_duration_yr,
    })
}

fn resolve_test(raw: &RawTest, prefix: &str, base_dir: Option<&Path>) -> Result<TestProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(raw.slots >= 1, &p("slots"), "must be >= 1")?;
    check(
        raw.test_times_hr.iter().all(|t| *t >= 0.0),
        &p("test_times_hr"),
        "times must be >= 0",
    )?;
    check(raw.overhead_hr >= 0.0, &p("overhead_hr"), "must be >= 0")?;
    check(raw.ate_power_w >= 0.0, &p("ate_power_w"), "must be >= 0")?;
    Ok(TestProfile {
        test_times_hr: raw.test_times_hr.clone(),
        slots: raw.slots,
        overhead_hr: raw.overhead_hr,
        ate_power_w: raw.ate_power_w,
        test_carbon_intensity_kg_per_kwh: resolve_dist(
            &raw.test_carbon_intensity_kg_per_kwh,
            &p("test_carbon_intensity_kg_per_kwh"),
            base_dir,
        )?,
    })
}

fn resolve_retire(raw: &RawRetire, prefix: &str, base_dir: Option<&Path>) -> Result<RetireProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(
        (0.0..=1.0).contains(&raw.recycle_fraction_delta),
        &p("recycle_fraction_delta"),
        "must lie in [0, 1]",
    )?;
    check(raw.device_mass_g > 0.0, &p("device_mass_g"), "must be > 0")?;
    Ok(RetireProfile {
        recycle_fraction_delta: raw.recycle_fraction_delta,
        recycle_credit_mtco2e_per_ton: resolve_dist(
            &raw.recycle_credit_mtco2e_per_ton,
            &p("recycle_credit_mtco2e_per_ton"),
            base_dir,
        )?,
        discard_cost_mtco2e_per_ton: resolve_dist(
            &raw.discard_cost_mtco2e_per_ton,
            &p("discard_cost_mtco2e_per_ton"),
            base_dir,
        )?,
        device_mass_g: raw.device_mass_g,
    })
}

fn resolve_eol(raw: &RawEol, prefix: &str, base_dir: Option<&Path>) -> Result<EolProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(raw.support_window_yr >= 0.0, &p("support_window_yr"), "must be >= 0")?;
    Ok(EolProfile {
        lambda_fail_per_yr: resolve_dist(&raw.lambda_fail_per_yr, &p("lambda_fail_per_yr"), base_dir)?,
        lambda_obsol_per_yr: resolve_dist(
            &raw.lambda_obsol_per_yr,
            &p("lambda_obsol_per_yr"),
            base_dir,
        )?,
        lambda_upgrade_per_yr: resolve_dist(
            &raw.lambda_upgrade_per_yr,
            &p("lambda_upgrade_per_yr"),
            base_dir,
        )?,
        support_window_yr: raw.support_window_yr,
    })
}

fn resolve_memory(raw: &RawMemory, prefix: &str, base_dir: Option<&Path>) -> Result<MemoryProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(raw.capacity_gb >= 0.0, &p("capacity_gb"), "must be >= 0")?;
    Ok(MemoryProfile {
        cfp_kg_per_gb: resolve_dist(&raw.cfp_kg_per_gb, &p("cfp_kg_per_gb"), base_dir)?,
        capacity_gb: raw.capacity_gb,
    })
}

fn resolve_reconfig(
    raw: &RawReconfig,
    prefix: &str,
    base_dir: Option<&Path>,
) -> Result<ReconfigProfile> {
    let p = |f: &str| format!("{prefix}.{f}");
    check(
        raw.t_sw_dev_mo >= 0.0
            && raw.t_compile_mo >= 0.0
            && raw.t_reg_mo >= 0.0
            && raw.t_app_config_hr >= 0.0
            && raw.dev_system_power_w >= 0.0,
        &p("t_sw_dev_mo"),
        "reconfiguration efforts must be >= 0",
    )?;
    Ok(ReconfigProfile {
        t_sw_dev_mo: raw.t_sw_dev_mo,
        t_compile_mo: raw.t_compile_mo,
        t_reg_mo: raw.t_reg_mo,
        t_app_config_hr: raw.t_app_config_hr,
        dev_system_power_w: raw.dev_system_power_w,
        dev_carbon_intensity_kg_per_kwh: resolve_dist(
            &raw.dev_carbon_intensity_kg_per_kwh,
            &p("dev_carbon_intensity_kg_per_kwh"),
            base_dir,
        )?,
    })
}

fn build_platform(
    raw: &RawPlatform,
    default_reconfig: Option<&ReconfigProfile>,
    base_dir: Option<&Path>,
) -> Result<PlatformSpec> {
    let name = &raw.name;
    let prefix = |section: &str| format!("platforms({name}).{section}");
    let require = |field: &str| Error::schema(prefix(field), "missing required field");

    let kind = raw.kind.ok_or_else(|| require("kind"))?;
    let die_area_mm2 = raw.die_area_mm2.ok_or_else(|| require("die_area_mm2"))?;
    let p_use_w = raw.p_use_w.ok_or_else(|| require("p_use_w"))?;
    let n_gates = raw.n_gates.ok_or_else(|| require("n_gates"))?;
    let cores_capacity_gates = raw
        .cores_capacity_gates
        .ok_or_else(|| require("cores_capacity_gates"))?;
    check(die_area_mm2 > 0.0, &prefix("die_area_mm2"), "must be > 0")?;
    check(p_use_w >= 0.0, &prefix("p_use_w"), "must be >= 0")?;
    check(n_gates > 0.0, &prefix("n_gates"), "must be > 0")?;
    check(cores_capacity_gates > 0.0, &prefix("cores_capacity_gates"), "must be > 0")?;
    if let Some(k) = raw.apps_per_device {
        check(k >= 1, &prefix("apps_per_device"), "must be >= 1")?;
    }

    let technology = resolve_technology(
        raw.technology.as_ref().ok_or_else(|| require("technology"))?,
        &prefix("technology"),
        base_dir,
    )?;
    let design_house = resolve_design_house(
        raw.design_house.as_ref().ok_or_else(|| require("design_house"))?,
        &prefix("design_house"),
        base_dir,
    )?;
    let package = raw.package.clone().ok_or_else(|| require("package"))?;
    check(
        package.fixed_cfp_kg >= 0.0 && package.per_area_kg_per_cm2 >= 0.0,
        &prefix("package.fixed_cfp_kg"),
        "package terms must be >= 0",
    )?;
    let test = resolve_test(
        raw.test.as_ref().ok_or_else(|| require("test"))?,
        &prefix("test"),
        base_dir,
    )?;
    let retire = resolve_retire(
        raw.retire.as_ref().ok_or_else(|| require("retire"))?,
        &prefix("retire"),
        base_dir,
    )?;
    let eol = resolve_eol(
        raw.eol.as_ref().ok_or_else(|| require("eol"))?,
        &prefix("eol"),
        base_dir,
    )?;
    let memory = resolve_memory(
        raw.memory.as_ref().ok_or_else(|| require("memory"))?,
        &prefix("memory"),
        base_dir,
    )?;
    let reconfig = match (&raw.reconfig, default_reconfig) {
        (Some(rc), _) => resolve_reconfig(rc, &prefix("reconfig"), base_dir)?,
        (None, Some(rc)) => rc.clone(),
        (None, None) => return Err(require("reconfig")),
    };

    Ok(PlatformSpec {
        name: name.clone(),
        kind,
        die_area_mm2,
        p_use_w,
        n_gates,
        cores_capacity_gates,
        technology,
        design_house,
        package,
        test,
        retire,
        eol,
        memory,
        reconfig,
        apps_per_device: raw.apps_per_device,
    })
}

fn validate_scenario_invariants(raw: &RawScenario, analysis: &AnalysisConfig) -> Result<()> {
    check(raw.n_app >= 1, "scenario.n_app", "must be >= 1")?;
    check(raw.t_i_yr > 0.0, "scenario.t_i_yr", "must be > 0")?;
    check(raw.n_vol >= 1, "scenario.n_vol", "must be >= 1")?;
    check(
        raw.f_use > 0.0 && raw.f_use <= 1.0,
        "scenario.f_use",
        "must lie in (0, 1]",
    )?;
    check(raw.app_size_gates > 0.0, "scenario.app_size_gates", "must be > 0")?;
    if let Some(k) = raw.apps_per_device {
        check(k >= 1, "scenario.apps_per_device", "must be >= 1")?;
    }
    check(analysis.n_samples >= 1, "analysis.n_samples", "must be >= 1")?;
    check(analysis.energy_steps >= 2, "analysis.energy_steps", "must be >= 2")?;
    Ok(())
}

fn resolve_scenario(
    raw: &RawScenario,
    analysis: &AnalysisConfig,
    base_dir: Option<&Path>,
) -> Result<DeploymentScenario> {
    Ok(DeploymentScenario {
        n_app: raw.n_app,
        t_i_yr: raw.t_i_yr,
        n_vol: raw.n_vol,
        f_use: raw.f_use,
        app_size_gates: raw.app_size_gates,
        apps_per_device: raw.apps_per_device,
        carbon_intensity_use_kg_per_kwh: resolve_dist(
            &raw.operation.carbon_intensity_use_kg_per_kwh,
            "scenario.operation.carbon_intensity_use_kg_per_kwh",
            base_dir,
        )?,
        aging: raw.operation.aging,
        scale_op_by_nproc: raw.operation.scale_op_by_nproc,
        energy_steps: analysis.energy_steps,
    })
}

// ---------------------------------------------------------------------------
// Dumping (resolved -> wire)
// ---------------------------------------------------------------------------

impl RawScenarioFile {
    fn from_resolved(file: &ScenarioFile) -> Self {
        RawScenarioFile {
            version: file.version.clone(),
            platforms: file.platforms.iter().map(RawPlatform::from_resolved).collect(),
            scenario: RawScenario {
                n_app: file.scenario.n_app,
                t_i_yr: file.scenario.t_i_yr,
                n_vol: file.scenario.n_vol,
                f_use: file.scenario.f_use,
                app_size_gates: file.scenario.app_size_gates,
                apps_per_device: file.scenario.apps_per_device,
                operation: RawOperation {
                    carbon_intensity_use_kg_per_kwh: file
                        .scenario
                        .carbon_intensity_use_kg_per_kwh
                        .clone()
                        .into(),
                    aging: file.scenario.aging,
                    scale_op_by_nproc: file.scenario.scale_op_by_nproc,
                },
                reconfig: None,
            },
            analysis: file.analysis.clone(),
        }
    }
}

impl RawPlatform {
    fn from_resolved(spec: &PlatformSpec) -> Self {
        RawPlatform {
            name: spec.name.clone(),
            kind: Some(spec.kind),
            extends: None,
            from_baseline: None,
            die_area_mm2: Some(spec.die_area_mm2),
            p_use_w: Some(spec.p_use_w),
            n_gates: Some(spec.n_gates),
            cores_capacity_gates: Some(spec.cores_capacity_gates),
            technology: Some(RawTechnology {
                node_name: spec.technology.node_name.clone(),
                epa_kwh_per_cm2: spec.technology.epa_kwh_per_cm2.clone().into(),
                gpa_kg_per_wafer: spec.technology.gpa_kg_per_wafer.clone().into(),
                wafer_area_cm2: spec.technology.wafer_area_cm2,
                defect_density_per_cm2: spec.technology.defect_density_per_cm2.clone().into(),
                alpha: spec.technology.alpha,
                materials_new_kg_per_cm2: spec.technology.materials_new_kg_per_cm2,
                materials_recycled_kg_per_cm2: spec.technology.materials_recycled_kg_per_cm2,
                recycled_fraction_rho: spec.technology.recycled_fraction_rho,
                fab_carbon_intensity_kg_per_kwh: spec
                    .technology
                    .fab_carbon_intensity_kg_per_kwh
                    .clone()
                    .into(),
            }),
            design_house: Some(RawDesignHouse {
                annual_energy_gwh: spec.design_house.annual_energy_gwh,
                total_employees: spec.design_house.total_employees,
                design_carbon_intensity_kg_per_kwh: spec
                    .design_house
                    .design_carbon_intensity_kg_per_kwh
                    .clone()
                    .into(),
                employees_on_chip: spec.design_house.employees_on_chip,
                gates_per_project: spec.design_house.gates_per_project,
                ip_durations_yr: spec.design_house.ip_durations_yr.clone(),
                soc_duration_yr: spec.design_house.soc_duration_yr,
            }),
            package: Some(spec.package.clone()),
            test: Some(RawTest {
                test_times_hr: spec.test.test_times_hr.clone(),
                slots: spec.test.slots,
                overhead_hr: spec.test.overhead_hr,
                ate_power_w: spec.test.ate_power_w,
                test_carbon_intensity_kg_per_kwh: spec
                    .test
                    .test_carbon_intensity_kg_per_kwh
                    .clone()
                    .into(),
            }),
            retire: Some(RawRetire {
                recycle_fraction_delta: spec.retire.recycle_fraction_delta,
                recycle_credit_mtco2e_per_ton: spec
                    .retire
                    .recycle_credit_mtco2e_per_ton
                    .clone()
                    .into(),
                discard_cost_mtco2e_per_ton: spec
                    .retire
                    .discard_cost_mtco2e_per_ton
                    .clone()
                    .into(),
                device_mass_g: spec.retire.device_mass_g,
            }),
            eol: Some(RawEol {
                lambda_fail_per_yr: spec.eol.lambda_fail_per_yr.clone().into(),
                lambda_obsol_per_yr: spec.eol.lambda_obsol_per_yr.clone().into(),
                lambda_upgrade_per_yr: spec.eol.lambda_upgrade_per_yr.clone().into(),
                support_window_yr: spec.eol.support_window_yr,
            }),
            memory: Some(RawMemory {
                cfp_kg_per_gb: spec.memory.cfp_kg_per_gb.clone().into(),
                capacity_gb: spec.memory.capacity_gb,
            }),
            reconfig: Some(RawReconfig {
                t_sw_dev_mo: spec.reconfig.t_sw_dev_mo,
                t_compile_mo: spec.reconfig.t_compile_mo,
                t_reg_mo: spec.reconfig.t_reg_mo,
                t_app_config_hr: spec.reconfig.t_app_config_hr,
                dev_system_power_w: spec.reconfig.dev_system_power_w,
                dev_carbon_intensity_kg_per_kwh: spec
                    .reconfig
                    .dev_carbon_intensity_kg_per_kwh
                    .clone()
                    .into(),
            }),
            apps_per_device: spec.apps_per_device,
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in testcases
// ---------------------------------------------------------------------------

/// Names of the shipped calibration scenarios.
pub const BUILTIN_NAMES: [&str; 13] = [
    "dnn",
    "imgproc",
    "crypto",
    "rnn_hp",
    "rnn_ee",
    "lhcb",
    "randgen",
    "llama2",
    "fir",
    "industry_tpu",
    "industry_h100",
    "industry_i9",
    "industry_agilex7",
];

/// Load a built-in calibration scenario by name.
pub fn builtin(name: &str) -> Result<ScenarioFile> {
    let content = builtin_source(name)?;
    load_scenario_str(content, None, &format!("builtin:{name}"))
}

/// Raw JSON text of a built-in scenario.
pub fn builtin_source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "dnn" => include_str!("../../../calibration/dnn_vs_asic.json"),
        "imgproc" => include_str!("../../../calibration/imgproc_vs_asic.json"),
        "crypto" => include_str!("../../../calibration/crypto_vs_asic.json"),
        "rnn_hp" => include_str!("../../../calibration/rnn_hp_vs_gpu.json"),
        "rnn_ee" => include_str!("../../../calibration/rnn_ee_vs_gpu.json"),
        "lhcb" => include_str!("../../../calibration/lhcb_vs_gpu.json"),
        "randgen" => include_str!("../../../calibration/randgen_vs_cpu.json"),
        "llama2" => include_str!("../../../calibration/llama2_vs_cpu.json"),
        "fir" => include_str!("../../../calibration/fir_vs_cpu.json"),
        "industry_tpu" | "tpu_v4" => include_str!("../../../calibration/industry_tpu.json"),
        "industry_h100" | "h100" => include_str!("../../../calibration/industry_h100.json"),
        "industry_i9" | "i9" => include_str!("../../../calibration/industry_i9.json"),
        "industry_agilex7" | "agilex7" => {
            include_str!("../../../calibration/industry_agilex7.json")
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown builtin testcase `{other}` (available: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}
