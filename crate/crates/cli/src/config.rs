//! Run configuration: one TOML document, every key optional, defaults set to
//! the two-color reference run (E₁ = 10⁴ V/m, E₂/E₁ = 10⁴, λ = 0.628/0.736 μm,
//! θ_F = −2.65, t_int = 0.625 μs, 20 000 trajectories).
//!
//! All quantities are SI.

use std::path::{Path, PathBuf};

use moldep_core::dynamics::{Integrator, DEFAULT_BIN_WIDTH};
use moldep_core::potential::PotentialTerms;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub dataset: DatasetSection,
    pub superposition: SuperpositionSection,
    pub field: FieldSection,
    pub beam: BeamSection,
    pub simulation: SimulationSection,
    pub potential: PotentialSection,
    pub analysis: AnalysisSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub mixture: MixtureSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// File path, or `builtin:<name>`; falls back to `MOLDEP_DATASET`, then
    /// the built-in synthetic N₂ model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Required content hash, set when replaying a manifest.
    #[serde(skip)]
    pub expected_sha256: Option<String>,
}

/// Ground-manifold level |ν, J, M⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub nu: u32,
    #[serde(rename = "J")]
    pub j: u32,
    #[serde(rename = "M")]
    pub m: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperpositionSection {
    pub state1: Level,
    pub state2: Level,
    /// |c₁|
    pub c1: f64,
    /// |c₂|
    pub c2: f64,
    /// arg(c₁c₂*) (rad)
    pub theta: f64,
    /// Rescale |c₁|, |c₂| to unit norm instead of rejecting them.
    pub normalize: bool,
}

impl Default for SuperpositionSection {
    fn default() -> Self {
        SuperpositionSection {
            state1: Level { nu: 0, j: 0, m: 0 },
            state2: Level { nu: 0, j: 2, m: 0 },
            c1: 0.2f64.sqrt(),
            c2: 0.8f64.sqrt(),
            theta: 0.0,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    /// V/m
    pub e1: f64,
    /// V/m
    pub e2: f64,
    /// m
    pub lambda1: f64,
    /// m
    pub lambda2: f64,
    /// rad
    pub theta_f: f64,
    /// Largest accepted |E₁ + ħω₁ − E₂ − ħω₂| (cm⁻¹) before warning.
    pub resonance_tolerance_cm: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection {
            e1: 1.0e4,
            e2: 1.0e8,
            lambda1: 0.628e-6,
            lambda2: 0.736e-6,
            theta_f: -2.65,
            resonance_tolerance_cm: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSection {
    /// m/s
    pub vz: f64,
    /// m
    pub nozzle_width: f64,
    /// m/s
    pub sigma_v: f64,
    /// s
    pub t_int: f64,
    /// s
    pub t_free: f64,
}

impl Default for BeamSection {
    fn default() -> Self {
        BeamSection {
            vz: 600.0,
            nozzle_width: 4.0 * 0.736e-6,
            sigma_v: 0.0,
            t_int: 0.625e-6,
            t_free: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub trajectories: usize,
    pub seed: u64,
    /// m
    pub bin_width: f64,
    pub integrator: Integrator,
    /// s; defaults to T_min/200.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub terms: PotentialTerms,
    /// Also run with Vⁿⁱ only and report the ratios.
    pub compare: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            trajectories: 20_000,
            seed: 1,
            bin_width: DEFAULT_BIN_WIDTH,
            integrator: Integrator::default(),
            dt: None,
            terms: PotentialTerms::Full,
            compare: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    /// m
    pub x_min: f64,
    /// m
    pub x_max: f64,
    pub samples: usize,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            x_min: -10e-6,
            x_max: 10e-6,
            samples: 20_001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub threshold_fraction: f64,
    /// m/s; when positive the histogram is also written convolved with the
    /// kinematic kernel of width t_int·σ.
    pub broaden_sigma_v: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            threshold_fraction: 0.5,
            broaden_sigma_v: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// field.theta_f (rad)
    ThetaF,
    /// |c₁|², keeping θ and unit norm
    Population1,
    /// beam.t_int (s)
    TInt,
    /// E₂/E₁ with E₁ fixed
    FieldRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureSection {
    /// K
    pub temperature: f64,
    /// Cumulative rotational population kept.
    pub cutoff: f64,
    /// Preparation pulse field (V/m).
    pub field_strength: f64,
    /// Preparation pulse width (cm⁻¹).
    pub spectral_width: f64,
    /// Write one histogram per (J, M) component.
    pub export_components: bool,
}

impl Default for MixtureSection {
    fn default() -> Self {
        MixtureSection {
            temperature: 298.0,
            cutoff: 0.99,
            field_strength: 3.25e9,
            spectral_width: 75.4,
            export_components: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

/// Parse `key=value`, reading the value as a TOML literal and falling back
/// to a bare string.
fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{raw}` is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::Validation(format!("override key `{key}` has an empty segment")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((path, parsed))
}

fn apply_override(root: &mut toml::Table, path: &[String], value: toml::Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = root;
    for (i, key) in parents.iter().enumerate() {
        let entry = table
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            CliError::Validation(format!("override `{}`: `{}` is not a table", path.join("."), path[..=i].join(".")))
        })?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

fn deserialize(table: toml::Table) -> Result<Config, CliError> {
    let value = toml::Value::Table(table);
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("config key `{path}`: {}", e.into_inner()))
    })
}

/// Parse `text`, apply `overrides` in order, and check value ranges.
pub fn parse(text: &str, overrides: &[String]) -> Result<Config, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config is not valid TOML: {e}")))?;
    finish(table, overrides)
}

/// Configuration recorded in a run manifest, pinned to the dataset it used.
pub fn parse_manifest(text: &str, overrides: &[String]) -> Result<Config, CliError> {
    let invalid = |m: String| CliError::Validation(m);
    let mut doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| invalid(format!("manifest is not valid JSON: {e}")))?;
    let table: toml::Table = serde_json::from_value(doc["config"].take())
        .map_err(|e| invalid(format!("manifest key `config`: {e}")))?;
    let mut config = finish(table, overrides)?;
    let dataset = &doc["dataset"];
    if config.dataset.path.is_none() {
        config.dataset.path = dataset["source"].as_str().map(str::to_string);
    }
    config.dataset.expected_sha256 = dataset["sha256"].as_str().map(str::to_string);
    Ok(config)
}

fn finish(mut table: toml::Table, overrides: &[String]) -> Result<Config, CliError> {
    for raw in overrides {
        let (path, value) = parse_override(raw)?;
        apply_override(&mut table, &path, value)?;
    }
    let config = deserialize(table)?;
    config.check()?;
    Ok(config)
}

pub fn load(path: &Path, overrides: &[String]) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let is_manifest = path.extension().is_some_and(|e| e == "json");
    let mut config = if is_manifest {
        parse_manifest(&text, overrides)?
    } else {
        parse(&text, overrides)?
    };
    // Relative dataset paths are taken from the config file's directory.
    if let Some(p) = &config.dataset.path {
        if !p.starts_with("builtin:") && Path::new(p).is_relative() {
            if let Some(dir) = path.parent() {
                config.dataset.path = Some(dir.join(p).to_string_lossy().into_owned());
            }
        }
    }
    Ok(config)
}

fn require(ok: bool, key: &str, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(format!("config key `{key}`: {message}")))
    }
}

impl Config {
    /// Range checks that the type system does not cover.
    pub fn check(&self) -> Result<(), CliError> {
        let s = &self.superposition;
        require(s.c1 >= 0.0 && s.c1.is_finite(), "superposition.c1", "must be a finite magnitude >= 0")?;
        require(s.c2 >= 0.0 && s.c2.is_finite(), "superposition.c2", "must be a finite magnitude >= 0")?;
        require(s.theta.is_finite(), "superposition.theta", "must be finite")?;
        let f = &self.field;
        require(f.e1 >= 0.0 && f.e1.is_finite(), "field.e1", "must be finite and >= 0")?;
        require(f.e2 >= 0.0 && f.e2.is_finite(), "field.e2", "must be finite and >= 0")?;
        require(f.lambda1 > 0.0, "field.lambda1", "must be positive")?;
        require(f.lambda2 > 0.0, "field.lambda2", "must be positive")?;
        require(f.theta_f.is_finite(), "field.theta_f", "must be finite")?;
        require(f.resonance_tolerance_cm >= 0.0, "field.resonance_tolerance_cm", "must be >= 0")?;
        let b = &self.beam;
        require(b.vz > 0.0, "beam.vz", "must be positive")?;
        require(b.nozzle_width > 0.0, "beam.nozzle_width", "must be positive")?;
        require(b.sigma_v >= 0.0, "beam.sigma_v", "must be >= 0")?;
        require(b.t_int > 0.0, "beam.t_int", "must be positive")?;
        require(b.t_free >= 0.0, "beam.t_free", "must be >= 0")?;
        let sim = &self.simulation;
        require(sim.trajectories > 0, "simulation.trajectories", "must be positive")?;
        require(sim.bin_width > 0.0, "simulation.bin_width", "must be positive")?;
        require(sim.dt.is_none_or(|dt| dt > 0.0), "simulation.dt", "must be positive")?;
        let p = &self.potential;
        require(p.x_max > p.x_min, "potential.x_max", "must exceed potential.x_min")?;
        require(p.samples >= 2, "potential.samples", "must be at least 2")?;
        let a = &self.analysis;
        require(
            a.threshold_fraction > 0.0 && a.threshold_fraction < 1.0,
            "analysis.threshold_fraction",
            "must lie in (0, 1)",
        )?;
        require(a.broaden_sigma_v >= 0.0, "analysis.broaden_sigma_v", "must be >= 0")?;
        if let Some(sweep) = &self.sweep {
            require(!sweep.values.is_empty(), "sweep.values", "must list at least one value")?;
            require(sweep.values.iter().all(|v| v.is_finite()), "sweep.values", "must be finite")?;
        }
        let m = &self.mixture;
        require(m.temperature > 0.0, "mixture.temperature", "must be positive")?;
        require(m.cutoff > 0.0 && m.cutoff <= 1.0, "mixture.cutoff", "must lie in (0, 1]")?;
        require(m.field_strength >= 0.0, "mixture.field_strength", "must be >= 0")?;
        require(m.spectral_width > 0.0, "mixture.spectral_width", "must be positive")?;
        Ok(())
    }
}
