//! Scenario files (TOML). Every table rejects unknown keys.
//!
//! ```toml
//! name = "ring-swap-fermion"      # output file stem and record id
//! description = "optional"
//!
//! [output]                        # optional; CLI flags take precedence
//! format = "json-lines"           # or "csv"
//!
//! [scenario]
//! kind = "ring-swap"              # selects the parameter block, see `Scenario`
//! spin = 0.5
//!
//! [sweep]                         # optional; one record set per value
//! parameter = "spin"              # dotted path into [scenario]
//! values = [0.5, 1.0]
//!
//! [[expect]]                      # optional, any number
//! field = "total_phase"
//! equals = 3.141592653589793
//! tol = 1e-8
//! angle = true                    # compare on the circle
//! ```

use std::path::{Path, PathBuf};

use phaselab::anyon::FieldMap;
use phaselab::holomorphic::{HolomorphicSpec, LoopShape};
use phaselab::ring::PhiProfile;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<toml::Value>,
}

/// A check on one output field. Exactly one of `equals`, `is`, or a
/// bound pair (`at_most` and/or `at_least`) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub field: String,
    pub equals: Option<f64>,
    pub at_most: Option<f64>,
    pub at_least: Option<f64>,
    pub is: Option<bool>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Compare `equals` modulo 2π.
    #[serde(default)]
    pub angle: bool,
    /// Restrict to one sweep point.
    pub point: Option<usize>,
    /// Restrict to one row within a sweep point.
    pub row: Option<usize>,
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub output: OutputConfig,
    pub scenario: toml::Table,
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

/// Parameter blocks, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    RingSwap(RingSwapParams),
    SpinSwap(SpinSwapParams),
    AnyonPhase(AnyonPhaseParams),
    BerryHolonomy(BerryHolonomyParams),
    RobustnessSweep(RobustnessSweepParams),
    BraidCheck(BraidCheckParams),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::RingSwap(_) => "ring-swap",
            Scenario::SpinSwap(_) => "spin-swap",
            Scenario::AnyonPhase(_) => "anyon-phase",
            Scenario::BerryHolonomy(_) => "berry-holonomy",
            Scenario::RobustnessSweep(_) => "robustness-sweep",
            Scenario::BraidCheck(_) => "braid-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSwapParams {
    pub spin: f64,
    #[serde(default = "d_m_max")]
    pub m_max: usize,
    /// Angular momenta in the equal-weight initial state.
    #[serde(default = "d_components")]
    pub components: Vec<i64>,
    #[serde(default = "d_ring_steps")]
    pub steps: usize,
    #[serde(default = "d_one")]
    pub duration: f64,
    #[serde(default = "d_profile")]
    pub profile: PhiProfile,
    /// `ϕ(0) − ϕ(T)` of the extra identity term.
    #[serde(default)]
    pub extra_phase_drop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinSwapMode {
    /// Both tracks rotate the spin by π about z (`V_A = V_B`).
    EqualRotation,
    /// Track B runs the time-reversed negated drive (`V_B = V_A†`).
    ReversedConjugate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSwapParams {
    pub spin: f64,
    pub mode: SpinSwapMode,
    #[serde(default = "d_one")]
    pub duration: f64,
    #[serde(default = "d_spin_steps")]
    pub steps: usize,
    /// Reversed-conjugate drive `H_A(t) = (π/T) n̂·S + a·sin(πt/T)·S_x`: axis `n̂`.
    #[serde(default = "d_axis")]
    pub axis: [f64; 3],
    /// Reversed-conjugate drive amplitude `a`.
    #[serde(default)]
    pub drive: f64,
    #[serde(default)]
    pub phi_spatial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathSpec {
    Polygon { vertices: Vec<[f64; 2]>, #[serde(default = "d_true")] closed: bool },
    Regular { center: [f64; 2], radius: f64, sides: usize },
    Rectangle { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },
    /// Path file, relative to the config file.
    File { file: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    /// Number of deterministic vertex wobbles (variants `0..count`).
    #[serde(default)]
    pub wobbles: usize,
    #[serde(default)]
    pub wobble_amplitude: f64,
    /// Dilations about the centroid.
    #[serde(default)]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnyonPhaseParams {
    pub charge: f64,
    pub flux: f64,
    pub path: PathSpec,
    /// Positions of the static anyons.
    #[serde(default)]
    pub others: Vec<[f64; 2]>,
    #[serde(default = "d_field")]
    pub field: FieldMap,
    /// Grid file replacing `field`, relative to the config file.
    pub field_file: Option<PathBuf>,
    #[serde(default = "d_cells")]
    pub cells_per_side: usize,
    #[serde(default = "d_region_cells")]
    pub cells_per_region_diameter: usize,
    #[serde(default)]
    pub deformations: DeformationSpec,
    /// Largest tolerated geometric drift for the robustness verdict.
    #[serde(default = "d_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Spin-1/2 ground state of `−n̂·σ` around a cone of polar angle `theta`.
    Cone { theta: f64 },
    /// `e^{iφG}P_0` with `G = R diag(spectrum) R†` and `R = exp(i·mixing·K)`
    /// for a fixed Hermitian `K`.
    RotatingSubspace { spectrum: Vec<f64>, degeneracy: usize, #[serde(default)] mixing: f64 },
    Holomorphic {
        spec: HolomorphicSpec,
        #[serde(rename = "loop")]
        loop_shape: LoopShape,
        #[serde(default = "d_max_step")]
        max_step: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerryHolonomyParams {
    pub family: FamilySpec,
    /// Loop samples for the cone and rotating families.
    #[serde(default = "d_samples")]
    pub samples: usize,
    #[serde(default = "d_fd_step")]
    pub fd_step: f64,
    /// Spectrum agreement tolerance between the two methods.
    #[serde(default = "d_agree_tol")]
    pub agree_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopPair {
    pub a: LoopShape,
    pub b: LoopShape,
    /// In extra-parameter mode, loop `b` is lifted to `ξ = lift·sin(2πs)`;
    /// loop `a` stays at `ξ = 0`.
    #[serde(default)]
    pub lift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSweepParams {
    #[serde(default)]
    pub family: HolomorphicSpec,
    pub pairs: Vec<LoopPair>,
    #[serde(default = "d_eps")]
    pub epsilons: Vec<f64>,
    #[serde(default = "d_max_step")]
    pub max_step: f64,
    /// Largest residual accepted at ε = 0.
    #[serde(default = "d_robust_tol")]
    pub zero_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RepresentationSpec {
    Ising,
    /// Ising images on four strands, `σ_3` acting like `σ_1`.
    Ising4,
    Fibonacci,
    Abelian { n_strands: usize, theta: f64 },
    Trivial { n_strands: usize, dim: usize },
    /// Two-strand exchange representation of a holomorphic family.
    HolomorphicExchange { spec: HolomorphicSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraidCheckParams {
    pub representation: RepresentationSpec,
    /// Words whose images are reported, e.g. `"s1 s2^-1"`.
    #[serde(default)]
    pub words: Vec<String>,
    /// Pairs checked for `ρ(ab) = ρ(b)ρ(a)`.
    #[serde(default)]
    pub word_pairs: Vec<[String; 2]>,
    /// Conjugate by `exp(i·conjugate_mixing·K)` and re-check the relations.
    #[serde(default)]
    pub conjugate_mixing: f64,
    #[serde(default = "d_relation_tol")]
    pub tol: f64,
}

fn d_m_max() -> usize {
    phaselab::ring::DEFAULT_M_MAX
}
fn d_components() -> Vec<i64> {
    vec![0, 1]
}
fn d_ring_steps() -> usize {
    10_000
}
fn d_one() -> f64 {
    1.0
}
fn d_profile() -> PhiProfile {
    PhiProfile::Linear
}
fn d_spin_steps() -> usize {
    400
}
fn d_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn d_true() -> bool {
    true
}
fn d_field() -> FieldMap {
    FieldMap::None
}
fn d_cells() -> usize {
    400
}
fn d_region_cells() -> usize {
    50
}
fn d_threshold() -> f64 {
    1e-9
}
fn d_max_step() -> f64 {
    0.03
}
fn d_samples() -> usize {
    2000
}
fn d_fd_step() -> f64 {
    1e-4
}
fn d_agree_tol() -> f64 {
    1e-3
}
fn d_eps() -> Vec<f64> {
    vec![0.0, 0.01, 0.05, 0.1]
}
fn d_robust_tol() -> f64 {
    1e-6
}
fn d_relation_tol() -> f64 {
    1e-9
}

/// A parsed config with its sweep expanded and every point validated.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    /// Directory relative input files are resolved against.
    pub base_dir: PathBuf,
    /// `(sweep value, scenario table, parsed scenario)` per sweep point.
    pub points: Vec<(Option<toml::Value>, toml::Table, Scenario)>,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &path.display().to_string(), base_dir)
}

pub fn parse(text: &str, origin: &str, base_dir: PathBuf) -> Result<LoadedConfig, CliError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::config(origin, e.to_string()))?;
    if config.name.is_empty() || !config.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(CliError::config(origin, format!("name `{}` must be non-empty [A-Za-z0-9_-]", config.name)));
    }
    for (i, e) in config.expect.iter().enumerate() {
        validate_expectation(e).map_err(|m| CliError::config(origin, format!("expect[{i}] ({}): {m}", e.field)))?;
    }
    let tables: Vec<(Option<toml::Value>, toml::Table)> = match &config.sweep {
        None => vec![(None, config.scenario.clone())],
        Some(sweep) => {
            if sweep.values.is_empty() {
                return Err(CliError::config(origin, "sweep.values must not be empty"));
            }
            sweep
                .values
                .iter()
                .map(|v| {
                    let mut t = config.scenario.clone();
                    set_dotted(&mut t, &sweep.parameter, v.clone())
                        .map_err(|m| CliError::config(origin, format!("sweep.parameter: {m}")))?;
                    Ok((Some(v.clone()), t))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let mut points = Vec::with_capacity(tables.len());
    for (i, (value, table)) in tables.into_iter().enumerate() {
        let scenario: Scenario = toml::Value::Table(table.clone())
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(origin, format!("scenario (sweep point {i}): {e}")))?;
        points.push((value, table, scenario));
    }
    Ok(LoadedConfig {
        config,
        base_dir,
        points,
    })
}

fn validate_expectation(e: &Expectation) -> Result<(), String> {
    let modes = [e.equals.is_some(), e.is.is_some(), e.at_most.is_some() || e.at_least.is_some()];
    if modes.iter().filter(|m| **m).count() != 1 {
        return Err("give exactly one of `equals`, `is`, or `at_most`/`at_least`".into());
    }
    if !(e.tol >= 0.0 && e.tol.is_finite()) {
        return Err("tol must be finite and non-negative".into());
    }
    Ok(())
}

/// Replaces the value at a dotted key path; the key must already exist
/// unless its parent table does.
fn set_dotted(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or("empty parameter path")?;
    let mut cur = table;
    for p in parts {
        cur = match cur.get_mut(p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(format!("`{path}`: no table `{p}` in [scenario]")),
        };
    }
    if last == "kind" {
        return Err("cannot sweep the scenario kind".into());
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
