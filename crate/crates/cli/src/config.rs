//! Run configuration: one TOML file, one flat section per scenario.

use std::path::PathBuf;

use rmwalk::collapse::{StepDistribution, RENEWAL_QUANTILE};
use rmwalk::dynamics::Potential;
use rmwalk::ensembles::KickMethod;
use rmwalk::estimates::{EnvironmentParams, EstimateInputs};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable consulted for the master seed when neither the
/// command line nor the config file sets one.
pub const SEED_ENV: &str = "RMWALK_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    Born,
    Survival,
    Trajectory,
    Renewal,
    GeometryCheck,
    VelocityDecomposition,
    GueStats,
    Estimate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Born => "born",
            Scenario::Survival => "survival",
            Scenario::Trajectory => "trajectory",
            Scenario::Renewal => "renewal",
            Scenario::GeometryCheck => "geometry-check",
            Scenario::VelocityDecomposition => "velocity-decomposition",
            Scenario::GueStats => "gue-stats",
            Scenario::Estimate => "estimate",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub n_workers: usize,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub born: BornSection,
    pub survival: SurvivalSection,
    pub trajectory: TrajectorySection,
    pub renewal: RenewalSection,
    pub geometry: GeometrySection,
    pub velocity: VelocitySection,
    pub gue: GueSection,
    pub estimate: EstimateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            master_seed: 0,
            n_workers: 0,
            output_dir: PathBuf::from("rmwalk-out"),
            format: OutputFormat::default(),
            born: BornSection::default(),
            survival: SurvivalSection::default(),
            trajectory: TrajectorySection::default(),
            renewal: RenewalSection::default(),
            geometry: GeometrySection::default(),
            velocity: VelocitySection::default(),
            gue: GueSection::default(),
            estimate: EstimateSection::default(),
        }
    }
}

/// Superposition of Gaussians on a grid, kicked until a detector fires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BornSection {
    pub n_points: usize,
    pub length: f64,
    /// Born weights |c_i|²; must sum to 1.
    pub weights: Vec<f64>,
    /// Optional relative phases (radians), one per weight.
    pub phases: Vec<f64>,
    pub centers: Vec<f64>,
    pub sigma: f64,
    /// Edge margin of each component, in widths.
    pub edge_margin: f64,
    /// Target mean Fubini–Study length of one kick.
    pub step_length: f64,
    pub n_steps_max: usize,
    pub n_runs: usize,
    pub kick_method: KickMethod,
}

impl Default for BornSection {
    fn default() -> Self {
        Self {
            n_points: 64,
            length: 64.0,
            weights: vec![0.64, 0.36],
            phases: Vec::new(),
            centers: vec![-12.0, 12.0],
            sigma: 4.0,
            edge_margin: 5.0,
            step_length: 0.05,
            n_steps_max: 100_000,
            n_runs: 10_000,
            kick_method: KickMethod::Krylov,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurvivalSection {
    pub step: StepDistribution,
    pub n_walks: usize,
    pub n_max: usize,
    /// Extra n at which the exact survival law is tabulated.
    pub tail_n: Vec<u64>,
}

impl Default for SurvivalSection {
    fn default() -> Self {
        Self {
            step: StepDistribution::PlusMinusOne,
            n_walks: 100_000,
            n_max: 64,
            tail_n: vec![1_000, 1_000_000, 310_000_000],
        }
    }
}

/// Free segments alternating with calibrated kicks, against the Newtonian line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub n_points: usize,
    pub length: f64,
    pub sigma: f64,
    pub center: f64,
    pub momentum: f64,
    pub hbar: f64,
    pub mass: f64,
    pub potential: Potential,
    pub step_length: f64,
    pub dt_free: f64,
    pub n_free_substeps: usize,
    pub t_final: f64,
    pub n_seeds: usize,
    pub kick_method: KickMethod,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            n_points: 128,
            length: 64.0,
            sigma: 2.0,
            center: -0.5,
            momentum: 1.0,
            hbar: 1.0,
            mass: 1.0,
            potential: Potential::Free,
            step_length: 0.01,
            dt_free: 0.01,
            n_free_substeps: 10,
            t_final: 1.0,
            n_seeds: 200,
            kick_method: KickMethod::Krylov,
        }
    }
}

/// Spread–detect–reset cycles and the reduced (τ, s) walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenewalSection {
    /// Transverse position diffusion D_a (m²/s).
    pub diffusion: f64,
    /// Walk step (s).
    pub dt: f64,
    pub quantile: f64,
    pub n_cycles: usize,
    pub n_chains: usize,
    pub plane_drift_tau: f64,
    pub plane_drift_s: f64,
    pub plane_std_tau: f64,
    pub plane_std_s: f64,
    pub plane_detect_s: f64,
    pub plane_n_max: usize,
    /// Rows of the (τ, s) trace written to disk.
    pub plane_trace_rows: usize,
}

impl Default for RenewalSection {
    fn default() -> Self {
        Self {
            diffusion: 1e-12,
            dt: 1e-12,
            quantile: RENEWAL_QUANTILE,
            n_cycles: 10_000,
            n_chains: 1_000,
            plane_drift_tau: 0.1,
            plane_drift_s: -0.02,
            plane_std_tau: 0.05,
            plane_std_s: 0.3,
            plane_detect_s: -1.0,
            plane_n_max: 200_000,
            plane_trace_rows: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub n_points: usize,
    pub length: f64,
    pub sigma: f64,
    pub n_separations: usize,
    /// Largest separation, in widths.
    pub max_separation: f64,
    pub lattice_size: usize,
    pub lattice_max_da: f64,
    pub lattice_max_dp: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            n_points: 512,
            length: 40.0,
            sigma: 1.0,
            n_separations: 100,
            max_separation: 6.0,
            lattice_size: 10,
            lattice_max_da: 6.0,
            lattice_max_dp: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocitySection {
    pub sigma: f64,
    pub hbar: f64,
    pub mass: f64,
    pub momenta: Vec<f64>,
    /// Slopes g of linear potentials V = g·z.
    pub slopes: Vec<f64>,
}

impl Default for VelocitySection {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            hbar: 1.0,
            mass: 1.0,
            momenta: vec![0.0, 1.0, 2.0],
            slopes: vec![0.0, 0.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GueSection {
    pub dimension: usize,
    pub scale: f64,
    pub n_matrices: usize,
}

impl Default for GueSection {
    fn default() -> Self {
        Self {
            dimension: 200,
            scale: 1.0,
            n_matrices: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSection {
    pub environment: EnvironmentParams,
    pub inputs: EstimateInputs,
}

/// Command-line values layered over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// `section.key=value` assignments, value parsed as TOML.
    pub set: Vec<String>,
}

impl RunConfig {
    /// Strict parse; the error names the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Validation {
            key: "<file>".into(),
            reason: e.message().to_string(),
        })?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self, CliError> {
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let key = e.path().to_string();
            CliError::Validation {
                key,
                reason: e.into_inner().message().to_string(),
            }
        })
    }

    /// Builds the effective configuration. The master seed comes from, in
    /// order: `overrides.seed`, the file, `env_seed`, then 0.
    pub fn resolve(file_text: Option<&str>, overrides: &Overrides, env_seed: Option<&str>) -> Result<Self, CliError> {
        let mut table: toml::Table = match file_text {
            Some(text) => text.parse().map_err(|e: toml::de::Error| CliError::Validation {
                key: "<file>".into(),
                reason: e.message().to_string(),
            })?,
            None => toml::Table::new(),
        };
        for assignment in &overrides.set {
            apply_assignment(&mut table, assignment)?;
        }
        let file_has_seed = table.contains_key("master_seed");
        let file_has_scenario = table.contains_key("scenario");
        let mut cfg = Self::from_table(table)?;
        if let Some(s) = overrides.scenario {
            if file_has_scenario && cfg.scenario != s {
                return Err(CliError::Validation {
                    key: "scenario".into(),
                    reason: format!("config names `{}` but the command runs `{}`", cfg.scenario.name(), s.name()),
                });
            }
            cfg.scenario = s;
        }
        if let Some(seed) = overrides.seed {
            cfg.master_seed = seed;
        } else if !file_has_seed {
            if let Some(raw) = env_seed {
                cfg.master_seed = raw.trim().parse().map_err(|_| CliError::Validation {
                    key: SEED_ENV.into(),
                    reason: format!("`{raw}` is not an unsigned 64-bit integer"),
                })?;
            }
        }
        if let Some(w) = overrides.workers {
            cfg.n_workers = w;
        }
        if let Some(dir) = &overrides.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(f) = overrides.format {
            cfg.format = f;
        }
        Ok(cfg)
    }

    /// Commented TOML listing every key with its default.
    pub fn defaults_toml() -> String {
        let body = toml::to_string_pretty(&RunConfig::default()).expect("defaults serialize");
        format!(
            "# rmwalk run configuration (all keys optional; unknown keys are rejected)\n\
             # scenario: born | survival | trajectory | renewal | geometry-check |\n\
             #           velocity-decomposition | gue-stats | estimate\n\
             # master_seed precedence: --seed, this file, ${SEED_ENV}, 0\n\
             # n_workers = 0 uses every available core; results do not depend on it\n\n{body}"
        )
    }
}

fn apply_assignment(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| CliError::Validation {
        key: assignment.to_string(),
        reason: "expected KEY=VALUE".into(),
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts = key.split('.').peekable();
    let mut cursor = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(CliError::Validation {
                key: key.to_string(),
                reason: "empty key segment".into(),
            });
        }
        if parts.peek().is_none() {
            cursor.insert(part.to_string(), value);
            break;
        }
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| CliError::Validation {
            key: key.to_string(),
            reason: format!("`{part}` is not a section"),
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let text = RunConfig::defaults_toml();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml_str("[born]\nsigmaa = 3.0\n").unwrap_err();
        match err {
            CliError::Validation { key, .. } => assert_eq!(key, "born.sigmaa"),
            other => panic!("{other:?}"),
        }
        let err = RunConfig::from_toml_str("bogus = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "bogus"), "{err:?}");
    }

    #[test]
    fn type_errors_are_named() {
        let err = RunConfig::from_toml_str("[survival]\nn_walks = \"many\"\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "survival.n_walks"), "{err:?}");
    }

    #[test]
    fn seed_precedence() {
        let flag = Overrides {
            seed: Some(7),
            ..Overrides::default()
        };
        let none = Overrides::default();
        let file = "master_seed = 5\n";
        assert_eq!(RunConfig::resolve(Some(file), &flag, Some("9")).unwrap().master_seed, 7);
        assert_eq!(RunConfig::resolve(Some(file), &none, Some("9")).unwrap().master_seed, 5);
        assert_eq!(RunConfig::resolve(None, &none, Some("9")).unwrap().master_seed, 9);
        assert_eq!(RunConfig::resolve(None, &none, None).unwrap().master_seed, 0);
        assert!(RunConfig::resolve(None, &none, Some("x")).is_err());
    }

    #[test]
    fn assignments_and_scenario_guard() {
        let o = Overrides {
            set: vec!["born.weights=[1.0, 0.0]".into(), "trajectory.potential.kind=\"free\"".into()],
            scenario: Some(Scenario::Born),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(None, &o, None).unwrap();
        assert_eq!(cfg.born.weights, vec![1.0, 0.0]);
        let clash = RunConfig::resolve(Some("scenario = \"estimate\"\n"), &o, None).unwrap_err();
        assert!(matches!(clash, CliError::Validation { ref key, .. } if key == "scenario"));
    }
}
