//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use cocycle_core::arithmetic::RotationNumber;
use cocycle_core::kam::KamParams;
use cocycle_core::normal_form::{ClassifyOptions, DiagnoseOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `golden`, `silver`, `p/q`, `[a1, a2, ...]`, `[a1; (b1, b2)]` or a
    /// decimal literal.
    #[serde(default = "default_alpha")]
    pub alpha: String,
    #[serde(default)]
    pub kam: KamConfig,
    /// Input cocycle when no plant is given.
    #[serde(default)]
    pub cocycle: Option<CocycleSpec>,
    #[serde(default)]
    pub plant: Option<PlantSpec>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> String {
    "golden".into()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: default_alpha(),
            kam: KamConfig::default(),
            cocycle: None,
            plant: None,
            analysis: AnalysisConfig::default(),
            out_dir: None,
            seed: 0,
        }
    }
}

/// Mirror of [`KamParams`] with serde defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KamConfig {
    pub n1: i64,
    pub sigma: f64,
    pub nu: f64,
    pub tau: f64,
    pub gamma: f64,
    pub s0: u32,
    pub c0: f64,
    pub c_schedule: f64,
    pub max_steps: usize,
    pub precision_bits: u32,
    pub verify_grid: usize,
    pub max_grid: usize,
}

impl Default for KamConfig {
    fn default() -> Self {
        KamConfig::from(&KamParams::default())
    }
}

impl From<&KamParams> for KamConfig {
    fn from(p: &KamParams) -> Self {
        KamConfig {
            n1: p.n1,
            sigma: p.sigma,
            nu: p.nu,
            tau: p.tau,
            gamma: p.gamma,
            s0: p.s0,
            c0: p.c0,
            c_schedule: p.c_schedule,
            max_steps: p.max_steps,
            precision_bits: p.precision_bits,
            verify_grid: p.verify_grid,
            max_grid: p.max_grid,
        }
    }
}

impl KamConfig {
    pub fn params(&self) -> KamParams {
        KamParams {
            n1: self.n1,
            sigma: self.sigma,
            nu: self.nu,
            tau: self.tau,
            gamma: self.gamma,
            s0: self.s0,
            c0: self.c0,
            c_schedule: self.c_schedule,
            max_steps: self.max_steps,
            precision_bits: self.precision_bits,
            verify_grid: self.verify_grid,
            max_grid: self.max_grid,
        }
    }
}

/// `A(x) = A₀·exp(F(x))` with `A₀ = {e^{2iπa}, 0}` unless `constant` gives
/// the full element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    /// Rotation parameter of the diagonal constant, in turns.
    #[serde(default)]
    pub a: f64,
    /// `[re z, im z, re w, im w]`, normalised on load.
    #[serde(default)]
    pub constant: Option<[f64; 4]>,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    /// Random zero-mean perturbation drawn from the run's seed.
    #[serde(default)]
    pub random: Option<RandomPerturbation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: i64,
    /// `t̂_k` (its conjugate is placed at `−k`).
    #[serde(default)]
    pub t: [f64; 2],
    #[serde(default)]
    pub z: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPerturbation {
    pub band: i64,
    /// Wiener norm the draw is scaled to.
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantSpec {
    Explicit {
        steps: Vec<PlantStepSpec>,
    },
    Designed {
        design: Vec<DesignStepSpec>,
        last_eps: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantStepSpec {
    pub n: usize,
    pub k: i64,
    pub eps: f64,
    pub amp: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignStepSpec {
    pub n: usize,
    pub k: i64,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub diagnose_sigmas: Vec<f64>,
    pub quiet_steps: usize,
    pub sigma_star: f64,
    pub eigen: Option<EigenConfig>,
    pub correlation: Option<CorrelationConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let d = DiagnoseOptions::default();
        AnalysisConfig {
            diagnose_sigmas: d.sigmas,
            quiet_steps: d.quiet_steps,
            sigma_star: ClassifyOptions::default().sigma_star,
            eigen: None,
            correlation: None,
        }
    }
}

impl AnalysisConfig {
    pub fn diagnose_options(&self) -> DiagnoseOptions {
        DiagnoseOptions {
            sigmas: self.diagnose_sigmas.clone(),
            quiet_steps: self.quiet_steps,
            ..Default::default()
        }
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            sigma_star: self.sigma_star,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub m: usize,
    pub n_trunc: i64,
    /// Points of the uniform circle grid added to the seeded values.
    #[serde(default = "default_circle")]
    pub circle: usize,
    /// Search the spectrum of `U⁻¹`; seeded values are conjugated to match.
    #[serde(default)]
    pub inverse: bool,
}

fn default_circle() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    pub length: usize,
    pub m: usize,
    #[serde(default)]
    pub j: usize,
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub k: i64,
    /// Observable `g`; defaults to `f`.
    #[serde(default)]
    pub g: Option<[i64; 3]>,
    #[serde(default)]
    pub quadrature: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| LabError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn rotation_number(&self) -> LabResult<RotationNumber> {
        parse_alpha(&self.alpha)
    }

    /// SHA-256 of the canonical JSON form (fields in declaration order),
    /// leaving out where the outputs go.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig {
            out_dir: None,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("configuration serialises");
        format!("{:x}", Sha256::digest(bytes))
    }
}

pub fn parse_alpha(spec: &str) -> LabResult<RotationNumber> {
    match spec.trim() {
        "golden" => Ok(RotationNumber::golden_mean()),
        "silver" => Ok(RotationNumber::silver_mean()),
        other => Ok(RotationNumber::parse(other)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_library() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.kam.params(), KamParams::default());
        assert_eq!(cfg.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn plant_forms_and_unknown_fields() {
        let explicit: ExperimentConfig = serde_json::from_str(
            r#"{"plant": {"steps": [{"n": 1, "k": 2, "eps": 1e-7, "amp": 1e-7}]}}"#,
        )
        .unwrap();
        assert!(matches!(explicit.plant, Some(PlantSpec::Explicit { .. })));
        let designed: ExperimentConfig = serde_json::from_str(
            r#"{"plant": {"design": [{"n": 1, "k": -2, "theta": 0.3}], "last_eps": 1e-4}}"#,
        )
        .unwrap();
        assert!(matches!(designed.plant, Some(PlantSpec::Designed { .. })));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"alpah": "golden"}"#).is_err());
        assert_ne!(explicit.hash(), designed.hash());
        let moved = ExperimentConfig {
            out_dir: Some("elsewhere".into()),
            ..explicit.clone()
        };
        assert_eq!(moved.hash(), explicit.hash());
    }

    #[test]
    fn alpha_aliases() {
        assert_eq!(
            parse_alpha("golden").unwrap(),
            RotationNumber::golden_mean()
        );
        assert_eq!(
            parse_alpha("[0; (2)]")
                .unwrap()
                .expand(3)
                .unwrap()
                .partial_quotients,
            vec![2, 2, 2]
        );
        assert!(parse_alpha("nonsense").is_err());
    }
}
