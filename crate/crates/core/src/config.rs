//! JSON configuration files.
//!
//! An experiment config is the full record of a run: instances, policies,
//! horizon, trials, seed and output paths. The only outside influence is the
//! `OSSB_OUT_DIR` environment variable, which overrides the output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bound::SolverOptions;
use crate::error::{Error, Result};
use crate::harness::{BanditInstance, Checkpoints, GeneratorSpec, MonteCarloConfig};
use crate::observation::ObservationModel;
use crate::policy::PolicySpec;
use crate::structures::Structure;

pub const OUT_DIR_ENV: &str = "OSSB_OUT_DIR";

/// A structure with its true parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub structure: Structure,
    pub model: ObservationModel,
    pub theta: Vec<f64>,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<BanditInstance> {
        BanditInstance::new(self.structure.clone(), self.model, self.theta.clone())
    }
}

impl From<&BanditInstance> for InstanceSpec {
    fn from(inst: &BanditInstance) -> Self {
        InstanceSpec {
            structure: inst.structure.clone(),
            model: inst.model,
            theta: inst.theta.means().to_vec(),
        }
    }
}

/// Where an experiment's instances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    Explicit {
        list: Vec<InstanceSpec>,
    },
    /// Instance `i` is drawn with seed `seed + i`.
    Generated {
        generator: GeneratorSpec,
        count: usize,
        seed: u64,
    },
}

impl InstanceSource {
    pub fn build(&self) -> Result<Vec<BanditInstance>> {
        match self {
            InstanceSource::Explicit { list } => list
                .iter()
                .enumerate()
                .map(|(i, s)| s.build().map_err(|e| Error::Config(format!("instance {i}: {e}"))))
                .collect(),
            InstanceSource::Generated {
                generator,
                count,
                seed,
            } => (0..*count)
                .map(|i| generator.generate(seed.wrapping_add(i as u64)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_traces")]
    pub traces: String,
    #[serde(default = "default_aggregate")]
    pub aggregate: String,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_traces() -> String {
    "traces.csv".into()
}

fn default_aggregate() -> String {
    "aggregate.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            traces: default_traces(),
            aggregate: default_aggregate(),
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: InstanceSource,
    pub policies: Vec<PolicySpec>,
    pub horizon: u64,
    pub n_trials: usize,
    pub base_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub checkpoints: Checkpoints,
    /// Accept OSSB with `ε = 0`.
    #[serde(default)]
    pub allow_epsilon_zero: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Build the instances and check every policy against them.
    pub fn instances(&self) -> Result<Vec<BanditInstance>> {
        if self.policies.is_empty() {
            return Err(Error::Config("no policies listed".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        let instances = self.instances.build()?;
        if instances.is_empty() {
            return Err(Error::Config("no instances".into()));
        }
        for (i, inst) in instances.iter().enumerate() {
            for p in &self.policies {
                p.validate(&inst.structure, self.allow_epsilon_zero).map_err(|e| {
                    Error::Config(format!("policy {} on instance {i}: {e}", p.name()))
                })?;
            }
        }
        Ok(instances)
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            horizon: self.horizon,
            n_trials: self.n_trials,
            base_seed: self.base_seed,
            parallelism: self.parallelism,
            checkpoints: self.checkpoints.clone(),
            allow_epsilon_zero: self.allow_epsilon_zero,
        }
    }

    /// Output directory: `OSSB_OUT_DIR` when set, else the configured one.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }
}

/// Input of `solve-bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub structure: Structure,
    pub model: ObservationModel,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl BoundConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::LinearParams;

    const DESK: &str = r#"{
        "instances": {
            "source": "generated",
            "generator": {"kind": "linear", "dim": 3, "arms": 20, "phi_low": 0.2, "phi_high": 0.4},
            "count": 10,
            "seed": 1
        },
        "policies": [
            {"name": "ossb", "epsilon": 0.0},
            {"name": "lin_thompson"},
            {"name": "glm_ucb"}
        ],
        "horizon": 10000,
        "n_trials": 20,
        "base_seed": 7,
        "allow_epsilon_zero": true
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(DESK).unwrap();
        assert_eq!(c.parallelism, 1);
        assert_eq!(c.checkpoints, Checkpoints::Auto);
        assert_eq!(c.output, OutputConfig::default());
        assert_eq!(
            c.instances,
            InstanceSource::Generated {
                generator: GeneratorSpec::Linear(LinearParams {
                    dim: 3,
                    arms: 20,
                    phi_low: 0.2,
                    phi_high: 0.4
                }),
                count: 10,
                seed: 1
            }
        );
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_json(DESK).unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn epsilon_zero_needs_the_flag() {
        let mut c = ExperimentConfig::from_json(DESK).unwrap();
        c.instances = InstanceSource::Generated {
            generator: GeneratorSpec::Linear(LinearParams {
                dim: 3,
                arms: 5,
                phi_low: 0.2,
                phi_high: 0.4,
            }),
            count: 1,
            seed: 1,
        };
        assert!(c.instances().is_ok());
        c.allow_epsilon_zero = false;
        assert!(matches!(c.instances(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_field_is_named() {
        let e = ExperimentConfig::from_json(&DESK.replace("\"horizon\"", "\"horizn\"")).unwrap_err();
        assert!(e.to_string().contains("horizn"), "{e}");
    }

    #[test]
    fn bound_config_missing_theta() {
        let e = BoundConfig::from_json(r#"{"structure": {"kind": "classical", "arms": 2}, "model": "gaussian"}"#)
            .unwrap_err();
        assert!(e.to_string().contains("theta"), "{e}");
    }

    #[test]
    fn partial_solver_options() {
        let b = BoundConfig::from_json(
            r#"{"structure": {"kind": "classical", "arms": 2}, "model": "gaussian",
                "theta": [0, 1], "solver": {"c_max": 100}}"#,
        )
        .unwrap();
        assert_eq!(b.solver.c_max, 100.0);
        assert_eq!(b.solver.max_iterations, SolverOptions::default().max_iterations);
    }
}
