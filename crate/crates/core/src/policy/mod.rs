//! Bandit policies.
//!
//! Every policy is a state machine: [`Policy::select`] picks the arm for the
//! next round and [`Policy::observe`] feeds back the observation. The round
//! index is implicit, `t = 1 + Σₓ N(x)`.

mod klucb;
mod linear;
mod ossb;
mod static_alloc;

pub use klucb::{klucb_index, klucb_step, KlUcb};
pub use linear::{glm_ucb_step, linear_thompson_step, thompson_scale, GlmUcb, LinearEstimate, LinearThompson};
pub use ossb::{ossb_step, Ossb, OssbConfig, OssbState, PhaseCounts, PhaseTag};
pub use static_alloc::StaticAllocation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::rng::RngStream;
use crate::stats::RunningMean;
use crate::structures::{Structure, StructureKind};

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Arm to play in the next round.
    fn select(&mut self, rng: &mut RngStream) -> Result<usize>;

    fn observe(&mut self, arm: usize, value: f64);

    /// Phase of the last selected arm, for policies that have phases.
    fn last_phase(&self) -> Option<PhaseTag> {
        None
    }

    fn phase_counts(&self) -> Option<PhaseCounts> {
        None
    }
}

/// Plays a fixed arm forever.
#[derive(Debug, Clone)]
pub struct FixedArm {
    pub arm: usize,
}

impl Policy for FixedArm {
    fn name(&self) -> &str {
        "oracle"
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(self.arm)
    }

    fn observe(&mut self, _arm: usize, _value: f64) {}
}

/// Policy selection by name, with per-policy parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Ossb {
        /// Defaults to `0.9 / |X|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default)]
        gamma: f64,
        #[serde(default = "default_c_max")]
        c_max: f64,
        #[serde(default = "default_resolve_period")]
        resolve_period: u64,
        /// Defaults to projecting for linear and dueling structures.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        use_projection: Option<bool>,
    },
    Klucb,
    LinThompson {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_r")]
        r: f64,
    },
    GlmUcb,
    StaticAlloc {
        /// Defaults to `10 |X|` rounds.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        warmup: Option<u64>,
        #[serde(default = "default_c_max")]
        c_max: f64,
    },
}

fn default_c_max() -> f64 {
    1e6
}
fn default_resolve_period() -> u64 {
    1
}
fn default_delta() -> f64 {
    0.1
}
fn default_r() -> f64 {
    1.0
}

impl PolicySpec {
    pub fn ossb() -> Self {
        PolicySpec::Ossb {
            epsilon: None,
            gamma: 0.0,
            c_max: default_c_max(),
            resolve_period: 1,
            use_projection: None,
        }
    }

    pub fn lin_thompson() -> Self {
        PolicySpec::LinThompson {
            delta: default_delta(),
            r: default_r(),
        }
    }

    pub fn static_alloc() -> Self {
        PolicySpec::StaticAlloc {
            warmup: None,
            c_max: default_c_max(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Ossb { .. } => "ossb",
            PolicySpec::Klucb => "klucb",
            PolicySpec::LinThompson { .. } => "lin_thompson",
            PolicySpec::GlmUcb => "glm_ucb",
            PolicySpec::StaticAlloc { .. } => "static_alloc",
        }
    }

    /// Check the parameters against a problem with `arms` arms.
    pub fn validate(&self, structure: &Structure, allow_epsilon_zero: bool) -> Result<()> {
        let linear_only = |what: &str| {
            if structure.kind() == StructureKind::Linear {
                Ok(())
            } else {
                Err(Error::InvalidPolicy(format!("{what} needs a linear structure")))
            }
        };
        match self {
            PolicySpec::Ossb { .. } => self.ossb_config(structure)?.validate(structure.arms(), allow_epsilon_zero),
            PolicySpec::Klucb => Ok(()),
            PolicySpec::LinThompson { delta, r } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(Error::InvalidPolicy(format!("delta must be in (0, 1), got {delta}")));
                }
                if !(*r >= 0.0) {
                    return Err(Error::InvalidPolicy(format!("r must be nonnegative, got {r}")));
                }
                linear_only("lin_thompson")
            }
            PolicySpec::GlmUcb => linear_only("glm_ucb"),
            PolicySpec::StaticAlloc { c_max, .. } => {
                if *c_max > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidPolicy(format!("c_max must be positive, got {c_max}")))
                }
            }
        }
    }

    fn ossb_config(&self, structure: &Structure) -> Result<OssbConfig> {
        let PolicySpec::Ossb {
            epsilon,
            gamma,
            c_max,
            resolve_period,
            use_projection,
        } = self
        else {
            return Err(Error::InvalidPolicy("not an ossb spec".into()));
        };
        let mut cfg = OssbConfig::for_structure(structure);
        if let Some(e) = epsilon {
            cfg.epsilon = *e;
        }
        cfg.gamma = *gamma;
        cfg.c_max = *c_max;
        cfg.resolve_period = *resolve_period;
        if let Some(p) = use_projection {
            cfg.use_projection = *p;
        }
        Ok(cfg)
    }

    /// Instantiate the policy for one episode.
    pub fn build(
        &self,
        structure: &Structure,
        model: ObservationModel,
        allow_epsilon_zero: bool,
    ) -> Result<Box<dyn Policy>> {
        self.validate(structure, allow_epsilon_zero)?;
        let features = || match structure {
            Structure::Linear { features } => features.clone(),
            _ => unreachable!("validated above"),
        };
        Ok(match self {
            PolicySpec::Ossb { .. } => Box::new(Ossb::new(
                structure.clone(),
                model,
                self.ossb_config(structure)?,
            )),
            PolicySpec::Klucb => Box::new(KlUcb::new(structure.arms(), model)),
            PolicySpec::LinThompson { delta, r } => {
                Box::new(LinearThompson::new(features(), *delta, *r))
            }
            PolicySpec::GlmUcb => Box::new(GlmUcb::new(features())),
            PolicySpec::StaticAlloc { warmup, c_max } => Box::new(StaticAllocation::new(
                structure.clone(),
                model,
                warmup.unwrap_or(10 * structure.arms() as u64),
                *c_max,
            )),
        })
    }
}

/// Lowest index minimizing `key`.
pub(crate) fn argmin_by(len: usize, key: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_key = f64::INFINITY;
    for x in 0..len {
        let k = key(x);
        if k < best_key || (x == 0) {
            best = x;
            best_key = k;
        }
    }
    best
}

/// Lowest index maximizing `key`.
pub(crate) fn argmax_by(len: usize, key: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_key = f64::NEG_INFINITY;
    for x in 0..len {
        let k = key(x);
        if k > best_key || x == 0 {
            best = x;
            best_key = k;
        }
    }
    best
}

pub(crate) fn round_index(stats: &[RunningMean]) -> u64 {
    1 + stats.iter().map(|s| s.count).sum::<u64>()
}
