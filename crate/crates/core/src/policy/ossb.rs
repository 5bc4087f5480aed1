//! Optimal Sampling for Structured Bandits.
//!
//! Each round after initialization, OSSB solves the lower-bound problem at
//! the current estimate `m̂` and compares the visit counts with the prescribed
//! rates:
//!
//! * if `N(x) ≥ c(x, m̂)(1 + γ) ln t` for every arm, it exploits `x*(m̂)`;
//! * otherwise `s ← s + 1` and it estimates (plays the least played arm) when
//!   `N(X̲) ≤ ε s`, or explores the arm furthest below its rate,
//!   `argmin N(x) / c(x, m̂)`.

use serde::{Deserialize, Serialize};

use super::{argmin_by, round_index, Policy};
use crate::bound::{self, BoundSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::rng::RngStream;
use crate::stats::RunningMean;
use crate::structures::{Structure, StructureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTag {
    Init,
    Exploit,
    Estimate,
    Explore,
}

impl PhaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseTag::Init => "init",
            PhaseTag::Exploit => "exploit",
            PhaseTag::Estimate => "estimate",
            PhaseTag::Explore => "explore",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub init: u64,
    pub exploit: u64,
    pub estimate: u64,
    pub explore: u64,
}

impl PhaseCounts {
    pub fn record(&mut self, phase: PhaseTag) {
        match phase {
            PhaseTag::Init => self.init += 1,
            PhaseTag::Exploit => self.exploit += 1,
            PhaseTag::Estimate => self.estimate += 1,
            PhaseTag::Explore => self.explore += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.init + self.exploit + self.estimate + self.explore
    }

    pub fn add(&mut self, other: &PhaseCounts) {
        self.init += other.init;
        self.exploit += other.exploit;
        self.estimate += other.estimate;
        self.explore += other.explore;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OssbConfig {
    /// Estimation threshold, `0 < ε < 1/|X|`.
    pub epsilon: f64,
    /// Exploitation slack.
    pub gamma: f64,
    pub c_max: f64,
    /// Solve the bound every this many rounds, reusing the rates in between.
    pub resolve_period: u64,
    /// Project `m(t)` onto the structure before solving.
    pub use_projection: bool,
}

impl OssbConfig {
    /// `ε = 0.9/|X|`, `γ = 0`, rates re-solved every round. Linear and
    /// dueling estimates are projected onto the structure.
    pub fn for_structure(structure: &Structure) -> Self {
        OssbConfig {
            epsilon: 0.9 / structure.arms() as f64,
            gamma: 0.0,
            c_max: 1e6,
            resolve_period: 1,
            use_projection: matches!(structure.kind(), StructureKind::Linear | StructureKind::Dueling),
        }
    }

    /// `ε = 0` is accepted only with `allow_epsilon_zero`.
    pub fn validate(&self, arms: usize, allow_epsilon_zero: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPolicy(m));
        let limit = 1.0 / arms as f64;
        if !(self.epsilon < limit) || self.epsilon < 0.0 {
            return bad(format!("epsilon must lie in (0, 1/|X|) = (0, {limit}), got {}", self.epsilon));
        }
        if self.epsilon == 0.0 && !allow_epsilon_zero {
            return bad("epsilon = 0 disables estimation; pass the epsilon-zero override to allow it".into());
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.c_max > 0.0) {
            return bad(format!("c_max must be positive, got {}", self.c_max));
        }
        if self.resolve_period == 0 {
            return bad("resolve_period must be at least 1".into());
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            c_max: self.c_max,
            condorcet_fallback: true,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct OssbState {
    /// `N(x, t)` and `m(x, t)`.
    pub stats: Vec<RunningMean>,
    /// Count of non-exploitation rounds after initialization.
    pub s: u64,
    /// Round about to be played; `Σₓ N(x) = t − 1`.
    pub t: u64,
    pub cached_solution: Option<BoundSolution>,
    /// Round at which `cached_solution` was computed.
    pub solved_at: u64,
    pub phase_counts: PhaseCounts,
    pub solver_failures: u64,
    pub last_error: Option<Error>,
}

impl OssbState {
    pub fn new(arms: usize) -> Self {
        OssbState {
            stats: vec![RunningMean::new(); arms],
            s: 0,
            t: 1,
            cached_solution: None,
            solved_at: 0,
            phase_counts: PhaseCounts::default(),
            solver_failures: 0,
            last_error: None,
        }
    }

    pub fn observe(&mut self, arm: usize, value: f64) {
        self.stats[arm].push(value);
        self.t += 1;
    }

    pub fn counts(&self) -> Vec<u64> {
        self.stats.iter().map(|s| s.count).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.mean).collect()
    }
}

fn estimate(state: &OssbState, cfg: &OssbConfig, structure: &Structure, model: ObservationModel) -> Vec<f64> {
    let raw: Vec<f64> = state.stats.iter().map(|s| model.clamp(s.mean)).collect();
    if !cfg.use_projection {
        return raw;
    }
    let weights: Vec<f64> = state.stats.iter().map(|s| s.count as f64).collect();
    match structure.project(model, &raw, &weights) {
        Ok(p) => p.into_inner(),
        Err(_) => raw,
    }
}

/// Choose the arm for round `state.t` and record its phase.
///
/// Solver failures degrade to an estimation round; the error is kept in
/// `state.last_error`.
pub fn ossb_step(
    state: &mut OssbState,
    cfg: &OssbConfig,
    structure: &Structure,
    model: ObservationModel,
) -> (usize, PhaseTag) {
    let n = state.stats.len();
    let t = state.t;
    debug_assert_eq!(round_index(&state.stats), t);
    let (arm, phase) = if t <= n as u64 {
        ((t - 1) as usize, PhaseTag::Init)
    } else {
        decide(state, cfg, structure, model)
    };
    state.phase_counts.record(phase);
    (arm, phase)
}

fn decide(
    state: &mut OssbState,
    cfg: &OssbConfig,
    structure: &Structure,
    model: ObservationModel,
) -> (usize, PhaseTag) {
    let n = state.stats.len();
    let t = state.t;
    let m = estimate(state, cfg, structure, model);
    let stale = state.cached_solution.is_none() || t - state.solved_at >= cfg.resolve_period;
    if stale {
        match bound::solve(structure, model, &m, &cfg.solver_options(), state.cached_solution.as_ref()) {
            Ok(sol) => {
                state.cached_solution = Some(sol);
                state.solved_at = t;
            }
            Err(e) => {
                state.solver_failures += 1;
                state.last_error = Some(Error::AtRound {
                    round: t,
                    source: Box::new(e),
                });
                state.s += 1;
                let least = argmin_by(n, |x| state.stats[x].count as f64);
                return (least, PhaseTag::Estimate);
            }
        }
    }
    let rates = &state.cached_solution.as_ref().expect("solved above").rates;
    let ln_t = (t as f64).ln();
    let count = |x: usize| state.stats[x].count as f64;
    if (0..n).all(|x| count(x) >= rates[x] * (1.0 + cfg.gamma) * ln_t) {
        let best = structure.optimal_arm(&m).map(|o| o.arm).unwrap_or_else(|_| {
            super::argmax_by(n, |x| m[x])
        });
        return (best, PhaseTag::Exploit);
    }
    state.s += 1;
    let least = argmin_by(n, count);
    if count(least) <= cfg.epsilon * state.s as f64 {
        return (least, PhaseTag::Estimate);
    }
    let behind = argmin_by(n, |x| {
        if rates[x] > 0.0 {
            count(x) / rates[x]
        } else {
            f64::INFINITY
        }
    });
    (behind, PhaseTag::Explore)
}

/// OSSB as a [`Policy`].
#[derive(Debug, Clone)]
pub struct Ossb {
    pub structure: Structure,
    pub model: ObservationModel,
    pub config: OssbConfig,
    pub state: OssbState,
    last: Option<PhaseTag>,
}

impl Ossb {
    pub fn new(structure: Structure, model: ObservationModel, config: OssbConfig) -> Self {
        let state = OssbState::new(structure.arms());
        Ossb {
            structure,
            model,
            config,
            state,
            last: None,
        }
    }
}

impl Policy for Ossb {
    fn name(&self) -> &str {
        "ossb"
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        let (arm, phase) = ossb_step(&mut self.state, &self.config, &self.structure, self.model);
        self.last = Some(phase);
        Ok(arm)
    }

    fn observe(&mut self, arm: usize, value: f64) {
        self.state.observe(arm, value);
    }

    fn last_phase(&self) -> Option<PhaseTag> {
        self.last
    }

    fn phase_counts(&self) -> Option<PhaseCounts> {
        Some(self.state.phase_counts)
    }
}
