//! Episode simulation and Monte-Carlo aggregation.
//!
//! Regret is the pseudo-regret `Σ_t Δ(x(t))`, exact because the simulator
//! knows `θ`. Every episode draws from two streams derived from the base
//! seed and `(instance, trial)`: one for observations, one for the policy.
//! Results are collected in `(instance, trial)` order and aggregated
//! sequentially, so the output does not depend on the worker count.

mod generators;
mod output;

pub use generators::{
    generate_classical_instance, generate_dueling_instance, generate_linear_instance,
    generate_lipschitz_instance, generate_unimodal_instance, ClassicalParams, DuelingParams,
    GeneratorSpec, LinearParams, LipschitzParams, UnimodalParams,
};
pub use output::{write_aggregates, write_traces, AGGREGATE_HEADER, TRACE_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::{ObservationModel, ParameterVector};
use crate::policy::{PhaseCounts, PhaseTag, Policy, PolicySpec};
use crate::rng::RngStream;
use crate::structures::{GapVector, Structure};

/// A structure together with the true parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub structure: Structure,
    pub model: ObservationModel,
    pub theta: ParameterVector,
    pub x_star: usize,
    pub gaps: GapVector,
}

impl BanditInstance {
    /// Validates `theta` against the model and the structure.
    pub fn new(structure: Structure, model: ObservationModel, theta: Vec<f64>) -> Result<Self> {
        structure.validate()?;
        if theta.len() != structure.arms() {
            return Err(Error::ArmCountMismatch {
                expected: structure.arms(),
                got: theta.len(),
            });
        }
        let theta = ParameterVector::new(theta, model)?;
        structure
            .check_parameter(theta.means(), 1e-9)
            .map_err(Error::InvalidStructure)?;
        let gaps = structure.gap_vector(theta.means())?;
        Ok(BanditInstance {
            x_star: gaps.optimal.arm,
            structure,
            model,
            theta,
            gaps,
        })
    }

    pub fn arms(&self) -> usize {
        self.structure.arms()
    }
}

/// Rounds at which the cumulative regret is recorded.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checkpoints {
    /// Every round up to 100 rounds, geometric beyond.
    #[default]
    Auto,
    Every,
    /// Powers of two and of ten, plus the horizon.
    Geometric,
    /// Explicit rounds; those beyond the horizon are dropped.
    Rounds(Vec<u64>),
}

impl Checkpoints {
    pub fn resolve(&self, horizon: u64) -> Vec<u64> {
        let mut out: Vec<u64> = match self {
            Checkpoints::Auto if horizon <= 100 => (1..=horizon).collect(),
            Checkpoints::Every => (1..=horizon).collect(),
            Checkpoints::Auto | Checkpoints::Geometric => {
                let mut v = Vec::new();
                let mut p = 1u64;
                while p <= horizon {
                    v.push(p);
                    p = p.saturating_mul(2);
                }
                let mut p = 10u64;
                while p <= horizon {
                    v.push(p);
                    p = p.saturating_mul(10);
                }
                if horizon > 0 {
                    v.push(horizon);
                }
                v
            }
            Checkpoints::Rounds(r) => r.iter().copied().filter(|&t| t >= 1 && t <= horizon).collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub checkpoints: Vec<u64>,
    /// Cumulative pseudo-regret at each checkpoint.
    pub cum_regret: Vec<f64>,
    /// Phase of the round at each checkpoint, for policies with phases.
    pub phases: Vec<Option<PhaseTag>>,
    pub phase_counts: Option<PhaseCounts>,
    /// `N(x, T)`.
    pub final_counts: Vec<u64>,
    /// Regret after the last round.
    pub final_regret: f64,
}

impl RegretTrace {
    /// `Σₓ Δ(x) N(x, T)`.
    pub fn regret_from_counts(&self, gaps: &[f64]) -> f64 {
        self.final_counts.iter().zip(gaps).map(|(&n, g)| n as f64 * g).sum()
    }
}

/// Stream for an episode's observations; the policy stream sets the top bit.
pub fn episode_stream(instance_id: usize, trial: usize) -> u64 {
    ((instance_id as u64) << 32) | (trial as u64 & 0xffff_ffff)
}

const POLICY_STREAM_BIT: u64 = 1 << 63;

/// Play `horizon` rounds of `policy` on `instance`.
pub fn run_episode(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
    stream_id: u64,
    checkpoints: &[u64],
) -> Result<RegretTrace> {
    let mut obs_rng = RngStream::new(seed, stream_id & !POLICY_STREAM_BIT);
    let mut policy_rng = RngStream::new(seed, stream_id | POLICY_STREAM_BIT);
    let theta = instance.theta.means();
    let gaps = &instance.gaps.gaps;
    let n = instance.arms();
    let mut counts = vec![0u64; n];
    let mut regret = 0.0;
    let mut trace = RegretTrace {
        checkpoints: Vec::with_capacity(checkpoints.len()),
        cum_regret: Vec::with_capacity(checkpoints.len()),
        phases: Vec::with_capacity(checkpoints.len()),
        phase_counts: None,
        final_counts: Vec::new(),
        final_regret: 0.0,
    };
    let mut next = checkpoints.iter().copied().peekable();
    for t in 1..=horizon {
        let at = |e: Error| Error::AtRound {
            round: t,
            source: Box::new(e),
        };
        let arm = policy.select(&mut policy_rng).map_err(at)?;
        if arm >= n {
            return Err(at(Error::InvalidPolicy(format!("arm {arm} out of range 0..{n}"))));
        }
        let y = instance.model.sample(theta[arm], &mut obs_rng).map_err(at)?;
        policy.observe(arm, y);
        counts[arm] += 1;
        regret += gaps[arm];
        while next.peek().is_some_and(|&c| c < t) {
            next.next();
        }
        if next.peek() == Some(&t) {
            next.next();
            trace.checkpoints.push(t);
            trace.cum_regret.push(regret);
            trace.phases.push(policy.last_phase());
        }
    }
    trace.phase_counts = policy.phase_counts();
    trace.final_counts = counts;
    trace.final_regret = regret;
    Ok(trace)
}

/// Per-checkpoint statistics over episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub rounds: Vec<u64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean, `s / √n` with the unbiased `s`.
    pub stderr: Vec<f64>,
    /// Normal-approximation 95% half-width, `1.96 · stderr`.
    pub ci95: Vec<f64>,
    pub n: usize,
}

impl AggregateResult {
    /// Aggregate traces that share their checkpoints.
    pub fn from_traces<'a>(traces: impl IntoIterator<Item = &'a RegretTrace>) -> Result<Self> {
        let traces: Vec<&RegretTrace> = traces.into_iter().collect();
        let rounds = traces.first().map(|t| t.checkpoints.clone()).unwrap_or_default();
        if traces.iter().any(|t| t.checkpoints != rounds) {
            return Err(Error::Config("traces have different checkpoints".into()));
        }
        let n = traces.len();
        let k = rounds.len();
        let mut mean = vec![0.0; k];
        let mut stderr = vec![0.0; k];
        for i in 0..k {
            let values = traces.iter().map(|t| t.cum_regret[i]);
            let m = values.clone().sum::<f64>() / n as f64;
            mean[i] = m;
            if n >= 2 {
                let var = values.map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
                stderr[i] = (var / n as f64).sqrt();
            }
        }
        let ci95 = stderr.iter().map(|s| 1.96 * s).collect();
        Ok(AggregateResult {
            rounds,
            mean,
            stderr,
            ci95,
            n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub horizon: u64,
    pub n_trials: usize,
    pub base_seed: u64,
    /// Worker threads; results do not depend on it.
    pub parallelism: usize,
    #[serde(default)]
    pub checkpoints: Checkpoints,
    #[serde(default)]
    pub allow_epsilon_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub instance_id: usize,
    pub trial: usize,
    pub trace: RegretTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeFailure {
    pub instance_id: usize,
    pub trial: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub policy: String,
    /// Successful episodes in `(instance, trial)` order.
    pub episodes: Vec<Episode>,
    pub failures: Vec<EpisodeFailure>,
    pub aggregate: AggregateResult,
    /// Phase tallies summed over episodes, for policies with phases.
    pub phase_counts: Option<PhaseCounts>,
}

/// Run `n_trials` episodes on every instance.
///
/// Invalid policy parameters abort the batch; failures inside an episode are
/// collected in [`MonteCarloResult::failures`].
pub fn run_monte_carlo(
    instances: &[BanditInstance],
    policy: &PolicySpec,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloResult> {
    if cfg.n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    for inst in instances {
        policy.validate(&inst.structure, cfg.allow_epsilon_zero)?;
    }
    let checkpoints = cfg.checkpoints.resolve(cfg.horizon);
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..cfg.n_trials).map(move |k| (i, k)))
        .collect();
    let run = |&(i, k): &(usize, usize)| -> Result<RegretTrace> {
        let inst = &instances[i];
        let mut p = policy.build(&inst.structure, inst.model, cfg.allow_epsilon_zero)?;
        run_episode(inst, p.as_mut(), cfg.horizon, cfg.base_seed, episode_stream(i, k), &checkpoints)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<RegretTrace>> = pool.install(|| jobs.par_iter().map(run).collect());

    let mut episodes = Vec::new();
    let mut failures = Vec::new();
    let mut phase_counts: Option<PhaseCounts> = None;
    for (&(instance_id, trial), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(trace) => {
                if let Some(pc) = &trace.phase_counts {
                    phase_counts.get_or_insert_with(PhaseCounts::default).add(pc);
                }
                episodes.push(Episode {
                    instance_id,
                    trial,
                    trace,
                });
            }
            Err(error) => failures.push(EpisodeFailure {
                instance_id,
                trial,
                error,
            }),
        }
    }
    let aggregate = AggregateResult::from_traces(episodes.iter().map(|e| &e.trace))?;
    Ok(MonteCarloResult {
        policy: policy.name().to_string(),
        episodes,
        failures,
        aggregate,
        phase_counts,
    })
}
