//! Random instance generators.
//!
//! Each generator draws from its own seeded stream and retries a bounded
//! number of times until the structural postconditions hold.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::BanditInstance;
use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::rng::RngStream;
use crate::structures::{condorcet_winner, is_strictly_unimodal, Structure};

const MAX_ATTEMPTS: usize = 10_000;

fn exhausted(reason: &str) -> Error {
    Error::GeneratorExhausted {
        attempts: MAX_ATTEMPTS,
        reason: reason.to_string(),
    }
}

fn min_gap_ok(inst: &BanditInstance, min_gap: f64) -> bool {
    !inst.gaps.optimal.tie && inst.gaps.min_positive().is_some_and(|g| g >= min_gap)
}

fn check_range(model: ObservationModel, low: f64, high: f64) -> Result<()> {
    if !(low < high) || !model.is_valid_mean(low) || !model.is_valid_mean(high) {
        return Err(Error::Config(format!(
            "mean range [{low}, {high}] is empty or invalid for {}",
            model.name()
        )));
    }
    Ok(())
}

/// Unit-length arms in `R^dim` and `φ` uniform in `[phi_low, phi_high]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub dim: usize,
    pub arms: usize,
    pub phi_low: f64,
    pub phi_high: f64,
}

/// Arms uniform on the unit sphere, Gaussian observations.
pub fn generate_linear_instance(p: &LinearParams, seed: u64) -> Result<BanditInstance> {
    if p.dim == 0 || p.arms < 2 || !(p.phi_low <= p.phi_high) {
        return Err(Error::Config(format!(
            "linear generator needs dim ≥ 1, arms ≥ 2 and phi_low ≤ phi_high, got {p:?}"
        )));
    }
    let mut rng = RngStream::new(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        let features: Vec<Vec<f64>> = (0..p.arms).map(|_| unit_vector(p.dim, &mut rng)).collect();
        let phi: Vec<f64> = (0..p.dim).map(|_| rng.random_range(p.phi_low..=p.phi_high)).collect();
        let structure = Structure::Linear { features };
        let theta = structure.linear_means(&phi)?.into_inner();
        let inst = BanditInstance::new(structure, ObservationModel::Gaussian, theta)?;
        if !inst.gaps.optimal.tie {
            return Ok(inst);
        }
    }
    Err(exhausted("no instance with a unique optimal arm"))
}

fn unit_vector(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub arms: usize,
    pub model: ObservationModel,
    pub low: f64,
    pub high: f64,
    /// Smallest allowed positive gap.
    #[serde(default)]
    pub min_gap: f64,
}

/// Independent means uniform in `[low, high]`.
pub fn generate_classical_instance(p: &ClassicalParams, seed: u64) -> Result<BanditInstance> {
    check_range(p.model, p.low, p.high)?;
    let mut rng = RngStream::new(seed, 1);
    for _ in 0..MAX_ATTEMPTS {
        let theta: Vec<f64> = (0..p.arms).map(|_| rng.random_range(p.low..=p.high)).collect();
        let inst = BanditInstance::new(Structure::Classical { arms: p.arms }, p.model, theta)?;
        if min_gap_ok(&inst, p.min_gap) {
            return Ok(inst);
        }
    }
    Err(exhausted("gap condition never met"))
}

/// Arms at uniform positions on `[0, 1]` with `ℓ(x, y) = lipschitz · |p(x) − p(y)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzParams {
    pub arms: usize,
    pub model: ObservationModel,
    pub lipschitz: f64,
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub min_gap: f64,
}

/// `θ` is the lower envelope of a few random cones of slope `lipschitz`,
/// clipped to `[low, high]`, hence Lipschitz for `ℓ`.
pub fn generate_lipschitz_instance(p: &LipschitzParams, seed: u64) -> Result<BanditInstance> {
    check_range(p.model, p.low, p.high)?;
    if !(p.lipschitz > 0.0) {
        return Err(Error::Config(format!("lipschitz constant must be positive, got {}", p.lipschitz)));
    }
    let mut rng = RngStream::new(seed, 2);
    for _ in 0..MAX_ATTEMPTS {
        let pos: Vec<f64> = (0..p.arms).map(|_| rng.random::<f64>()).collect();
        let anchors: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.random::<f64>(), rng.random_range(p.low..=p.high)))
            .collect();
        let theta: Vec<f64> = pos
            .iter()
            .map(|&x| {
                anchors
                    .iter()
                    .map(|&(q, v)| v + p.lipschitz * (x - q).abs())
                    .fold(f64::INFINITY, f64::min)
                    .clamp(p.low, p.high)
            })
            .collect();
        let distances = pos
            .iter()
            .map(|a| pos.iter().map(|b| p.lipschitz * (a - b).abs()).collect())
            .collect();
        let inst = BanditInstance::new(Structure::Lipschitz { distances }, p.model, theta)?;
        if min_gap_ok(&inst, p.min_gap) {
            return Ok(inst);
        }
    }
    Err(exhausted("gap condition never met"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalParams {
    pub arms: usize,
    pub model: ObservationModel,
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub min_gap: f64,
}

/// Random peak; the remaining values are split at random between the two
/// slopes and sorted.
pub fn generate_unimodal_instance(p: &UnimodalParams, seed: u64) -> Result<BanditInstance> {
    check_range(p.model, p.low, p.high)?;
    let mut rng = RngStream::new(seed, 3);
    for _ in 0..MAX_ATTEMPTS {
        let mut values: Vec<f64> = (0..p.arms).map(|_| rng.random_range(p.low..=p.high)).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        let peak = rng.random_range(0..p.arms);
        let mut left = Vec::with_capacity(peak);
        let mut right = Vec::new();
        for &v in &values[1..] {
            let left_room = peak - left.len();
            let right_room = p.arms - 1 - peak - right.len();
            if left_room > 0 && (right_room == 0 || rng.random::<bool>()) {
                left.push(v);
            } else {
                right.push(v);
            }
        }
        left.reverse();
        let theta: Vec<f64> = left.into_iter().chain([values[0]]).chain(right).collect();
        if !is_strictly_unimodal(&theta) {
            continue;
        }
        let inst = BanditInstance::new(Structure::Unimodal { arms: p.arms }, p.model, theta)?;
        if min_gap_ok(&inst, p.min_gap) {
            return Ok(inst);
        }
    }
    Err(exhausted("no strictly unimodal draw met the gap condition"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelingParams {
    pub items: usize,
    /// Win probabilities stay in `[margin, 1 − margin]`; the winner beats
    /// everyone with probability at least `1/2 + margin`.
    pub margin: f64,
}

/// Random preference matrix with a planted Condorcet winner.
pub fn generate_dueling_instance(p: &DuelingParams, seed: u64) -> Result<BanditInstance> {
    if !(p.margin > 0.0 && p.margin < 0.25) || p.items < 2 {
        return Err(Error::Config(format!(
            "dueling generator needs items ≥ 2 and margin in (0, 0.25), got {p:?}"
        )));
    }
    let n = p.items;
    let mut rng = RngStream::new(seed, 4);
    for _ in 0..MAX_ATTEMPTS {
        let winner = rng.random_range(0..n);
        let mut theta = vec![0.5; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let pij = if i == winner {
                    rng.random_range(0.5 + p.margin..=1.0 - p.margin)
                } else if j == winner {
                    1.0 - rng.random_range(0.5 + p.margin..=1.0 - p.margin)
                } else {
                    rng.random_range(p.margin..=1.0 - p.margin)
                };
                theta[i * n + j] = pij;
                theta[j * n + i] = 1.0 - pij;
            }
        }
        if condorcet_winner(n, &theta) != Some(winner) {
            continue;
        }
        let inst = BanditInstance::new(Structure::Dueling { items: n }, ObservationModel::Bernoulli, theta)?;
        if !inst.gaps.optimal.tie {
            return Ok(inst);
        }
    }
    Err(exhausted("no draw with a Condorcet winner"))
}

/// Generator selection for experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Linear(LinearParams),
    Classical(ClassicalParams),
    Lipschitz(LipschitzParams),
    Unimodal(UnimodalParams),
    Dueling(DuelingParams),
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<BanditInstance> {
        match self {
            GeneratorSpec::Linear(p) => generate_linear_instance(p, seed),
            GeneratorSpec::Classical(p) => generate_classical_instance(p, seed),
            GeneratorSpec::Lipschitz(p) => generate_lipschitz_instance(p, seed),
            GeneratorSpec::Unimodal(p) => generate_unimodal_instance(p, seed),
            GeneratorSpec::Dueling(p) => generate_dueling_instance(p, seed),
        }
    }
}
