use super::{argmax_by, round_index, Policy};
use crate::error::Result;
use crate::observation::ObservationModel;
use crate::rng::RngStream;
use crate::stats::RunningMean;

/// `max{q ≥ m : N·d(m, q) ≤ ln t}` by bisection to `1e-6`.
///
/// Unvisited arms get `+∞`.
pub fn klucb_index(model: ObservationModel, stat: RunningMean, t: u64) -> f64 {
    if stat.count == 0 {
        return f64::INFINITY;
    }
    let m = model.clamp(stat.mean);
    let budget = (t as f64).ln().max(0.0) / stat.count as f64;
    let mut hi = match model {
        ObservationModel::Bernoulli => 1.0,
        ObservationModel::Gaussian => m + (2.0 * budget).sqrt() + 1.0,
    };
    if model.kl_unchecked(m, hi) <= budget {
        return hi;
    }
    let mut lo = m;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if model.kl_unchecked(m, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Arm with the largest KL-UCB index, lowest index on ties.
pub fn klucb_step(stats: &[RunningMean], model: ObservationModel) -> usize {
    let t = round_index(stats);
    let idx: Vec<f64> = stats.iter().map(|&s| klucb_index(model, s, t)).collect();
    argmax_by(idx.len(), |x| idx[x])
}

#[derive(Debug, Clone)]
pub struct KlUcb {
    pub model: ObservationModel,
    pub stats: Vec<RunningMean>,
}

impl KlUcb {
    pub fn new(arms: usize, model: ObservationModel) -> Self {
        KlUcb {
            model,
            stats: vec![RunningMean::new(); arms],
        }
    }
}

impl Policy for KlUcb {
    fn name(&self) -> &str {
        "klucb"
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(klucb_step(&self.stats, self.model))
    }

    fn observe(&mut self, arm: usize, value: f64) {
        self.stats[arm].push(value);
    }
}
