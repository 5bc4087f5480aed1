//! Solve-once baseline.
//!
//! Round-robin for a warm-up period, then the bound is solved a single time
//! at the warm-up estimate. Afterwards any arm with `N(x) < c(x) ln t` is
//! played (the one furthest behind first), otherwise the empirical best arm.
//! This approximates the allocation-tracking linear-bandit strategies that
//! only solve the problem once; it is not a faithful reimplementation of any.

use super::{argmax_by, argmin_by, round_index, Policy};
use crate::bound::{self, SolverOptions};
use crate::error::Result;
use crate::observation::ObservationModel;
use crate::rng::RngStream;
use crate::stats::RunningMean;
use crate::structures::{Structure, StructureKind};

#[derive(Debug, Clone)]
pub struct StaticAllocation {
    pub structure: Structure,
    pub model: ObservationModel,
    pub warmup: u64,
    pub c_max: f64,
    pub stats: Vec<RunningMean>,
    pub rates: Option<Vec<f64>>,
    pub solve_count: usize,
}

impl StaticAllocation {
    pub fn new(structure: Structure, model: ObservationModel, warmup: u64, c_max: f64) -> Self {
        let arms = structure.arms();
        StaticAllocation {
            structure,
            model,
            warmup: warmup.max(arms as u64),
            c_max,
            stats: vec![RunningMean::new(); arms],
            rates: None,
            solve_count: 0,
        }
    }

    fn estimate(&self) -> Vec<f64> {
        let raw: Vec<f64> = self.stats.iter().map(|s| self.model.clamp(s.mean)).collect();
        if matches!(self.structure.kind(), StructureKind::Linear | StructureKind::Dueling) {
            let w: Vec<f64> = self.stats.iter().map(|s| s.count as f64).collect();
            if let Ok(p) = self.structure.project(self.model, &raw, &w) {
                return p.into_inner();
            }
        }
        raw
    }

    fn solve_once(&mut self) {
        let opts = SolverOptions {
            c_max: self.c_max,
            condorcet_fallback: true,
            ..SolverOptions::default()
        };
        let m = self.estimate();
        self.solve_count += 1;
        // A failed solve leaves pure exploitation.
        let rates = bound::solve(&self.structure, self.model, &m, &opts, None)
            .map(|s| s.rates)
            .unwrap_or_else(|_| vec![0.0; m.len()]);
        self.rates = Some(rates);
    }
}

impl Policy for StaticAllocation {
    fn name(&self) -> &str {
        "static_alloc"
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        let n = self.stats.len();
        let t = round_index(&self.stats);
        if t <= self.warmup {
            return Ok(((t - 1) % n as u64) as usize);
        }
        if self.rates.is_none() {
            self.solve_once();
        }
        let rates = self.rates.as_ref().expect("solved above");
        let ln_t = (t as f64).ln();
        let count = |x: usize| self.stats[x].count as f64;
        if (0..n).any(|x| count(x) < rates[x] * ln_t) {
            return Ok(argmin_by(n, |x| {
                if rates[x] > 0.0 {
                    count(x) / rates[x]
                } else {
                    f64::INFINITY
                }
            }));
        }
        let m = self.estimate();
        Ok(self
            .structure
            .optimal_arm(&m)
            .map(|o| o.arm)
            .unwrap_or_else(|_| argmax_by(n, |x| m[x])))
    }

    fn observe(&mut self, arm: usize, value: f64) {
        self.stats[arm].push(value);
    }
}
