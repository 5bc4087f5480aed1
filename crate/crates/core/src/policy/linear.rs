//! Baselines for linear bandits: Thompson sampling and GLM-UCB.
//!
//! Both keep the ridge estimate `φ̂ = B⁻¹ Σ r(t) x(t)` with
//! `B = I + Σ x(t) x(t)ᵀ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};

use super::{argmax_by, Policy};
use crate::error::Result;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct LinearEstimate {
    pub features: Vec<DVector<f64>>,
    pub design: DMatrix<f64>,
    pub response: DVector<f64>,
    /// Rounds observed so far.
    pub rounds: u64,
}

impl LinearEstimate {
    pub fn new(features: &[Vec<f64>]) -> Self {
        let d = features[0].len();
        LinearEstimate {
            features: features.iter().map(|f| DVector::from_column_slice(f)).collect(),
            design: DMatrix::identity(d, d),
            response: DVector::zeros(d),
            rounds: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.design.nrows()
    }

    pub fn observe(&mut self, arm: usize, value: f64) {
        let x = &self.features[arm];
        self.design += x * x.transpose();
        self.response += x * value;
        self.rounds += 1;
    }

    fn factor(&self) -> Cholesky<f64, Dyn> {
        // B ⪰ I, so the factorization cannot fail.
        self.design.clone().cholesky().expect("design matrix is positive definite")
    }

    pub fn phi_hat(&self) -> DVector<f64> {
        self.factor().solve(&self.response)
    }
}

/// `v_t = R √(0.5 d ln(t/δ))`.
pub fn thompson_scale(r: f64, d: usize, t: u64, delta: f64) -> f64 {
    r * (0.5 * d as f64 * (t as f64 / delta).ln()).max(0.0).sqrt()
}

/// Sample `φ̃ ~ N(φ̂, v² B⁻¹)` and play `argmax ⟨φ̃, x⟩`.
pub fn linear_thompson_step(est: &LinearEstimate, v: f64, rng: &mut RngStream) -> usize {
    let chol = est.factor();
    let phi = chol.solve(&est.response);
    let z = DVector::from_iterator(est.dim(), (0..est.dim()).map(|_| StandardNormal.sample(rng)));
    // B = LLᵀ ⇒ L⁻ᵀ z has covariance B⁻¹.
    let noise = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .expect("triangular factor is invertible");
    let sample = phi + noise * v;
    argmax_by(est.features.len(), |x| est.features[x].dot(&sample))
}

/// Play `argmax ⟨φ̂, x⟩ + ρ(t) ‖x‖_{B⁻¹}` with `ρ(t) = √(0.5 ln t)`.
pub fn glm_ucb_step(est: &LinearEstimate) -> usize {
    let t = est.rounds + 1;
    let rho = (0.5 * (t as f64).ln()).sqrt();
    let chol = est.factor();
    let phi = chol.solve(&est.response);
    let score = |x: usize| {
        let f = &est.features[x];
        f.dot(&phi) + rho * f.dot(&chol.solve(f)).max(0.0).sqrt()
    };
    argmax_by(est.features.len(), score)
}

#[derive(Debug, Clone)]
pub struct LinearThompson {
    pub estimate: LinearEstimate,
    pub delta: f64,
    pub r: f64,
    /// Replaces `v_t` when set.
    pub fixed_scale: Option<f64>,
}

impl LinearThompson {
    pub fn new(features: Vec<Vec<f64>>, delta: f64, r: f64) -> Self {
        LinearThompson {
            estimate: LinearEstimate::new(&features),
            delta,
            r,
            fixed_scale: None,
        }
    }
}

impl Policy for LinearThompson {
    fn name(&self) -> &str {
        "lin_thompson"
    }

    fn select(&mut self, rng: &mut RngStream) -> Result<usize> {
        let t = self.estimate.rounds + 1;
        let v = self
            .fixed_scale
            .unwrap_or_else(|| thompson_scale(self.r, self.estimate.dim(), t, self.delta));
        Ok(linear_thompson_step(&self.estimate, v, rng))
    }

    fn observe(&mut self, arm: usize, value: f64) {
        self.estimate.observe(arm, value);
    }
}

#[derive(Debug, Clone)]
pub struct GlmUcb {
    pub estimate: LinearEstimate,
}

impl GlmUcb {
    pub fn new(features: Vec<Vec<f64>>) -> Self {
        GlmUcb {
            estimate: LinearEstimate::new(&features),
        }
    }
}

impl Policy for GlmUcb {
    fn name(&self) -> &str {
        "glm_ucb"
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(glm_ucb_step(&self.estimate))
    }

    fn observe(&mut self, arm: usize, value: f64) {
        self.estimate.observe(arm, value);
    }
}
