//! Asymptotic regret lower bound `C(θ)` and exploration rates `c(x, θ)`.
//!
//! The rates solve
//!
//! ```text
//! minimize    Σₓ η(x) (μ*(θ) − μ(x, θ))
//! subject to  Σₓ η(x) D(θ, λ, x) ≥ 1   for every confusing λ ∈ Λ(θ),  η ≥ 0
//! ```
//!
//! where `Λ(θ)` holds the parameters that agree with `θ` on the optimal arm
//! but have a different optimal arm. Each structure has its own reduction:
//! closed forms for classical, unimodal and dueling problems, a finite LP for
//! Lipschitz problems and a cutting-plane method for linear ones. The
//! [`oracle`] module enumerates confusing parameters on a grid and is used to
//! cross-check all of them.

mod classical;
mod dueling;
mod linear;
mod lipschitz;
pub mod oracle;
mod unimodal;

pub use classical::solve_classical;
pub use dueling::solve_dueling;
pub use linear::{solve_linear, WarmStart};
pub use lipschitz::solve_lipschitz;
pub use oracle::solve_generic_oracle;
pub use unimodal::solve_unimodal;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::observation::ObservationModel;
use crate::structures::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Closed form or finite LP solved to machine precision.
    Exact,
    /// Iterative solver stopped with residual violation below the tolerance.
    Converged,
    /// Some rate hit `c_max`, or the iteration budget ran out.
    Capped,
    /// The instance violates an assumption (tied optimum, non-unique minimizer).
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum SolverFlag {
    /// Several arms share the optimal reward.
    Tie,
    /// Dueling estimate without a Condorcet winner; the Copeland winner was used.
    WinnerFallback,
    /// The parameter does not belong to the structure; the solver ran anyway.
    ParameterOutsideStructure { reason: String },
    /// A dueling loser has several minimizing opponents.
    NonUniqueMinimizer { item: usize },
    /// The cutting-plane loop hit its iteration cap.
    IterationLimit,
    /// Refining the oracle grid moved the value by more than 1%.
    GridTooCoarse { coarse: f64, fine: f64 },
    /// Some gaps were floored to keep rates finite.
    GapFloored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Upper bound applied to every rate.
    pub c_max: f64,
    /// Relative constraint-violation tolerance of iterative solvers.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Ridge added to the design matrix, relative to its trace per dimension.
    pub ridge_scale: f64,
    /// Grid points per coordinate for [`solve_generic_oracle`].
    pub grid_resolution: usize,
    /// Accept dueling parameters without a Condorcet winner.
    pub condorcet_fallback: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            c_max: 1e6,
            tolerance: 1e-6,
            max_iterations: 500,
            ridge_scale: 1e-8,
            grid_resolution: 50,
            condorcet_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSolution {
    /// `c(x, θ)` per arm.
    pub rates: Vec<f64>,
    /// `C(θ) = Σₓ c(x, θ) Δ(x)`.
    pub value: f64,
    pub status: SolveStatus,
    /// Tolerance the status refers to (0 for exact solutions).
    pub tolerance: f64,
    pub iterations: usize,
    /// Largest relative constraint violation at the returned rates.
    pub max_violation: f64,
    pub optimal_arm: usize,
    pub flags: Vec<SolverFlag>,
    #[serde(skip)]
    pub warm_start: Option<WarmStart>,
}

impl BoundSolution {
    pub fn has_flag(&self, pred: impl Fn(&SolverFlag) -> bool) -> bool {
        self.flags.iter().any(pred)
    }
}

/// Assemble a solution: cap rates at `c_max`, recompute the value.
pub(crate) fn finalize(
    mut rates: Vec<f64>,
    gaps: &[f64],
    mut status: SolveStatus,
    optimal_arm: usize,
    opts: &SolverOptions,
) -> BoundSolution {
    let mut capped = false;
    for r in rates.iter_mut() {
        if !(*r <= opts.c_max) {
            *r = opts.c_max;
            capped = true;
        }
        if *r < 0.0 {
            *r = 0.0;
        }
    }
    if capped && status != SolveStatus::Degenerate {
        status = SolveStatus::Capped;
    }
    let value = rates.iter().zip(gaps).map(|(c, g)| c * g).sum();
    BoundSolution {
        rates,
        value,
        status,
        tolerance: 0.0,
        iterations: 0,
        max_violation: 0.0,
        optimal_arm,
        flags: Vec::new(),
        warm_start: None,
    }
}

/// `1 / d`, with `1/0 = +∞` and `1/∞ = 0`.
pub(crate) fn inverse_divergence(d: f64) -> f64 {
    if d == 0.0 {
        f64::INFINITY
    } else {
        1.0 / d
    }
}

/// Dispatch to the structure-specific solver.
///
/// `warm` is a previous solution for the same structure; the linear solver
/// reuses its cuts.
pub fn solve(
    structure: &Structure,
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
    warm: Option<&BoundSolution>,
) -> Result<BoundSolution> {
    match structure {
        Structure::Classical { .. } => solve_classical(model, theta, opts),
        Structure::Unimodal { .. } => solve_unimodal(model, theta, opts),
        Structure::Dueling { items } => solve_dueling(*items, model, theta, opts),
        Structure::Lipschitz { distances } => solve_lipschitz(model, theta, distances, opts),
        Structure::Linear { features } => solve_linear(
            features,
            model,
            theta,
            opts,
            warm.and_then(|w| w.warm_start.as_ref()),
        ),
    }
}
