use super::{finalize, inverse_divergence, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::structures::argmax_with_tie;

/// Unstructured bandit: `c(x) = 1 / d(θ(x), θ(x*))` for `x ≠ x*`.
pub fn solve_classical(
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<BoundSolution> {
    if theta.len() < 2 {
        return Err(Error::TooFewArms(theta.len()));
    }
    for &m in theta {
        model.check_mean(m)?;
    }
    let (best, tie) = argmax_with_tie(theta);
    let top = theta[best];
    let rates: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(x, &m)| {
            if x == best {
                0.0
            } else {
                inverse_divergence(model.kl_unchecked(m, top))
            }
        })
        .collect();
    let gaps: Vec<f64> = theta.iter().map(|&m| top - m).collect();
    let status = if tie {
        SolveStatus::Degenerate
    } else {
        SolveStatus::Exact
    };
    let mut sol = finalize(rates, &gaps, status, best, opts);
    if tie {
        sol.flags.push(SolverFlag::Tie);
    }
    Ok(sol)
}
