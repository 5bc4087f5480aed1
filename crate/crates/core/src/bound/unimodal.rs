use super::{finalize, inverse_divergence, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::structures::{argmax_with_tie, is_strictly_unimodal};

/// Unimodal bandit on a line: only the neighbours of the optimal arm need
/// exploring, `c(x) = 1{|x − x*| = 1} / d(θ(x), θ(x*))`.
///
/// Raw estimates need not be unimodal; non-unimodal input is flagged.
pub fn solve_unimodal(
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
    let mut rates = vec![0.0; theta.len()];
    for x in [best.wrapping_sub(1), best + 1] {
        if x < theta.len() {
            rates[x] = inverse_divergence(model.kl_unchecked(theta[x], top));
        }
    }
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
    if !is_strictly_unimodal(theta) {
        sol.flags.push(SolverFlag::ParameterOutsideStructure {
            reason: "θ is not strictly unimodal".into(),
        });
    }
    Ok(sol)
}
