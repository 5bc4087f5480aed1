use super::{finalize, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Relation};
use crate::observation::ObservationModel;
use crate::structures::{argmax_with_tie, Structure};

/// Lipschitz bandit: one LP row per suboptimal arm `x`,
///
/// ```text
/// Σ_z η(z) d(θ(z), max{θ(z), θ(x*) − ℓ(x, z)}) ≥ 1
/// ```
///
/// Rows with an infinite coefficient are dropped: an arbitrarily small
/// weight on that arm already satisfies them.
pub fn solve_lipschitz(
    model: ObservationModel,
    theta: &[f64],
    distances: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<BoundSolution> {
    let structure = Structure::Lipschitz {
        distances: distances.to_vec(),
    };
    structure.validate()?;
    let n = theta.len();
    if n != distances.len() {
        return Err(Error::ArmCountMismatch {
            expected: distances.len(),
            got: n,
        });
    }
    for &m in theta {
        model.check_mean(m)?;
    }
    let (best, tie) = argmax_with_tie(theta);
    let top = theta[best];
    let gaps: Vec<f64> = theta.iter().map(|&m| top - m).collect();

    let mut lp = LpProblem::new(gaps.clone());
    let mut forced = vec![0.0; n];
    for x in (0..n).filter(|&x| x != best) {
        let row: Vec<f64> = (0..n)
            .map(|z| {
                let target = theta[z].max(top - distances[x][z]);
                model.kl_unchecked(theta[z], target)
            })
            .collect();
        if row.iter().any(|c| c.is_infinite()) {
            continue;
        }
        if row.iter().all(|&c| c == 0.0) {
            // θ(x) ties with the optimum: no finite weight distinguishes them.
            forced[x] = f64::INFINITY;
            continue;
        }
        lp.add(row, Relation::Ge, 1.0);
    }

    let lp_sol = lp.solve();
    match lp_sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::LpInfeasible),
        LpStatus::Unbounded => return Err(Error::LpUnbounded),
        LpStatus::IterationLimit => return Err(Error::LpInfeasible),
    }
    let mut rates = lp_sol.x.clone();
    for (r, f) in rates.iter_mut().zip(&forced) {
        if f.is_infinite() {
            *r = f64::INFINITY;
        }
    }
    let status = if tie {
        SolveStatus::Degenerate
    } else {
        SolveStatus::Exact
    };
    let mut sol = finalize(rates, &gaps, status, best, opts);
    sol.iterations = lp_sol.iterations;
    sol.max_violation = lp.max_violation(&sol.rates).max(0.0);
    if tie {
        sol.flags.push(SolverFlag::Tie);
    }
    if let Err(reason) = structure.check_parameter(theta, 1e-12) {
        sol.flags.push(SolverFlag::ParameterOutsideStructure { reason });
    }
    Ok(sol)
}
