//! Dueling bandits.
//!
//! A confusing parameter must turn some loser `i` into the Condorcet winner,
//! which means pushing every `θ(i, j) < 1/2` above one half. Each unordered
//! pair appears in exactly one such constraint (the one of its loser), so the
//! LP splits per loser and the optimum puts all exploration on the single arm
//! `(i, j(i))` with the best gap-per-information ratio.

use super::{finalize, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::observation::ObservationModel;
use crate::structures::{condorcet_winner, dueling_winner, Structure};

pub fn solve_dueling(
    items: usize,
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<BoundSolution> {
    if model != ObservationModel::Bernoulli {
        return Err(Error::UnsupportedModel(
            "dueling bandits need Bernoulli observations".into(),
        ));
    }
    let structure = Structure::Dueling { items };
    if theta.len() != structure.arms() {
        return Err(Error::ArmCountMismatch {
            expected: structure.arms(),
            got: theta.len(),
        });
    }
    for &m in theta {
        model.check_mean(m)?;
    }
    let (winner, fallback) = match condorcet_winner(items, theta) {
        Some(w) => (w, false),
        None if opts.condorcet_fallback => dueling_winner(items, theta),
        None => return Err(Error::NoCondorcetWinner),
    };
    let mut flags = Vec::new();
    if fallback {
        flags.push(SolverFlag::WinnerFallback);
    }
    let gap = |i: usize, j: usize| {
        (0.5 * (theta[winner * items + i] + theta[winner * items + j] - 1.0)).max(0.0)
    };
    let mut rates = vec![0.0; items * items];
    let mut degenerate = false;
    for i in (0..items).filter(|&i| i != winner) {
        let mut best: Option<(usize, f64)> = None;
        let mut tied = false;
        for j in (0..items).filter(|&j| j != i && theta[i * items + j] < 0.5) {
            let ratio = gap(i, j) / model.kl_unchecked(theta[i * items + j], 0.5);
            match best {
                None => best = Some((j, ratio)),
                Some((_, r)) => {
                    let tol = 1e-12 * r.abs().max(ratio.abs()).max(f64::MIN_POSITIVE);
                    if ratio < r - tol {
                        best = Some((j, ratio));
                        tied = false;
                    } else if (ratio - r).abs() <= tol {
                        tied = true;
                    }
                }
            }
        }
        if let Some((j, _)) = best {
            rates[i * items + j] = 1.0 / model.kl_unchecked(theta[i * items + j], 0.5);
            if tied {
                degenerate = true;
                flags.push(SolverFlag::NonUniqueMinimizer { item: i });
            }
        }
    }
    let gaps: Vec<f64> = (0..items * items).map(|a| gap(a / items, a % items)).collect();
    let status = if degenerate {
        SolveStatus::Degenerate
    } else {
        SolveStatus::Exact
    };
    let mut sol = finalize(rates, &gaps, status, winner * items + winner, opts);
    if let Err(reason) = structure.check_parameter(theta, 1e-9) {
        sol.flags.push(SolverFlag::ParameterOutsideStructure { reason });
    }
    sol.flags.extend(flags);
    Ok(sol)
}
