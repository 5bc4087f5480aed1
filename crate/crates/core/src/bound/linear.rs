//! Linear bandits with unit-variance Gaussian observations.
//!
//! The optimal arm carries no cost, so its weight can grow without bound and
//! the constraint `xᵀ A(η)⁻¹ x ≤ Δ(x)²/2` only sees the component of every
//! feature orthogonal to `x*`. We therefore work in an orthonormal basis `Q`
//! of the span of the projected features, where the constraint reads
//!
//! ```text
//! f_x(η) = x̃ᵀ Ã(η)⁻¹ x̃ ≤ Δ(x)²/2,   Ã(η) = Σ_z η(z) z̃ z̃ᵀ.
//! ```
//!
//! `f_x` is convex in `η` and equals `sup_u ⟨u, x̃⟩² / uᵀÃ(η)u`, so every
//! direction `u` yields a valid linear row
//!
//! ```text
//! Σ_z η(z) ⟨u, z̃⟩² ≥ 2 ⟨u, x̃⟩² / Δ(x)².
//! ```
//!
//! The cutting-plane loop solves the LP over the rows collected so far, finds
//! the most violated direction `u = Ã(η)⁻¹x̃` for every violated arm and adds
//! its row. This row is never weaker than the first-order linearization of
//! `f_x` at the same point. The LP is solved in dual form, which starts
//! feasible and whose positive weights mark the binding rows; those rows are
//! kept as ambient directions, so a later solve can reuse them after `θ`
//! moves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{finalize, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Relation};
use crate::observation::ObservationModel;
use crate::structures::{argmax_with_tie, Structure, TIE_TOLERANCE};

/// Cut directions kept from a previous solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WarmStart {
    pub directions: Vec<Vec<f64>>,
}

struct Reduced {
    /// `d × k` orthonormal basis of the projected feature span.
    basis: DMatrix<f64>,
    /// Per-arm coordinates in that basis.
    coords: Vec<DVector<f64>>,
}

fn reduce(features: &[Vec<f64>], best: usize) -> Reduced {
    let d = features[0].len();
    let star = DVector::from_column_slice(&features[best]);
    let norm2 = star.norm_squared();
    let proj = if norm2 > 0.0 {
        DMatrix::identity(d, d) - &star * star.transpose() / norm2
    } else {
        DMatrix::identity(d, d)
    };
    let projected: Vec<DVector<f64>> = features
        .iter()
        .map(|f| &proj * DVector::from_column_slice(f))
        .collect();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    for p in &projected {
        gram += p * p.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..d)
        .filter(|&i| top > 0.0 && eig.eigenvalues[i] > 1e-10 * top)
        .collect();
    let mut basis = DMatrix::<f64>::zeros(d, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &eig.eigenvectors.column(i));
    }
    let mut coords: Vec<DVector<f64>> = projected.iter().map(|p| basis.transpose() * p).collect();
    // Rounding leaves x* with a tiny free coordinate; it must carry no information.
    coords[best].fill(0.0);
    Reduced { basis, coords }
}

struct Cut {
    dir: DVector<f64>,
}

/// Worst relative violation of `x̃ᵀ Ã(η)⁻¹ x̃ ≤ Δ²/2`; `None` when `Ã(η)` is
/// singular.
fn exact_violation(coords: &[DVector<f64>], constrained: &[(usize, f64)], eta: &[f64], k: usize) -> Option<f64> {
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (z, &w) in eta.iter().enumerate() {
        if w > 0.0 {
            a += w * &coords[z] * coords[z].transpose();
        }
    }
    let chol = a.cholesky()?;
    let worst = constrained
        .iter()
        .map(|&(x, gap)| coords[x].dot(&chol.solve(&coords[x])) / (0.5 * gap * gap) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(worst)
}

/// Row `Σ_z η(z)⟨u, z̃⟩² ≥ rhs(u)`, normalized to unit right-hand side.
fn cut_row(
    u: &DVector<f64>,
    coords: &[DVector<f64>],
    constrained: &[(usize, f64)],
) -> Option<Vec<f64>> {
    let rhs = constrained
        .iter()
        .map(|&(x, gap)| 2.0 * u.dot(&coords[x]).powi(2) / (gap * gap))
        .fold(0.0f64, f64::max);
    if !(rhs > 0.0) {
        return None;
    }
    let row: Vec<f64> = coords.iter().map(|z| u.dot(z).powi(2) / rhs).collect();
    if row.iter().all(|&c| c <= 1e-300) {
        return None;
    }
    Some(row)
}

pub fn solve_linear(
    features: &[Vec<f64>],
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<BoundSolution> {
    if model != ObservationModel::Gaussian {
        return Err(Error::UnsupportedModel(
            "linear bandits need unit-variance Gaussian observations".into(),
        ));
    }
    Structure::Linear {
        features: features.to_vec(),
    }
    .validate()?;
    let n = features.len();
    if theta.len() != n {
        return Err(Error::ArmCountMismatch {
            expected: n,
            got: theta.len(),
        });
    }
    for &m in theta {
        model.check_mean(m)?;
    }
    let (best, tie) = argmax_with_tie(theta);
    let top = theta[best];
    let gaps: Vec<f64> = theta.iter().map(|&m| top - m).collect();
    let red = reduce(features, best);
    let k = red.basis.ncols();
    let mut flags = Vec::new();
    let mut forced = vec![false; n];
    let mut floored = false;

    // Arms that some confusing parameter can make optimal, with effective gaps.
    let scale = red.coords.iter().map(|z| z.norm_squared()).fold(0.0f64, f64::max);
    let tie_tol = TIE_TOLERANCE * top.abs().max(1.0);
    let mut constrained: Vec<(usize, f64)> = Vec::new();
    for x in (0..n).filter(|&x| x != best) {
        let nx = red.coords[x].norm();
        if k == 0 || nx * nx <= 1e-20 * scale {
            continue;
        }
        if gaps[x] <= tie_tol {
            forced[x] = true;
            continue;
        }
        let floor = nx * (2.0 / opts.c_max).sqrt();
        let gap = if gaps[x] < floor {
            floored = true;
            floor
        } else {
            gaps[x]
        };
        constrained.push((x, gap));
    }

    let finish = |rates: Vec<f64>,
                  status: SolveStatus,
                  iterations: usize,
                  max_violation: f64,
                  mut flags: Vec<SolverFlag>,
                  warm_start: Option<WarmStart>| {
        let mut status = status;
        let mut rates = rates;
        for (r, &f) in rates.iter_mut().zip(&forced) {
            if f {
                *r = f64::INFINITY;
            }
        }
        if forced.iter().any(|&f| f) || tie {
            status = SolveStatus::Degenerate;
            flags.push(SolverFlag::Tie);
        }
        if floored {
            flags.push(SolverFlag::GapFloored);
            if status != SolveStatus::Degenerate {
                status = SolveStatus::Capped;
            }
        }
        let mut sol = finalize(rates, &gaps, status, best, opts);
        sol.iterations = iterations;
        sol.max_violation = max_violation;
        sol.tolerance = opts.tolerance;
        sol.flags = flags;
        sol.warm_start = warm_start;
        sol
    };

    if constrained.is_empty() {
        // No confusing parameter: the optimal arm alone identifies θ.
        return Ok(finish(vec![0.0; n], SolveStatus::Exact, 0, 0.0, flags, None));
    }

    let mut cuts: Vec<Cut> = Vec::new();
    let push_cut = |cuts: &mut Vec<Cut>, u: DVector<f64>| -> bool {
        let norm = u.norm();
        if !(norm > 1e-12) {
            return false;
        }
        let u = u / norm;
        if cuts.iter().any(|c| c.dir.dot(&u).abs() > 1.0 - 1e-12) {
            return false;
        }
        cuts.push(Cut { dir: u });
        true
    };
    if let Some(ws) = warm {
        for amb in ws.directions.iter().filter(|a| a.len() == red.basis.nrows()) {
            let u = red.basis.transpose() * DVector::from_column_slice(amb);
            if u.norm() > 1e-6 {
                push_cut(&mut cuts, u);
            }
        }
    }
    if cuts.is_empty() {
        for &(x, _) in &constrained {
            push_cut(&mut cuts, red.coords[x].clone());
        }
    }

    let max_cuts = 3 * n + 8;
    let base_trace: f64 = red.coords.iter().map(|z| z.norm_squared()).sum();
    let mut eta = vec![0.0; n];
    let mut weights: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut last_violation = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        // Dual of the covering LP over the current cuts: maximize Σᵢ yᵢ subject
        // to Σᵢ yᵢ rowᵢ(z) ≤ Δ(z). It is feasible at y = 0, and the primal
        // rates are the multipliers of its rows.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(cuts.len());
        let mut kept = Vec::with_capacity(cuts.len());
        for cut in cuts.drain(..) {
            if let Some(row) = cut_row(&cut.dir, &red.coords, &constrained) {
                rows.push(row);
                kept.push(cut);
            }
        }
        cuts = kept;
        let mut lp = LpProblem::new(vec![-1.0; rows.len()]);
        for z in 0..n {
            lp.add(rows.iter().map(|r| r[z]).collect(), Relation::Le, gaps[z]);
        }
        let sol = lp.solve();
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpInfeasible);
        }
        eta = sol.duals.iter().map(|&y| (-y).max(0.0)).collect();
        weights = sol.x;

        // Separation: most violated direction per constrained arm.
        let mut a = DMatrix::<f64>::zeros(k, k);
        for (z, &w) in eta.iter().enumerate() {
            if w > 0.0 {
                a += w * &red.coords[z] * red.coords[z].transpose();
            }
        }
        let tr = a.trace();
        let ridge = opts.ridge_scale * if tr > 0.0 { tr } else { base_trace } / k as f64;
        for i in 0..k {
            a[(i, i)] += ridge;
        }
        let chol = a.cholesky().ok_or(Error::LpInfeasible)?;
        let mut worst = f64::NEG_INFINITY;
        let mut new_dirs = Vec::new();
        for &(x, gap) in &constrained {
            let w = chol.solve(&red.coords[x]);
            let f = red.coords[x].dot(&w);
            let viol = f / (0.5 * gap * gap) - 1.0;
            worst = worst.max(viol);
            if viol > opts.tolerance {
                new_dirs.push(w);
            }
        }
        last_violation = worst;
        if worst <= opts.tolerance {
            converged = true;
            break;
        }
        if cuts.len() + new_dirs.len() > max_cuts {
            // Cuts with a zero multiplier do not shape the current optimum.
            let mut i = 0;
            cuts.retain(|_| {
                i += 1;
                weights[i - 1] > 0.0
            });
            weights.retain(|&w| w > 0.0);
        }
        let mut added = false;
        for w in new_dirs {
            added |= push_cut(&mut cuts, w);
        }
        if !added {
            break;
        }
    }

    let mut status = SolveStatus::Converged;
    if converged {
        // The ridge hides a little violation; measure without it.
        if let Some(v) = exact_violation(&red.coords, &constrained, &eta, k) {
            last_violation = v;
        }
    } else {
        flags.push(SolverFlag::IterationLimit);
        status = SolveStatus::Capped;
    }
    // Scaling by the worst ratio restores feasibility: f_x(sη) = f_x(η)/s.
    if last_violation > 0.0 {
        let s = 1.0 + last_violation;
        eta.iter_mut().for_each(|e| *e *= s);
        last_violation = 0.0;
    }
    eta[best] = 0.0;
    let tight: Vec<Vec<f64>> = cuts
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, _)| (&red.basis * &c.dir).iter().copied().collect())
        .collect();
    Ok(finish(
        eta,
        status,
        iterations,
        last_violation.max(0.0),
        flags,
        Some(WarmStart { directions: tight }),
    ))
}
