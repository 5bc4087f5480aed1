//! Grid oracle for the lower-bound LP.
//!
//! For every arm `x'` that some confusing parameter can make optimal, a
//! family of parameters `λ` is built on a grid: `λ` keeps the optimal arm's
//! mean, lifts `x'` to a level `v` above `μ*` and moves only the coordinates
//! the structure forces to move with it. Each `λ` gives one LP row
//! `Σₓ η(x) D(θ, λ, x) ≥ 1`. Levels are spaced quadratically so that most of
//! them sit close to `μ*`, where the binding constraints live.
//!
//! Linear structures have a continuum of confusing directions instead of
//! levels: the grid runs over unit directions orthogonal to the optimal arm.
//!
//! The grid only relaxes the constraint set, so the oracle value is a lower
//! bound on `C(θ)` that increases as the grid is refined.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{finalize, BoundSolution, SolveStatus, SolverFlag, SolverOptions};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Relation};
use crate::observation::ObservationModel;
use crate::structures::{condorcet_winner, dueling_winner, Structure};

/// Finite set of confusing-parameter rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusingSet {
    /// Row `λ` holds `D(θ, λ, x)` for every arm `x`.
    pub rows: Vec<Vec<f64>>,
    pub gaps: Vec<f64>,
    pub optimal_arm: usize,
    /// Arms that cannot be told apart from the optimum with finite effort.
    pub forced: Vec<usize>,
    pub tie: bool,
    pub winner_fallback: bool,
}

/// Levels `μ* + span·(k/res)²`, `k = 1..=res`.
fn levels(top: f64, span: f64, res: usize) -> impl Iterator<Item = f64> {
    (1..=res).map(move |k| {
        let t = k as f64 / res as f64;
        top + span * t * t
    })
}

fn upper_level(model: ObservationModel, top: f64, gaps: &[f64]) -> f64 {
    match model {
        ObservationModel::Bernoulli => 1.0,
        ObservationModel::Gaussian => {
            let widest = gaps.iter().copied().fold(0.0f64, f64::max);
            top + (2.0 * widest).max(1.0)
        }
    }
}

/// Build the grid rows for `θ` at the given resolution.
pub fn confusing_rows(
    structure: &Structure,
    model: ObservationModel,
    theta: &[f64],
    resolution: usize,
    condorcet_fallback: bool,
) -> Result<ConfusingSet> {
    structure.validate()?;
    if theta.len() != structure.arms() {
        return Err(Error::ArmCountMismatch {
            expected: structure.arms(),
            got: theta.len(),
        });
    }
    for &m in theta {
        model.check_mean(m)?;
    }
    let res = resolution.max(1);
    let n = theta.len();
    let d = |x: usize, v: f64| model.kl_unchecked(theta[x], v);

    if let Structure::Dueling { items } = structure {
        if model != ObservationModel::Bernoulli {
            return Err(Error::UnsupportedModel(
                "dueling bandits need Bernoulli observations".into(),
            ));
        }
        let items = *items;
        let (winner, fallback) = match condorcet_winner(items, theta) {
            Some(w) => (w, false),
            None if condorcet_fallback => dueling_winner(items, theta),
            None => return Err(Error::NoCondorcetWinner),
        };
        let gaps: Vec<f64> = (0..n)
            .map(|a| {
                let (i, j) = (a / items, a % items);
                (0.5 * (theta[winner * items + i] + theta[winner * items + j] - 1.0)).max(0.0)
            })
            .collect();
        let mut rows = Vec::new();
        for i in (0..items).filter(|&i| i != winner) {
            // Make `i` the Condorcet winner: every θ(i, j) below one half is
            // lifted to `v`, and the mirrored arm `(j, i)` moves with it.
            for v in levels(0.5, 0.5, res) {
                let mut row = vec![0.0; n];
                for j in (0..items).filter(|&j| j != i) {
                    let a = i * items + j;
                    if theta[a] < v {
                        let div = d(a, v);
                        row[a] = div;
                        row[j * items + i] = div;
                    }
                }
                rows.push(row);
            }
        }
        return Ok(ConfusingSet {
            rows,
            gaps,
            optimal_arm: winner * items + winner,
            forced: Vec::new(),
            tie: false,
            winner_fallback: fallback,
        });
    }

    let gv = structure.gap_vector(theta)?;
    let best = gv.optimal.arm;
    let top = theta[best];
    let gaps = gv.gaps;
    let upper = upper_level(model, top, &gaps);
    let mut rows = Vec::new();
    let mut forced = Vec::new();

    if let Structure::Linear { features } = structure {
        if model != ObservationModel::Gaussian {
            return Err(Error::UnsupportedModel(
                "linear bandits need unit-variance Gaussian observations".into(),
            ));
        }
        let coords = orthogonal_coordinates(features, best);
        let k = coords.first().map_or(0, |c| c.len());
        let dirs = hemisphere(k, res);
        let h = (upper - top) / (res * res) as f64;
        for x in (0..n).filter(|&x| x != best) {
            if coords[x].norm() <= 1e-10 * (1.0 + features[x].iter().map(|v| v * v).sum::<f64>().sqrt()) {
                continue;
            }
            if gaps[x] <= 0.0 {
                forced.push(x);
                continue;
            }
            for w in &dirs {
                let lift = w.dot(&coords[x]);
                if lift.abs() < 1e-9 * coords[x].norm() {
                    continue;
                }
                let s = (gaps[x] + h) / lift;
                rows.push(coords.iter().map(|z| 0.5 * (s * w.dot(z)).powi(2)).collect());
            }
        }
    } else {
        for x in (0..n).filter(|&x| x != best) {
            let cap = match structure {
                Structure::Lipschitz { distances } => upper.min(top + distances[x][best]),
                _ => upper,
            };
            let span = cap - top;
            if !(span > 0.0) {
                continue;
            }
            for v in levels(top, span, res) {
                let mut row = vec![0.0; n];
                match structure {
                    Structure::Classical { .. } => row[x] = d(x, v),
                    Structure::Unimodal { .. } => {
                        // Everything between the peak and `x` rises with it.
                        let range = if x < best { x..best } else { best + 1..x + 1 };
                        for z in range {
                            row[z] = d(z, theta[z].max(v));
                        }
                    }
                    Structure::Lipschitz { distances } => {
                        for z in (0..n).filter(|&z| z != best) {
                            row[z] = d(z, theta[z].max(v - distances[x][z]));
                        }
                    }
                    Structure::Linear { .. } | Structure::Dueling { .. } => unreachable!(),
                }
                if row.iter().all(|&c| c == 0.0) {
                    forced.push(x);
                    break;
                }
                rows.push(row);
            }
        }
    }
    Ok(ConfusingSet {
        rows,
        gaps,
        optimal_arm: best,
        forced,
        tie: gv.optimal.tie,
        winner_fallback: false,
    })
}

/// Coordinates of every feature in an orthonormal basis of the span of the
/// features projected orthogonally to the optimal arm.
fn orthogonal_coordinates(features: &[Vec<f64>], best: usize) -> Vec<DVector<f64>> {
    let dim = features[0].len();
    let star = DVector::from_column_slice(&features[best]);
    let n2 = star.norm_squared();
    let project = |f: &Vec<f64>| {
        let v = DVector::from_column_slice(f);
        if n2 > 0.0 {
            &v - &star * (star.dot(&v) / n2)
        } else {
            v
        }
    };
    let projected: Vec<DVector<f64>> = features.iter().map(project).collect();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for p in &projected {
        gram += p * p.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.max();
    let basis: Vec<DVector<f64>> = (0..dim)
        .filter(|&i| top > 0.0 && eig.eigenvalues[i] > 1e-10 * top)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let mut coords: Vec<DVector<f64>> = projected
        .iter()
        .map(|p| DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(p))))
        .collect();
    coords[best].fill(0.0);
    coords
}

/// Unit directions covering a half-sphere in `R^k`; `u` and `−u` give the
/// same rows. Hyperspherical angles on a lattice, the last one over `[0, π)`.
fn hemisphere(k: usize, res: usize) -> Vec<DVector<f64>> {
    use std::f64::consts::PI;
    match k {
        0 => return Vec::new(),
        1 => return vec![DVector::from_element(1, 1.0)],
        _ => {}
    }
    let m = if k == 2 {
        res.max(1)
    } else {
        ((4 * res) as f64).powf(1.0 / (k - 1) as f64).ceil().max(2.0) as usize
    };
    let total = m.pow((k - 1) as u32);
    (0..total)
        .map(|mut idx| {
            let mut angles = Vec::with_capacity(k - 1);
            for a in 0..k - 1 {
                let j = idx % m;
                idx /= m;
                angles.push(if a == k - 2 {
                    PI * j as f64 / m as f64
                } else {
                    PI * j as f64 / (m - 1) as f64
                });
            }
            let mut v = DVector::<f64>::zeros(k);
            let mut r = 1.0;
            for (a, &phi) in angles.iter().enumerate() {
                v[a] = r * phi.cos();
                r *= phi.sin();
            }
            v[k - 1] = r;
            v
        })
        .collect()
}

fn solve_rows(set: &ConfusingSet, opts: &SolverOptions) -> Result<(Vec<f64>, usize)> {
    let n = set.gaps.len();
    let mut lp = LpProblem::new(set.gaps.clone());
    for row in &set.rows {
        if row.iter().any(|c| !c.is_finite()) {
            continue;
        }
        // Unit-max rows keep the tableau well scaled.
        let top = row.iter().copied().fold(0.0f64, f64::max);
        if top > 0.0 {
            lp.add(row.iter().map(|c| c / top).collect(), Relation::Ge, 1.0 / top);
        }
    }
    if lp.constraints.is_empty() {
        return Ok((vec![0.0; n], 0));
    }
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(Error::LpUnbounded),
        _ => return Err(Error::LpInfeasible),
    }
    let mut rates = sol.x;
    for &x in &set.forced {
        rates[x] = opts.c_max;
    }
    Ok((rates, sol.iterations))
}

fn solve_at(
    structure: &Structure,
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
    res: usize,
) -> Result<BoundSolution> {
    let set = confusing_rows(structure, model, theta, res, opts.condorcet_fallback)?;
    let (rates, iterations) = solve_rows(&set, opts)?;
    let degenerate = set.tie || !set.forced.is_empty();
    let status = if degenerate {
        SolveStatus::Degenerate
    } else {
        SolveStatus::Exact
    };
    let mut sol = finalize(rates, &set.gaps, status, set.optimal_arm, opts);
    sol.iterations = iterations;
    let finite: Vec<&Vec<f64>> = set.rows.iter().filter(|r| r.iter().all(|c| c.is_finite())).collect();
    sol.max_violation = finite
        .iter()
        .map(|r| 1.0 - r.iter().zip(&sol.rates).map(|(a, b)| a * b).sum::<f64>())
        .fold(0.0f64, f64::max);
    if degenerate {
        sol.flags.push(SolverFlag::Tie);
    }
    if set.winner_fallback {
        sol.flags.push(SolverFlag::WinnerFallback);
    }
    Ok(sol)
}

/// Solve the LP over the grid of confusing parameters.
///
/// The value is also computed at half the resolution; a relative change above
/// 1% raises [`SolverFlag::GridTooCoarse`].
pub fn solve_generic_oracle(
    structure: &Structure,
    model: ObservationModel,
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<BoundSolution> {
    let res = opts.grid_resolution.max(1);
    let mut fine = solve_at(structure, model, theta, opts, res)?;
    if res >= 2 {
        let coarse = solve_at(structure, model, theta, opts, res / 2)?;
        let scale = fine.value.abs().max(coarse.value.abs());
        if scale > 0.0 && (fine.value - coarse.value).abs() > 0.01 * scale {
            fine.flags.push(SolverFlag::GridTooCoarse {
                coarse: coarse.value,
                fine: fine.value,
            });
        }
    }
    if let Err(reason) = structure.check_parameter(theta, 1e-9) {
        fine.flags.push(SolverFlag::ParameterOutsideStructure { reason });
    }
    Ok(fine)
}
