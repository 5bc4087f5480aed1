#![allow(dead_code)]

pub mod dd;

use ossb::observation::ObservationModel;

/// Reference KL divergence in double-double precision, rounded to `f64`.
pub fn reference_kl(model: ObservationModel, p: f64, q: f64) -> f64 {
    match model {
        ObservationModel::Bernoulli => dd::bernoulli_kl(p, q).to_f64(),
        ObservationModel::Gaussian => dd::gaussian_kl(p, q).to_f64(),
    }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }
}

/// Largest relative violation of `xᵀ A(η)⁻¹ x ≤ Δ(x)² / 2` over suboptimal
/// arms in the limit `η(x*) → ∞`. That limit is the same quadratic form
/// restricted to the orthogonal complement of `x*`, where the optimal arm's
/// weight drops out; it is infinite when the restricted matrix is singular.
pub fn linear_violation(features: &[Vec<f64>], theta: &[f64], rates: &[f64]) -> f64 {
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    let d = features[0].len();
    let best = (0..theta.len()).fold(0, |b, x| if theta[x] > theta[b] { x } else { b });
    let star = DVector::from_column_slice(&features[best]);
    let p = DMatrix::<f64>::identity(d, d) - &star * star.transpose() / star.norm_squared();
    // eigenvectors of the projector with eigenvalue 1 span the complement
    let eig = SymmetricEigen::new(p);
    let cols: Vec<DVector<f64>> = (0..d)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let q = DMatrix::from_columns(&cols);
    let reduced: Vec<DVector<f64>> = features.iter().map(|f| q.transpose() * DVector::from_column_slice(f)).collect();
    let k = q.ncols();
    let mut b = DMatrix::<f64>::zeros(k, k);
    for (x, v) in reduced.iter().enumerate() {
        if x != best {
            b += rates[x] * v * v.transpose();
        }
    }
    let lu = b.full_piv_lu();
    let mut worst = 0.0f64;
    for (x, v) in reduced.iter().enumerate() {
        let gap = theta[best] - theta[x];
        if gap <= 1e-12 || v.norm() < 1e-12 {
            continue;
        }
        let Some(w) = lu.solve(v) else {
            return f64::INFINITY;
        };
        worst = worst.max(2.0 * v.dot(&w) / (gap * gap) - 1.0);
    }
    worst
}
