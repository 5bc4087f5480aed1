//! Structural classes of bandit problems.
//!
//! A [`Structure`] fixes the arm set and the relation between arms that every
//! admissible parameter must respect. It maps a parameter vector to rewards,
//! finds the optimal arm and projects raw empirical means back onto the
//! structure.
//!
//! Dueling arms are ordered pairs `(i, j)` of items stored row-major, so arm
//! `i * items + j` is "item `i` against item `j`".

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::{ObservationModel, ParameterVector};

/// Relative tolerance used to decide that two rewards tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    /// Independent arms, `μ(x) = θ(x)`.
    Classical { arms: usize },
    /// `θ(x) = ⟨φ, x⟩` for per-arm feature vectors `x ∈ R^d`.
    Linear { features: Vec<Vec<f64>> },
    /// `|θ(x) − θ(y)| ≤ ℓ(x, y)` for the given distance matrix.
    Lipschitz { distances: Vec<Vec<f64>> },
    /// Arms on a line, `θ` strictly increasing then strictly decreasing.
    Unimodal { arms: usize },
    /// Arms are ordered item pairs; `θ(i, j)` is the probability `i` beats `j`.
    Dueling { items: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Classical,
    Linear,
    Lipschitz,
    Unimodal,
    Dueling,
}

/// Result of an optimal-arm query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalArm {
    pub arm: usize,
    /// Another arm reaches the maximal reward; the lowest index was returned.
    pub tie: bool,
    /// Dueling only: no Condorcet winner, the item with most pairwise wins was used.
    pub winner_fallback: bool,
}

/// Per-arm gaps `μ* − μ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector {
    pub gaps: Vec<f64>,
    pub optimal: OptimalArm,
}

impl GapVector {
    pub fn min_positive(&self) -> Option<f64> {
        self.gaps
            .iter()
            .copied()
            .filter(|&g| g > 0.0)
            .min_by(f64::total_cmp)
    }
}

impl Structure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Classical { .. } => StructureKind::Classical,
            Structure::Linear { .. } => StructureKind::Linear,
            Structure::Lipschitz { .. } => StructureKind::Lipschitz,
            Structure::Unimodal { .. } => StructureKind::Unimodal,
            Structure::Dueling { .. } => StructureKind::Dueling,
        }
    }

    /// Number of arms `|X|`.
    pub fn arms(&self) -> usize {
        match self {
            Structure::Classical { arms } | Structure::Unimodal { arms } => *arms,
            Structure::Linear { features } => features.len(),
            Structure::Lipschitz { distances } => distances.len(),
            Structure::Dueling { items } => items * items,
        }
    }

    /// Check the structure's own invariants (not those of a parameter).
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStructure(m));
        if self.arms() < 2 {
            return Err(Error::TooFewArms(self.arms()));
        }
        match self {
            Structure::Classical { .. } | Structure::Unimodal { .. } => Ok(()),
            Structure::Dueling { items } => {
                if *items < 2 {
                    bad(format!("dueling needs at least 2 items, got {items}"))
                } else {
                    Ok(())
                }
            }
            Structure::Linear { features } => {
                let d = features[0].len();
                if d == 0 {
                    return bad("feature vectors are empty".into());
                }
                for (x, f) in features.iter().enumerate() {
                    if f.len() != d {
                        return bad(format!("arm {x} has dimension {} instead of {d}", f.len()));
                    }
                    if f.iter().any(|v| !v.is_finite()) {
                        return bad(format!("arm {x} has a non-finite feature"));
                    }
                }
                Ok(())
            }
            Structure::Lipschitz { distances } => {
                let n = distances.len();
                for (x, row) in distances.iter().enumerate() {
                    if row.len() != n {
                        return bad(format!("distance row {x} has length {}", row.len()));
                    }
                    if row[x] != 0.0 {
                        return bad(format!("distance ℓ({x},{x}) is not zero"));
                    }
                    for (y, &l) in row.iter().enumerate() {
                        if !(l >= 0.0) || !l.is_finite() {
                            return bad(format!("distance ℓ({x},{y}) = {l} is not a finite nonnegative number"));
                        }
                        if l != distances[y][x] {
                            return bad(format!("distance matrix is not symmetric at ({x},{y})"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Dimension `d` of the feature space (linear structures only).
    pub fn feature_dim(&self) -> Option<usize> {
        match self {
            Structure::Linear { features } => Some(features[0].len()),
            _ => None,
        }
    }

    /// Rank of the feature matrix (linear structures only).
    pub fn feature_rank(&self) -> Option<usize> {
        match self {
            Structure::Linear { features } => {
                let weights = vec![1.0; features.len()];
                Some(weighted_gram_rank(features, &weights).1)
            }
            _ => None,
        }
    }

    /// Decompose a dueling arm index into its item pair.
    pub fn dueling_pair(&self, arm: usize) -> Option<(usize, usize)> {
        match self {
            Structure::Dueling { items } => Some((arm / items, arm % items)),
            _ => None,
        }
    }

    /// Mean vector `θ(x) = ⟨φ, x⟩` of a linear structure.
    pub fn linear_means(&self, phi: &[f64]) -> Result<ParameterVector> {
        match self {
            Structure::Linear { features } => {
                if phi.len() != features[0].len() {
                    return Err(Error::InvalidStructure(format!(
                        "φ has dimension {} but features have {}",
                        phi.len(),
                        features[0].len()
                    )));
                }
                Ok(ParameterVector::from_raw(
                    features.iter().map(|f| dot(f, phi)).collect(),
                ))
            }
            _ => Err(Error::InvalidStructure("not a linear structure".into())),
        }
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.arms() {
            return Err(Error::ArmCountMismatch {
                expected: self.arms(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Reward `μ(x, θ)` of one arm.
    pub fn reward(&self, theta: &[f64], x: usize) -> Result<f64> {
        Ok(self.rewards(theta)?[x])
    }

    /// Rewards of all arms. Dueling requires a Condorcet winner.
    pub fn rewards(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        match self {
            Structure::Dueling { items } => {
                let w = condorcet_winner(*items, theta).ok_or(Error::NoCondorcetWinner)?;
                Ok(dueling_rewards(*items, theta, w))
            }
            _ => Ok(theta.to_vec()),
        }
    }

    /// Rewards of all arms, falling back to the Copeland winner for dueling
    /// structures without a Condorcet winner.
    pub fn rewards_lenient(&self, theta: &[f64]) -> Result<(Vec<f64>, bool)> {
        self.check_len(theta)?;
        match self {
            Structure::Dueling { items } => {
                let (w, fallback) = dueling_winner(*items, theta);
                Ok((dueling_rewards(*items, theta, w), fallback))
            }
            _ => Ok((theta.to_vec(), false)),
        }
    }

    /// Arm maximizing the reward, lowest index on ties (flagged).
    pub fn optimal_arm(&self, theta: &[f64]) -> Result<OptimalArm> {
        let (rewards, winner_fallback) = self.rewards_lenient(theta)?;
        let (arm, tie) = argmax_with_tie(&rewards);
        Ok(OptimalArm {
            arm,
            tie,
            winner_fallback,
        })
    }

    /// Gaps `μ*(θ) − μ(x, θ)`.
    pub fn gap_vector(&self, theta: &[f64]) -> Result<GapVector> {
        let rewards = self.rewards(theta)?;
        Ok(gaps_from_rewards(&rewards, false))
    }

    /// Gaps using the lenient dueling winner.
    pub fn gap_vector_lenient(&self, theta: &[f64]) -> Result<GapVector> {
        let (rewards, fallback) = self.rewards_lenient(theta)?;
        Ok(gaps_from_rewards(&rewards, fallback))
    }

    /// Map raw empirical means onto the structure.
    ///
    /// `weights` are per-arm visit counts; only the linear projection uses them.
    pub fn project(
        &self,
        model: ObservationModel,
        raw: &[f64],
        weights: &[f64],
    ) -> Result<ParameterVector> {
        self.check_len(raw)?;
        let out: Vec<f64> = match self {
            Structure::Classical { .. } | Structure::Unimodal { .. } | Structure::Lipschitz { .. } => {
                raw.iter().map(|&m| model.clamp(m)).collect()
            }
            Structure::Linear { features } => {
                let phi = weighted_least_squares(features, raw, weights)?;
                features.iter().map(|f| model.clamp(dot(f, &phi))).collect()
            }
            Structure::Dueling { items } => {
                let n = *items;
                let mut out = vec![0.5; n * n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let v = 0.5 * (raw[i * n + j] + 1.0 - raw[j * n + i]);
                            out[i * n + j] = model.clamp(v);
                        }
                    }
                }
                out
            }
        };
        Ok(ParameterVector::from_raw(out))
    }

    /// Check that `theta` belongs to the structure's parameter set, up to `tol`.
    ///
    /// Returns a human-readable reason on failure.
    pub fn check_parameter(&self, theta: &[f64], tol: f64) -> std::result::Result<(), String> {
        if theta.len() != self.arms() {
            return Err(format!("expected {} means, got {}", self.arms(), theta.len()));
        }
        match self {
            Structure::Classical { .. } | Structure::Linear { .. } => Ok(()),
            Structure::Lipschitz { distances } => {
                for x in 0..theta.len() {
                    for y in 0..theta.len() {
                        if (theta[x] - theta[y]).abs() > distances[x][y] + tol {
                            return Err(format!("|θ({x}) − θ({y})| exceeds ℓ({x},{y})"));
                        }
                    }
                }
                Ok(())
            }
            Structure::Unimodal { .. } => {
                if is_strictly_unimodal(theta) {
                    Ok(())
                } else {
                    Err("θ is not strictly unimodal".into())
                }
            }
            Structure::Dueling { items } => {
                let n = *items;
                for i in 0..n {
                    if (theta[i * n + i] - 0.5).abs() > tol {
                        return Err(format!("θ({i},{i}) is not 1/2"));
                    }
                    for j in 0..n {
                        if (theta[i * n + j] + theta[j * n + i] - 1.0).abs() > tol {
                            return Err(format!("θ({i},{j}) + θ({j},{i}) is not 1"));
                        }
                    }
                }
                if condorcet_winner(n, theta).is_none() {
                    return Err("no Condorcet winner".into());
                }
                Ok(())
            }
        }
    }
}

pub fn reward(structure: &Structure, theta: &[f64], x: usize) -> Result<f64> {
    structure.reward(theta, x)
}

pub fn optimal_arm(structure: &Structure, theta: &[f64]) -> Result<OptimalArm> {
    structure.optimal_arm(theta)
}

pub fn gap_vector(structure: &Structure, theta: &[f64]) -> Result<GapVector> {
    structure.gap_vector(theta)
}

pub fn project_to_structure(
    structure: &Structure,
    model: ObservationModel,
    raw: &[f64],
    weights: &[f64],
) -> Result<ParameterVector> {
    structure.project(model, raw, weights)
}

fn gaps_from_rewards(rewards: &[f64], winner_fallback: bool) -> GapVector {
    let (arm, tie) = argmax_with_tie(rewards);
    let best = rewards[arm];
    GapVector {
        gaps: rewards.iter().map(|&r| (best - r).max(0.0)).collect(),
        optimal: OptimalArm {
            arm,
            tie,
            winner_fallback,
        },
    }
}

/// Lowest-index argmax and whether another entry ties with it.
pub fn argmax_with_tie(values: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let top = values[best];
    let tol = TIE_TOLERANCE * top.abs().max(1.0);
    let tie = values
        .iter()
        .enumerate()
        .any(|(i, &v)| i != best && (top - v).abs() <= tol);
    (best, tie)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Item beating every other item with probability strictly above 1/2.
pub fn condorcet_winner(items: usize, theta: &[f64]) -> Option<usize> {
    (0..items).find(|&i| (0..items).all(|j| j == i || theta[i * items + j] > 0.5))
}

/// Condorcet winner if any, otherwise the item with most pairwise wins.
pub fn dueling_winner(items: usize, theta: &[f64]) -> (usize, bool) {
    if let Some(w) = condorcet_winner(items, theta) {
        return (w, false);
    }
    let wins = |i: usize| (0..items).filter(|&j| j != i && theta[i * items + j] > 0.5).count();
    let mut best = 0;
    for i in 1..items {
        if wins(i) > wins(best) {
            best = i;
        }
    }
    (best, true)
}

/// `μ((i, j)) = −½(θ(w, i) + θ(w, j) − 1)`: zero at `(w, w)`, nonpositive elsewhere.
fn dueling_rewards(items: usize, theta: &[f64], winner: usize) -> Vec<f64> {
    let mut out = vec![0.0; items * items];
    for i in 0..items {
        for j in 0..items {
            out[i * items + j] =
                -0.5 * (theta[winner * items + i] + theta[winner * items + j] - 1.0);
        }
    }
    out
}

pub fn is_strictly_unimodal(theta: &[f64]) -> bool {
    let peak = argmax_with_tie(theta).0;
    theta[..=peak].windows(2).all(|w| w[0] < w[1]) && theta[peak..].windows(2).all(|w| w[0] > w[1])
}

/// Eigen-decomposition based rank of `Σ w x xᵀ`; returns the Gram matrix too.
fn weighted_gram_rank(features: &[Vec<f64>], weights: &[f64]) -> (DMatrix<f64>, usize) {
    let d = features[0].len();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    for (f, &w) in features.iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        let v = DVector::from_column_slice(f);
        gram += w * &v * v.transpose();
    }
    let eig = SymmetricEigen::new(gram.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let rank = if top == 0.0 {
        0
    } else {
        eig.eigenvalues.iter().filter(|&&e| e > 1e-10 * top).count()
    };
    (gram, rank)
}

/// Weighted least-squares fit of `φ` from per-arm means.
pub fn weighted_least_squares(features: &[Vec<f64>], means: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let d = features[0].len();
    let (gram, rank) = weighted_gram_rank(features, weights);
    if rank < d {
        return Err(Error::RankDeficient { rank, dim: d });
    }
    let mut rhs = DVector::<f64>::zeros(d);
    for ((f, &m), &w) in features.iter().zip(means).zip(weights) {
        if w > 0.0 {
            rhs += w * m * DVector::from_column_slice(f);
        }
    }
    let chol = gram
        .cholesky()
        .ok_or(Error::RankDeficient { rank, dim: d })?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn duel3() -> (Structure, Vec<f64>) {
        // item 0 is the Condorcet winner
        let n = 3;
        let mut t = vec![0.5; 9];
        let mut set = |i: usize, j: usize, p: f64| {
            t[i * n + j] = p;
            t[j * n + i] = 1.0 - p;
        };
        set(0, 1, 0.6);
        set(0, 2, 0.7);
        set(1, 2, 0.55);
        (Structure::Dueling { items: 3 }, t)
    }

    #[test]
    fn classical_reward_is_identity() {
        let s = Structure::Classical { arms: 2 };
        assert_eq!(s.reward(&[0.2, 0.9], 1).unwrap(), 0.9);
    }

    #[test]
    fn dueling_rewards() {
        let (s, t) = duel3();
        assert_eq!(s.reward(&t, 0).unwrap(), 0.0);
        // arm (1,2): −½(0.6 + 0.7 − 1)
        assert_relative_eq!(s.reward(&t, 5).unwrap(), -0.15, epsilon = 1e-15);
        assert_relative_eq!(s.gap_vector(&t).unwrap().gaps[5], 0.15, epsilon = 1e-15);
        let r = s.rewards(&t).unwrap();
        assert!(r.iter().all(|&v| v <= 0.0));
        assert_eq!(s.optimal_arm(&t).unwrap().arm, 0);
    }

    #[test]
    fn dueling_optimal_arm_is_winner_diagonal() {
        let n = 3;
        let mut t = vec![0.5; 9];
        for (i, j, p) in [(1, 0, 0.8), (1, 2, 0.6), (0, 2, 0.4)] {
            t[i * n + j] = p;
            t[j * n + i] = 1.0 - p;
        }
        let s = Structure::Dueling { items: 3 };
        let opt = s.optimal_arm(&t).unwrap();
        assert_eq!(opt.arm, 4);
        assert_eq!(s.dueling_pair(opt.arm), Some((1, 1)));
        assert!(!opt.winner_fallback);
    }

    #[test]
    fn dueling_without_condorcet_winner() {
        // rock-paper-scissors
        let n = 3;
        let mut t = vec![0.5; 9];
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            t[i * n + j] = 0.7;
            t[j * n + i] = 0.3;
        }
        let s = Structure::Dueling { items: 3 };
        assert_eq!(s.reward(&t, 0), Err(Error::NoCondorcetWinner));
        let opt = s.optimal_arm(&t).unwrap();
        assert!(opt.winner_fallback);
    }

    #[test]
    fn optimal_arm_and_ties() {
        let s = Structure::Classical { arms: 3 };
        let o = s.optimal_arm(&[0.1, 0.5, 0.3]).unwrap();
        assert_eq!((o.arm, o.tie), (1, false));
        let s2 = Structure::Classical { arms: 2 };
        let o = s2.optimal_arm(&[0.5, 0.5]).unwrap();
        assert_eq!((o.arm, o.tie), (0, true));
    }

    #[test]
    fn gaps() {
        let s = Structure::Classical { arms: 2 };
        let g = s.gap_vector(&[0.5, 0.6]).unwrap();
        assert_relative_eq!(g.gaps[0], 0.1, epsilon = 1e-15);
        assert_eq!(g.gaps[1], 0.0);
        let s4 = Structure::Classical { arms: 4 };
        let g = s4.gap_vector(&[0.3; 4]).unwrap();
        assert!(g.gaps.iter().all(|&x| x == 0.0));
        assert!(g.optimal.tie);

        let lin = Structure::Linear {
            features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let theta = lin.linear_means(&[1.0, 0.5]).unwrap();
        assert_eq!(lin.gap_vector(&theta).unwrap().gaps, vec![0.0, 0.5]);
    }

    #[test]
    fn projections() {
        let b = ObservationModel::Bernoulli;
        let c = Structure::Classical { arms: 2 };
        assert_eq!(c.project(b, &[0.5, 0.7], &[1.0, 1.0]).unwrap().means(), &[0.5, 0.7]);
        assert_eq!(c.project(b, &[-0.1, 1.2], &[1.0, 1.0]).unwrap().means(), &[0.0, 1.0]);

        let lin = Structure::Linear {
            features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let p = lin
            .project(ObservationModel::Gaussian, &[1.0, 0.5], &[3.0, 3.0])
            .unwrap();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(p[1], 0.5, epsilon = 1e-14);

        assert!(matches!(
            lin.project(ObservationModel::Gaussian, &[1.0, 0.5], &[3.0, 0.0]),
            Err(Error::RankDeficient { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn dueling_projection_symmetrizes() {
        let s = Structure::Dueling { items: 2 };
        let p = s
            .project(ObservationModel::Bernoulli, &[0.9, 0.7, 0.4, 0.0], &[1.0; 4])
            .unwrap();
        for (a, b) in p.means().iter().zip([0.5, 0.65, 0.35, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        assert!(Structure::Lipschitz {
            distances: vec![vec![0.0, 1.0], vec![0.5, 0.0]]
        }
        .validate()
        .is_err());
        assert!(Structure::Lipschitz {
            distances: vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        }
        .validate()
        .is_ok());
        assert!(Structure::Linear {
            features: vec![vec![1.0, 0.0], vec![0.0]]
        }
        .validate()
        .is_err());
        assert!(Structure::Classical { arms: 1 }.validate().is_err());
        let lin = Structure::Linear {
            features: vec![vec![1.0, 1.0], vec![2.0, 2.0]],
        };
        assert_eq!(lin.feature_rank(), Some(1));
    }

    #[test]
    fn unimodality_scan() {
        assert!(is_strictly_unimodal(&[0.1, 0.2, 0.3, 0.2]));
        assert!(is_strictly_unimodal(&[0.1, 0.2, 0.3]));
        assert!(!is_strictly_unimodal(&[0.1, 0.3, 0.2, 0.25]));
        assert!(!is_strictly_unimodal(&[0.1, 0.1, 0.2]));
    }
}
