//! Observation models, KL divergences and per-arm parameter vectors.
//!
//! Two families are supported: Bernoulli observations with means in `[0, 1]`
//! and Gaussian observations with unit variance and arbitrary real means.

use std::ops::Deref;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Distribution family `ν(·)` mapping a mean to an observation law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationModel {
    /// `Ber(mean)`, mean in `[0, 1]`.
    #[serde(alias = "bernoulli_means")]
    Bernoulli,
    /// `N(mean, 1)`.
    #[serde(alias = "gaussian_unit_variance")]
    Gaussian,
}

impl ObservationModel {
    pub fn name(self) -> &'static str {
        match self {
            ObservationModel::Bernoulli => "bernoulli",
            ObservationModel::Gaussian => "gaussian",
        }
    }

    pub fn is_valid_mean(self, mean: f64) -> bool {
        match self {
            ObservationModel::Bernoulli => (0.0..=1.0).contains(&mean),
            ObservationModel::Gaussian => mean.is_finite(),
        }
    }

    pub fn check_mean(self, mean: f64) -> Result<()> {
        if self.is_valid_mean(mean) {
            Ok(())
        } else {
            Err(Error::InvalidMean {
                model: self.name(),
                value: mean,
            })
        }
    }

    /// Clamp a raw empirical mean into the model's domain.
    pub fn clamp(self, mean: f64) -> f64 {
        match self {
            ObservationModel::Bernoulli => mean.clamp(0.0, 1.0),
            ObservationModel::Gaussian => mean,
        }
    }

    /// KL divergence `d(p, q)` between `ν(p)` and `ν(q)`.
    ///
    /// Bernoulli uses `0·ln 0 = 0` and returns `+∞` when `q ∈ {0, 1}` and
    /// `p != q`.
    pub fn kl(self, p: f64, q: f64) -> Result<f64> {
        self.check_mean(p)?;
        self.check_mean(q)?;
        Ok(self.kl_unchecked(p, q))
    }

    /// Same as [`kl`](Self::kl) without domain checks; callers guarantee valid means.
    pub fn kl_unchecked(self, p: f64, q: f64) -> f64 {
        match self {
            ObservationModel::Gaussian => 0.5 * (p - q) * (p - q),
            ObservationModel::Bernoulli => bernoulli_kl(p, q),
        }
    }

    /// Draw one observation with the given mean.
    pub fn sample(self, mean: f64, rng: &mut RngStream) -> Result<f64> {
        self.check_mean(mean)?;
        Ok(match self {
            ObservationModel::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            ObservationModel::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                mean + z
            }
        })
    }
}

fn bernoulli_kl(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if q <= 0.0 || q >= 1.0 {
        return f64::INFINITY;
    }
    // ln1p keeps precision when p and q are close.
    let head = if p == 0.0 {
        0.0
    } else {
        p * ((p - q) / q).ln_1p()
    };
    let tail = if p == 1.0 {
        0.0
    } else {
        (1.0 - p) * ((q - p) / (1.0 - q)).ln_1p()
    };
    (head + tail).max(0.0)
}

/// Free-function form of [`ObservationModel::kl`].
pub fn kl_div(model: ObservationModel, p: f64, q: f64) -> Result<f64> {
    model.kl(p, q)
}

/// Free-function form of [`ObservationModel::sample`].
pub fn sample_observation(model: ObservationModel, mean: f64, rng: &mut RngStream) -> Result<f64> {
    model.sample(mean, rng)
}

/// Arm-indexed vector of observation means.
///
/// Used both for the true instance parameter and for empirical estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    /// Validated constructor: at least two arms, all entries valid for `model`.
    pub fn new(means: Vec<f64>, model: ObservationModel) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms(means.len()));
        }
        for &m in &means {
            model.check_mean(m)?;
        }
        Ok(ParameterVector(means))
    }

    /// Unvalidated constructor for estimates that may sit outside the model
    /// domain (for example raw Gaussian least-squares predictions).
    pub fn from_raw(means: Vec<f64>) -> Self {
        ParameterVector(means)
    }

    pub fn means(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn arms(&self) -> usize {
        self.0.len()
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        ParameterVector(v)
    }
}
