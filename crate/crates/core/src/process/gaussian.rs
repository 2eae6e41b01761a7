use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::pow_int;
use crate::error::ProcessError;

/// Stationary zero-mean unit-variance Gaussian Markov process with
/// `Cov(Z_i, Z_j) = beta^|i-j|`, realized as an AR(1) recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianDef", into = "GaussianDef")]
pub struct GaussianMarkov {
    beta: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussianDef {
    pub beta: f64,
}

impl TryFrom<GaussianDef> for GaussianMarkov {
    type Error = ProcessError;
    fn try_from(def: GaussianDef) -> Result<Self, Self::Error> {
        GaussianMarkov::new(def.beta)
    }
}

impl From<GaussianMarkov> for GaussianDef {
    fn from(g: GaussianMarkov) -> Self {
        GaussianDef { beta: g.beta }
    }
}

impl GaussianMarkov {
    pub fn new(beta: f64) -> Result<Self, ProcessError> {
        if !(beta > -1.0 && beta < 1.0) {
            return Err(ProcessError::Invalid(format!(
                "correlation must lie in (-1, 1), got {beta}"
            )));
        }
        Ok(GaussianMarkov { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn covariance(&self, i: u64, j: u64) -> f64 {
        pow_int(self.beta, i.abs_diff(j))
    }

    pub fn isserlis_moment(&self, indices: &[u64]) -> f64 {
        gaussian_isserlis_moment(self.beta, indices)
    }

    /// `Z_1 ~ N(0,1)`, `Z_{n+1} = beta Z_n + sqrt(1 - beta^2) xi_n`.
    pub fn sample<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<f64> {
        let innovation = (1.0 - self.beta * self.beta).sqrt();
        let mut out = Vec::with_capacity(length);
        let mut z: f64 = rng.sample(StandardNormal);
        for _ in 0..length {
            out.push(z);
            let xi: f64 = rng.sample(StandardNormal);
            z = self.beta * z + innovation * xi;
        }
        out
    }
}

/// Sum over all perfect pairings of the product of pairwise covariances
/// `beta^|i-j|`. Zero for an odd number of indices.
pub fn gaussian_isserlis_moment(beta: f64, indices: &[u64]) -> f64 {
    if indices.len() % 2 == 1 {
        return 0.0;
    }
    let mut work = indices.to_vec();
    pairings(beta, &mut work)
}

fn pairings(beta: f64, items: &mut Vec<u64>) -> f64 {
    if items.is_empty() {
        return 1.0;
    }
    let first = items.remove(0);
    let mut total = 0.0;
    for pos in 0..items.len() {
        let partner = items.remove(pos);
        let weight = pow_int(beta, first.abs_diff(partner));
        if weight != 0.0 {
            total += weight * pairings(beta, items);
        }
        items.insert(pos, partner);
    }
    items.insert(0, first);
    total
}
