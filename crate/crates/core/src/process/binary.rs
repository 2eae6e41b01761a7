use rand::Rng;
use serde::{Deserialize, Serialize};

use super::markov::FiniteMarkovChain;
use super::pow_int;
use crate::error::ProcessError;

/// Symmetric two-state chain on `{-1, +1}` that keeps its sign with
/// probability `p`, started from the uniform law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinaryDef", into = "BinaryDef")]
pub struct BinaryChain {
    p: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BinaryDef {
    pub p: f64,
}

impl TryFrom<BinaryDef> for BinaryChain {
    type Error = ProcessError;
    fn try_from(def: BinaryDef) -> Result<Self, Self::Error> {
        BinaryChain::new(def.p)
    }
}

impl From<BinaryChain> for BinaryDef {
    fn from(chain: BinaryChain) -> Self {
        BinaryDef { p: chain.p }
    }
}

impl BinaryChain {
    pub fn new(p: f64) -> Result<Self, ProcessError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ProcessError::Invalid(format!(
                "stay probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(BinaryChain { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// One-step correlation `2p - 1`.
    pub fn beta(&self) -> f64 {
        2.0 * self.p - 1.0
    }

    pub fn to_chain(&self) -> FiniteMarkovChain {
        let p = self.p;
        FiniteMarkovChain::new(
            vec![-1.0, 1.0],
            vec![vec![p, 1.0 - p], vec![1.0 - p, p]],
            Some(vec![0.5, 0.5]),
        )
        .expect("binary chain is always valid")
    }

    pub fn closed_form_moment(&self, indices: &[u64]) -> f64 {
        binary_closed_form_moment(self.p, indices)
    }

    pub fn sample<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(length);
        let mut z = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
        for _ in 0..length {
            out.push(z);
            if rng.random::<f64>() >= self.p {
                z = -z;
            }
        }
        out
    }
}

/// `beta^(n_1 + n_3 + ... + n_{k-1})` for even `k`, zero for odd `k`, where
/// `n_j = i_{j+1} - i_j` and `beta = 2p - 1`.
///
/// Indices are expected in ascending order.
pub fn binary_closed_form_moment(p: f64, indices: &[u64]) -> f64 {
    if indices.len() % 2 == 1 {
        return 0.0;
    }
    let exponent: u64 = indices.chunks_exact(2).map(|w| w[1] - w[0]).sum();
    pow_int(2.0 * p - 1.0, exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gap() {
        assert!((binary_closed_form_moment(0.7, &[1, 2]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn odd_order_vanishes() {
        assert_eq!(binary_closed_form_moment(0.3, &[1, 2, 3]), 0.0);
        assert_eq!(binary_closed_form_moment(0.9, &[4]), 0.0);
    }

    #[test]
    fn coincident_pairs() {
        assert_eq!(binary_closed_form_moment(0.7, &[1, 1, 5, 5]), 1.0);
        assert_eq!(binary_closed_form_moment(0.7, &[]), 1.0);
    }

    #[test]
    fn anti_persistent_chain_has_negative_beta() {
        let chain = BinaryChain::new(0.2).unwrap();
        assert!((chain.beta() + 0.6).abs() < 1e-15);
        assert!((chain.closed_form_moment(&[0, 3]) + 0.216).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_p() {
        assert!(BinaryChain::new(0.0).is_err());
        assert!(BinaryChain::new(1.0).is_err());
        assert!(BinaryChain::new(f64::NAN).is_err());
    }
}
