//! Stationary stochastic processes, path sampling and exact mixed moments.

mod binary;
mod decay;
mod gaussian;
mod gibbs;
mod markov;

pub use binary::{binary_closed_form_moment, BinaryChain};
pub use decay::{fit_decay_constants, DecayFit, OrderFit};
pub use gaussian::{gaussian_isserlis_moment, GaussianMarkov};
pub use gibbs::{gibbs_to_chain, GibbsPotential, PotentialTerm};
pub use markov::{FiniteMarkovChain, MarkovChainDef};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProcessError;

/// A process generator, serialized with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessSpec {
    Markov(FiniteMarkovChain),
    Binary(BinaryChain),
    Gaussian(GaussianMarkov),
    Gibbs(GibbsPotential),
}

impl ProcessSpec {
    pub fn label(&self) -> String {
        match self {
            ProcessSpec::Markov(c) => format!("markov({} states)", c.len()),
            ProcessSpec::Binary(b) => format!("binary(p={})", b.p()),
            ProcessSpec::Gaussian(g) => format!("gaussian(beta={})", g.beta()),
            ProcessSpec::Gibbs(g) => format!(
                "gibbs({} symbols, range {})",
                g.state_values().len(),
                g.range()
            ),
        }
    }

    /// The finite chain behind this spec, if it has one.
    pub fn chain(&self) -> Result<FiniteMarkovChain, ProcessError> {
        match self {
            ProcessSpec::Markov(c) => Ok(c.clone()),
            ProcessSpec::Binary(b) => Ok(b.to_chain()),
            ProcessSpec::Gibbs(g) => g.to_chain(),
            ProcessSpec::Gaussian(_) => Err(ProcessError::NoOracle),
        }
    }

    /// An exact moment oracle, built once.
    pub fn oracle(&self) -> Result<Box<dyn MomentOracle>, ProcessError> {
        Ok(match self {
            ProcessSpec::Markov(c) => Box::new(c.clone()),
            ProcessSpec::Binary(b) => Box::new(*b),
            ProcessSpec::Gaussian(g) => Box::new(*g),
            ProcessSpec::Gibbs(g) => Box::new(g.to_chain()?),
        })
    }

    /// Whether odd moments are guaranteed to vanish by spin-flip symmetry.
    pub fn is_flip_symmetric(&self) -> bool {
        match self {
            ProcessSpec::Markov(c) => c.is_flip_symmetric(),
            ProcessSpec::Binary(_) | ProcessSpec::Gaussian(_) | ProcessSpec::Gibbs(_) => true,
        }
    }
}

/// Exact expectations `E[Z_{i_1} ... Z_{i_k}]` for ascending indices.
pub trait MomentOracle: Send + Sync {
    fn mixed_moment(&self, indices: &[u64]) -> Result<f64, ProcessError>;
}

fn check_sorted(indices: &[u64]) -> Result<(), ProcessError> {
    if indices.windows(2).any(|w| w[0] > w[1]) {
        Err(ProcessError::UnsortedIndices)
    } else {
        Ok(())
    }
}

impl MomentOracle for FiniteMarkovChain {
    fn mixed_moment(&self, indices: &[u64]) -> Result<f64, ProcessError> {
        self.exact_mixed_moment(indices)
    }
}

impl MomentOracle for BinaryChain {
    fn mixed_moment(&self, indices: &[u64]) -> Result<f64, ProcessError> {
        check_sorted(indices)?;
        Ok(self.closed_form_moment(indices))
    }
}

impl MomentOracle for GaussianMarkov {
    fn mixed_moment(&self, indices: &[u64]) -> Result<f64, ProcessError> {
        check_sorted(indices)?;
        Ok(self.isserlis_moment(indices))
    }
}

/// A realized finite stretch `Z_1 .. Z_L` of a process.
#[derive(Clone, Debug)]
pub struct Path<'a> {
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec: &'a ProcessSpec,
}

impl Path<'_> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Samples `length` consecutive values from the stationary process.
/// Deterministic in `(spec, length, seed)`.
pub fn sample_path(spec: &ProcessSpec, length: usize, seed: u64) -> Result<Path<'_>, ProcessError> {
    if length == 0 {
        return Err(ProcessError::EmptyPath);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = match spec {
        ProcessSpec::Markov(c) => c.sample(length, &mut rng),
        ProcessSpec::Binary(b) => b.sample(length, &mut rng),
        ProcessSpec::Gaussian(g) => g.sample(length, &mut rng),
        ProcessSpec::Gibbs(g) => g.to_chain()?.sample(length, &mut rng),
    };
    Ok(Path { values, seed, spec })
}

/// `base^exponent` by repeated squaring; exact for the sign of negative bases.
pub(crate) fn pow_int(base: f64, exponent: u64) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = exponent;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}
