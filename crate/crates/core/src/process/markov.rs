//! Stationary Markov chains on a finite subset of the real line.
//!
//! A chain is stored as its state values, a row-stochastic transition matrix
//! and an initial law which must be stationary. Mixed moments
//! `E[Z_{i_1} ... Z_{i_k}]` are computed exactly as
//! `rho^T D P^{n_1} D P^{n_2} ... D 1` with `D = diag(values)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProcessError;

const ROW_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
const VARIANCE_TOL: f64 = 1e-10;
const FLIP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkovChainDef", into = "MarkovChainDef")]
pub struct FiniteMarkovChain {
    states: Vec<f64>,
    transition: DMatrix<f64>,
    initial: DVector<f64>,
    /// Permutation of state indices implementing `s -> -s`, if one is known.
    flip: Option<Vec<usize>>,
}

/// Wire form of a chain. `initial` may be omitted, in which case the
/// stationary law of `transition` is used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovChainDef {
    pub states: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

impl TryFrom<MarkovChainDef> for FiniteMarkovChain {
    type Error = ProcessError;

    fn try_from(def: MarkovChainDef) -> Result<Self, Self::Error> {
        FiniteMarkovChain::new(def.states, def.transition, def.initial)
    }
}

impl From<FiniteMarkovChain> for MarkovChainDef {
    fn from(chain: FiniteMarkovChain) -> Self {
        let n = chain.states.len();
        MarkovChainDef {
            transition: (0..n)
                .map(|r| (0..n).map(|c| chain.transition[(r, c)]).collect())
                .collect(),
            initial: Some(chain.initial.iter().copied().collect()),
            states: chain.states,
        }
    }
}

impl FiniteMarkovChain {
    /// Builds a chain, computing the stationary law when `initial` is `None`.
    pub fn new(
        states: Vec<f64>,
        transition: Vec<Vec<f64>>,
        initial: Option<Vec<f64>>,
    ) -> Result<Self, ProcessError> {
        let p = validate_transition(&states, &transition)?;
        let rho = match initial {
            Some(rho) => DVector::from_vec(rho),
            None => stationary_distribution(&p)?,
        };
        Self::from_parts(states, p, rho)
    }

    /// Like [`FiniteMarkovChain::new`] but rescales the state values so that
    /// the stationary second moment is exactly one.
    pub fn with_unit_variance(
        states: Vec<f64>,
        transition: Vec<Vec<f64>>,
        initial: Option<Vec<f64>>,
    ) -> Result<Self, ProcessError> {
        let p = validate_transition(&states, &transition)?;
        let rho = match initial {
            Some(rho) => DVector::from_vec(rho),
            None => stationary_distribution(&p)?,
        };
        let second: f64 = states.iter().zip(rho.iter()).map(|(v, r)| r * v * v).sum();
        if !(second > 0.0) {
            return Err(ProcessError::NotUnitVariance(second));
        }
        let scale = second.sqrt().recip();
        let states = states.into_iter().map(|v| v * scale).collect();
        Self::from_parts(states, p, rho)
    }

    pub(crate) fn from_parts(
        states: Vec<f64>,
        transition: DMatrix<f64>,
        initial: DVector<f64>,
    ) -> Result<Self, ProcessError> {
        let n = states.len();
        if initial.len() != n {
            return Err(ProcessError::Invalid(format!(
                "initial law has {} entries for {} states",
                initial.len(),
                n
            )));
        }
        if let Some(i) = initial.iter().position(|&r| r < 0.0 || !r.is_finite()) {
            return Err(ProcessError::Invalid(format!(
                "initial law entry {i} is negative or not finite"
            )));
        }
        let total: f64 = initial.iter().sum();
        if (total - 1.0).abs() > ROW_TOL {
            return Err(ProcessError::InitialSum(total));
        }
        let drift = (initial.transpose() * &transition - initial.transpose()).amax();
        if drift > STATIONARY_TOL {
            return Err(ProcessError::NotStationary(drift));
        }
        let second: f64 = states
            .iter()
            .zip(initial.iter())
            .map(|(v, r)| r * v * v)
            .sum();
        if (second - 1.0).abs() > VARIANCE_TOL {
            return Err(ProcessError::NotUnitVariance(second));
        }
        let flip = value_flip(&states);
        Ok(FiniteMarkovChain {
            states,
            transition,
            initial,
            flip,
        })
    }

    /// Attaches an explicit flip permutation, needed when several states share
    /// a value (block chains built from Gibbs potentials).
    pub fn with_flip(mut self, flip: Vec<usize>) -> Result<Self, ProcessError> {
        let n = self.states.len();
        let mut seen = vec![false; n];
        for (s, &t) in flip.iter().enumerate() {
            if t >= n || seen[t] {
                return Err(ProcessError::Invalid("flip is not a permutation".into()));
            }
            seen[t] = true;
            if (self.states[t] + self.states[s]).abs() > FLIP_TOL * self.states[s].abs().max(1.0)
            {
                return Err(ProcessError::Invalid(format!(
                    "flip maps value {} to {}",
                    self.states[s], self.states[t]
                )));
            }
        }
        if flip.len() != n {
            return Err(ProcessError::Invalid("flip has the wrong length".into()));
        }
        self.flip = Some(flip);
        Ok(self)
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// True when the state set is closed under negation and both the
    /// stationary law and the kernel are invariant under that negation.
    /// Sufficient for all odd mixed moments to vanish.
    pub fn is_flip_symmetric(&self) -> bool {
        let Some(flip) = &self.flip else {
            return false;
        };
        let n = self.len();
        for s in 0..n {
            if (self.initial[flip[s]] - self.initial[s]).abs() > FLIP_TOL {
                return false;
            }
            for t in 0..n {
                if (self.transition[(flip[s], flip[t])] - self.transition[(s, t)]).abs() > FLIP_TOL
                {
                    return false;
                }
            }
        }
        true
    }

    /// `E[Z_{i_1} ... Z_{i_k}]` for ascending indices; the empty product is 1.
    pub fn exact_mixed_moment(&self, indices: &[u64]) -> Result<f64, ProcessError> {
        self.weighted_moment(indices, &self.states)
    }

    /// `E[Z_{i_1}^2 ... Z_{i_k}^2]` for ascending indices.
    pub fn exact_squared_moment(&self, indices: &[u64]) -> Result<f64, ProcessError> {
        let squares: Vec<f64> = self.states.iter().map(|v| v * v).collect();
        self.weighted_moment(indices, &squares)
    }

    fn weighted_moment(&self, indices: &[u64], weights: &[f64]) -> Result<f64, ProcessError> {
        if indices.windows(2).any(|w| w[0] > w[1]) {
            return Err(ProcessError::UnsortedIndices);
        }
        let Some((_, rest)) = indices.split_first() else {
            return Ok(1.0);
        };
        let mut v: DVector<f64> = self.initial.component_mul(&DVector::from_column_slice(weights));
        let mut prev = indices[0];
        for &i in rest {
            v = self.advance(v, i - prev);
            for (x, w) in v.iter_mut().zip(weights) {
                *x *= w;
            }
            prev = i;
        }
        Ok(v.sum())
    }

    /// Row vector times `P^steps`.
    pub(crate) fn advance(&self, v: DVector<f64>, steps: u64) -> DVector<f64> {
        if steps <= 64 {
            let mut v = v.transpose();
            for _ in 0..steps {
                v *= &self.transition;
            }
            v.transpose()
        } else {
            (v.transpose() * self.transition_power(steps)).transpose()
        }
    }

    pub(crate) fn transition_power(&self, steps: u64) -> DMatrix<f64> {
        let n = self.len();
        let mut result = DMatrix::identity(n, n);
        let mut base = self.transition.clone();
        let mut e = steps;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Checks ergodicity by repeated squaring: the chain mixes iff
    /// `max |P^m(s,t) - rho(t)|` drops below 1/2 for some `m = 2^j`.
    /// Returns the first such `m`.
    pub fn mixing_time(&self) -> Result<u64, ProcessError> {
        let n = self.len();
        let mut power = self.transition.clone();
        let mut m = 1u64;
        for _ in 0..62 {
            let mut dist = 0.0f64;
            for s in 0..n {
                for t in 0..n {
                    dist = dist.max((power[(s, t)] - self.initial[t]).abs());
                }
            }
            if dist < 0.5 {
                return Ok(m);
            }
            power = &power * &power;
            m <<= 1;
        }
        Err(ProcessError::NonErgodic)
    }

    pub fn sample<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<f64> {
        let n = self.len();
        let cumulative: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                let mut acc = 0.0;
                (0..n)
                    .map(|c| {
                        acc += self.transition[(r, c)];
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        let start: Vec<f64> = self
            .initial
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        let mut out = Vec::with_capacity(length);
        let mut state = pick(&start, rng.random());
        for _ in 0..length {
            out.push(self.states[state]);
            state = pick(&cumulative[state], rng.random());
        }
        out
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    let target = u * cumulative[cumulative.len() - 1];
    cumulative
        .iter()
        .position(|&c| target < c)
        .unwrap_or(cumulative.len() - 1)
}

fn validate_transition(
    states: &[f64],
    transition: &[Vec<f64>],
) -> Result<DMatrix<f64>, ProcessError> {
    let n = states.len();
    if n == 0 {
        return Err(ProcessError::Invalid("empty state space".into()));
    }
    if states.iter().any(|v| !v.is_finite()) {
        return Err(ProcessError::Invalid("state values must be finite".into()));
    }
    if transition.len() != n || transition.iter().any(|row| row.len() != n) {
        return Err(ProcessError::Invalid(format!(
            "transition matrix must be {n}x{n}"
        )));
    }
    for (r, row) in transition.iter().enumerate() {
        if let Some(c) = row.iter().position(|&x| !(x >= 0.0)) {
            return Err(ProcessError::NegativeEntry { row: r, col: c });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_TOL {
            return Err(ProcessError::RowSum { row: r, sum });
        }
    }
    Ok(DMatrix::from_fn(n, n, |r, c| transition[r][c]))
}

/// Solves `rho (P - I) = 0`, `sum rho = 1` directly.
pub(crate) fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>, ProcessError> {
    let n = p.nrows();
    let mut system = (p - DMatrix::identity(n, n)).transpose();
    for c in 0..n {
        system[(n - 1, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = system.lu();
    let mut rho = lu.solve(&rhs).ok_or(ProcessError::NoStationary)?;
    if rho.iter().any(|r| !r.is_finite() || *r < -1e-9) {
        return Err(ProcessError::NoStationary);
    }
    rho.iter_mut().for_each(|r| *r = r.max(0.0));
    let total = rho.sum();
    rho /= total;
    Ok(rho)
}

fn value_flip(states: &[f64]) -> Option<Vec<usize>> {
    let mut flip = Vec::with_capacity(states.len());
    for &v in states {
        let matches: Vec<usize> = states
            .iter()
            .enumerate()
            .filter(|(_, &w)| (w + v).abs() <= FLIP_TOL * v.abs().max(1.0))
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [only] => flip.push(*only),
            _ => return None,
        }
    }
    Some(flip)
}
