//! Finite-range, shift-invariant Gibbs potentials on a finite alphabet, and
//! their exact reduction to a stationary Markov chain on blocks of `range`
//! consecutive sites via the transfer matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::markov::{stationary_distribution, FiniteMarkovChain};
use crate::error::ProcessError;

const SYMMETRY_TOL: f64 = 1e-12;

/// One interaction term `phi_B` for a shape `B` (ascending offsets starting
/// at 0). `table` is indexed by the configuration on `B`, first offset most
/// significant: `sum_j c_j * |S|^(|B|-1-j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub shape: Vec<usize>,
    pub table: Vec<f64>,
}

impl PotentialTerm {
    pub fn oscillation(&self) -> f64 {
        let max = self.table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.table.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GibbsDef", into = "GibbsDef")]
pub struct GibbsPotential {
    state_values: Vec<f64>,
    range: usize,
    terms: Vec<PotentialTerm>,
    dobrushin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GibbsDef {
    pub state_values: Vec<f64>,
    pub range: usize,
    #[serde(default)]
    pub terms: Vec<PotentialTerm>,
}

impl TryFrom<GibbsDef> for GibbsPotential {
    type Error = ProcessError;
    fn try_from(def: GibbsDef) -> Result<Self, Self::Error> {
        GibbsPotential::new(def.state_values, def.range, def.terms)
    }
}

impl From<GibbsPotential> for GibbsDef {
    fn from(g: GibbsPotential) -> Self {
        GibbsDef {
            state_values: g.state_values,
            range: g.range,
            terms: g.terms,
        }
    }
}

impl GibbsPotential {
    pub fn new(
        state_values: Vec<f64>,
        range: usize,
        terms: Vec<PotentialTerm>,
    ) -> Result<Self, ProcessError> {
        let q = state_values.len();
        if q == 0 {
            return Err(ProcessError::Invalid("empty alphabet".into()));
        }
        if range == 0 {
            return Err(ProcessError::Invalid("range must be at least 1".into()));
        }
        for term in &terms {
            let shape = &term.shape;
            if shape.first() != Some(&0) || shape.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ProcessError::Invalid(format!(
                    "shape {shape:?} must be strictly ascending and start at 0"
                )));
            }
            if *shape.last().unwrap() > range {
                return Err(ProcessError::Invalid(format!(
                    "shape {shape:?} exceeds range {range}"
                )));
            }
            if term.table.len() != q.pow(shape.len() as u32) {
                return Err(ProcessError::Invalid(format!(
                    "table for shape {shape:?} needs {} entries, got {}",
                    q.pow(shape.len() as u32),
                    term.table.len()
                )));
            }
            if term.table.iter().any(|x| !x.is_finite()) {
                return Err(ProcessError::Invalid("potential values must be finite".into()));
            }
        }
        let flip = value_flip(&state_values).ok_or(ProcessError::NotFlipSymmetric)?;
        for term in &terms {
            let m = term.shape.len();
            for idx in 0..term.table.len() {
                let flipped = flip_index(idx, m, q, &flip);
                if (term.table[idx] - term.table[flipped]).abs() > SYMMETRY_TOL {
                    return Err(ProcessError::NotFlipSymmetric);
                }
            }
        }
        // A shape with |B| sites has |B| translates containing the origin.
        let dobrushin: f64 = terms
            .iter()
            .map(|t| {
                let m = t.shape.len() as f64;
                m * (m - 1.0) * t.oscillation()
            })
            .sum();
        if !(dobrushin < 2.0) {
            return Err(ProcessError::Dobrushin(dobrushin));
        }
        Ok(GibbsPotential {
            state_values,
            range,
            terms,
            dobrushin,
        })
    }

    /// Nearest-neighbour Ising potential on `{-1, +1}`: `phi_{0,1}(s,t) = -J s t`.
    pub fn ising(coupling: f64) -> Result<Self, ProcessError> {
        let j = coupling;
        Self::new(
            vec![-1.0, 1.0],
            1,
            vec![PotentialTerm {
                shape: vec![0, 1],
                table: vec![-j, j, j, -j],
            }],
        )
    }

    pub fn state_values(&self) -> &[f64] {
        &self.state_values
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    /// `sum over A containing 0 of (|A| - 1) osc(phi_A)`.
    pub fn dobrushin_sum(&self) -> f64 {
        self.dobrushin
    }

    /// Energy of the window `w_0 .. w_range` from every term translate whose
    /// last site is `w_range`.
    fn window_energy(&self, window: &[usize]) -> f64 {
        let q = self.state_values.len();
        let r = self.range;
        self.terms
            .iter()
            .map(|term| {
                let anchor = r - term.shape.last().unwrap();
                let idx = term
                    .shape
                    .iter()
                    .fold(0usize, |acc, &off| acc * q + window[anchor + off]);
                term.table[idx]
            })
            .sum()
    }

    /// Transfer matrix on block states `(w_0, .., w_{range-1})`.
    pub fn transfer_matrix(&self) -> DMatrix<f64> {
        let q = self.state_values.len();
        let r = self.range;
        let blocks = q.pow(r as u32);
        let tail = q.pow(r as u32 - 1);
        let mut t = DMatrix::zeros(blocks, blocks);
        let mut window = vec![0usize; r + 1];
        for a in 0..blocks {
            decode(a, q, &mut window[..r]);
            for next in 0..q {
                window[r] = next;
                let b = (a % tail) * q + next;
                t[(a, b)] = (-self.window_energy(&window)).exp();
            }
        }
        t
    }

    /// Induced stationary chain whose value reads the newest site of the
    /// block, rescaled so that `E[Z^2] = 1`.
    pub fn to_chain(&self) -> Result<FiniteMarkovChain, ProcessError> {
        let t = self.transfer_matrix();
        if !is_primitive(&t) {
            return Err(ProcessError::NonPrimitive);
        }
        let (lambda, v) = perron_right(&t)?;
        let n = t.nrows();
        let mut p = DMatrix::from_fn(n, n, |a, b| t[(a, b)] * v[b] / (lambda * v[a]));
        for a in 0..n {
            let s: f64 = p.row(a).sum();
            for b in 0..n {
                p[(a, b)] /= s;
            }
        }
        let rho = stationary_distribution(&p)?;
        let q = self.state_values.len();
        let raw: Vec<f64> = (0..n).map(|a| self.state_values[a % q]).collect();
        let second: f64 = raw.iter().zip(rho.iter()).map(|(x, r)| r * x * x).sum();
        if !(second > 0.0) {
            return Err(ProcessError::NotUnitVariance(second));
        }
        let scale = second.sqrt().recip();
        let values = raw.into_iter().map(|x| x * scale).collect();
        let flip = value_flip(&self.state_values).expect("checked at construction");
        let block_flip = (0..n)
            .map(|a| flip_index(a, self.range, q, &flip))
            .collect();
        FiniteMarkovChain::from_parts(values, p, rho)?.with_flip(block_flip)
    }
}

/// Reduces a Gibbs potential to its exact stationary Markov chain.
pub fn gibbs_to_chain(potential: &GibbsPotential) -> Result<FiniteMarkovChain, ProcessError> {
    potential.to_chain()
}

fn decode(mut idx: usize, q: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = idx % q;
        idx /= q;
    }
}

fn flip_index(idx: usize, len: usize, q: usize, flip: &[usize]) -> usize {
    let mut digits = vec![0usize; len];
    decode(idx, q, &mut digits);
    digits.iter().fold(0, |acc, &d| acc * q + flip[d])
}

fn value_flip(values: &[f64]) -> Option<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            let hits: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, &w)| (w + v).abs() <= SYMMETRY_TOL * v.abs().max(1.0))
                .map(|(i, _)| i)
                .collect();
            (hits.len() == 1).then(|| hits[0])
        })
        .collect()
}

/// Primitive iff some power is strictly positive; by Wielandt's bound the
/// exponent `(n-1)^2 + 1` suffices, so square until that is exceeded.
fn is_primitive(t: &DMatrix<f64>) -> bool {
    let n = t.nrows();
    let mut reach: Vec<bool> = t.iter().map(|&x| x > 0.0).collect();
    let bound = (n - 1) * (n - 1) + 1;
    let mut power = 1usize;
    while power < bound {
        let mut next = vec![false; n * n];
        // column-major, matching nalgebra's storage
        for c in 0..n {
            for r in 0..n {
                next[c * n + r] = (0..n).any(|k| reach[k * n + r] && reach[c * n + k]);
            }
        }
        reach = next;
        power *= 2;
    }
    reach.iter().all(|&x| x)
}

fn perron_right(t: &DMatrix<f64>) -> Result<(f64, nalgebra::DVector<f64>), ProcessError> {
    let n = t.nrows();
    // Normalized repeated squaring converges to the rank-one Perron projector.
    let mut m = t / t.max();
    for _ in 0..64 {
        let sq = &m * &m;
        let scale = sq.max();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(ProcessError::NonPrimitive);
        }
        m = sq / scale;
    }
    let mut v = &m * nalgebra::DVector::from_element(n, 1.0);
    v /= v.max();
    let mut lambda = 0.0;
    for _ in 0..50 {
        let w = t * &v;
        let wmax = w.max();
        lambda = wmax / v.max();
        v = w / wmax;
    }
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(ProcessError::NonPrimitive);
    }
    Ok((lambda, v))
}
