//! Certifies the mixed-moment decay bounds for a finite chain on an
//! enumerated index family.
//!
//! Three families are enumerated for each even order `k` (indices start at 0
//! by stationarity and stay within the index budget):
//!
//! * moment decay: `|E[Z_{i_1}..Z_{i_k}]| <= C beta^(n_1 + n_3 + .. + n_{k-1})`
//! * correlation: `|E[Z_I Z_J] - E[Z_I] E[Z_J]| <= C beta^d`, `d = min |i - j|`
//! * squares: `|E[Z_{a_1}^2 .. Z_{a_m}^2] - 1| <= C beta^d'`, `d' = min gap`
//!
//! On a finite family every `beta > 0` admits some `C`, so a grid value of
//! beta is accepted only when the constant required by the tail exponents
//! `(B/2, B]` does not exceed the one required by `[1, B/2]`: the bound must
//! not deteriorate as indices spread out. `C` is then the maximal ratio over
//! all exponents, including 0.
//!
//! A finite window cannot tell slow decay from a non-zero limit, so the
//! limits are checked exactly: sending an odd gap `n_j` to infinity factors
//! the moment into two odd blocks, and their product must vanish.

use serde::Serialize;

use super::markov::FiniteMarkovChain;
use crate::error::ProcessError;

const ZERO_TOL: f64 = 1e-13;
const STABILITY_TOL: f64 = 1e-9;
const GRID: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Global envelope: the largest per-order beta.
    pub beta: f64,
    /// Constant valid for every enumerated family at `beta`.
    pub c: f64,
    pub per_order: Vec<OrderFit>,
    pub k_max: usize,
    pub index_budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderFit {
    pub k: usize,
    pub beta: f64,
    pub c_moment: f64,
    pub c_correlation: Option<f64>,
    pub c_squares: Option<f64>,
}

/// Worst-case `|E|` per exponent.
#[derive(Clone, Debug)]
struct Profile {
    worst: Vec<f64>,
}

impl Profile {
    fn new(budget: u64) -> Self {
        Profile {
            worst: vec![0.0; budget as usize + 1],
        }
    }

    fn record(&mut self, exponent: u64, value: f64) {
        let e = exponent as usize;
        self.worst[e] = self.worst[e].max(value.abs());
    }

    fn constant(worst: &[f64], offset: usize, beta: f64) -> f64 {
        worst
            .iter()
            .enumerate()
            .map(|(i, &v)| (i + offset, v))
            .filter(|&(_, v)| v > ZERO_TOL)
            .map(|(s, v)| {
                if s == 0 {
                    v
                } else if beta == 0.0 {
                    f64::INFINITY
                } else {
                    v / beta.powi(s as i32)
                }
            })
            .fold(0.0, f64::max)
    }

    fn total(&self, beta: f64) -> f64 {
        Self::constant(&self.worst, 0, beta)
    }

    /// The constant at `beta` if the bound is stable in the exponent.
    fn certify(&self, beta: f64) -> Option<f64> {
        let mid = (self.worst.len() - 1) / 2;
        let window = Self::constant(&self.worst[1..=mid], 1, beta);
        let tail = Self::constant(&self.worst[mid + 1..], mid + 1, beta);
        let ok = tail.is_finite() && tail <= window * (1.0 + STABILITY_TOL) + ZERO_TOL;
        let all = self.total(beta);
        (ok && all.is_finite()).then_some(all)
    }
}

/// Dense moment evaluator with precomputed transition powers.
struct Engine {
    n: usize,
    rho: Vec<f64>,
    values: Vec<f64>,
    squares: Vec<f64>,
    powers: Vec<Vec<f64>>,
}

impl Engine {
    fn new(chain: &FiniteMarkovChain, budget: u64) -> Self {
        let n = chain.len();
        let p = chain.transition();
        let mut powers = Vec::with_capacity(budget as usize + 1);
        let mut current = nalgebra::DMatrix::<f64>::identity(n, n);
        for _ in 0..=budget {
            powers.push(
                (0..n * n)
                    .map(|idx| current[(idx / n, idx % n)])
                    .collect::<Vec<_>>(),
            );
            current = &current * p;
        }
        Engine {
            n,
            rho: chain.initial().iter().copied().collect(),
            values: chain.states().to_vec(),
            squares: chain.states().iter().map(|v| v * v).collect(),
            powers,
        }
    }

    fn moment(&self, indices: &[u64], weights: &[f64]) -> f64 {
        if indices.is_empty() {
            return 1.0;
        }
        let n = self.n;
        let mut v: Vec<f64> = self.rho.iter().zip(weights).map(|(r, w)| r * w).collect();
        let mut next = vec![0.0; n];
        for w in indices.windows(2) {
            let pw = &self.powers[(w[1] - w[0]) as usize];
            next.iter_mut().for_each(|x| *x = 0.0);
            for (s, &vs) in v.iter().enumerate() {
                if vs != 0.0 {
                    let row = &pw[s * n..(s + 1) * n];
                    for (x, &p) in next.iter_mut().zip(row) {
                        *x += vs * p;
                    }
                }
            }
            for ((x, &y), &wt) in v.iter_mut().zip(&next).zip(weights) {
                *x = y * wt;
            }
        }
        v.iter().sum()
    }
}

/// Visits every ascending tuple of `len` indices with first index 0 and last
/// index at most `budget`.
fn for_each_tuple(len: usize, budget: u64, f: &mut dyn FnMut(&[u64])) {
    fn rec(buf: &mut Vec<u64>, len: usize, budget: u64, f: &mut dyn FnMut(&[u64])) {
        if buf.len() == len {
            f(buf);
            return;
        }
        let start = *buf.last().unwrap();
        for next in start..=budget {
            buf.push(next);
            rec(buf, len, budget, f);
            buf.pop();
        }
    }
    if len == 0 {
        return;
    }
    let mut buf = vec![0u64];
    rec(&mut buf, len, budget, f);
}

fn moment_profile(engine: &Engine, k: usize, budget: u64) -> Profile {
    let mut prof = Profile::new(budget);
    for_each_tuple(k, budget, &mut |idx| {
        let exponent: u64 = idx.chunks_exact(2).map(|w| w[1] - w[0]).sum();
        prof.record(exponent, engine.moment(idx, &engine.values));
    });
    prof
}

fn correlation_profile(engine: &Engine, k: usize, budget: u64) -> Profile {
    let mut prof = Profile::new(budget);
    let total = 2 * k;
    // label masks with exactly k bits set, position 0 always in the first group
    let masks: Vec<u32> = (0u32..1 << total)
        .filter(|m| m.count_ones() as usize == k && m & 1 == 1)
        .collect();
    let mut first = Vec::with_capacity(k);
    let mut second = Vec::with_capacity(k);
    for_each_tuple(total, budget, &mut |joint| {
        let e_joint = engine.moment(joint, &engine.values);
        for &mask in &masks {
            first.clear();
            second.clear();
            let mut d = u64::MAX;
            for (pos, &idx) in joint.iter().enumerate() {
                if mask >> pos & 1 == 1 {
                    first.push(idx);
                } else {
                    second.push(idx);
                }
                if pos > 0 && (mask >> pos & 1) != (mask >> (pos - 1) & 1) {
                    d = d.min(idx - joint[pos - 1]);
                }
            }
            let cov = e_joint
                - engine.moment(&first, &engine.values) * engine.moment(&second, &engine.values);
            prof.record(d, cov);
        }
    });
    prof
}

fn squares_profile(engine: &Engine, m: usize, budget: u64) -> Profile {
    let mut prof = Profile::new(budget);
    for_each_tuple(m, budget, &mut |idx| {
        let d = idx.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
        prof.record(d, engine.moment(idx, &engine.squares) - 1.0);
    });
    prof
}

/// Fits `(C, beta)` for the three decay inequalities on every even order up
/// to `k_max`, enumerating indices in `0..=index_budget`.
///
/// The correlation family is enumerated for joint orders `2k <= max(4, k_max)`
/// to keep the pair enumeration tractable.
pub fn fit_decay_constants(
    chain: &FiniteMarkovChain,
    k_max: usize,
    index_budget: u64,
) -> Result<DecayFit, ProcessError> {
    if k_max < 2 || k_max % 2 == 1 {
        return Err(ProcessError::Invalid(format!(
            "k_max must be even and at least 2, got {k_max}"
        )));
    }
    if index_budget < 4 {
        return Err(ProcessError::Invalid("index budget must be at least 4".into()));
    }
    chain.mixing_time()?;
    let engine = Engine::new(chain, index_budget);
    // worst |E| over odd-size tuples, for the factorized limits
    let odd_worst: Vec<f64> = (0..k_max)
        .map(|m| {
            let mut w = 0.0f64;
            if m % 2 == 1 {
                for_each_tuple(m, index_budget, &mut |idx| {
                    w = w.max(engine.moment(idx, &engine.values).abs());
                });
            }
            w
        })
        .collect();
    let mut per_order = Vec::new();
    let mut families: Vec<Profile> = Vec::new();
    for k in (2..=k_max).step_by(2) {
        for j in (1..k).step_by(2) {
            let limit = odd_worst[j] * odd_worst[k - j];
            if limit > ZERO_TOL {
                return Err(ProcessError::DecayNotCertified(format!(
                    "order {k}: moments tend to {limit:.3e}, not 0, as n_{j} grows"
                )));
            }
        }
        let moment = moment_profile(&engine, k, index_budget);
        let correlation =
            (2 * k <= k_max.max(4)).then(|| correlation_profile(&engine, k, index_budget));
        let squares = (k >= 4).then(|| squares_profile(&engine, k / 2, index_budget));
        let fitted = (0..GRID).find_map(|g| {
            let beta = g as f64 / GRID as f64;
            let c_moment = moment.certify(beta)?;
            let c_correlation = match &correlation {
                Some(p) => Some(p.certify(beta)?),
                None => None,
            };
            let c_squares = match &squares {
                Some(p) => Some(p.certify(beta)?),
                None => None,
            };
            Some(OrderFit {
                k,
                beta,
                c_moment,
                c_correlation,
                c_squares,
            })
        });
        let fit = fitted.ok_or_else(|| {
            ProcessError::DecayNotCertified(format!(
                "order {k}: no beta < 1 on the grid keeps the bound stable up to index {index_budget}"
            ))
        })?;
        per_order.push(fit);
        families.push(moment);
        families.extend(correlation);
        families.extend(squares);
    }
    let beta = per_order.iter().map(|f| f.beta).fold(0.0, f64::max);
    let c = families
        .iter()
        .map(|p| p.total(beta))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        beta,
        c,
        per_order,
        k_max,
        index_budget,
    })
}
