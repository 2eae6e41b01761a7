//! Independent oracles and assumption checkers.

mod report;
mod trace;

pub use report::{Check, Subject, VerificationReport};
pub use trace::{expected_trace_moment_bruteforce, KahanSum, PATH_BUDGET};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::VerifyError;
use crate::filling::{FillingKind, FillingMap};
use crate::process::{fit_decay_constants, sample_path, FiniteMarkovChain, MomentOracle, ProcessSpec};
use crate::seed::seed_for_trial;
use crate::spectra::{build_matrix, eigenvalues, spectral_moments};

const EXACT_TOL: f64 = 1e-12;
const VARIANCE_TOL: f64 = 1e-10;

/// Largest fiber size the bounded-fiber check accepts.
pub const FIBER_BOUND: usize = 4;
/// Largest `N` the exhaustive fiber scan accepts.
pub const MAX_FIBER_N: usize = 400;

/// Unit variance, odd-moment nullity and the three decay bounds on the
/// enumerated index family `0..=budget`.
pub fn check_process_assumption(
    chain: &FiniteMarkovChain,
    k_max: usize,
    budget: u64,
) -> VerificationReport {
    let mut report = VerificationReport::new(Subject {
        process: Some(format!("markov({} states)", chain.len())),
        filling: None,
        n: None,
    });

    let worst_var = (0..=budget)
        .map(|i| (chain.exact_mixed_moment(&[i, i]).unwrap_or(f64::NAN) - 1.0).abs())
        .fold(0.0, f64::max);
    report.push(
        "unit_variance",
        "E[Z_i^2] = 1 for all i",
        worst_var <= VARIANCE_TOL,
        VARIANCE_TOL - worst_var,
        format!("max |E[Z_i^2] - 1| = {worst_var:.3e}"),
    );

    let mut worst_odd = 0.0f64;
    let mut worst_tuple = Vec::new();
    for k in (1..k_max).step_by(2) {
        enumerate_from_zero(k, budget, &mut |idx| {
            let m = chain.exact_mixed_moment(idx).unwrap_or(f64::NAN).abs();
            if !(m <= worst_odd) {
                worst_odd = m;
                worst_tuple = idx.to_vec();
            }
        });
    }
    report.push(
        "odd_moments_vanish",
        "E[Z_{i_1} .. Z_{i_k}] = 0 for odd k",
        worst_odd <= EXACT_TOL,
        EXACT_TOL - worst_odd,
        format!(
            "max |E| = {worst_odd:.3e}{}; spin-flip symmetric: {}",
            if worst_tuple.is_empty() {
                String::new()
            } else {
                format!(" at {worst_tuple:?}")
            },
            chain.is_flip_symmetric()
        ),
    );

    match fit_decay_constants(chain, k_max, budget) {
        Ok(fit) => {
            let orders: Vec<String> = fit
                .per_order
                .iter()
                .map(|o| format!("k={}: beta={}", o.k, o.beta))
                .collect();
            report.push(
                "decay_bounds",
                "|E| <= C beta^(n_1+n_3+..), covariance <= C beta^d, squares <= C beta^d'",
                true,
                1.0 - fit.beta,
                format!("C={:.6} beta={} ({})", fit.c, fit.beta, orders.join(", ")),
            );
        }
        Err(e) => report.push(
            "decay_bounds",
            "|E| <= C beta^(n_1+n_3+..), covariance <= C beta^d, squares <= C beta^d'",
            false,
            -1.0,
            e.to_string(),
        ),
    }
    report
}

/// Returns the fitted decay pair alongside the report, for callers that need
/// the numbers.
pub fn fitted_beta(report: &VerificationReport) -> Option<f64> {
    let check = report.check("decay_bounds")?;
    if !check.pass {
        return None;
    }
    Some(1.0 - check.margin)
}

fn enumerate_from_zero(len: usize, budget: u64, f: &mut dyn FnMut(&[u64])) {
    fn rec(buf: &mut Vec<u64>, len: usize, budget: u64, f: &mut dyn FnMut(&[u64])) {
        if buf.len() == len {
            f(buf);
            return;
        }
        for next in *buf.last().unwrap()..=budget {
            buf.push(next);
            rec(buf, len, budget, f);
            buf.pop();
        }
    }
    let mut buf = vec![0u64];
    rec(&mut buf, len, budget, f);
}

/// Filling statistics for a single `N`: the bounded-fiber certificate and
/// the neighbour density `J / N^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FillingStats {
    pub n: usize,
    pub max_fiber: usize,
    pub neighbor_count: u64,
    pub neighbor_density: f64,
}

pub fn filling_stats(map: &FillingMap) -> Result<FillingStats, VerifyError> {
    let n = map.n();
    if n > MAX_FIBER_N {
        return Err(VerifyError::TooLarge(n));
    }
    // the fiber of (i, j) equals that of (j, i) and is empty for i = j
    let max_fiber = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |scratch, i| {
            (i + 1..n)
                .map(|j| map.max_fiber0(i, j, scratch))
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let j = map.neighbor_count();
    Ok(FillingStats {
        n,
        max_fiber,
        neighbor_count: j,
        neighbor_density: j as f64 / (n * n) as f64,
    })
}

/// Exhaustive fiber scan over all `(i, j, n >= 1)` plus the neighbour count.
///
/// The fiber check passes when no fiber exceeds 4, a sufficient finite-N
/// certificate of sublinear fibers. The neighbour check passes when
/// `J <= N`, i.e. far from the quadratic growth that forces non-convergence.
pub fn check_filling_assumption(map: &FillingMap) -> Result<VerificationReport, VerifyError> {
    let stats = filling_stats(map)?;
    let n = stats.n;
    let mut report = VerificationReport::new(Subject {
        process: None,
        filling: Some(map.kind().to_string()),
        n: Some(n),
    });
    report.push(
        "fiber_bound",
        "#{x : |(i,x) - (x,j)| = n} = o(N), certified by <= 4",
        stats.max_fiber <= FIBER_BOUND,
        FIBER_BOUND as f64 - stats.max_fiber as f64,
        format!(
            "max fiber over n >= 1 is {} ({:.4} N)",
            stats.max_fiber,
            stats.max_fiber as f64 / n as f64
        ),
    );
    report.push(
        "neighbor_density",
        "J(phi_N) = o(N^2); J >= c N^2 rules out the semicircle",
        stats.neighbor_count <= n as u64,
        n as f64 - stats.neighbor_count as f64,
        format!(
            "J = {}, J/N^2 = {:.6}",
            stats.neighbor_count, stats.neighbor_density
        ),
    );
    Ok(report)
}

/// Exact conditions under which the fourth moment provably misses 2:
/// `E[Z_a^2 Z_b^2] = 1` and `E[Z_{i_1}..Z_{i_4}] = C beta^(n_1+n_3)` with
/// `beta in (0, 1)`, checked on all indices up to `budget`.
pub fn check_fourth_moment_conditions(
    oracle: &dyn MomentOracle,
    budget: u64,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(Subject {
        process: None,
        filling: None,
        n: None,
    });
    let mut worst_sq = 0.0f64;
    for a in 0..=budget {
        for b in a..=budget {
            worst_sq = worst_sq.max((oracle.mixed_moment(&[a, a, b, b])? - 1.0).abs());
        }
    }
    report.push(
        "squared_pairs",
        "E[Z_a^2 Z_b^2] = 1",
        worst_sq <= EXACT_TOL,
        EXACT_TOL - worst_sq,
        format!("max deviation {worst_sq:.3e}"),
    );

    let c = oracle.mixed_moment(&[0, 0, 0, 0])?;
    let beta = oracle.mixed_moment(&[0, 1, 1, 1])? / c;
    let mut worst = 0.0f64;
    let mut err = None;
    enumerate_from_zero(4, budget, &mut |idx| {
        let exponent = (idx[1] - idx[0]) + (idx[3] - idx[2]);
        match oracle.mixed_moment(idx) {
            Ok(m) => worst = worst.max((m - c * beta.powi(exponent as i32)).abs()),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    let pass = worst <= EXACT_TOL && beta > 0.0 && beta < 1.0;
    report.push(
        "four_point_product_form",
        "E[Z_{i_1}..Z_{i_4}] = C beta^(n_1+n_3), beta in (0,1)",
        pass,
        EXACT_TOL - worst,
        format!("C = {c}, beta = {beta}, max deviation {worst:.3e}"),
    );
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginRow {
    pub n: usize,
    pub trials: usize,
    pub mean_m4: f64,
    pub std_error: f64,
    /// `mean_m4 - 2`.
    pub margin: f64,
    /// `margin / std_error`.
    pub z: f64,
}

/// Seed of trial `t` at dimension `n` under a base seed.
pub fn margin_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed_for_trial(seed_for_trial(seed, n as u64), trial as u64)
}

/// Monte Carlo estimate of `E[(1/N) tr A_N^4]` at each `N`, with standard
/// error across trials and the margin over the semicircle value 2.
pub fn fourth_moment_margin(
    spec: &ProcessSpec,
    filling: FillingKind,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<MarginRow>, VerifyError> {
    if trials < 2 {
        return Err(VerifyError::Process(crate::error::ProcessError::Invalid(
            "at least two trials are needed for a standard error".into(),
        )));
    }
    n_list
        .iter()
        .map(|&n| {
            let map = match filling {
                FillingKind::Diagonal => FillingMap::diagonal(n)?,
                FillingKind::RowWise => FillingMap::row_wise(n)?,
                FillingKind::Custom => {
                    return Err(VerifyError::Filling(crate::error::FillingError::NotBijective(
                        "custom fillings are defined for a single N".into(),
                    )))
                }
            };
            let values: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<f64, VerifyError> {
                    let path = sample_path(spec, map.len(), margin_seed(seed, n, t))?;
                    let sample = build_matrix(&path, &map)?;
                    let eig = eigenvalues(&sample)?;
                    Ok(spectral_moments(&eig, 4)[4])
                })
                .collect::<Result<_, _>>()?;
            let mean = values.iter().sum::<f64>() / trials as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            Ok(MarginRow {
                n,
                trials,
                mean_m4: mean,
                std_error: se,
                margin: mean - 2.0,
                z: (mean - 2.0) / se,
            })
        })
        .collect()
}
