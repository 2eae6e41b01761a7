use rayon::prelude::*;

use crate::error::VerifyError;
use crate::filling::FillingMap;
use crate::process::MomentOracle;

/// Largest `n^k` the closed-path enumeration accepts.
pub const PATH_BUDGET: f64 = 1e8;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Exact `E[(1/n) tr A^k]` for the matrix filled through `map`, as the
/// normalized sum over all closed paths `p_1 -> p_2 -> .. -> p_k -> p_1` of
/// the mixed moment of the visited entries.
///
/// Paths are enumerated lexicographically; the first coordinate is split
/// across workers and the partial sums are reduced in index order, so the
/// result does not depend on the thread count.
pub fn expected_trace_moment_bruteforce(
    oracle: &dyn MomentOracle,
    map: &FillingMap,
    k: u32,
) -> Result<f64, VerifyError> {
    let n = map.n();
    let work = (n as f64).powi(k as i32);
    if work > PATH_BUDGET {
        return Err(VerifyError::BudgetExceeded(work));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let k = k as usize;
    let partials: Vec<Result<KahanSum, VerifyError>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = KahanSum::default();
            let mut path = vec![0usize; k];
            path[0] = first;
            let mut indices = vec![0u64; k];
            loop {
                for s in 0..k {
                    let (a, b) = (path[s], path[(s + 1) % k]);
                    indices[s] = map.index0(a, b) as u64;
                }
                indices.sort_unstable();
                acc.add(oracle.mixed_moment(&indices)?);
                // odometer over coordinates 1..k
                let mut pos = k;
                loop {
                    pos -= 1;
                    if pos == 0 {
                        return Ok(acc);
                    }
                    path[pos] += 1;
                    if path[pos] < n {
                        break;
                    }
                    path[pos] = 0;
                }
            }
        })
        .collect();
    let mut total = KahanSum::default();
    for part in partials {
        total.add(part?.value());
    }
    Ok(total.value() / (n as f64).powf(k as f64 / 2.0 + 1.0))
}
