//! Matrix assembly `A_N = X_N / sqrt(N)`, eigenvalues, and empirical spectral
//! summaries compared against the semicircle law.

mod eigen;
mod semicircle;

pub use eigen::{symmetric_eigenvalues, tridiagonal_ql, tridiagonalize, MAX_SWEEPS};
pub use semicircle::{catalan, semicircle_cdf, semicircle_density, semicircle_moment, semicircle_quantile};

use std::io::Write;

use serde::Serialize;

use crate::error::SpectraError;
use crate::filling::{triangle_len, FillingKind, FillingMap};
use crate::process::Path;

/// One realized symmetric matrix with its provenance.
#[derive(Clone, Debug)]
pub struct EnsembleSample {
    pub n: usize,
    /// Row-major, both triangles stored.
    pub matrix: Vec<f64>,
    pub seed: u64,
    pub process: String,
    pub filling: FillingKind,
}

impl EnsembleSample {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum()
    }
}

/// Places `Z_{phi^-1(i,j)} / sqrt(N)` at `(i, j)` and `(j, i)`.
pub fn build_matrix(path: &Path<'_>, map: &FillingMap) -> Result<EnsembleSample, SpectraError> {
    let n = map.n();
    let expected = triangle_len(n);
    if path.len() != expected {
        return Err(SpectraError::LengthMismatch {
            got: path.len(),
            expected,
        });
    }
    let scale = (n as f64).sqrt().recip();
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = path.values[map.index0(i, j) - 1] * scale;
            matrix[i * n + j] = x;
            matrix[j * n + i] = x;
        }
    }
    Ok(EnsembleSample {
        n,
        matrix,
        seed: path.seed,
        process: path.spec.label(),
        filling: map.kind(),
    })
}

/// Ascending eigenvalues of the sample.
pub fn eigenvalues(sample: &EnsembleSample) -> Result<Vec<f64>, SpectraError> {
    symmetric_eigenvalues(sample.matrix.clone(), sample.n)
}

/// Equal-width bins. The default grid is 101 bins on `[-2.5, 2.5]`; values
/// outside it widen the range by whole bins so that nothing is dropped and
/// bins stay aligned with the default grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            bins: 101,
            lo: -2.5,
            hi: 2.5,
        }
    }
}

impl Histogram {
    pub fn build(values: &[f64], spec: HistogramSpec) -> Self {
        let width = (spec.hi - spec.lo) / spec.bins as f64;
        let min = values.iter().copied().fold(spec.lo, f64::min);
        let max = values.iter().copied().fold(spec.hi, f64::max);
        let below = ((spec.lo - min) / width).ceil() as usize;
        let above = ((max - spec.hi) / width).ceil() as usize;
        let lo = spec.lo - below as f64 * width;
        let bins = spec.bins + below + above;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Histogram { lo, width, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_edges(&self, idx: usize) -> (f64, f64) {
        (
            self.lo + idx as f64 * self.width,
            self.lo + (idx + 1) as f64 * self.width,
        )
    }

    /// Writes `bin_left,bin_right,count,density` with density normalized to
    /// unit area.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "count", "density"])?;
        let total = self.total().max(1) as f64;
        for (idx, &c) in self.counts.iter().enumerate() {
            let (l, r) = self.bin_edges(idx);
            let density = c as f64 / (total * self.width);
            w.write_record([l.to_string(), r.to_string(), c.to_string(), density.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// L1 distance between the histogram density and the semicircle density,
    /// using the exact semicircle mass in each bin.
    pub fn l1_gap(&self) -> f64 {
        let total = self.total().max(1) as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let (l, r) = self.bin_edges(idx);
                (c as f64 / total - (semicircle_cdf(r) - semicircle_cdf(l))).abs()
            })
            .sum()
    }
}

/// Sorted eigenvalues with derived histogram, moments and KS distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub histogram: Histogram,
    /// `m_k = (1/N) sum lambda^k` for `k = 0..=k_max`.
    pub moments: Vec<f64>,
    pub ks_distance: f64,
}

impl SpectralSummary {
    pub fn new(mut eigenvalues: Vec<f64>, k_max: u32, spec: HistogramSpec) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let moments = spectral_moments(&eigenvalues, k_max);
        SpectralSummary {
            histogram: Histogram::build(&eigenvalues, spec),
            ks_distance: ks_distance(&eigenvalues),
            moments,
            eigenvalues,
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn moment(&self, k: u32) -> f64 {
        empirical_moment(self, k)
    }

    /// Empirical quantile (lower order statistic).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.eigenvalues.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.eigenvalues[idx]
    }
}

/// `(1/N) sum lambda^k`; falls back to direct summation past the cached
/// moments.
pub fn empirical_moment(summary: &SpectralSummary, k: u32) -> f64 {
    summary
        .moments
        .get(k as usize)
        .copied()
        .unwrap_or_else(|| power_mean(&summary.eigenvalues, k))
}

fn power_mean(values: &[f64], k: u32) -> f64 {
    values.iter().map(|x| x.powi(k as i32)).sum::<f64>() / values.len() as f64
}

pub fn spectral_moments(eigenvalues: &[f64], k_max: u32) -> Vec<f64> {
    let n = eigenvalues.len() as f64;
    let mut sums = vec![0.0; k_max as usize + 1];
    for &x in eigenvalues {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            *s += p;
            p *= x;
        }
    }
    sums.into_iter().map(|s| s / n).collect()
}

/// `sup |F_N - F_semicircle|` evaluated on both sides of every jump of the
/// empirical CDF. `sorted` must be ascending.
pub fn ks_distance(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = semicircle_cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `(1/N) tr A^k` by dense matrix powers. Small-N oracle only.
pub fn trace_moment_dense(sample: &EnsembleSample, k: u32) -> f64 {
    let n = sample.n;
    if k == 0 {
        return 1.0;
    }
    let mut power = sample.matrix.clone();
    for _ in 1..k {
        let mut next = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = power[i * n + l];
                if a != 0.0 {
                    for j in 0..n {
                        next[i * n + j] += a * sample.matrix[l * n + j];
                    }
                }
            }
        }
        power = next;
    }
    (0..n).map(|i| power[i * n + i]).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{sample_path, BinaryChain, ProcessSpec};
    use approx::assert_abs_diff_eq;

    fn spec() -> ProcessSpec {
        ProcessSpec::Binary(BinaryChain::new(0.7).unwrap())
    }

    fn path_of(spec: &ProcessSpec, values: Vec<f64>) -> Path<'_> {
        Path {
            values,
            seed: 0,
            spec,
        }
    }

    #[test]
    fn one_by_one_matrix() {
        let s = spec();
        let sample =
            build_matrix(&path_of(&s, vec![-1.0]), &FillingMap::diagonal(1).unwrap()).unwrap();
        assert_eq!(sample.matrix, vec![-1.0]);
    }

    #[test]
    fn two_by_two_layouts() {
        let s = spec();
        let r = 2f64.sqrt().recip();
        let p = path_of(&s, vec![1.0, 2.0, 3.0]);
        let diag = build_matrix(&p, &FillingMap::diagonal(2).unwrap()).unwrap();
        assert_eq!(diag.matrix, vec![1.0 * r, 3.0 * r, 3.0 * r, 2.0 * r]);
        let row = build_matrix(&p, &FillingMap::row_wise(2).unwrap()).unwrap();
        assert_eq!(row.matrix, vec![1.0 * r, 2.0 * r, 2.0 * r, 3.0 * r]);
    }

    #[test]
    fn length_mismatch() {
        let s = spec();
        let err = build_matrix(&path_of(&s, vec![1.0; 5]), &FillingMap::diagonal(3).unwrap());
        assert_eq!(
            err.unwrap_err(),
            SpectraError::LengthMismatch {
                got: 5,
                expected: 6
            }
        );
    }

    #[test]
    fn entries_match_path_through_inverse() {
        let s = spec();
        let n = 9;
        let path = sample_path(&s, triangle_len(n), 4).unwrap();
        let map = FillingMap::row_wise(n).unwrap();
        let sample = build_matrix(&path, &map).unwrap();
        for i in 1..=n {
            for j in 1..=n {
                let m = map.phi_inv(i, j).unwrap() as usize;
                assert_eq!(sample.get(i - 1, j - 1) * (n as f64).sqrt(), path.values[m - 1]);
            }
        }
    }

    #[test]
    fn trace_identities_on_random_sample() {
        let s = spec();
        let n = 6;
        let path = sample_path(&s, triangle_len(n), 17).unwrap();
        let sample = build_matrix(&path, &FillingMap::diagonal(n).unwrap()).unwrap();
        let eig = eigenvalues(&sample).unwrap();
        assert_abs_diff_eq!(eig.iter().sum::<f64>(), sample.trace(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            eig.iter().map(|x| x * x).sum::<f64>(),
            sample.frobenius_sq(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn moments_from_eigenvalues_match_dense_powers() {
        let s = spec();
        let n = 4;
        let path = sample_path(&s, triangle_len(n), 23).unwrap();
        let sample = build_matrix(&path, &FillingMap::diagonal(n).unwrap()).unwrap();
        let summary = SpectralSummary::new(eigenvalues(&sample).unwrap(), 8, HistogramSpec::default());
        assert_eq!(summary.moment(0), 1.0);
        assert_abs_diff_eq!(summary.moment(2), sample.frobenius_sq() / n as f64, epsilon = 1e-12);
        for k in 1..=6 {
            assert_abs_diff_eq!(summary.moment(k), trace_moment_dense(&sample, k), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(summary.moment(11), trace_moment_dense(&sample, 11), epsilon = 1e-10);
    }

    #[test]
    fn ks_at_semicircle_quantiles() {
        let n = 500;
        let eig: Vec<f64> = (1..=n)
            .map(|i| semicircle_quantile((i as f64 - 0.5) / n as f64))
            .collect();
        assert!(ks_distance(&eig) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn ks_of_point_mass() {
        assert_abs_diff_eq!(ks_distance(&[0.0; 10]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn histogram_keeps_every_value() {
        let values = [-3.1, -2.5, -0.01, 0.0, 1.2, 2.4999, 2.5, 4.0];
        let h = Histogram::build(&values, HistogramSpec::default());
        assert_eq!(h.total(), values.len() as u64);
        assert!(h.lo <= -3.1);
        let (_, right) = h.bin_edges(h.counts.len() - 1);
        assert!(right > 4.0);
        // aligned with the default grid
        let offset = (-2.5 - h.lo) / h.width;
        assert_abs_diff_eq!(offset, offset.round(), epsilon = 1e-9);

        let inside = Histogram::build(&[0.0, 1.0], HistogramSpec::default());
        assert_eq!(inside.counts.len(), 101);
        assert_eq!(inside.lo, -2.5);
    }

    #[test]
    fn histogram_csv_schema() {
        let h = Histogram::build(&[0.0, 0.1, -1.0], HistogramSpec::default());
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("bin_left,bin_right,count,density"));
        assert_eq!(lines.count(), 101);
        let area: f64 = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap() * h.width)
            .sum();
        assert_abs_diff_eq!(area, 1.0, epsilon = 1e-12);
    }
}
