//! Eigenvalues of dense real symmetric matrices: Householder reduction to
//! tridiagonal form followed by implicit QL iteration with Wilkinson shifts.

use crate::error::SpectraError;

/// Maximum QL sweeps spent on a single eigenvalue.
pub const MAX_SWEEPS: usize = 30;

/// Ascending eigenvalues of the symmetric `n x n` row-major matrix `a`.
/// The full matrix (both triangles) must be present; it is overwritten.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>, SpectraError> {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    drop(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reduces `a` in place; returns the diagonal and the sub-diagonal, the latter
/// padded with a trailing zero to length `n`.
pub fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k];
        let lo = k + 1;
        let m = n - lo;
        let v = &mut v[..m];
        let w = &mut w[..m];
        for (r, vr) in v.iter_mut().enumerate() {
            *vr = a[(lo + r) * n + k];
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        e[k] = alpha;
        if m == 1 {
            // reflection of a scalar only flips its sign
            continue;
        }
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        let tau = 2.0 / vnorm2;
        // p = tau * B v
        for (r, wr) in w.iter_mut().enumerate() {
            let row = &a[(lo + r) * n + lo..(lo + r) * n + n];
            *wr = tau * dot(row, v);
        }
        // w = p - (tau/2)(p.v) v
        let kappa = 0.5 * tau * dot(w, v);
        for (wr, vr) in w.iter_mut().zip(v.iter()) {
            *wr -= kappa * vr;
        }
        // B -= v w^T + w v^T
        for r in 0..m {
            let (vr, wr) = (v[r], w[r]);
            let row = &mut a[(lo + r) * n + lo..(lo + r) * n + n];
            for ((x, &vc), &wc) in row.iter_mut().zip(v.iter()).zip(w.iter()) {
                *x -= vr * wc + wr * vc;
            }
        }
    }
    if n > 0 {
        d[n - 1] = a[(n - 1) * n + n - 1];
    }
    (d, e)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for l in 0..8 {
            acc[l] += ca[l] * cb[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Implicit QL on the tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (`e[i]` couples `d[i]` and `d[i+1]`, `e[n-1] = 0`).
/// Eigenvalues are left in `d`, unsorted.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectraError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_SWEEPS {
                return Err(SpectraError::NoConvergence {
                    index: l,
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            iter += 1;
            // Wilkinson shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_matrix() {
        assert_eq!(symmetric_eigenvalues(vec![0.0; 25], 5).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn two_by_two() {
        let s = 0.5f64.sqrt();
        let eig = symmetric_eigenvalues(vec![0.0, s, s, 0.0], 2).unwrap();
        assert_abs_diff_eq!(eig[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(eig[1], s, epsilon = 1e-15);
    }

    #[test]
    fn one_by_one_and_empty() {
        assert_eq!(symmetric_eigenvalues(vec![-3.5], 1).unwrap(), vec![-3.5]);
        assert!(symmetric_eigenvalues(vec![], 0).unwrap().is_empty());
    }

    #[test]
    fn already_tridiagonal() {
        // path graph Laplacian-like matrix with known spectrum 2 - 2 cos(k pi/(n+1))
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
        }
        let eig = symmetric_eigenvalues(a, n).unwrap();
        for (k, lambda) in eig.iter().enumerate() {
            let exact =
                2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*lambda, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let n = 4;
        let mut a = vec![0.0; n * n];
        for (i, v) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            a[i * n + i] = *v;
        }
        assert_eq!(symmetric_eigenvalues(a, n).unwrap(), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn repeated_eigenvalues() {
        // J - I for the all-ones J: eigenvalues n-1 (once) and -1 (n-1 times)
        let n = 9;
        let a: Vec<f64> = (0..n * n)
            .map(|idx| if idx / n == idx % n { 0.0 } else { 1.0 })
            .collect();
        let eig = symmetric_eigenvalues(a, n).unwrap();
        for lambda in &eig[..n - 1] {
            assert_abs_diff_eq!(*lambda, -1.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(eig[n - 1], (n - 1) as f64, epsilon = 1e-13);
    }

    #[test]
    fn dot_handles_remainders() {
        for len in 0..20 {
            let a: Vec<f64> = (0..len).map(|i| i as f64).collect();
            let b: Vec<f64> = (0..len).map(|i| 1.0 + i as f64).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert_eq!(dot(&a, &b), naive);
        }
    }
}
