//! The semicircle law on `[-2, 2]` and its Catalan moments.

use std::f64::consts::PI;

use crate::error::SpectraError;

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() <= 2.0 {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let value = 0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI;
    value.clamp(0.0, 1.0)
}

/// Inverse CDF by bisection; exact to a few ulps on `[-2, 2]`.
pub fn semicircle_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if semicircle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `k`-th moment of the semicircle law: `C_{k/2}` for even `k`, else 0.
pub fn semicircle_moment(k: u32) -> Result<f64, SpectraError> {
    if k % 2 == 1 {
        Ok(0.0)
    } else {
        catalan(k / 2).map(|c| c as f64)
    }
}

/// `C_k = binom(2k, k) / (k + 1)`, supported for `k <= 30`.
pub fn catalan(k: u32) -> Result<u64, SpectraError> {
    if k > 30 {
        return Err(SpectraError::CatalanOverflow(k));
    }
    // C_{j+1} = C_j * 2(2j+1) / (j+2), exact in u128 at every step
    let mut c: u128 = 1;
    for j in 0..k as u128 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    Ok(c as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Simpson rule of the density over `[-2, a]` in the variable
    /// `x = 2 sin(t)`, which removes the square-root endpoint singularity.
    fn cdf_by_quadrature(a: f64) -> f64 {
        let a = a.clamp(-2.0, 2.0);
        let (t0, t1) = (-PI / 2.0, (a / 2.0).asin());
        let panels = 2000;
        let h = (t1 - t0) / panels as f64;
        let f = |t: f64| semicircle_density(2.0 * t.sin()) * 2.0 * t.cos();
        let mut sum = f(t0) + f(t1);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(t0 + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn density_values() {
        assert_abs_diff_eq!(semicircle_density(0.0), 1.0 / PI, epsilon = 1e-16);
        assert_eq!(semicircle_density(2.5), 0.0);
        assert_eq!(semicircle_density(-2.0), 0.0);
    }

    #[test]
    fn density_integrates_to_one() {
        assert_abs_diff_eq!(cdf_by_quadrature(2.0), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cdf_endpoints() {
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert_abs_diff_eq!(semicircle_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        assert_eq!(semicircle_cdf(-7.0), 0.0);
    }

    #[test]
    fn cdf_matches_quadrature_and_is_monotone() {
        let mut prev = 0.0;
        for i in 0..=10_000 {
            let x = -2.5 + 5.0 * i as f64 / 10_000.0;
            let c = semicircle_cdf(x);
            assert!(c >= prev, "not monotone at {x}");
            prev = c;
            if i % 97 == 0 {
                assert_abs_diff_eq!(c, cdf_by_quadrature(x), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert_abs_diff_eq!(semicircle_cdf(semicircle_quantile(p)), p, epsilon = 1e-14);
        }
    }

    #[test]
    fn catalan_numbers() {
        let expected = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (k, &c) in expected.iter().enumerate() {
            assert_eq!(catalan(k as u32).unwrap(), c);
        }
        assert_eq!(catalan(30).unwrap(), 3_814_986_502_092_304);
        assert_eq!(catalan(31), Err(SpectraError::CatalanOverflow(31)));
    }

    #[test]
    fn moments_by_quadrature() {
        // integrate x^k against the density with the same substitution
        for k in 0..9u32 {
            let panels = 4000;
            let (t0, t1) = (-PI / 2.0, PI / 2.0);
            let h = (t1 - t0) / panels as f64;
            let f = |t: f64| {
                let x = 2.0 * t.sin();
                x.powi(k as i32) * semicircle_density(x) * 2.0 * t.cos()
            };
            let mut sum = f(t0) + f(t1);
            for i in 1..panels {
                sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t0 + i as f64 * h);
            }
            assert_abs_diff_eq!(sum * h / 3.0, semicircle_moment(k).unwrap(), epsilon = 1e-10);
        }
    }
}
