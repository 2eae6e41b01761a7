use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specfill::process::{PotentialTerm, ProcessSpec};
use specfill::spectra::{build_matrix, eigenvalues, spectral_moments};
use specfill::{
    expected_trace_moment_bruteforce, fit_decay_constants, sample_path, seed_for_trial, BinaryChain,
    FillingMap, FiniteMarkovChain, GaussianMarkov, GibbsPotential,
};

/// Flip-symmetric three-state chain on `{-a, 0, a}` scaled to unit variance.
fn three_state() -> FiniteMarkovChain {
    FiniteMarkovChain::with_unit_variance(
        vec![-1.0, 0.0, 1.0],
        vec![
            vec![0.5, 0.3, 0.2],
            vec![0.25, 0.5, 0.25],
            vec![0.2, 0.3, 0.5],
        ],
        None,
    )
    .unwrap()
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn three_state_chain_monte_carlo() {
    let chain = three_state();
    assert!(chain.is_flip_symmetric());
    let tuples: [&[u64]; 5] = [&[0, 1], &[0, 3], &[0, 0, 2, 2], &[0, 1, 2, 3], &[0, 1, 4, 6]];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 200_000;
    let paths: Vec<Vec<f64>> = (0..trials).map(|_| chain.sample(7, &mut rng)).collect();
    for idx in tuples {
        let products: Vec<f64> = paths
            .iter()
            .map(|p| idx.iter().map(|&i| p[i as usize]).product())
            .collect();
        let (mean, se) = mean_and_se(&products);
        let exact = chain.exact_mixed_moment(idx).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "{idx:?}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn ising_reduces_to_binary_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for j in [0.1, 0.3, -0.2, 0.45] {
        let chain = GibbsPotential::ising(j).unwrap().to_chain().unwrap();
        let p = j.exp() / (j.exp() + (-j).exp());
        let binary = BinaryChain::new(p).unwrap();
        for _ in 0..100 {
            let k = 2 * rng.random_range(1..=4);
            let mut idx: Vec<u64> = (0..k).map(|_| rng.random_range(0..40)).collect();
            idx.sort_unstable();
            let a = chain.exact_mixed_moment(&idx).unwrap();
            let b = binary.closed_form_moment(&idx);
            assert!((a - b).abs() < 1e-10, "J = {j}, {idx:?}: {a} vs {b}");
        }
    }
}

/// Expectations of a potential on a ring of `len` sites by enumeration. On a
/// ring the finite-volume error decays like `(lambda_2 / lambda_1)^len`.
struct Ring {
    values: Vec<f64>,
    len: usize,
    weights: Vec<f64>,
}

impl Ring {
    fn new(potential: &GibbsPotential, len: usize) -> Self {
        let q = potential.state_values().len();
        let total = q.pow(len as u32);
        let mut weights = vec![0.0; total];
        let mut config = vec![0usize; len];
        for (code, w) in weights.iter_mut().enumerate() {
            let mut c = code;
            for site in config.iter_mut() {
                *site = c % q;
                c /= q;
            }
            let mut energy = 0.0;
            for term in potential.terms() {
                for t in 0..len {
                    let idx = term
                        .shape
                        .iter()
                        .fold(0, |acc, &off| acc * q + config[(t + off) % len]);
                    energy += term.table[idx];
                }
            }
            *w = (-energy).exp();
        }
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        Ring {
            values: potential.state_values().to_vec(),
            len,
            weights,
        }
    }

    fn expect(&self, sites: &[usize]) -> f64 {
        let q = self.values.len();
        self.weights
            .iter()
            .enumerate()
            .map(|(code, w)| {
                let prod: f64 = sites
                    .iter()
                    .map(|&s| self.values[(code / q.pow(s as u32)) % q])
                    .product();
                w * prod
            })
            .sum()
    }

    /// Moment of the unit-variance readout.
    fn moment(&self, sites: &[usize]) -> f64 {
        let var = self.expect(&[0, 0]);
        self.expect(sites) / var.powf(sites.len() as f64 / 2.0)
    }
}

/// Chain moments against the ring. The ring error for sites spanning `s` is
/// of order `r^(len - s)`, `r = |lambda_2| / lambda_1` from the transfer
/// spectrum; the tolerance is ten times that.
fn check_against_ring(potential: &GibbsPotential, len: usize) {
    let chain = potential.to_chain().unwrap();
    let ring = Ring::new(potential, len);
    let mut moduli: Vec<f64> = potential
        .transfer_matrix()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let r = moduli[1] / moduli[0];
    let tuples: [&[usize]; 6] = [&[0, 1], &[0, 2], &[0, 3], &[0, 0, 1, 1], &[0, 1, 2, 3], &[0, 1, 3, 5]];
    for sites in tuples {
        let idx: Vec<u64> = sites.iter().map(|&s| s as u64).collect();
        let exact = chain.exact_mixed_moment(&idx).unwrap();
        let finite = ring.moment(sites);
        let span = *sites.last().unwrap();
        let tol = 10.0 * r.powi((len - span) as i32);
        assert!(tol < 1e-4, "ring too short: {tol}");
        assert!(
            (exact - finite).abs() < tol,
            "{sites:?}: chain {exact} vs ring {finite}, tol {tol:e}"
        );
    }
    assert_eq!(ring.len, len);
}

#[test]
fn range_two_potential_matches_ring_enumeration() {
    let (j1, j2) = (0.2, 0.1);
    let potential = GibbsPotential::new(
        vec![-1.0, 1.0],
        2,
        vec![
            PotentialTerm {
                shape: vec![0, 1],
                table: vec![-j1, j1, j1, -j1],
            },
            PotentialTerm {
                shape: vec![0, 2],
                table: vec![-j2, j2, j2, -j2],
            },
        ],
    )
    .unwrap();
    check_against_ring(&potential, 20);
}

#[test]
fn three_symbol_potential_matches_ring_enumeration() {
    // phi(s, t) = -J s t + h (s^2 t^2), flip symmetric on {-1, 0, 1}
    let (j, h) = (0.25, 0.1);
    let values = [-1.0f64, 0.0, 1.0];
    let table: Vec<f64> = (0..9)
        .map(|c| {
            let (s, t) = (values[c / 3], values[c % 3]);
            -j * s * t + h * s * s * t * t
        })
        .collect();
    let potential = GibbsPotential::new(
        values.to_vec(),
        1,
        vec![PotentialTerm {
            shape: vec![0, 1],
            table,
        }],
    )
    .unwrap();
    check_against_ring(&potential, 12);

    // range 1: the transfer matrix is symmetric, so its Perron pair comes
    // from a plain symmetric eigendecomposition
    let t = potential.transfer_matrix();
    let eig = SymmetricEigen::new(t.clone());
    let top = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[top];
    let v = eig.eigenvectors.column(top).map(f64::abs);
    let p = DMatrix::from_fn(3, 3, |a, b| t[(a, b)] * v[b] / (lambda * v[a]));
    let chain = potential.to_chain().unwrap();
    assert!((chain.transition() - p).amax() < 1e-12);
}

#[test]
fn dobrushin_gate() {
    assert!(GibbsPotential::ising(0.49).is_ok());
    assert!(GibbsPotential::ising(0.5).is_err());
    let heavy = GibbsPotential::new(
        vec![-1.0, 1.0],
        2,
        vec![
            PotentialTerm {
                shape: vec![0, 1],
                table: vec![-0.3, 0.3, 0.3, -0.3],
            },
            PotentialTerm {
                shape: vec![0, 2],
                table: vec![-0.3, 0.3, 0.3, -0.3],
            },
        ],
    );
    assert!(matches!(heavy, Err(specfill::ProcessError::Dobrushin(d)) if (d - 2.4).abs() < 1e-12));
}

/// `sum over perfect matchings of prod t(i, j)`, enumerated recursively.
fn pairing_sum(beta: f64, idx: &[u64]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    if idx.len() % 2 == 1 {
        return 0.0;
    }
    let first = idx[0];
    (1..idx.len())
        .map(|k| {
            let rest: Vec<u64> = idx[1..]
                .iter()
                .enumerate()
                .filter(|&(pos, _)| pos + 1 != k)
                .map(|(_, &v)| v)
                .collect();
            beta.powi(first.abs_diff(idx[k]) as i32) * pairing_sum(beta, &rest)
        })
        .sum()
}

#[test]
fn isserlis_matches_pairing_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let beta: f64 = rng.random_range(-0.95..0.95);
        let k = rng.random_range(0..=8);
        let mut idx: Vec<u64> = (0..k).map(|_| rng.random_range(0..12)).collect();
        idx.sort_unstable();
        let g = GaussianMarkov::new(beta).unwrap();
        let a = g.isserlis_moment(&idx);
        let b = pairing_sum(beta, &idx);
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{idx:?}: {a} vs {b}");
    }
}

#[test]
fn decay_fit_extrapolates() {
    let chain = three_state();
    let fit = fit_decay_constants(&chain, 4, 12).unwrap();
    // the fitted rate cannot beat the spectral gap of the transition matrix
    let p = chain.transition().clone();
    let mut moduli: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    assert!(fit.beta <= moduli[1] + 1e-3, "beta {} vs |lambda_2| {}", fit.beta, moduli[1]);
    assert!(fit.beta > 0.0);
    // the certified bound holds well beyond the fitted index window
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let k = 2 * rng.random_range(1..=2);
        let mut idx: Vec<u64> = (0..k).map(|_| rng.random_range(0..40)).collect();
        idx.sort_unstable();
        let exponent: u64 = idx.chunks_exact(2).map(|w| w[1] - w[0]).sum();
        let m = chain.exact_mixed_moment(&idx).unwrap().abs();
        let bound = fit.c * fit.beta.powi(exponent as i32);
        assert!(m <= bound * (1.0 + 1e-9) + 1e-15, "{idx:?}: {m} > {bound}");
    }
}

#[test]
fn trace_moment_oracle_matches_monte_carlo_for_gaussian() {
    let spec = ProcessSpec::Gaussian(GaussianMarkov::new(0.5).unwrap());
    let oracle = spec.oracle().unwrap();
    let map = FillingMap::diagonal(4).unwrap();
    let exact = expected_trace_moment_bruteforce(&*oracle, &map, 4).unwrap();
    let trials = 100_000;
    let samples: Vec<f64> = (0..trials)
        .map(|t| {
            let path = sample_path(&spec, map.len(), seed_for_trial(21, t)).unwrap();
            let eig = eigenvalues(&build_matrix(&path, &map).unwrap()).unwrap();
            spectral_moments(&eig, 4)[4]
        })
        .collect();
    let (mean, se) = mean_and_se(&samples);
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn oracle_boxes_agree_with_direct_calls() {
    let b = BinaryChain::new(0.8).unwrap();
    let spec = ProcessSpec::Binary(b);
    let boxed = spec.oracle().unwrap();
    let idx = [0u64, 2, 2, 7];
    assert_eq!(boxed.mixed_moment(&idx).unwrap(), b.closed_form_moment(&idx));
    assert!(boxed.mixed_moment(&[3, 1]).is_err());
}
