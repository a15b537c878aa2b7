use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shadowqpt::gates::clifford::{sample_clifford, CliffordElement};
use shadowqpt::qmat::CMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn tableau_key(c: &CliffordElement) -> (Vec<Vec<u8>>, Vec<u8>) {
    (c.symplectic_rows(), c.phase_bits())
}

/// Dense matrix with the global phase fixed by its first non-negligible entry,
/// rounded so that equal classes hash equal.
fn phase_free_key(u: &CMatrix) -> Vec<(i64, i64)> {
    let d = u.dim();
    let pivot = (0..d * d).map(|k| u[(k / d, k % d)]).find(|z| z.norm() > 1e-8).unwrap();
    let phase = pivot / pivot.norm();
    (0..d * d)
        .map(|k| {
            let z = u[(k / d, k % d)] / phase;
            ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)
        })
        .collect()
}

#[test]
fn single_qubit_support_is_the_whole_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = HashMap::new();
    for _ in 0..5000 {
        let c = sample_clifford(1, &mut rng).unwrap();
        *seen.entry(phase_free_key(c.unitary())).or_insert(0usize) += 1;
    }
    assert_eq!(seen.len(), 24);
}

#[test]
fn single_qubit_class_frequencies() {
    let samples = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut counts = HashMap::new();
    for _ in 0..samples {
        *counts.entry(tableau_key(&sample_clifford(1, &mut rng).unwrap())).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 24);
    let p = 1.0 / 24.0;
    let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
    for (&_, &k) in counts.iter() {
        assert!((k as f64 - samples as f64 * p).abs() < 5.0 * sigma, "count {k}");
    }
}

#[test]
fn two_qubit_chi_square() {
    let samples = 1_000_000usize;
    let classes = 11_520usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts: HashMap<_, usize> = HashMap::with_capacity(classes);
    for _ in 0..samples {
        *counts.entry(tableau_key(&sample_clifford(2, &mut rng).unwrap())).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), classes);
    let expected = samples as f64 / classes as f64;
    let stat: f64 = counts.values().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((classes - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "chi-square {stat:.1}, p = {p:.4}");
}

#[test]
fn tableau_and_dense_keys_agree() {
    // distinct tableaux must give distinct unitaries up to phase
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut map: HashMap<_, _> = HashMap::new();
    for _ in 0..3000 {
        let c = sample_clifford(2, &mut rng).unwrap();
        let dense = phase_free_key(c.unitary());
        if let Some(prev) = map.insert(tableau_key(&c), dense.clone()) {
            assert_eq!(prev, dense);
        }
    }
    let distinct_dense: std::collections::HashSet<_> = map.values().collect();
    assert_eq!(distinct_dense.len(), map.len());
}
