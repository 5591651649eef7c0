//! Structured bounds against the brute-force oracle in odd dimensions; the
//! acceptance suite covers d = 4, 6, 8.

use ptmoments::bounds::{oracle_bounds, p3_bounds, p4_bounds, p5_bounds, OptimalBounds};
use ptmoments::moments::moments_of_spectrum;
use ptmoments::{MomentVector, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A random probability vector of length `d`, sometimes with zeros and
/// sometimes close to uniform or to a pure state.
fn random_spectrum(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let shape = [0.3, 1.0, 3.0, 12.0][rng.random_range(0..4)];
    let zeros = if rng.random_bool(0.3) {
        rng.random_range(1..d - 1)
    } else {
        0
    };
    let mut v: Vec<f64> = (0..d)
        .map(|i| {
            if i < zeros {
                0.0
            } else {
                rng.random::<f64>().powf(shape)
            }
        })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn structured(prefix: &MomentVector, n: usize) -> OptimalBounds {
    match n {
        3 => p3_bounds(prefix.at(2), prefix.dimension().unwrap()).unwrap(),
        4 => p4_bounds(prefix).unwrap(),
        _ => p5_bounds(prefix).unwrap(),
    }
}

fn check_witnesses(b: &OptimalBounds, p: &MomentVector, n: usize) {
    for s in [&b.min, &b.max] {
        let m = s.moments(n);
        for k in 1..n {
            assert!(
                (m.at(k) - p.at(k)).abs() <= 1e-8,
                "witness p_{k}: {} vs {}",
                m.at(k),
                p.at(k)
            );
        }
        assert!((m.at(n) - s.value).abs() <= 1e-8);
        assert!(s.spectrum().values().iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn p3_matches_oracle_on_a_grid() {
    let d = 5;
    for i in 0..100 {
        let p2 = 0.2 + 0.8 * i as f64 / 99.0;
        let b = p3_bounds(p2, d).unwrap();
        let prefix = MomentVector::new(vec![5.0, 1.0, p2]).unwrap();
        let (lo, hi) = oracle_bounds(&prefix, 3).unwrap();
        assert!(
            (b.lower() - lo).abs() < 1e-8,
            "p2 = {p2}: {} vs {lo}",
            b.lower()
        );
        assert!(
            (b.upper() - hi).abs() < 1e-8,
            "p2 = {p2}: {} vs {hi}",
            b.upper()
        );
        check_witnesses(&b, &prefix, 3);
    }
}

fn compare(n: usize, d: usize, count: usize, seed: u64) {
    let cases: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_spectrum(&mut rng, d)).collect()
    };
    let failures: Vec<String> = cases
        .par_iter()
        .filter_map(|spec| {
            let full = moments_of_spectrum(&Spectrum::from_unsorted(spec.clone()), n).unwrap();
            let prefix = full.truncate(n - 1).unwrap();
            let b = structured(&prefix, n);
            check_witnesses(&b, &prefix, n);
            let (lo, hi) = oracle_bounds(&prefix, n).unwrap();
            let inside = b.contains(full.at(n), 1e-10);
            let ok = (b.lower() - lo).abs() < 1e-6 && (b.upper() - hi).abs() < 1e-6 && inside;
            (!ok).then(|| {
                format!(
                    "n={n} d={d} spec={spec:?}: structured [{}, {}] oracle [{lo}, {hi}] value {}",
                    b.lower(),
                    b.upper(),
                    full.at(n)
                )
            })
        })
        .collect();
    assert!(
        failures.is_empty(),
        "{} mismatches:\n{}",
        failures.len(),
        failures.join("\n")
    );
}

#[test]
fn p4_matches_oracle() {
    for (d, seed) in [(3, 11), (5, 12), (7, 13)] {
        compare(4, d, 60, seed);
    }
}

#[test]
fn p5_matches_oracle() {
    for (d, seed) in [(3, 21), (5, 22), (7, 23)] {
        compare(5, d, 60, seed);
    }
}
