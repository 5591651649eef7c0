//! Range of `p_5` at fixed `(p_2, p_3, p_4)`.
//!
//! Both extremal spectra come from order-4 boundary problems. Lowering every
//! eigenvalue by a common `w` keeps the prefix realizable up to some largest
//! `w*`. There the shifted prefix sits on a `p_4` bound, and its unique spectrum
//! shifted back is the maximizer `(x_1, x_2×κ, x_{κ+2}, x_{κ+3}×(d-κ-2))`.
//!
//! The minimizer `(x_1×η, x_{η+1}, x_{η+2}×ξ, x_{η+ξ+2}, 0, ...)` is the mirror
//! image. With `c` nonzero eigenvalues, `t - x` stays realizable for `t` down to
//! a smallest `t*`. The largest `c` whose reflected boundary spectrum maps back
//! to nonnegative eigenvalues gives the minimum.

use super::{p4_bounds, ExtremalSpectrum, OptimalBounds};
use crate::error::{Error, Result};
use crate::moments::MomentVector;
use crate::tolerances::Tolerances;

const BINOMIAL: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

/// Slack on nonnegativity of a reflected candidate.
const NONNEGATIVE: f64 = 1e-12;

pub fn p5_bounds(p: &MomentVector) -> Result<OptimalBounds> {
    p.require_order(4)?;
    let b4 = p4_bounds(&p.truncate(3)?)?;
    let d = b4.dim;
    let p4 = p.at(4);
    if !b4.contains(p4, Tolerances::DEFAULT.moment) {
        return Err(Error::infeasible(
            4,
            format!("p_4 = {p4} lies outside [{}, {}]", b4.lower(), b4.upper()),
        ));
    }
    let p4 = b4.clamp(p4);
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * p4;
    if d <= 2 || near(b4.lower(), b4.upper()) || near(p4, b4.lower()) {
        return Ok(OptimalBounds::restated(5, &b4.min, d));
    }
    if near(p4, b4.upper()) {
        return Ok(OptimalBounds::restated(5, &b4.max, d));
    }

    let sums = [
        d as f64,
        1.0,
        p.at(2).clamp(1.0 / d as f64, 1.0),
        p.at(3),
        p4,
    ];
    let max = maximizer(&sums, d)?;
    let min = minimizer(&sums, d)?;
    Ok(OptimalBounds {
        order: 5,
        dim: d,
        min,
        max,
    })
}

/// Prefix of `y_i = a + b x_i` over `count` entries, normalized to unit trace.
/// Returns the prefix and the trace `Σ y_i` it was divided by.
fn affine_prefix(sums: &[f64; 5], count: usize, a: f64, b: f64) -> Option<(MomentVector, f64)> {
    let mut raw = [count as f64; 5];
    for (k, row) in BINOMIAL.iter().enumerate().skip(1) {
        raw[k] = (0..=k)
            .map(|j| {
                let pj = if j == 0 { count as f64 } else { sums[j] };
                row[j] * a.powi((k - j) as i32) * b.powi(j as i32) * pj
            })
            .sum();
    }
    let trace = raw[1];
    if trace.is_nan() || trace <= 0.0 {
        return None;
    }
    let values = (0..5).map(|k| {
        if k == 0 {
            raw[0]
        } else {
            raw[k] / trace.powi(k as i32)
        }
    });
    MomentVector::new(values.collect()).ok().map(|m| (m, trace))
}

/// Levels of the order-4 boundary spectrum at `q`, or `None` off the range.
fn boundary_levels(q: &MomentVector) -> Option<Vec<(f64, usize)>> {
    let b = p4_bounds(&q.truncate(3).ok()?).ok()?;
    let q4 = q.at(4);
    if !b.contains(q4, 0.0) {
        return None;
    }
    let side = if b.upper() - q4 < q4 - b.lower() {
        &b.max
    } else {
        &b.min
    };
    Some(
        side.levels
            .iter()
            .map(|l| (l.value, l.multiplicity))
            .collect(),
    )
}

/// Last point of `good -> bad` where `ok` holds, assuming it holds on an
/// interval containing `good`.
fn frontier(mut good: f64, mut bad: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

fn maximizer(sums: &[f64; 5], d: usize) -> Result<ExtremalSpectrum> {
    let shifted = |w: f64| affine_prefix(sums, d, -w, 1.0);
    let feasible = |w: f64| shifted(w).is_some_and(|(q, _)| boundary_levels(&q).is_some());
    let w = frontier(0.0, 1.0 / d as f64, feasible);
    let (q, trace) = shifted(w).ok_or_else(|| Error::Numerical("lost the p_5 maximizer".into()))?;
    let levels =
        boundary_levels(&q).ok_or_else(|| Error::Numerical("lost the p_5 maximizer".into()))?;
    let levels: Vec<(f64, usize)> = levels
        .into_iter()
        .map(|(y, m)| (w + trace * y, m))
        .collect();
    Ok(ExtremalSpectrum::from_levels(&levels, d, 5))
}

fn minimizer(sums: &[f64; 5], d: usize) -> Result<ExtremalSpectrum> {
    for c in (2..=d).rev() {
        let reflected = |t: f64| affine_prefix(sums, c, t, -1.0);
        let feasible = |t: f64| reflected(t).is_some_and(|(q, _)| boundary_levels(&q).is_some());
        if !feasible(1.0) {
            continue;
        }
        let t = frontier(1.0, 1.0 / c as f64, feasible);
        let Some((q, trace)) = reflected(t) else {
            continue;
        };
        let Some(levels) = boundary_levels(&q) else {
            continue;
        };
        let mut levels: Vec<(f64, usize)> = levels
            .into_iter()
            .map(|(y, m)| (t - trace * y, m))
            .collect();
        if levels.iter().any(|&(x, _)| x < -NONNEGATIVE) {
            continue;
        }
        levels.sort_by(|a, b| b.0.total_cmp(&a.0));
        return Ok(ExtremalSpectrum::from_levels(&levels, d, 5));
    }
    Err(Error::Numerical(
        "no nonnegative p_5 minimizer found".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::power_sums;
    use approx::assert_abs_diff_eq;

    #[test]
    fn four_level_prefix_in_dimension_four_is_rigid() {
        let spec = [0.4, 0.3, 0.2, 0.1];
        let p = power_sums(&spec, 5).unwrap();
        assert_abs_diff_eq!(p.at(5), 0.0130, epsilon = 1e-12);
        let b = p5_bounds(&p.truncate(4).unwrap()).unwrap();
        assert_abs_diff_eq!(b.lower(), p.at(5), epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper(), p.at(5), epsilon = 1e-12);
    }

    #[test]
    fn trivial_prefixes() {
        let pure = MomentVector::new(vec![5.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let b = p5_bounds(&pure).unwrap();
        assert_abs_diff_eq!(b.lower(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.upper(), 1.0, epsilon = 1e-14);
        let d = 6.0f64;
        let mixed = MomentVector::new((0..=4).map(|k| d.powi(1 - k)).collect()).unwrap();
        let b = p5_bounds(&mixed).unwrap();
        assert_abs_diff_eq!(b.lower(), d.powi(-4), epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper(), d.powi(-4), epsilon = 1e-15);
    }

    #[test]
    fn interior_prefix_brackets_its_value() {
        let spec = [0.3, 0.25, 0.2, 0.1, 0.1, 0.05, 0.0];
        let p = power_sums(&spec, 5).unwrap();
        let b = p5_bounds(&p.truncate(4).unwrap()).unwrap();
        assert!(b.lower() < p.at(5) && p.at(5) < b.upper(), "{b:?}");
        for s in [&b.min, &b.max] {
            let m = s.moments(5);
            for k in 1..=4 {
                assert_abs_diff_eq!(m.at(k), p.at(k), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn extremal_patterns() {
        let spec = [0.3, 0.25, 0.2, 0.1, 0.1, 0.05, 0.0];
        let b = p5_bounds(&power_sums(&spec, 4).unwrap()).unwrap();
        let max = b.max.multiplicities();
        assert_eq!(max.len(), 4, "{max:?}");
        assert_eq!((max[0], max[2]), (1, 1));
        let min = b.min.multiplicities();
        assert!(min.len() >= 4 && min[1] == 1 && min[3] == 1, "{min:?}");
    }

    #[test]
    fn affine_prefix_of_a_shift() {
        let spec = [0.5, 0.3, 0.2];
        let p = power_sums(&spec, 4).unwrap();
        let sums = [3.0, 1.0, p.at(2), p.at(3), p.at(4)];
        let (q, trace) = affine_prefix(&sums, 3, -0.1, 1.0).unwrap();
        assert_abs_diff_eq!(trace, 0.7, epsilon = 1e-15);
        let expect = power_sums(&[0.4 / 0.7, 0.2 / 0.7, 0.1 / 0.7], 4).unwrap();
        for k in 0..=4 {
            assert_abs_diff_eq!(q.at(k), expect.at(k), epsilon = 1e-14);
        }
    }
}
