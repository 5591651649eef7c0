//! Range of `p_4` at fixed `(p_2, p_3)`.
//!
//! The maximizer has the form `(x_1, x_2×β, z, 0, ...)` and the minimizer
//! `(x_1×γ, u, w×(d-γ-1))`. The integers come from relaxed two-level problems
//! with a real multiplicity `β_0` (resp. `γ_0`); the remaining free value is
//! then found by bisection, along which `p_3` is monotone.

use super::{checked_prefix3, two_level, OptimalBounds, Prefix3};
use crate::error::{Error, Result};
use crate::moments::MomentVector;
use crate::tolerances::Tolerances;

/// Boundary prefixes within this distance have a unique spectrum.
const BOUNDARY: f64 = 1e-14;

pub fn p4_bounds(p: &MomentVector) -> Result<OptimalBounds> {
    let pre = checked_prefix3(p, Tolerances::DEFAULT.moment)?;
    let Prefix3 {
        dim: d,
        p3,
        ref bounds,
        ..
    } = pre;
    if d <= 2 || bounds.upper() - bounds.lower() <= BOUNDARY || p3 - bounds.lower() <= BOUNDARY {
        return Ok(OptimalBounds::restated(4, &bounds.min, d));
    }
    if bounds.upper() - p3 <= BOUNDARY {
        return Ok(OptimalBounds::restated(4, &bounds.max, d));
    }
    Ok(OptimalBounds {
        order: 4,
        dim: d,
        min: super::ExtremalSpectrum::from_levels(&minimizer(&pre)?, d, 4),
        max: super::ExtremalSpectrum::from_levels(&maximizer(&pre)?, d, 4),
    })
}

fn cube_sum(levels: &[(f64, f64)]) -> f64 {
    levels.iter().map(|&(v, m)| m * v * v * v).sum()
}

/// Root of an increasing `f` on `[lo, hi]`, clamped to the ends when the sign
/// does not change.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo >= 0.0 {
        return Ok(lo);
    }
    if fhi <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm < flo - 1e-12 || fm > fhi + 1e-12 {
            return Err(Error::Numerical(format!(
                "p_3 is not monotone on the bracket: f({mid}) = {fm:e} outside [{flo:e}, {fhi:e}]"
            )));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1e-3) {
            break;
        }
    }
    // Secant step on the final bracket.
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let root = if fhi > flo {
        lo - flo * (hi - lo) / (fhi - flo)
    } else {
        0.5 * (lo + hi)
    };
    Ok(root.clamp(lo, hi))
}

/// `β_0` solves the two-level problem `(x_1, x_2×β_0)` at the given `p_3`.
fn beta0(p2: f64, p3: f64, d: usize) -> Result<f64> {
    let lo = (1.0 / p2 - 1.0).max(1.0);
    let hi = (d - 1) as f64;
    let f = |b: f64| -> Result<f64> {
        let (x1, x2) = two_level(1.0, b, 1.0, p2)
            .ok_or_else(|| Error::Numerical(format!("no two-level spectrum at β = {b}")))?;
        Ok(cube_sum(&[(x1, 1.0), (x2, b)]) - p3)
    };
    if f(lo)? > f(hi)? + 1e-12 {
        return Err(Error::Numerical("p_3 decreases along the β bracket".into()));
    }
    bisect(lo, hi, f)
}

fn maximizer(pre: &Prefix3) -> Result<Vec<(f64, usize)>> {
    let (d, p2, p3) = (pre.dim, pre.p2, pre.p3);
    let beta = (beta0(p2, p3, d)?.floor() as usize).clamp(1, d - 2);
    let bf = beta as f64;

    // z runs from the point where x_1 and x_2 merge (or 0) up to x_2 of the
    // next multiplicity.
    let z_hi = two_level(1.0, bf + 1.0, 1.0, p2)
        .map(|(_, x2)| x2)
        .ok_or_else(|| Error::Numerical("empty z range".into()))?;
    let z_lo = if (bf + 1.0) * p2 >= 1.0 {
        0.0
    } else {
        (1.0 - ((bf + 1.0) * ((bf + 2.0) * p2 - 1.0)).max(0.0).sqrt()) / (bf + 2.0)
    };
    let split = |z: f64| two_level(1.0, bf, 1.0 - z, p2 - z * z);
    let g = |z: f64| -> Result<f64> {
        let (x1, x2) =
            split(z).ok_or_else(|| Error::Numerical(format!("no spectrum at z = {z}")))?;
        Ok(cube_sum(&[(x1, 1.0), (x2, bf), (z, 1.0)]) - p3)
    };
    let z = bisect(z_lo, z_hi.max(z_lo), g)?;
    let (x1, x2) = split(z).expect("checked during bisection");
    Ok(vec![(x1, 1), (x2, beta), (z, 1)])
}

/// `γ_0` solves the two-level problem `(x_1×γ_0, x_2×(d-γ_0))`.
fn gamma0(p2: f64, p3: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let lo = 1.0;
    let hi = (1.0 / p2).min(df - 1.0);
    let f = |g: f64| -> Result<f64> {
        let (x1, x2) = two_level(g, df - g, 1.0, p2)
            .ok_or_else(|| Error::Numerical(format!("no two-level spectrum at γ = {g}")))?;
        Ok(p3 - cube_sum(&[(x1, g), (x2, df - g)]))
    };
    if f(lo)? > f(hi)? + 1e-12 {
        return Err(Error::Numerical("p_3 increases along the γ bracket".into()));
    }
    bisect(lo, hi, f)
}

fn minimizer(pre: &Prefix3) -> Result<Vec<(f64, usize)>> {
    let (d, p2, p3) = (pre.dim, pre.p2, pre.p3);
    let df = d as f64;
    let gamma = (gamma0(p2, p3, d)?.floor() as usize).clamp(1, d - 2);
    let gf = gamma as f64;
    let rest = df - gf - 1.0;

    // u = w reproduces multiplicity γ; u grows until it meets x_1 or w hits 0.
    let u_lo = two_level(gf, df - gf, 1.0, p2)
        .map(|(_, w)| w)
        .ok_or_else(|| Error::Numerical("empty u range".into()))?;
    let u_hi = if (gf + 1.0) * p2 <= 1.0 {
        two_level(gf + 1.0, rest, 1.0, p2)
            .map(|(x1, _)| x1)
            .unwrap_or(u_lo)
    } else {
        (1.0 - (gf * (p2 * (gf + 1.0) - 1.0)).max(0.0).sqrt()) / (gf + 1.0)
    };
    let split = |u: f64| two_level(gf, rest, 1.0 - u, p2 - u * u);
    let h = |u: f64| -> Result<f64> {
        let (x1, w) =
            split(u).ok_or_else(|| Error::Numerical(format!("no spectrum at u = {u}")))?;
        Ok(p3 - cube_sum(&[(x1, gf), (u, 1.0), (w, rest)]))
    };
    let u = bisect(u_lo, u_hi.max(u_lo), h)?;
    let (x1, w) = split(u).expect("checked during bisection");
    Ok(vec![(x1, gamma), (u, 1), (w.max(0.0), d - gamma - 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::power_sums;
    use approx::assert_abs_diff_eq;

    fn prefix(spectrum: &[f64], n: usize) -> MomentVector {
        power_sums(spectrum, n).unwrap()
    }

    #[test]
    fn interior_spectrum_lies_inside() {
        let p = prefix(&[0.5, 0.3, 0.2, 0.0], 4);
        let b = p4_bounds(&p.truncate(3).unwrap()).unwrap();
        assert!(
            b.lower() <= 0.0722 + 1e-12 && 0.0722 <= b.upper() + 1e-12,
            "{b:?}"
        );
        for s in [&b.min, &b.max] {
            let m = s.moments(4);
            for k in 1..=3 {
                assert_abs_diff_eq!(m.at(k), p.at(k), epsilon = 1e-12);
            }
            assert_abs_diff_eq!(m.at(4), s.value, epsilon = 1e-14);
        }
    }

    #[test]
    fn maximally_mixed() {
        for d in [2usize, 3, 4, 8] {
            let df = d as f64;
            let p = MomentVector::new(vec![df, 1.0, 1.0 / df, 1.0 / (df * df)]).unwrap();
            let b = p4_bounds(&p).unwrap();
            assert_abs_diff_eq!(b.lower(), 1.0 / df.powi(3), epsilon = 1e-15);
            assert_abs_diff_eq!(b.upper(), 1.0 / df.powi(3), epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_prefix_is_infeasible() {
        let p = MomentVector::new(vec![4.0, 1.0, 1.0, 0.25]).unwrap();
        assert!(matches!(
            p4_bounds(&p),
            Err(Error::Infeasible { order: 3, .. })
        ));
    }

    #[test]
    fn boundary_prefixes_have_one_spectrum() {
        let b3 = super::super::p3_bounds(0.4, 5).unwrap();
        for s in [&b3.min, &b3.max] {
            let p = s.moments(3);
            let b = p4_bounds(&p).unwrap();
            let expected = s.moments(4).at(4);
            assert_abs_diff_eq!(b.lower(), expected, epsilon = 1e-14);
            assert_abs_diff_eq!(b.upper(), expected, epsilon = 1e-14);
        }
    }
}
