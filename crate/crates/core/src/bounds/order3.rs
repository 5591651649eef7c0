//! Closed-form range of `p_3` at fixed `p_2`.

use super::OptimalBounds;
use crate::error::{Error, Result};

/// `α = ⌊1/p_2⌋`, the multiplicity of the largest eigenvalue in the minimizing
/// spectrum. At `p_2 = 1/k` the rounding goes to `k`.
pub fn alpha(p2: f64) -> usize {
    let a = (1.0 / p2).floor().max(1.0) as usize;
    if (a + 1) as f64 * p2 <= 1.0 + 1e-12 {
        a + 1
    } else {
        a
    }
}

/// Bounds on `p_3` over nonnegative spectra of length `d` with `Σx = 1` and
/// `Σx² = p_2`.
///
/// The minimum is attained by `(x×α, 1-αx, 0, ...)` and the maximum by
/// `(1-(d-1)y, y×(d-1))`.
pub fn p3_bounds(p2: f64, d: usize) -> Result<OptimalBounds> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let df = d as f64;
    if !p2.is_finite() || p2 < 1.0 / df - 1e-9 || p2 > 1.0 + 1e-9 {
        return Err(Error::infeasible(
            2,
            format!("p_2 = {p2} lies outside [1/{d}, 1]"),
        ));
    }
    let p2 = p2.clamp(1.0 / df, 1.0);
    if d == 1 {
        return Ok(OptimalBounds::unique(3, 1, &[(1.0, 1)]));
    }

    let a = alpha(p2).min(d);
    let af = a as f64;
    let x = (af + (af * (p2 * (af + 1.0) - 1.0)).max(0.0).sqrt()) / (af * (af + 1.0));
    let rest = (1.0 - af * x).max(0.0);
    let min_levels = [(x, a), (rest, if a < d { 1 } else { 0 })];

    let y = (df - 1.0 - ((df - 1.0) * (p2 * df - 1.0)).max(0.0).sqrt()) / (df * (df - 1.0));
    let x1 = 1.0 - (df - 1.0) * y;
    let max_levels = [(x1, 1), (y.max(0.0), d - 1)];
    if d == 2 {
        return Ok(OptimalBounds::unique(3, 2, &min_levels));
    }

    Ok(OptimalBounds {
        order: 3,
        dim: d,
        min: super::ExtremalSpectrum::from_levels(&min_levels, d, 3),
        max: super::ExtremalSpectrum::from_levels(&max_levels, d, 3),
    })
}
