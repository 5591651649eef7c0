//! Brute-force reference for the structured solvers, usable for `d <= 8`.
//!
//! [`oracle_bounds`] enumerates every ordered multiplicity pattern with at
//! most `n - 1` distinct nonzero values, solves each power-sum system by
//! damped Gauss-Newton from random starts and keeps ordered nonnegative
//! solutions. [`local_search`] instead walks the constraint manifold directly
//! with projected gradient steps.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Extremum;
use crate::error::{Error, Result};
use crate::moments::MomentVector;

const MAX_DIM: usize = 8;
const STARTS: usize = 32;

/// Extremum of `p_n` given `p_1..p_{n-1}`.
pub fn oracle_optimize(p: &MomentVector, n: usize, mode: Extremum) -> Result<f64> {
    let (lo, hi) = oracle_bounds(p, n)?;
    Ok(match mode {
        Extremum::Min => lo,
        Extremum::Max => hi,
    })
}

/// `(min, max)` of `p_n` given `p_1..p_{n-1}`.
pub fn oracle_bounds(p: &MomentVector, n: usize) -> Result<(f64, f64)> {
    let d = p.require_dimension()?;
    if d > MAX_DIM {
        return Err(Error::Scale(format!(
            "the oracle handles d <= {MAX_DIM}, got {d}"
        )));
    }
    if n < 2 {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "nothing to optimize below order 2".into(),
        });
    }
    p.require_order(n - 1)?;
    let targets: Vec<f64> = (1..n).map(|k| p.at(k)).collect();
    if targets.iter().any(|&t| t <= 0.0) {
        return Err(Error::infeasible(
            n - 1,
            "a nonnegative spectrum has positive power sums",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0f0_ac1e);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in 1..n {
        for mults in compositions(r, d) {
            for start in 0..STARTS {
                // Alternate uniform and log-uniform draws so that levels
                // spanning several decades are reachable.
                let mut v: Vec<f64> = (0..r)
                    .map(|_| {
                        let u = rng.random::<f64>();
                        if start % 2 == 0 {
                            u
                        } else {
                            10f64.powf(-5.0 * u)
                        }
                    })
                    .collect();
                v.sort_by(|a, b| b.total_cmp(a));
                let s: f64 = v.iter().zip(&mults).map(|(x, &m)| x * m as f64).sum();
                v.iter_mut().for_each(|x| *x /= s);
                let Some(v) = gauss_newton(&mults, &targets, v) else {
                    continue;
                };
                if v.windows(2).any(|w| w[0] < w[1] - 1e-9) || v.iter().any(|&x| x < -1e-12) {
                    continue;
                }
                let value: f64 = v
                    .iter()
                    .zip(&mults)
                    .map(|(x, &m)| m as f64 * x.max(0.0).powi(n as i32))
                    .sum();
                lo = lo.min(value);
                hi = hi.max(value);
            }
        }
    }
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(Error::infeasible(
            n - 1,
            "no nonnegative spectrum matches the prefix",
        ))
    }
}

/// All `r`-tuples of positive integers with sum at most `d`.
fn compositions(r: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let need = r - cur.len() - 1;
        for m in 1..=left.saturating_sub(need) {
            cur.push(m);
            rec(r, left - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, d, &mut Vec::new(), &mut out);
    out
}

fn power_residual(mults: &[usize], v: &[f64], targets: &[f64]) -> DVector<f64> {
    DVector::from_fn(targets.len(), |k, _| {
        let s: f64 = v
            .iter()
            .zip(mults)
            .map(|(x, &m)| m as f64 * x.powi(k as i32 + 1))
            .sum();
        s / targets[k] - 1.0
    })
}

/// Gauss-Newton with step halving; least squares when overdetermined.
fn gauss_newton(mults: &[usize], targets: &[f64], mut v: Vec<f64>) -> Option<Vec<f64>> {
    let r = v.len();
    let mut res = power_residual(mults, &v, targets);
    for _ in 0..80 {
        if res.amax() < 1e-14 {
            break;
        }
        let jac = DMatrix::from_fn(targets.len(), r, |k, i| {
            (k + 1) as f64 * mults[i] as f64 * v[i].powi(k as i32) / targets[k]
        });
        let mut normal = jac.transpose() * &jac;
        for i in 0..r {
            normal[(i, i)] += 1e-13;
        }
        let step = normal.lu().solve(&(-(jac.transpose() * &res)))?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let trial_res = power_residual(mults, &trial, targets);
            if trial_res.norm() < res.norm() {
                v = trial;
                res = trial_res;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return (res.amax() < 1e-10).then_some(v);
            }
        }
    }
    (res.amax() < 1e-10).then_some(v)
}

/// Constraint residuals `Σ x_i^k - p_k` for `k = 1..n-1` and their Jacobian on
/// the free coordinates.
fn constraints(x: &[f64], free: &[usize], targets: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let c = DVector::from_fn(targets.len(), |k, _| {
        x.iter().map(|v| v.powi(k as i32 + 1)).sum::<f64>() - targets[k]
    });
    let j = DMatrix::from_fn(targets.len(), free.len(), |k, i| {
        (k + 1) as f64 * x[free[i]].powi(k as i32)
    });
    (c, j)
}

/// Pulls `x` back onto the constraint set with minimum-norm Gauss-Newton
/// corrections. Coordinates that would turn negative are pinned at zero.
fn restore(x: &mut [f64], free: &mut Vec<usize>, targets: &[f64]) -> bool {
    for _ in 0..60 {
        let (c, j) = constraints(x, free, targets);
        if c.iter().zip(targets).all(|(r, t)| r.abs() <= 1e-13 * t) {
            return true;
        }
        if free.len() < targets.len() {
            return false;
        }
        let mut jjt = &j * j.transpose();
        for i in 0..jjt.nrows() {
            jjt[(i, i)] += 1e-16;
        }
        let Some(y) = jjt.lu().solve(&c) else {
            return false;
        };
        let delta = -(j.transpose() * y);
        let mut pinned = false;
        for (i, &idx) in free.iter().enumerate() {
            x[idx] += delta[i];
            if x[idx] < 0.0 {
                x[idx] = 0.0;
                pinned = true;
            }
        }
        if pinned {
            free.retain(|&i| x[i] > 0.0);
        }
    }
    false
}

/// Best `p_n` found by projected gradient ascent (or descent) over
/// `restarts` random starting points. A heuristic cross-check: it returns a
/// feasible value, which approaches the true extremum when the search
/// converges.
pub fn local_search(
    p: &MomentVector,
    n: usize,
    mode: Extremum,
    restarts: usize,
    seed: u64,
) -> Option<f64> {
    let d = p.dimension()?;
    if n < 2 || p.order() + 1 < n {
        return None;
    }
    let targets: Vec<f64> = (1..n).map(|k| p.at(k)).collect();
    let sign = if mode == Extremum::Max { 1.0 } else { -1.0 };
    let objective = |x: &[f64]| sign * x.iter().map(|v| v.powi(n as i32)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<f64> = None;

    for _ in 0..restarts {
        let mut x: Vec<f64> = (0..d).map(|_| rng.random::<f64>().powi(2)).collect();
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= s);
        let mut free: Vec<usize> = (0..d).collect();
        if !restore(&mut x, &mut free, &targets) {
            continue;
        }
        let mut f = objective(&x);
        let mut t = 1e-2;
        for _ in 0..4000 {
            if free.len() <= targets.len() || t < 1e-14 {
                break;
            }
            let (_, j) = constraints(&x, &free, &targets);
            let g = DVector::from_fn(free.len(), |i, _| {
                sign * n as f64 * x[free[i]].powi(n as i32 - 1)
            });
            let jjt = &j * j.transpose();
            let Some(y) = jjt.lu().solve(&(&j * &g)) else {
                break;
            };
            let pg = &g - j.transpose() * y;
            let norm = pg.norm();
            if norm < 1e-15 {
                break;
            }
            let mut trial = x.clone();
            let mut trial_free = free.clone();
            for (i, &idx) in free.iter().enumerate() {
                trial[idx] = (trial[idx] + t * pg[i] / norm).max(0.0);
            }
            trial_free.retain(|&i| trial[i] > 0.0);
            if restore(&mut trial, &mut trial_free, &targets) && objective(&trial) > f {
                f = objective(&trial);
                x = trial;
                free = trial_free;
                t *= 1.5;
            } else {
                t *= 0.5;
            }
        }
        let value = sign * f;
        best = Some(match best {
            None => value,
            Some(b) if mode == Extremum::Max => b.max(value),
            Some(b) => b.min(value),
        });
    }
    best
}
