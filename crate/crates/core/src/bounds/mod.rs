//! Optimal bounds on `p_n` over nonnegative unit-trace spectra with the lower
//! moments fixed.
//!
//! A separable state has a PSD partial transpose, so its PT spectrum is a
//! probability vector. For `n = 3` the range of `p_3` at fixed `p_2` is known in
//! closed form; for `n = 4` the extremal spectra follow from two scalar root
//! solves; for `n = 5` they are order-4 boundary spectra of a shifted or
//! reflected prefix.

mod oracle;
mod order3;
mod order4;
mod order5;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Spectrum;
use crate::moments::{power_sums, MomentVector};
use crate::tolerances::Tolerances;

pub use oracle::{local_search, oracle_bounds, oracle_optimize};
pub use order3::{alpha, p3_bounds};
pub use order4::p4_bounds;
pub use order5::p5_bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

/// A run of equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

/// A spectrum attaining one side of the bound, stored as descending levels.
/// Zeros appear as an explicit final level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpectrum {
    /// `p_n` of this spectrum.
    pub value: f64,
    pub levels: Vec<Level>,
}

impl ExtremalSpectrum {
    /// Drops empty levels and pads with zeros up to `dim`.
    pub(crate) fn from_levels(levels: &[(f64, usize)], dim: usize, order: usize) -> Self {
        let mut out: Vec<Level> = levels
            .iter()
            .filter(|&&(_, m)| m > 0)
            .map(|&(v, m)| Level {
                value: v.max(0.0),
                multiplicity: m,
            })
            .collect();
        let used: usize = out.iter().map(|l| l.multiplicity).sum();
        if used < dim {
            out.push(Level {
                value: 0.0,
                multiplicity: dim - used,
            });
        }
        let value = out
            .iter()
            .map(|l| l.multiplicity as f64 * l.value.powi(order as i32))
            .sum();
        ExtremalSpectrum { value, levels: out }
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_unsorted(
            self.levels
                .iter()
                .flat_map(|l| std::iter::repeat_n(l.value, l.multiplicity))
                .collect(),
        )
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.multiplicity).collect()
    }

    /// Power sums `(d, p_1, ..., p_n)` of the expanded spectrum.
    pub fn moments(&self, n: usize) -> MomentVector {
        power_sums(self.spectrum().values(), n).expect("extremal spectra are nonempty")
    }
}

/// `[p_n^min, p_n^max]` for a feasible prefix, with the spectra attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalBounds {
    pub order: usize,
    pub dim: usize,
    pub min: ExtremalSpectrum,
    pub max: ExtremalSpectrum,
}

impl OptimalBounds {
    /// Both sides attained by the same spectrum.
    pub(crate) fn unique(order: usize, dim: usize, levels: &[(f64, usize)]) -> Self {
        let s = ExtremalSpectrum::from_levels(levels, dim, order);
        OptimalBounds {
            order,
            dim,
            min: s.clone(),
            max: s,
        }
    }

    pub(crate) fn restated(order: usize, spectrum: &ExtremalSpectrum, dim: usize) -> Self {
        let levels: Vec<(f64, usize)> = spectrum
            .levels
            .iter()
            .map(|l| (l.value, l.multiplicity))
            .collect();
        Self::unique(order, dim, &levels)
    }

    pub fn lower(&self) -> f64 {
        self.min.value
    }

    pub fn upper(&self) -> f64 {
        self.max.value
    }

    /// True when `value` lies in the range up to `tol`.
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower() - tol && value <= self.upper() + tol
    }

    /// `max{p^min - value, value - p^max, 0}`.
    pub fn violation(&self, value: f64) -> f64 {
        (self.lower() - value).max(value - self.upper()).max(0.0)
    }

    /// Nearest point of the range; tolerates bounds crossed by rounding.
    pub(crate) fn clamp(&self, value: f64) -> f64 {
        value.max(self.lower()).min(self.upper().max(self.lower()))
    }
}

/// Solves `a·y + b·w = s1`, `a·y² + b·w² = s2` for `y >= w`.
/// `None` when no real solution exists.
pub(crate) fn two_level(a: f64, b: f64, s1: f64, s2: f64) -> Option<(f64, f64)> {
    let disc = a * b * ((a + b) * s2 - s1 * s1);
    let scale = a * b * (a + b) * s2.abs().max(s1 * s1);
    let disc = if disc >= 0.0 {
        disc
    } else if disc > -1e-12 * scale {
        0.0
    } else {
        return None;
    };
    let w = (s1 * b - disc.sqrt()) / (b * (a + b));
    let y = (s1 - b * w) / a;
    Some((y, w))
}

/// `(d, p_2, p_3)` of a prefix whose order-3 conditions hold, with `p_2` and
/// `p_3` clamped into range, together with the `p_3` bounds.
pub(crate) struct Prefix3 {
    pub dim: usize,
    pub p2: f64,
    pub p3: f64,
    pub bounds: OptimalBounds,
}

pub(crate) fn checked_prefix3(p: &MomentVector, tol: f64) -> Result<Prefix3> {
    p.require_order(3)?;
    let dim = p.require_dimension()?;
    let p1 = p.at(1);
    if (p1 - 1.0).abs() > tol {
        return Err(Error::infeasible(
            1,
            format!("p_1 = {p1} but a state has p_1 = 1"),
        ));
    }
    let bounds = p3_bounds(p.at(2), dim)?;
    let p2 = p.at(2).clamp(1.0 / dim as f64, 1.0);
    let p3 = p.at(3);
    if !bounds.contains(p3, tol) {
        return Err(Error::infeasible(
            3,
            format!(
                "p_3 = {p3} lies outside [{}, {}] for p_2 = {p2}, d = {dim}",
                bounds.lower(),
                bounds.upper()
            ),
        ));
    }
    Ok(Prefix3 {
        dim,
        p2,
        p3: bounds.clamp(p3),
        bounds,
    })
}

/// Whether `(p_1, p_2, p_3)` comes from some nonnegative spectrum of dimension
/// `p_0`: `p_1 = 1`, `1/d <= p_2 <= 1` and `p_3` inside its optimal range.
pub fn feasibility_order3(p: &MomentVector) -> bool {
    checked_prefix3(p, Tolerances::DEFAULT.moment).is_ok()
}

/// The value of `O_n`, or why it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpptViolation {
    pub order: usize,
    /// `None` when a lower order already detects entanglement or the prefix
    /// admits no nonnegative spectrum.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undefined_reason: Option<String>,
}

impl OpptViolation {
    fn defined(order: usize, value: f64) -> Self {
        OpptViolation {
            order,
            value: Some(value),
            undefined_reason: None,
        }
    }

    fn undefined(order: usize, reason: impl Into<String>) -> Self {
        OpptViolation {
            order,
            value: None,
            undefined_reason: Some(reason.into()),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }

    pub fn detects(&self, tol: f64) -> bool {
        self.value.is_some_and(|v| v > tol)
    }
}

/// `O_n` for `n` in `{3, 4, 5}` with default tolerances.
pub fn oppt_violation(p: &MomentVector, n: usize) -> Result<OpptViolation> {
    let chain = oppt_chain(p, n, &Tolerances::DEFAULT)?;
    Ok(chain.into_iter().last().expect("chain covers order 3"))
}

/// `O_3, ..., O_max_order`. `O_n` is defined only when `O_{n-1}` is defined and
/// below `tol.detection`. `O_3` uses the lower bound alone since every state
/// satisfies `p_3 <= p_3^max`.
pub fn oppt_chain(
    p: &MomentVector,
    max_order: usize,
    tol: &Tolerances,
) -> Result<Vec<OpptViolation>> {
    if !(3..=5).contains(&max_order) {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            reason: "optimal bounds are available for n = 3, 4, 5".into(),
        });
    }
    p.require_order(max_order)?;
    let dim = p.require_dimension()?;
    let mut out = Vec::with_capacity(max_order - 2);

    let p2 = p.at(2);
    let lo = 1.0 / dim as f64;
    if (p.at(1) - 1.0).abs() > tol.moment || p2 < lo - tol.moment || p2 > 1.0 + tol.moment {
        let reason = format!(
            "p_1 = {}, p_2 = {p2} are not the moments of a state of dimension {dim}",
            p.at(1)
        );
        for n in 3..=max_order {
            out.push(OpptViolation::undefined(n, reason.clone()));
        }
        return Ok(out);
    }
    let b3 = p3_bounds(p2, dim)?;
    let o3 = (b3.lower() - p.at(3)).max(0.0);
    out.push(OpptViolation::defined(3, o3));
    if max_order == 3 {
        return Ok(out);
    }

    let mut prefix: Vec<f64> = vec![dim as f64, 1.0, p2.clamp(lo, 1.0)];
    let mut bounds = b3;
    let mut previous = o3;
    let mut previous_raw = p.at(3);
    for n in 4..=max_order {
        if previous > tol.detection {
            out.push(OpptViolation::undefined(
                n,
                format!("O_{} = {previous:e} already detects", n - 1),
            ));
            continue;
        }
        if !bounds.contains(previous_raw, tol.moment) {
            out.push(OpptViolation::undefined(
                n,
                format!("p_{} = {previous_raw} lies outside its range", n - 1),
            ));
            previous = f64::INFINITY;
            continue;
        }
        prefix.push(bounds.clamp(previous_raw));
        let mv = MomentVector::new(prefix.clone())?;
        bounds = if n == 4 {
            p4_bounds(&mv)?
        } else {
            p5_bounds(&mv)?
        };
        previous_raw = p.at(n);
        previous = bounds.violation(previous_raw);
        out.push(OpptViolation::defined(n, previous));
    }
    Ok(out)
}
