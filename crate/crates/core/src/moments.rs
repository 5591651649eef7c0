//! Moments of the partially transposed state, `p_k = Tr[(ρ^{T_A})^k]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteState, Spectrum};

/// A finite moment sequence `(m_0, m_1, ..., m_n)`.
///
/// For PT-moments `m_0` is the dimension `d` and `m_1 = 1`; the moment-problem
/// layer uses the same type for arbitrary real sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    /// Needs at least `m_0` and `m_1`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "a moment vector needs order >= 1, got {} entries",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("moments must be finite"));
        }
        Ok(MomentVector { values })
    }

    /// PT-moment prefix `(d, 1, p_2, ..., p_n)`.
    pub fn from_pt_prefix(dim: usize, higher: &[f64]) -> Result<Self> {
        let mut values = vec![dim as f64, 1.0];
        values.extend_from_slice(higher);
        Self::new(values)
    }

    /// Largest index `n`.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    /// `m_k`; panics past the order.
    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// The dimension `p_0` if it is a positive integer.
    pub fn dimension(&self) -> Option<usize> {
        let p0 = self.values[0];
        (p0 >= 1.0 && p0.fract() == 0.0 && p0 < 1e9).then_some(p0 as usize)
    }

    pub fn require_dimension(&self) -> Result<usize> {
        self.dimension().ok_or_else(|| {
            Error::invalid(format!(
                "p_0 = {} is not a positive integer dimension",
                self.values[0]
            ))
        })
    }

    /// Leading `(m_0, ..., m_n)`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n > self.order() {
            return Err(Error::InsufficientOrder {
                required: n,
                available: self.order(),
            });
        }
        Self::new(self.values[..=n].to_vec())
    }

    pub fn with_appended(&self, value: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values.push(value);
        Self::new(values)
    }

    pub(crate) fn require_order(&self, n: usize) -> Result<()> {
        if self.order() < n {
            Err(Error::InsufficientOrder {
                required: n,
                available: self.order(),
            })
        } else {
            Ok(())
        }
    }
}

/// Power sums `Σ x_i^k` for `k = 0..=n` of a spectrum.
pub fn moments_of_spectrum(spectrum: &Spectrum, n: usize) -> Result<MomentVector> {
    power_sums(spectrum.values(), n)
}

pub(crate) fn power_sums(values: &[f64], n: usize) -> Result<MomentVector> {
    if values.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    if n == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    let mut sums = vec![0.0; n + 1];
    for &x in values {
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            *s += pow;
            pow *= x;
        }
    }
    MomentVector::new(sums)
}

/// PT-moments `(p_0, ..., p_n)` computed from one eigendecomposition.
pub fn pt_moments(state: &BipartiteState, n: usize) -> Result<MomentVector> {
    moments_of_spectrum(&state.pt_spectrum(), n)
}

/// `Tr[ρ^2]`, checked against `p_2` from the PT spectrum.
pub fn purity(state: &BipartiteState) -> Result<f64> {
    let frobenius: f64 = state.matrix().iter().map(|z| z.norm_sqr()).sum();
    let p2 = pt_moments(state, 2)?.at(2);
    if (frobenius - p2).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "Tr[rho^2] = {frobenius} disagrees with p_2 = {p2}"
        )));
    }
    Ok(p2)
}
