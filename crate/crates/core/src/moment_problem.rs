//! Truncated Hamburger and Stieltjes moment problems.
//!
//! A sequence `m = (m_0, ..., m_n)` lies in the closure of the Hamburger set
//! iff `H_{⌊n/2⌋}(m) ⪰ 0`, and in the closure of the Stieltjes set iff in
//! addition `B_{⌊(n-1)/2⌋}(m) ⪰ 0`. When `H_ℓ` is nonsingular the sequence is
//! realized exactly as `m_k = ⟨φ|X^k|φ⟩` by extending it flatly to order
//! `2ℓ + 2` and reading `X` off the Gram vectors of `H_{ℓ+1}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hankel::{hankel_b, hankel_h};
use crate::linalg::{symmetric_eigenvalues, symmetric_min_eigenpair};
use crate::moments::MomentVector;
use crate::tolerances::Tolerances;

fn scale_of(values: &[f64]) -> f64 {
    values.iter().fold(1.0f64, |acc, x| acc.max(x.abs()))
}

fn psd_relative(matrix: &DMatrix<f64>, tol: f64) -> bool {
    let eig = symmetric_eigenvalues(matrix);
    let min = *eig.last().unwrap();
    min >= -tol * scale_of(&eig)
}

/// `m ∈ cl(M_n)`: `H_{⌊n/2⌋}(m) ⪰ 0`.
pub fn membership_mn(m: &MomentVector) -> bool {
    let n = m.order();
    psd_relative(
        &hankel_h(m, n / 2).expect("order covers H"),
        Tolerances::DEFAULT.criterion_psd,
    )
}

/// `m ∈ cl(M_n^+)`: additionally `B_{⌊(n-1)/2⌋}(m) ⪰ 0`.
pub fn membership_mn_plus(m: &MomentVector) -> bool {
    let n = m.order();
    membership_mn(m)
        && psd_relative(
            &hankel_b(m, (n - 1) / 2).expect("order covers B"),
            Tolerances::DEFAULT.criterion_psd,
        )
}

/// Spectral split of `H_ℓ` into range and numerical null space.
struct HankelSpectrum {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    threshold: f64,
}

impl HankelSpectrum {
    fn new(h: &DMatrix<f64>, rank_tol: f64) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let largest = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        HankelSpectrum {
            threshold: (rank_tol * largest).max(1e-14),
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn is_nonsingular(&self) -> bool {
        self.min() > self.threshold
    }

    fn is_psd(&self) -> bool {
        self.min() >= -self.threshold
    }

    /// Moore-Penrose pseudo-inverse applied to `v`.
    fn pinv_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (i, &lam) in self.values.iter().enumerate() {
            if lam.abs() > self.threshold {
                let col = self.vectors.column(i);
                out += col * (col.dot(v) / lam);
            }
        }
        out
    }

    /// Component of `v` in the numerical null space.
    fn null_component(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (i, &lam) in self.values.iter().enumerate() {
            if lam.abs() <= self.threshold {
                let col = self.vectors.column(i);
                out += col * col.dot(v);
            }
        }
        out
    }
}

/// Extends `m` to order `2ℓ + 2` (`ℓ = ⌊n/2⌋`) so that `H_{ℓ+1}` keeps the
/// rank of `H_ℓ`.
///
/// For even `n` the free moment `m_{2ℓ+1}` is `odd_moment` when given and
/// otherwise the value minimizing the resulting `m_{2ℓ+2} = μ^T H_ℓ^{-1} μ`.
/// A singular `H_ℓ` is accepted when `μ` lies in its range (the sequence is
/// then already recursively generated); otherwise the result is
/// [`Error::SingularHankel`].
pub fn flat_extension(m: &MomentVector, odd_moment: Option<f64>) -> Result<MomentVector> {
    let tol = Tolerances::DEFAULT;
    let n = m.order();
    let ell = n / 2;
    let h = hankel_h(m, ell)?;
    let spec = HankelSpectrum::new(&h, tol.rank);
    if !spec.is_psd() {
        return Err(Error::invalid(format!(
            "H_{ell} has eigenvalue {:e}; the sequence is not in the closure of M_{n}",
            spec.min()
        )));
    }

    let mut values = m.values().to_vec();
    let mut mu = DVector::from_fn(ell + 1, |i, _| {
        if ell + 1 + i <= n {
            m.at(ell + 1 + i)
        } else {
            0.0
        }
    });
    if n.is_multiple_of(2) {
        let t = match odd_moment {
            Some(t) => t,
            None => free_odd_moment(&spec, &mu),
        };
        mu[ell] = t;
        values.push(t);
    }

    if !spec.is_nonsingular() {
        let null = spec.null_component(&mu);
        if null.norm() > 1e-8 * scale_of(mu.as_slice()) {
            return Err(Error::SingularHankel(format!(
                "H_{ell} is singular (smallest eigenvalue {:e}) and mu_{ell} leaves its range; \
                 the sequence lies only in the closure",
                spec.min()
            )));
        }
    }
    values.push(mu.dot(&spec.pinv_apply(&mu)));
    MomentVector::new(values)
}

/// Choice of `m_{2ℓ+1}` for even orders: put `μ` in the range of a singular
/// `H_ℓ` if possible, else minimize `μ^T H_ℓ^+ μ`.
fn free_odd_moment(spec: &HankelSpectrum, mu: &DVector<f64>) -> f64 {
    let ell = mu.len() - 1;
    let mut base = mu.clone();
    base[ell] = 0.0;
    let e = DVector::from_fn(ell + 1, |i, _| if i == ell { 1.0 } else { 0.0 });
    if !spec.is_nonsingular() {
        let ne = spec.null_component(&e);
        let nn = ne.norm_squared();
        if nn > 1e-12 {
            return -spec.null_component(&base).dot(&ne) / nn;
        }
    }
    let ge = spec.pinv_apply(&e);
    let denom = e.dot(&ge);
    if denom.abs() < 1e-300 {
        0.0
    } else {
        -base.dot(&ge) / denom
    }
}

/// `m_k = ⟨φ|X^k|φ⟩` with a real vector `φ` and real symmetric `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRealization {
    pub vector: DVector<f64>,
    pub observable: DMatrix<f64>,
}

impl MomentRealization {
    /// `(⟨φ|X^k|φ⟩)_{k=0..=n}`.
    pub fn moments(&self, n: usize) -> Vec<f64> {
        let mut v = self.vector.clone();
        let mut out = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            out.push(self.vector.dot(&v));
            v = &self.observable * v;
        }
        out
    }

    /// Gram matrix of the Krylov vectors `X^i φ`, `i = 0..=k`.
    pub fn krylov_gram(&self, k: usize) -> DMatrix<f64> {
        let mut vecs = Vec::with_capacity(k + 1);
        let mut v = self.vector.clone();
        for _ in 0..=k {
            vecs.push(v.clone());
            v = &self.observable * v;
        }
        DMatrix::from_fn(k + 1, k + 1, |i, j| vecs[i].dot(&vecs[j]))
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Realizes `m` by a vector and an observable, optionally requiring `X ⪰ 0`.
///
/// The dimension of the realization is the rank of `H_ℓ`.
pub fn realize_moments(
    m: &MomentVector,
    require_psd_observable: bool,
) -> Result<MomentRealization> {
    let tol = Tolerances::DEFAULT;
    let n = m.order();
    let ell = n / 2;

    let stieltjes = if require_psd_observable {
        Some(stieltjes_check(m, &tol)?)
    } else {
        None
    };
    let odd_moment = stieltjes.as_ref().and_then(|c| c.odd_moment);
    let ext = match flat_extension(m, odd_moment) {
        Err(Error::SingularHankel(_)) if stieltjes.is_some() => {
            return Err(stieltjes.unwrap().reject())
        }
        other => other?,
    };
    let h_big = hankel_h(&ext, ell + 1)?;
    let h = hankel_h(&ext, ell)?;
    let spec = HankelSpectrum::new(&h, tol.rank);

    // Columns of `phi` are φ_0..φ_{ℓ+1} with ⟨φ_i|φ_j⟩ = m_{i+j}.
    let phi = if spec.is_nonsingular() {
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("Cholesky factorization of H failed".into()))?;
        let l = chol.l();
        let mu = h_big.view((0, ell + 1), (ell + 1, 1)).into_owned();
        let last = l
            .solve_lower_triangular(&mu)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let mut phi = DMatrix::zeros(ell + 1, ell + 2);
        phi.view_mut((0, 0), (ell + 1, ell + 1))
            .copy_from(&l.transpose());
        phi.set_column(ell + 1, &last.column(0));
        phi
    } else {
        gram_factor(&h_big, tol.rank)
    };

    let cols = phi.ncols();
    let basis = phi.columns(0, cols - 1).into_owned();
    let shifted = phi.columns(1, cols - 1).into_owned();
    let pinv = basis
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let x = &shifted * pinv;
    let x = (&x + x.transpose()) * 0.5;

    let realization = MomentRealization {
        vector: phi.column(0).into_owned(),
        observable: x,
    };
    for (k, (got, want)) in realization.moments(n).iter().zip(m.values()).enumerate() {
        if (got - want).abs() > tol.realization * want.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "realization reproduces m_{k} = {got} instead of {want}"
            )));
        }
    }
    if let Some(check) = stieltjes {
        let min = symmetric_eigenvalues(&realization.observable)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -tol.realization {
            return Err(check.reject());
        }
    }
    Ok(realization)
}

/// Rank-revealing factor: columns `φ_i ∈ R^r` with `⟨φ_i|φ_j⟩ = H_{ij}`.
fn gram_factor(h: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(h.clone());
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let keep: Vec<usize> = (0..h.nrows())
        .filter(|&i| eig.eigenvalues[i] > rank_tol * largest)
        .collect();
    DMatrix::from_fn(keep.len(), h.ncols(), |r, c| {
        let i = keep[r];
        eig.eigenvectors[(c, i)] * eig.eigenvalues[i].sqrt()
    })
}

/// Positivity data of the largest `B` fixed by `m`.
struct StieltjesCheck {
    odd_moment: Option<f64>,
    eigenvalue: f64,
    witness: Vec<f64>,
}

impl StieltjesCheck {
    fn reject(&self) -> Error {
        Error::NotStieltjes {
            eigenvalue: self.eigenvalue,
            witness: self.witness.clone(),
        }
    }
}

/// Checks the Stieltjes precondition and, for even `n`, picks `m_{2ℓ+1}`.
///
/// A singular `B` forces `x·μ` onto the roots of its kernel polynomial, so the
/// flat extension is the only candidate and the caller verifies `X ⪰ 0`. With
/// even `n` and `H_ℓ ≻ 0` that is impossible: `μ` would need `ℓ + 1` atoms.
fn stieltjes_check(m: &MomentVector, tol: &Tolerances) -> Result<StieltjesCheck> {
    let n = m.order();
    let ell = n / 2;
    let known = if n % 2 == 1 {
        ell
    } else {
        ell.saturating_sub(1)
    };
    let b = hankel_b(m, known)?;
    let (min, witness) = symmetric_min_eigenpair(&b);
    let largest = symmetric_eigenvalues(&b)[0].abs().max(1e-300);
    let mut check = StieltjesCheck {
        odd_moment: None,
        eigenvalue: min,
        witness: witness.iter().copied().collect(),
    };
    if min < -tol.rank * largest {
        return Err(check.reject());
    }
    if n % 2 == 1 {
        return Ok(check);
    }
    let h = hankel_h(m, ell)?;
    let spec = HankelSpectrum::new(&h, tol.rank);
    let mu = DVector::from_fn(
        ell + 1,
        |i, _| if i < ell { m.at(ell + 1 + i) } else { 0.0 },
    );
    let preferred = free_odd_moment(&spec, &mu);
    if min <= tol.rank * largest {
        if spec.is_nonsingular() {
            return Err(check.reject());
        }
        check.odd_moment = Some(preferred);
        return Ok(check);
    }
    // B_ℓ = [[B_{ℓ-1}, w], [w^T, t]] is positive definite iff t > w^T B_{ℓ-1}^{-1} w.
    let w = DVector::from_fn(ell, |i, _| m.at(ell + 1 + i));
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("Cholesky factorization of B failed".into()))?;
    let floor = w.dot(&chol.solve(&w));
    // A singular H_ℓ admits only the flat value; B_ℓ may then be singular too.
    if !spec.is_nonsingular() && preferred >= floor - tol.rank * floor.abs().max(largest) {
        check.odd_moment = Some(preferred);
        return Ok(check);
    }
    let margin = 1e-3 * floor.abs().max(largest);
    check.odd_moment = Some(preferred.max(floor + margin));
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mv(v: &[f64]) -> MomentVector {
        MomentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn boundary_counterexamples_are_in_the_closures() {
        let a = mv(&[1.0, 1.0, 1.0, 1.0, 2.0]);
        assert!(membership_mn(&a));
        let b = mv(&[1.0, 1.0, 2.0, 4.0, 9.0]);
        assert!(membership_mn(&b));
        assert!(membership_mn_plus(&b));
        assert!(!membership_mn(&mv(&[1.0, 0.0, -1.0])));
    }

    #[test]
    fn flat_extension_values() {
        let ext = flat_extension(&mv(&[1.0, 0.0, 1.0]), Some(0.0)).unwrap();
        assert_eq!(ext.order(), 4);
        assert_abs_diff_eq!(ext.at(4), 1.0, epsilon = 1e-14);
        // The default odd moment is 0 here as well.
        let ext = flat_extension(&mv(&[1.0, 0.0, 1.0]), None).unwrap();
        assert_abs_diff_eq!(ext.at(3), 0.0, epsilon = 1e-14);

        let c = 0.7f64;
        let ext = flat_extension(&mv(&[1.0, c]), None).unwrap();
        assert_abs_diff_eq!(ext.at(2), c * c, epsilon = 1e-14);
        let ext = flat_extension(&mv(&[1.0, c, c * c, c.powi(3)]), None).unwrap();
        assert_abs_diff_eq!(ext.at(4), c.powi(4), epsilon = 1e-12);
    }

    #[test]
    fn singular_counterexample_has_no_flat_extension() {
        let err = flat_extension(&mv(&[1.0, 1.0, 1.0, 1.0, 2.0]), None).unwrap_err();
        assert!(matches!(err, Error::SingularHankel(_)));
        assert!(matches!(
            realize_moments(&mv(&[1.0, 1.0, 1.0, 1.0, 2.0]), false),
            Err(Error::SingularHankel(_))
        ));
    }

    #[test]
    fn symmetric_two_point_measure() {
        let r = realize_moments(&mv(&[1.0, 0.0, 1.0, 0.0]), false).unwrap();
        let spec = symmetric_eigenvalues(&r.observable);
        assert_abs_diff_eq!(spec[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec[1], -1.0, epsilon = 1e-12);
        let eig = SymmetricEigen::new(r.observable.clone());
        for i in 0..2 {
            let w = eig.eigenvectors.column(i).dot(&r.vector).powi(2);
            assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn point_mass_realizes_in_one_dimension() {
        let c = -0.4f64;
        let r = realize_moments(&mv(&[1.0, c, c * c, c.powi(3)]), false).unwrap();
        assert_eq!(r.dim(), 1);
        assert_abs_diff_eq!(r.observable[(0, 0)], c, epsilon = 1e-12);
    }

    #[test]
    fn stieltjes_counterexample_has_no_psd_realization() {
        let m = mv(&[1.0, 1.0, 2.0, 4.0, 9.0]);
        let r = realize_moments(&m, false).unwrap();
        let got = r.moments(4);
        for (g, w) in got.iter().zip(m.values()) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-8);
        }
        match realize_moments(&m, true) {
            Err(Error::NotStieltjes { witness, .. }) => {
                // Null vector of [[1, 2], [2, 4]].
                assert_abs_diff_eq!(witness[0] + 2.0 * witness[1], 0.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn psd_realization_of_a_point_mass() {
        let r = realize_moments(&mv(&[1.0, 1.0, 1.0]), true).unwrap();
        assert_eq!(r.dim(), 1);
        assert_abs_diff_eq!(r.observable[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_realization_for_even_order() {
        // Moments of the uniform measure on {1, 2, 4}.
        let xs = [1.0f64, 2.0, 4.0];
        let m: Vec<f64> = (0..=4)
            .map(|k| xs.iter().map(|x| x.powi(k) / 3.0).sum())
            .collect();
        let r = realize_moments(&mv(&m), true).unwrap();
        assert!(symmetric_eigenvalues(&r.observable).last().unwrap() >= &-1e-8);
        for (g, w) in r.moments(4).iter().zip(&m) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-9 * w.abs().max(1.0));
        }
    }
}
