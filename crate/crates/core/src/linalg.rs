//! Dense complex Hermitian linear algebra for bipartite states.
//!
//! Matrices are stored densely. Composite basis indices follow the A-major
//! convention `i = a * dim_b + b`, so the partial transpose on A is a pure
//! permutation of entries.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub type CMatrix = DMatrix<Complex64>;

/// A density operator on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

impl BipartiteState {
    /// Validates and symmetrizes `matrix` with the default tolerances.
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(dim_a, dim_b, matrix, &Tolerances::DEFAULT)
    }

    /// Rejects the matrix if any state invariant fails; otherwise stores
    /// `(M + M^H) / 2`.
    pub fn with_tolerances(
        dim_a: usize,
        dim_b: usize,
        matrix: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Dimension(format!(
                "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
            )));
        }
        let d = dim_a * dim_b;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but dim_a * dim_b = {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let matrix = symmetrize(matrix, tol.hermitian)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::InvalidState(format!(
                "trace is {trace}, expected 1 within {:e}",
                tol.trace
            )));
        }
        let min = min_eigenvalue_unchecked(&matrix);
        if min < -tol.state_psd {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min:e} is below -{:e}",
                tol.state_psd
            )));
        }
        Ok(BipartiteState {
            dim_a,
            dim_b,
            matrix,
        })
    }

    /// For generators whose output is a valid state by construction.
    pub(crate) fn from_trusted(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), dim_a * dim_b);
        BipartiteState {
            dim_a,
            dim_b,
            matrix,
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Total dimension `d = dim_a * dim_b`.
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `ρ^{T_A}`: Hermitian with unit trace, not necessarily PSD.
    pub fn partial_transpose(&self) -> CMatrix {
        partial_transpose(&self.matrix, self.dim_a, self.dim_b)
            .expect("state dimensions are consistent")
    }

    /// Spectrum of `ρ^{T_A}`.
    pub fn pt_spectrum(&self) -> Spectrum {
        Spectrum::from_unsorted(hermitian_eigenvalues_unchecked(&self.partial_transpose()))
    }
}

/// Partial transpose on the first tensor factor.
///
/// Entry `((a', b), (a, b'))` of the output equals entry `((a, b), (a', b'))`
/// of the input.
pub fn partial_transpose(matrix: &CMatrix, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let d = dim_a * dim_b;
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but dim_a * dim_b = {d}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(CMatrix::from_fn(d, d, |row, col| {
        let (a2, b) = (row / dim_b, row % dim_b);
        let (a, b2) = (col / dim_b, col % dim_b);
        matrix[(a * dim_b + b, a2 * dim_b + b2)]
    }))
}

/// Kronecker product `a ⊗ b` in the A-major index convention.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Real eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|x, y| y.total_cmp(x));
        Spectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// Sum of absolute values, i.e. the trace norm of the source matrix.
    pub fn trace_norm(&self) -> f64 {
        self.values.iter().map(|x| x.abs()).sum()
    }
}

/// Largest absolute entry of `M - M^H`.
pub fn hermitian_deviation(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let diff = matrix[(i, j)] - matrix[(j, i)].conj();
            dev = dev.max(diff.norm());
        }
    }
    dev
}

fn check_hermitian(matrix: &CMatrix, tol: f64) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, not square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let deviation = hermitian_deviation(matrix);
    if deviation.is_nan() || deviation > tol {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: tol,
        });
    }
    Ok(())
}

fn symmetrize(matrix: CMatrix, tol: f64) -> Result<CMatrix> {
    check_hermitian(&matrix, tol)?;
    let adjoint = matrix.adjoint();
    Ok((matrix + adjoint).unscale(2.0))
}

fn hermitian_eigenvalues_unchecked(matrix: &CMatrix) -> Vec<f64> {
    matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

fn min_eigenvalue_unchecked(matrix: &CMatrix) -> f64 {
    hermitian_eigenvalues_unchecked(matrix)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigenvalues_hermitian(matrix: &CMatrix) -> Result<Spectrum> {
    check_hermitian(matrix, Tolerances::DEFAULT.hermitian)?;
    Ok(Spectrum::from_unsorted(hermitian_eigenvalues_unchecked(
        matrix,
    )))
}

/// Full decomposition `M = V diag(λ) V^H` with eigenvalues in descending
/// order and the columns of `V` permuted to match.
pub fn eigh(matrix: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(matrix, Tolerances::DEFAULT.hermitian)?;
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..matrix.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(matrix.nrows(), matrix.ncols(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

pub fn trace_norm(matrix: &CMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(matrix)?.trace_norm())
}

pub fn min_eigenvalue(matrix: &CMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(matrix)?.min())
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(matrix: &CMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(matrix)? >= -tol)
}

/// Eigenvalues of a real symmetric matrix, descending.
pub fn symmetric_eigenvalues(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

/// Smallest eigenvalue of a real symmetric matrix with its unit eigenvector.
pub fn symmetric_min_eigenpair(matrix: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(matrix.clone());
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty matrix");
    (value, eig.eigenvectors.column(idx).into_owned())
}

/// Lift a real matrix into the complex type.
pub fn complexify(matrix: &DMatrix<f64>) -> CMatrix {
    matrix.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = c(0.5);
        }
        m
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = partial_transpose(&bell(), 2, 2).unwrap();
        let spec = eigenvalues_hermitian(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (x, e) in spec.values().iter().zip(expected) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(trace_norm(&pt).unwrap(), 2.0, epsilon = 1e-12);
        // |Φ+⟩⟨Φ+|^{T_A} is half the swap operator.
        assert_eq!(pt[(1, 2)], c(0.5));
        assert_eq!(pt[(2, 1)], c(0.5));
    }

    #[test]
    fn product_state_transposes_first_factor() {
        let rho_a = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.6),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                c(0.4),
            ],
        );
        let rho_b = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5),
                Complex64::new(0.0, 0.1),
                c(0.0),
                Complex64::new(0.0, -0.1),
                c(0.3),
                c(0.05),
                c(0.0),
                c(0.05),
                c(0.2),
            ],
        );
        let pt = partial_transpose(&tensor_product(&rho_a, &rho_b), 2, 3).unwrap();
        let expected = tensor_product(&rho_a.transpose(), &rho_b);
        assert!((pt - expected).norm() < 1e-15);
    }

    #[test]
    fn simple_spectra() {
        let half = CMatrix::identity(2, 2).map(|z| z * 0.5);
        assert_eq!(eigenvalues_hermitian(&half).unwrap().values(), &[0.5, 0.5]);
        let diag = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.3), c(0.7)]));
        let spec = eigenvalues_hermitian(&diag).unwrap();
        assert_abs_diff_eq!(spec.values()[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.values()[1], 0.3, epsilon = 1e-15);
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn psd_gate() {
        assert!(is_psd(&CMatrix::identity(3, 3), 1e-10).unwrap());
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1e-3)]));
        assert!(!is_psd(&m, 1e-10).unwrap());
        // Hankel B_1 of the maximally mixed two-qubit state is rank one.
        let b1 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.25), c(0.25), c(0.0625)]);
        assert!(is_psd(&b1, 1e-10).unwrap());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            eigenvalues_hermitian(&m),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(trace_norm(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn state_validation_names_the_failure() {
        let m = CMatrix::identity(4, 4).map(|z| z * 0.25);
        assert!(BipartiteState::new(2, 2, m.clone()).is_ok());
        assert!(matches!(
            BipartiteState::new(2, 3, m.clone()),
            Err(Error::Dimension(_))
        ));
        let doubled = m.map(|z| z * 2.0);
        match BipartiteState::new(2, 2, doubled) {
            Err(Error::InvalidState(msg)) => assert!(msg.contains("trace")),
            other => panic!("unexpected {other:?}"),
        }
        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.6), c(0.6), c(-0.2), c(0.0)]));
        match BipartiteState::new(2, 2, neg) {
            Err(Error::InvalidState(msg)) => assert!(msg.contains("eigenvalue")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingestion_symmetrizes_small_asymmetry() {
        let mut m = CMatrix::identity(4, 4).map(|z| z * 0.25);
        m[(0, 1)] = Complex64::new(1e-12, 0.0);
        let state = BipartiteState::new(2, 2, m).unwrap();
        assert_eq!(state.matrix()[(0, 1)], state.matrix()[(1, 0)].conj());
        assert_abs_diff_eq!(state.matrix()[(0, 1)].re, 5e-13, epsilon = 1e-20);
    }

    #[test]
    fn decomposition_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0),
                Complex64::new(0.5, 0.25),
                Complex64::new(-0.3, 0.1),
                Complex64::new(0.5, -0.25),
                c(-1.0),
                Complex64::new(0.0, 0.7),
                Complex64::new(-0.3, -0.1),
                Complex64::new(0.0, -0.7),
                c(0.4),
            ],
        );
        let (values, vectors) = eigh(&m).unwrap();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let lambda =
            CMatrix::from_diagonal(&DVector::from_iterator(3, values.iter().map(|&x| c(x))));
        let rebuilt = &vectors * lambda * vectors.adjoint();
        let err = (rebuilt - &m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-9, "reconstruction error {err}");
        assert_abs_diff_eq!(values.iter().sum::<f64>(), m.trace().re, epsilon = 1e-9);
    }
}
