//! Generators for the state families used in the benchmarks.
//!
//! Qubit chains use site 0 as the most significant bit of the basis index.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteState, CMatrix};

/// Generator behind every seeded sample.
pub type SampleRng = ChaCha8Rng;

/// Hilbert-Schmidt random state `G G^† / Tr(G G^†)` with `G` a square Ginibre
/// matrix, drawn from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn sample_hs(dim_a: usize, dim_b: usize, seed: u64) -> Result<BipartiteState> {
    sample_hs_with_rng(dim_a, dim_b, &mut SampleRng::seed_from_u64(seed))
}

pub fn sample_hs_with_rng<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> Result<BipartiteState> {
    if dim_a < 2 || dim_b < 2 {
        return Err(Error::Dimension(format!(
            "random states need both dimensions >= 2, got ({dim_a}, {dim_b})"
        )));
    }
    let d = dim_a * dim_b;
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    let trace = rho.trace().re;
    rho /= Complex64::from(trace);
    hermitize(&mut rho);
    Ok(BipartiteState::from_trusted(dim_a, dim_b, rho))
}

/// Exact `(M + M^†) / 2` in place, removing rounding asymmetry.
fn hermitize(m: &mut CMatrix) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in i + 1..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// The swap operator `V` on `C^d1 ⊗ C^d1`.
fn swap(d1: usize) -> CMatrix {
    let d = d1 * d1;
    CMatrix::from_fn(d, d, |row, col| {
        let (a, b) = (row / d1, row % d1);
        if col == b * d1 + a {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Antisymmetric Werner state `(1 - V) / (d1 (d1 - 1))`.
pub fn werner(d1: usize) -> Result<BipartiteState> {
    if d1 < 2 {
        return Err(Error::invalid(format!(
            "Werner states need d1 >= 2, got {d1}"
        )));
    }
    let d = d1 * d1;
    let norm = (d1 * (d1 - 1)) as f64;
    let rho = (CMatrix::identity(d, d) - swap(d1)) / Complex64::from(norm);
    Ok(BipartiteState::from_trusted(d1, d1, rho))
}

/// `|Φ+⟩⟨Φ+|` with `|Φ+⟩ = (|00⟩ + |11⟩) / √2`.
pub fn bell_state() -> BipartiteState {
    let mut rho = CMatrix::zeros(4, 4);
    for i in [0, 3] {
        for j in [0, 3] {
            rho[(i, j)] = Complex64::new(0.5, 0.0);
        }
    }
    BipartiteState::from_trusted(2, 2, rho)
}

/// The separable state `Σ_i w_i |a_i b_i⟩⟨a_i b_i|`, diagonal in the product
/// basis, so its partial transpose has spectrum `weights`.
pub fn product_state(weights: &[f64], dim_a: usize, dim_b: usize) -> Result<BipartiteState> {
    let d = dim_a * dim_b;
    if weights.len() != d {
        return Err(Error::Dimension(format!(
            "{} weights for a {dim_a}x{dim_b} system",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Error::invalid("weights must be nonnegative"));
    }
    let diag = nalgebra::DVector::from_iterator(d, weights.iter().map(|&w| Complex64::new(w, 0.0)));
    BipartiteState::new(dim_a, dim_b, CMatrix::from_diagonal(&diag))
}

/// Transverse-field Ising chain `H = -J (Σ σᶻ_i σᶻ_{i+1} + g Σ σˣ_i)` with
/// periodic boundary, at inverse temperature `inverse_temperature`, split into
/// the sites in `cut` (side A) and the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field_ratio: f64,
    pub inverse_temperature: f64,
    /// Zero-based sites forming side A.
    pub cut: Vec<usize>,
}

/// Largest chain diagonalized densely.
pub const MAX_ISING_QUBITS: usize = 12;

impl IsingParams {
    /// Side A is the first `n_qubits / 2` sites.
    pub fn half_chain(
        n_qubits: usize,
        coupling: f64,
        field_ratio: f64,
        inverse_temperature: f64,
    ) -> Self {
        IsingParams {
            n_qubits,
            coupling,
            field_ratio,
            inverse_temperature,
            cut: (0..n_qubits / 2).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n < 2 {
            return Err(Error::invalid(format!(
                "the chain needs at least 2 qubits, got {n}"
            )));
        }
        if n > MAX_ISING_QUBITS {
            return Err(Error::Scale(format!(
                "{n} qubits exceed the dense limit of {MAX_ISING_QUBITS}"
            )));
        }
        let mut seen = vec![false; n];
        for &s in &self.cut {
            if s >= n {
                return Err(Error::invalid(format!("cut site {s} is outside 0..{n}")));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid(format!("cut site {s} is listed twice")));
            }
        }
        if self.cut.is_empty() || self.cut.len() == n {
            return Err(Error::invalid(
                "the cut must be a nonempty proper subset of the sites",
            ));
        }
        if !self.coupling.is_finite() || !self.field_ratio.is_finite() {
            return Err(Error::invalid("coupling and field must be finite"));
        }
        if !(self.inverse_temperature >= 0.0 && self.inverse_temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "inverse temperature must be finite and nonnegative, got {}",
                self.inverse_temperature
            )));
        }
        Ok(())
    }
}

/// Dense Hamiltonian in the computational basis.
pub fn ising_hamiltonian(n: usize, coupling: f64, field_ratio: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    let bit = |state: usize, site: usize| (state >> (n - 1 - site)) & 1;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let zz: f64 = (0..n)
            .map(|i| {
                if bit(s, i) == bit(s, (i + 1) % n) {
                    1.0
                } else {
                    -1.0
                }
            })
            .sum();
        h[(s, s)] -= coupling * zz;
        for i in 0..n {
            h[(s ^ (1 << (n - 1 - i)), s)] -= coupling * field_ratio;
        }
    }
    h
}

/// An Ising chain diagonalized once, for Gibbs states at many temperatures.
#[derive(Debug, Clone)]
pub struct IsingModel {
    n: usize,
    cut: Vec<usize>,
    energies: nalgebra::DVector<f64>,
    vectors: DMatrix<f64>,
}

impl IsingModel {
    /// Builds and diagonalizes `H`; `params.inverse_temperature` is ignored.
    pub fn new(params: &IsingParams) -> Result<Self> {
        params.validate()?;
        let h = ising_hamiltonian(params.n_qubits, params.coupling, params.field_ratio);
        let eig = SymmetricEigen::new(h);
        Ok(IsingModel {
            n: params.n_qubits,
            cut: params.cut.clone(),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn energies(&self) -> &[f64] {
        self.energies.as_slice()
    }

    /// `e^{-βH} / Z` reordered so the cut sites form subsystem A.
    pub fn gibbs(&self, beta: f64) -> Result<BipartiteState> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "inverse temperature must be finite and nonnegative, got {beta}"
            )));
        }
        let e0 = self.energies.min();
        let weights = self.energies.map(|e| (-beta * (e - e0)).exp());
        let z = weights.sum();
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * weights[k] / z
        });
        let rho = &scaled * self.vectors.transpose();
        let (perm, dim_a, dim_b) = site_permutation(self.n, &self.cut);
        let dim = rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(perm[i], perm[j])] = Complex64::new(0.5 * (rho[(i, j)] + rho[(j, i)]), 0.0);
            }
        }
        Ok(BipartiteState::from_trusted(dim_a, dim_b, out))
    }
}

/// Gibbs state of the chain described by `params`.
pub fn ising_gibbs(params: &IsingParams) -> Result<BipartiteState> {
    IsingModel::new(params)?.gibbs(params.inverse_temperature)
}

/// Maps each basis index to its position once the `cut` sites (ascending) are
/// moved in front of the remaining sites (ascending).
fn site_permutation(n: usize, cut: &[usize]) -> (Vec<usize>, usize, usize) {
    let mut a: Vec<usize> = cut.to_vec();
    a.sort_unstable();
    let order: Vec<usize> = a
        .iter()
        .copied()
        .chain((0..n).filter(|s| !a.contains(s)))
        .collect();
    let perm = (0..1usize << n)
        .map(|s| {
            order
                .iter()
                .fold(0, |acc, &site| (acc << 1) | ((s >> (n - 1 - site)) & 1))
        })
        .collect();
    (perm, 1 << a.len(), 1 << (n - a.len()))
}

/// Noisy Werner state with `p_3 >= p_2^2` yet `λ_min + λ_max < 0` for its
/// partial transpose.
///
/// `noise_blocks = N` product states carry weight `2λ` and `N` more weight `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub base_dim: usize,
    pub noise_weight: f64,
    pub noise_blocks: usize,
}

impl CounterexampleParams {
    /// The smallest `N` for which the output passes the `p_3` test.
    pub fn minimal(base_dim: usize, noise_weight: f64) -> Result<Self> {
        let (p2, p3, lmax) = werner_pt_moments(base_dim)?;
        check_noise_weight(noise_weight, lmax)?;
        Ok(CounterexampleParams {
            base_dim,
            noise_weight,
            noise_blocks: minimal_blocks(noise_weight, p2, p3),
        })
    }

    /// `λ = λ_max / 2`, the largest weight allowed.
    pub fn with_default_weight(base_dim: usize) -> Result<Self> {
        let (_, _, lmax) = werner_pt_moments(base_dim)?;
        Self::minimal(base_dim, lmax / 2.0)
    }
}

/// `(p̃_2, p̃_3, λ_max)` of the Werner partial transpose, whose spectrum is
/// `1/(d1(d1-1))` with multiplicity `d1² - 1` and `-1/d1` once.
fn werner_pt_moments(d1: usize) -> Result<(f64, f64, f64)> {
    if d1 < 3 {
        return Err(Error::invalid(format!(
            "the construction needs d1 >= 3, got {d1}"
        )));
    }
    let d = d1 as f64;
    let pos = 1.0 / (d * (d - 1.0));
    let neg = -1.0 / d;
    let m = d * d - 1.0;
    Ok((
        m * pos * pos + neg * neg,
        m * pos.powi(3) + neg.powi(3),
        pos,
    ))
}

fn check_noise_weight(lambda: f64, lmax: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= lmax / 2.0 * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!(
            "noise weight must lie in (0, {}], got {lambda}",
            lmax / 2.0
        )));
    }
    Ok(())
}

/// `2λ⁴N² + (9λ³ - 10 p̃_2 λ² + 3 p̃_3 λ) N + (p̃_3 - p̃_2²)`, which is
/// `Tr X · Tr (X^{T_A})³ - (Tr (X^{T_A})²)²` for the unnormalized state.
fn p3_margin(lambda: f64, n: f64, p2: f64, p3: f64) -> f64 {
    2.0 * lambda.powi(4) * n * n
        + (9.0 * lambda.powi(3) - 10.0 * p2 * lambda * lambda + 3.0 * p3 * lambda) * n
        + (p3 - p2 * p2)
}

/// True when the margin clears rounding. At `λ = λ_max / 2` with `d1 = 3` the
/// exact root is an integer, where `p_3 = p_2²` holds only to round-off.
fn passes_p3(lambda: f64, n: f64, p2: f64, p3: f64) -> bool {
    p3_margin(lambda, n, p2, p3) > 1e-12 * (p2 * p2 - p3).abs()
}

fn minimal_blocks(lambda: f64, p2: f64, p3: f64) -> usize {
    let a = 2.0 * lambda.powi(4);
    let b = 9.0 * lambda.powi(3) - 10.0 * p2 * lambda * lambda + 3.0 * p3 * lambda;
    let c = p3 - p2 * p2;
    let root = (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a);
    let mut n = root.ceil().max(1.0) as usize;
    while n > 1 && passes_p3(lambda, (n - 1) as f64, p2, p3) {
        n -= 1;
    }
    while !passes_p3(lambda, n as f64, p2, p3) {
        n += 1;
    }
    n
}

/// Embeds the Werner state on the top-left `d1 × d1` corner of `C^D ⊗ C^D`
/// and places the `2N` noise terms on distinct product basis states `|a b⟩`
/// outside that corner. `D` is the smallest side with room for them. The
/// partial transpose has the same spectrum as the layout with separate
/// ancilla registers.
pub fn build_counterexample(params: &CounterexampleParams) -> Result<BipartiteState> {
    let d1 = params.base_dim;
    let (p2, p3, lmax) = werner_pt_moments(d1)?;
    let lambda = params.noise_weight;
    check_noise_weight(lambda, lmax)?;
    let n = params.noise_blocks;
    if n == 0 || !passes_p3(lambda, n as f64, p2, p3) {
        return Err(Error::invalid(format!(
            "{n} noise blocks are too few for p_3 >= p_2^2; at least {} are needed",
            minimal_blocks(lambda, p2, p3)
        )));
    }
    let mut side = d1;
    while side * side - d1 * d1 < 2 * n {
        side += 1;
    }
    let dim = side * side;
    let mut x = CMatrix::zeros(dim, dim);
    let base = werner(d1)?;
    let embed = |a: usize, b: usize| a * side + b;
    for i in 0..d1 * d1 {
        for j in 0..d1 * d1 {
            x[(embed(i / d1, i % d1), embed(j / d1, j % d1))] = base.matrix()[(i, j)];
        }
    }
    let free = (0..dim).filter(|&k| k / side >= d1 || k % side >= d1);
    for (slot, k) in free.take(2 * n).enumerate() {
        let w = if slot < n { 2.0 * lambda } else { lambda };
        x[(k, k)] = Complex64::new(w, 0.0);
    }
    let trace = 1.0 + 3.0 * lambda * n as f64;
    x /= Complex64::from(trace);
    Ok(BipartiteState::from_trusted(side, side, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues_hermitian;
    use crate::moments::pt_moments;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hs_samples_are_deterministic_states() {
        let a = sample_hs(2, 3, 7).unwrap();
        let b = sample_hs(2, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_hs(2, 3, 8).unwrap());
        BipartiteState::new(2, 3, a.into_matrix()).unwrap();
        assert!(sample_hs(1, 3, 0).is_err());
    }

    #[test]
    fn werner_pt_spectrum() {
        let pt = werner(3).unwrap().pt_spectrum();
        let v = pt.values();
        for &x in &v[..8] {
            assert_abs_diff_eq!(x, 1.0 / 6.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(v[8], -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.max() + pt.min(), -1.0 / 6.0, epsilon = 1e-12);
        let two = werner(2).unwrap().pt_spectrum();
        assert_abs_diff_eq!(two.max() + two.min(), 0.0, epsilon = 1e-12);
        assert!(werner(1).is_err());
        let (p2, p3, _) = werner_pt_moments(3).unwrap();
        assert_abs_diff_eq!(p2, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p3, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_and_product() {
        let p = pt_moments(&bell_state(), 3).unwrap();
        assert_eq!(p.values(), &[4.0, 1.0, 1.0, 0.25]);
        let mixed = product_state(&[0.25; 4], 2, 2).unwrap();
        assert_eq!(
            mixed.matrix(),
            &(CMatrix::identity(4, 4) * Complex64::new(0.25, 0.0))
        );
        assert!(product_state(&[0.5, 0.5], 2, 2).is_err());
        assert!(product_state(&[1.5, -0.5], 1, 2).is_err());
    }

    #[test]
    fn two_site_hamiltonian() {
        let (j, g) = (1.3, 0.7);
        let h = ising_hamiltonian(2, j, g);
        let x = [[0.0, 1.0], [1.0, 0.0]];
        let z = [1.0, -1.0];
        let expect = DMatrix::from_fn(4, 4, |r, c| {
            let (r0, r1, c0, c1) = (r >> 1, r & 1, c >> 1, c & 1);
            let zz = if r == c { 2.0 * z[r0] * z[r1] } else { 0.0 };
            let xs = x[r0][c0] * f64::from(r1 == c1) + x[r1][c1] * f64::from(r0 == c0);
            -j * (zz + g * xs)
        });
        assert_eq!(h, expect);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let r = (4.0 + 4.0 * g * g).sqrt();
        let mut exact = vec![-j * r, 2.0 * j, -2.0 * j, j * r];
        exact.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(exact) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gibbs_limits_and_cut() {
        let params = IsingParams::half_chain(4, 1.0, 2.5, 0.0);
        let rho = ising_gibbs(&params).unwrap();
        assert_eq!((rho.dim_a(), rho.dim_b()), (4, 4));
        let mixed = CMatrix::identity(16, 16) * Complex64::new(1.0 / 16.0, 0.0);
        assert!((rho.matrix() - mixed).camax() < 1e-12);

        // Purity is invariant under the site reordering.
        let hot = IsingParams {
            inverse_temperature: 1.0,
            ..params.clone()
        };
        let swapped = IsingParams {
            cut: vec![1, 3],
            ..hot.clone()
        };
        let a = ising_gibbs(&hot).unwrap();
        let b = ising_gibbs(&swapped).unwrap();
        let purity = |s: &BipartiteState| s.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert_abs_diff_eq!(purity(&a), purity(&b), epsilon = 1e-12);
        assert!(BipartiteState::new(4, 4, b.into_matrix()).is_ok());

        assert!(ising_gibbs(&IsingParams {
            cut: vec![],
            ..hot.clone()
        })
        .is_err());
        assert!(ising_gibbs(&IsingParams {
            cut: vec![0, 0],
            ..hot.clone()
        })
        .is_err());
        assert!(matches!(
            ising_gibbs(&IsingParams::half_chain(13, 1.0, 1.0, 1.0)),
            Err(Error::Scale(_))
        ));
    }

    #[test]
    fn site_permutation_moves_cut_first() {
        // Sites (0, 1, 2) with A = {2}: index s = b0 b1 b2 maps to b2 b0 b1.
        let (perm, da, db) = site_permutation(3, &[2]);
        assert_eq!((da, db), (2, 4));
        assert_eq!(perm[0b001], 0b100);
        assert_eq!(perm[0b110], 0b011);
    }

    #[test]
    fn counterexample_for_qutrits() {
        let params = CounterexampleParams::with_default_weight(3).unwrap();
        assert_abs_diff_eq!(params.noise_weight, 1.0 / 12.0, epsilon = 1e-15);
        assert_eq!(params.noise_blocks, 193);
        let rho = build_counterexample(&params).unwrap();
        assert_eq!(rho.dim_a(), 20);
        let p = pt_moments(&rho, 3).unwrap();
        assert!(p.at(3) >= p.at(2) * p.at(2));
        let pt = eigenvalues_hermitian(&rho.partial_transpose()).unwrap();
        assert!(pt.max() + pt.min() < 0.0);

        let fewer = CounterexampleParams {
            noise_blocks: 192,
            ..params
        };
        assert!(build_counterexample(&fewer).is_err());
        assert!(CounterexampleParams::minimal(3, 0.1).is_err());
        assert!(CounterexampleParams::minimal(2, 0.01).is_err());
    }
}
