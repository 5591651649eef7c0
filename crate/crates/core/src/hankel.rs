//! Hankel matrices of a moment sequence and the criteria built on them.
//!
//! `[H_k]_{ij} = m_{i+j}` and `[B_k]_{ij} = m_{i+j+1}` for `i, j = 0..=k`.
//! Every quantum state has `H_{⌊n/2⌋}(p) ⪰ 0`; a separable state also has
//! `B_{⌊(n-1)/2⌋}(p) ⪰ 0`, so a negative eigenvalue of `B` certifies
//! entanglement.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::moments::MomentVector;

/// `H_k` of size `k + 1`; needs `m` up to index `2k`.
pub fn hankel_h(m: &MomentVector, k: usize) -> Result<DMatrix<f64>> {
    m.require_order(2 * k)?;
    Ok(DMatrix::from_fn(k + 1, k + 1, |i, j| m.at(i + j)))
}

/// `B_k` of size `k + 1`; needs `m` up to index `2k + 1`.
pub fn hankel_b(m: &MomentVector, k: usize) -> Result<DMatrix<f64>> {
    m.require_order(2 * k + 1)?;
    Ok(DMatrix::from_fn(k + 1, k + 1, |i, j| m.at(i + j + 1)))
}

/// The largest pair of Hankel matrices a moment vector of order `n` supports.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPair {
    /// Order of the moment vector the pair was built from.
    pub order: usize,
    /// `H_{⌊n/2⌋}`.
    pub h: DMatrix<f64>,
    /// `B_{⌊(n-1)/2⌋}`.
    pub b: DMatrix<f64>,
}

impl HankelPair {
    pub fn h_index(&self) -> usize {
        self.h.nrows() - 1
    }

    pub fn b_index(&self) -> usize {
        self.b.nrows() - 1
    }
}

pub fn build_hankel(m: &MomentVector) -> HankelPair {
    let n = m.order();
    HankelPair {
        order: n,
        h: hankel_h(m, n / 2).expect("order covers H"),
        b: hankel_b(m, (n - 1) / 2).expect("order covers B"),
    }
}

/// Smallest eigenvalue of a real symmetric matrix.
pub(crate) fn min_eig(matrix: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(matrix)
        .last()
        .copied()
        .unwrap_or(f64::NAN)
}

/// `H_{⌊n/2⌋}(p) ⪰ 0` within `tol`. Holds for the PT-moments of every state.
pub fn h_is_psd(p: &MomentVector, tol: f64) -> bool {
    min_eig(&build_hankel(p).h) >= -tol
}

/// Largest odd order usable with `p` (even requests fall back to `n - 1`).
fn effective_odd_order(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "the Hankel criteria start at order 3".into(),
        });
    }
    Ok(if n % 2 == 1 { n } else { n - 1 })
}

/// The p_n-PPT test at the order of `p`: true when `B_{⌊(n-1)/2⌋}(p) ⪰ 0`
/// (consistent with separability), false when entanglement is detected.
pub fn pn_ppt_check(p: &MomentVector, tol: f64) -> Result<bool> {
    let n = effective_odd_order(p.order())?;
    let b = hankel_b(p, (n - 1) / 2)?;
    Ok(min_eig(&b) >= -tol)
}

/// `N_n = (‖B‖_1 - Tr B) / 2` for `B = B_{(n-1)/2}(p)`, the magnitude of the
/// negative part of its spectrum. Only moments up to `p_n` are read.
pub fn hankel_negativity(p: &MomentVector, n: usize) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "the Hankel negativity is defined for odd n >= 3".into(),
        });
    }
    let b = hankel_b(p, (n - 1) / 2)?;
    Ok(symmetric_eigenvalues(&b)
        .into_iter()
        .filter(|&x| x < 0.0)
        .fold(0.0, |acc, x| acc - x))
}

/// Outcome of one inequality `p_n^{n-2} >= p_{n-1}^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElbenOutcome {
    pub n: usize,
    pub satisfied: bool,
}

/// Sign and log-magnitude of `x^e`, so that comparisons survive underflow.
#[derive(Debug, Clone, Copy)]
struct SignedPower {
    sign: i8,
    log_abs: f64,
}

impl SignedPower {
    fn new(x: f64, e: u32) -> Self {
        if x == 0.0 {
            return SignedPower {
                sign: if e == 0 { 1 } else { 0 },
                log_abs: if e == 0 { 0.0 } else { f64::NEG_INFINITY },
            };
        }
        let sign = if x < 0.0 && e % 2 == 1 { -1 } else { 1 };
        SignedPower {
            sign,
            log_abs: e as f64 * x.abs().ln(),
        }
    }

    /// `self >= other` up to a relative slack in magnitude.
    fn ge(self, other: SignedPower, rel: f64) -> bool {
        if self.sign != other.sign {
            return self.sign > other.sign;
        }
        match self.sign {
            0 => true,
            1 => self.log_abs >= other.log_abs - rel,
            _ => self.log_abs <= other.log_abs + rel,
        }
    }
}

/// Higher-order power inequalities `p_n^{n-2} >= p_{n-1}^{n-1}` for
/// `3 <= n <= order`. They are implied by Hankel positivity and much weaker.
pub fn elben_higher_check(p: &MomentVector) -> Result<Vec<ElbenOutcome>> {
    let order = p.order();
    if order < 3 {
        return Err(Error::UnsupportedOrder {
            order,
            reason: "the power inequalities start at order 3".into(),
        });
    }
    Ok((3..=order)
        .map(|n| {
            let lhs = SignedPower::new(p.at(n), (n - 2) as u32);
            let rhs = SignedPower::new(p.at(n - 1), (n - 1) as u32);
            ElbenOutcome {
                n,
                satisfied: lhs.ge(rhs, 1e-9),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mv(v: &[f64]) -> MomentVector {
        MomentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn layouts() {
        let pair = build_hankel(&mv(&[1.0, 1.0, 1.0, 1.0, 2.0]));
        assert_eq!(
            pair.h,
            DMatrix::from_row_slice(3, 3, &[1., 1., 1., 1., 1., 1., 1., 1., 2.])
        );
        assert_eq!(pair.b_index(), 1);

        let pair = build_hankel(&mv(&[1.0, 1.0, 2.0, 4.0, 9.0]));
        assert_eq!(
            pair.h,
            DMatrix::from_row_slice(3, 3, &[1., 1., 2., 1., 2., 4., 2., 4., 9.])
        );
        assert_eq!(pair.b, DMatrix::from_row_slice(2, 2, &[1., 2., 2., 4.]));

        let d = 5.0;
        let pair = build_hankel(&mv(&[d, 1.0, 1.0 / d, 1.0 / (d * d)]));
        assert_eq!(pair.h_index(), 1);
        assert_eq!(
            pair.b,
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0 / d, 1.0 / d, 1.0 / (d * d)])
        );

        let pair = build_hankel(&mv(&[2.0, 1.0]));
        assert_eq!(pair.h.nrows(), 1);
        assert_eq!(pair.b, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn bell_moments_violate_p3_ppt() {
        let bell = mv(&[4.0, 1.0, 1.0, 0.25]);
        assert!(!pn_ppt_check(&bell, 1e-9).unwrap());
        // Smaller eigenvalue of [[1, 1], [1, 1/4]] is (5/4 - sqrt(73/16)) / 2.
        let expected = -(1.25 - (73.0f64 / 16.0).sqrt()) / 2.0;
        assert_abs_diff_eq!(
            hankel_negativity(&bell, 3).unwrap(),
            expected,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(expected, 0.44300, epsilon = 1e-5);
    }

    #[test]
    fn maximally_mixed_passes() {
        for d in [2usize, 4, 9] {
            let df = d as f64;
            let p = mv(&(0..=7).map(|k| df.powi(1 - k)).collect::<Vec<_>>());
            assert!(pn_ppt_check(&p, 1e-9).unwrap());
            assert!(hankel_negativity(&p, 5).unwrap() < 1e-12);
            assert!(hankel_negativity(&p, 7).unwrap() < 1e-12);
            assert!(elben_higher_check(&p).unwrap().iter().all(|o| o.satisfied));
        }
    }

    #[test]
    fn order_errors() {
        let p = mv(&[4.0, 1.0, 0.5]);
        assert!(matches!(
            pn_ppt_check(&p, 1e-9),
            Err(Error::UnsupportedOrder { .. })
        ));
        let p = mv(&[4.0, 1.0, 0.5, 0.2]);
        assert!(matches!(
            hankel_negativity(&p, 4),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(matches!(
            hankel_negativity(&p, 5),
            Err(Error::InsufficientOrder { .. })
        ));
        assert!(elben_higher_check(&mv(&[4.0, 1.0, 0.5])).is_err());
    }

    #[test]
    fn even_order_uses_previous_odd_order() {
        let bell4 = mv(&[4.0, 1.0, 1.0, 0.25, 0.25]);
        assert!(!pn_ppt_check(&bell4, 1e-9).unwrap());
    }

    #[test]
    fn negativity_ignores_trailing_moments() {
        let p = mv(&[4.0, 1.0, 0.4, 0.1, 0.05, 0.01]);
        let q = mv(&[4.0, 1.0, 0.4, 0.1, 0.05, 0.01, -3.0, 7.0]);
        assert_eq!(
            hankel_negativity(&p, 3).unwrap(),
            hankel_negativity(&q, 3).unwrap()
        );
        assert_eq!(
            hankel_negativity(&p, 5).unwrap(),
            hankel_negativity(&q, 5).unwrap()
        );
    }

    #[test]
    fn elben_bell_and_underflow() {
        let bell = mv(&[4.0, 1.0, 1.0, 0.25]);
        let out = elben_higher_check(&bell).unwrap();
        assert_eq!(
            out,
            vec![ElbenOutcome {
                n: 3,
                satisfied: false
            }]
        );

        // p_25^23 and p_24^24 both underflow in f64; the log form still orders them.
        let mut v = vec![10.0, 1.0];
        for k in 2..=25 {
            v.push(if k % 2 == 1 { -(1e-30f64) } else { 1e-30 });
        }
        let out = elben_higher_check(&mv(&v)).unwrap();
        assert!(!out.last().unwrap().satisfied);
        assert!(out.iter().filter(|o| o.n % 2 == 0).all(|o| o.satisfied));
    }
}
