//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

/// Every threshold the library applies, in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max abs entry of `M - M^H` accepted (and symmetrized away) on ingestion.
    pub hermitian: f64,
    /// Allowed deviation of a state's trace from 1.
    pub trace: f64,
    /// Smallest eigenvalue a density matrix may have.
    pub state_psd: f64,
    /// Eigenvalue floor for declaring a Hankel matrix PSD in the criteria.
    pub criterion_psd: f64,
    /// A violation quantifier above this counts as detection.
    pub detection: f64,
    /// Slack on moment identities such as `p_1 = 1` and `1/d <= p_2 <= 1`.
    pub moment: f64,
    /// Relative eigenvalue threshold for numerical rank.
    pub rank: f64,
    /// Accuracy demanded from moment realizations and extremal spectra.
    pub realization: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        trace: 1e-10,
        state_psd: 1e-10,
        criterion_psd: 1e-9,
        detection: 1e-9,
        moment: 1e-9,
        rank: 1e-11,
        realization: 1e-8,
    };

    /// Defaults with the criterion and detection floors replaced by `tol`.
    pub fn with_detection(tol: f64) -> Self {
        Tolerances {
            criterion_psd: tol,
            detection: tol,
            ..Self::DEFAULT
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
