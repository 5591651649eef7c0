//! Every criterion evaluated on one state.

use serde::{Deserialize, Serialize};

use crate::bounds::oppt_chain;
use crate::error::{Error, Result};
use crate::hankel::{elben_higher_check, hankel_negativity, ElbenOutcome};
use crate::linalg::{BipartiteState, Spectrum};
use crate::moments::{moments_of_spectrum, MomentVector};
use crate::tolerances::Tolerances;

/// The detection tests tabulated in the surveys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Negative eigenvalue of the partial transpose.
    Npt,
    /// `p_3 < p_2^2`.
    Npt3,
    /// `O_3 > 0`.
    Onpt3,
    /// `O_3 > 0` or `O_4 > 0`.
    Onpt4,
    /// `B_2(p)` not PSD.
    Npt5,
    /// `O_3`, `O_4` or `O_5` positive.
    Onpt5,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::Npt,
        Criterion::Npt3,
        Criterion::Onpt3,
        Criterion::Onpt4,
        Criterion::Npt5,
        Criterion::Onpt5,
    ];

    /// Highest PT-moment the criterion reads.
    pub fn moment_order(self) -> usize {
        match self {
            Criterion::Npt | Criterion::Npt3 | Criterion::Onpt3 => 3,
            Criterion::Onpt4 => 4,
            Criterion::Npt5 | Criterion::Onpt5 => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Npt => "npt",
            Criterion::Npt3 => "npt3",
            Criterion::Onpt3 => "onpt3",
            Criterion::Onpt4 => "onpt4",
            Criterion::Npt5 => "npt5",
            Criterion::Onpt5 => "onpt5",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown criterion {s:?}")))
    }
}

/// Criterion values for one state. `o4` and `o5` are absent when a lower
/// order already detects, and every field beyond `max_order` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub max_order: usize,
    /// `(d, 1, p_2, ..., p_max_order)`.
    pub moments: MomentVector,
    pub npt: bool,
    /// `(‖ρ^{T_A}‖_1 - 1) / 2`.
    pub negativity: f64,
    pub n3: f64,
    pub n5: Option<f64>,
    pub o3: Option<f64>,
    pub o4: Option<f64>,
    pub o5: Option<f64>,
    pub elben: Vec<ElbenOutcome>,
}

impl CriterionReport {
    /// Whether `criterion` flags the state at threshold `tol`; `None` if the
    /// report does not reach the order it needs.
    pub fn detects(&self, criterion: Criterion, tol: f64) -> Option<bool> {
        if criterion.moment_order() > self.max_order {
            return None;
        }
        let pos = |v: Option<f64>| v.is_some_and(|x| x > tol);
        Some(match criterion {
            Criterion::Npt => self.npt,
            Criterion::Npt3 => self.n3 > tol,
            Criterion::Onpt3 => pos(self.o3),
            Criterion::Onpt4 => pos(self.o3) || pos(self.o4),
            Criterion::Npt5 => pos(self.n5),
            Criterion::Onpt5 => pos(self.o3) || pos(self.o4) || pos(self.o5),
        })
    }
}

/// Report for `state` with moments up to `max_order` in `3..=5`.
pub fn analyze_state(
    state: &BipartiteState,
    max_order: usize,
    tol: &Tolerances,
) -> Result<CriterionReport> {
    analyze_spectrum(&state.pt_spectrum(), max_order, tol)
}

/// Report from the spectrum of `ρ^{T_A}`.
pub fn analyze_spectrum(
    spectrum: &Spectrum,
    max_order: usize,
    tol: &Tolerances,
) -> Result<CriterionReport> {
    if !(3..=5).contains(&max_order) {
        return Err(Error::UnsupportedOrder {
            order: max_order,
            reason: "reports cover orders 3 to 5".into(),
        });
    }
    let moments = moments_of_spectrum(spectrum, max_order)?;
    let negativity = spectrum
        .values()
        .iter()
        .filter(|&&x| x < 0.0)
        .fold(0.0, |acc, x| acc - x);
    let npt = spectrum.min() < -tol.criterion_psd;
    let chain = oppt_chain(&moments, max_order, tol)?;
    let o = |n: usize| chain.get(n - 3).and_then(|v| v.value);
    Ok(CriterionReport {
        max_order,
        npt,
        negativity,
        n3: hankel_negativity(&moments, 3)?,
        n5: if max_order >= 5 {
            Some(hankel_negativity(&moments, 5)?)
        } else {
            None
        },
        o3: o(3),
        o4: o(4),
        o5: o(5),
        elben: elben_higher_check(&moments)?,
        moments,
    })
}
