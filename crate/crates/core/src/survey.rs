//! Seeded batch experiments: random-state surveys, Ising temperature sweeps,
//! the `p_3` gap scan and the measurement budget.
//!
//! Sample `i` of a survey with root seed `s` is drawn from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, so results do not
//! depend on scheduling. `PTMOMENT_THREADS` caps the worker count.

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::p3_bounds;
use crate::error::{Error, Result};
use crate::gallery::{sample_hs_with_rng, IsingModel, IsingParams, SampleRng};
use crate::linalg::BipartiteState;
use crate::report::{analyze_state, Criterion, CriterionReport};
use crate::tolerances::Tolerances;

/// Environment variable limiting the number of worker threads.
pub const THREADS_ENV: &str = "PTMOMENT_THREADS";

/// Runs `f` on a pool sized by `PTMOMENT_THREADS`, or on the global pool when
/// the variable is unset.
pub fn with_thread_limit<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::Parse(format!(
                    "{THREADS_ENV} must be a positive integer, got {raw:?}"
                ))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Numerical(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// The random `D × D` state with index `index` in the survey seeded by `root_seed`.
pub fn survey_state(dim: usize, root_seed: u64, index: u64) -> Result<BipartiteState> {
    let mut rng = SampleRng::seed_from_u64(root_seed);
    rng.set_stream(index);
    sample_hs_with_rng(dim, dim, &mut rng)
}

/// Detection count for one criterion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub detected: u64,
    pub fraction: f64,
    pub stderr: f64,
}

impl Tally {
    fn new(detected: u64, samples: u64) -> Self {
        let f = detected as f64 / samples as f64;
        Tally {
            detected,
            fraction: f,
            stderr: (f * (1.0 - f) / samples as f64).sqrt(),
        }
    }
}

/// Detected fractions of a survey; criteria that were not requested are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResult {
    pub dim: usize,
    pub samples: u64,
    pub root_seed: u64,
    pub npt: Option<Tally>,
    pub npt3: Option<Tally>,
    pub onpt3: Option<Tally>,
    pub onpt4: Option<Tally>,
    pub npt5: Option<Tally>,
    pub onpt5: Option<Tally>,
}

impl SurveyResult {
    pub fn get(&self, criterion: Criterion) -> Option<&Tally> {
        match criterion {
            Criterion::Npt => self.npt.as_ref(),
            Criterion::Npt3 => self.npt3.as_ref(),
            Criterion::Onpt3 => self.onpt3.as_ref(),
            Criterion::Onpt4 => self.onpt4.as_ref(),
            Criterion::Npt5 => self.npt5.as_ref(),
            Criterion::Onpt5 => self.onpt5.as_ref(),
        }
    }

    fn slot(&mut self, criterion: Criterion) -> &mut Option<Tally> {
        match criterion {
            Criterion::Npt => &mut self.npt,
            Criterion::Npt3 => &mut self.npt3,
            Criterion::Onpt3 => &mut self.onpt3,
            Criterion::Onpt4 => &mut self.onpt4,
            Criterion::Npt5 => &mut self.npt5,
            Criterion::Onpt5 => &mut self.onpt5,
        }
    }

    /// Aggregates per-sample reports.
    pub fn from_reports(
        dim: usize,
        root_seed: u64,
        reports: &[CriterionReport],
        criteria: &[Criterion],
        tol: f64,
    ) -> Self {
        let samples = reports.len() as u64;
        let mut out = SurveyResult::empty(dim, samples, root_seed);
        for &c in criteria {
            let hits = reports
                .iter()
                .filter(|r| r.detects(c, tol) == Some(true))
                .count() as u64;
            *out.slot(c) = Some(Tally::new(hits, samples));
        }
        out
    }

    fn empty(dim: usize, samples: u64, root_seed: u64) -> Self {
        SurveyResult {
            dim,
            samples,
            root_seed,
            npt: None,
            npt3: None,
            onpt3: None,
            onpt4: None,
            npt5: None,
            onpt5: None,
        }
    }
}

fn check_survey(dim: usize, samples: u64, criteria: &[Criterion]) -> Result<usize> {
    if dim < 2 {
        return Err(Error::invalid(format!("surveys need D >= 2, got {dim}")));
    }
    if samples == 0 {
        return Err(Error::invalid("a survey needs at least one sample"));
    }
    Ok(criteria.iter().map(|c| c.moment_order()).max().unwrap_or(3))
}

/// Fractions of Hilbert-Schmidt `D × D` states detected by each of `criteria`.
pub fn run_survey(
    dim: usize,
    samples: u64,
    root_seed: u64,
    criteria: &[Criterion],
) -> Result<SurveyResult> {
    run_survey_with(dim, samples, root_seed, criteria, &Tolerances::DEFAULT)
}

pub fn run_survey_with(
    dim: usize,
    samples: u64,
    root_seed: u64,
    criteria: &[Criterion],
    tol: &Tolerances,
) -> Result<SurveyResult> {
    let order = check_survey(dim, samples, criteria)?;
    let counts = with_thread_limit(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let report = analyze_state(&survey_state(dim, root_seed, i)?, order, tol)?;
                Ok(criteria
                    .iter()
                    .map(|&c| u64::from(report.detects(c, tol.detection) == Some(true)))
                    .collect::<Vec<u64>>())
            })
            .try_reduce(
                || vec![0; criteria.len()],
                |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
            )
    })??;
    let mut out = SurveyResult::empty(dim, samples, root_seed);
    for (&c, &hits) in criteria.iter().zip(&counts) {
        *out.slot(c) = Some(Tally::new(hits, samples));
    }
    Ok(out)
}

/// Per-sample reports of a survey, in sample order.
pub fn survey_reports(
    dim: usize,
    samples: u64,
    root_seed: u64,
    max_order: usize,
    tol: &Tolerances,
) -> Result<Vec<CriterionReport>> {
    check_survey(dim, samples, &[])?;
    with_thread_limit(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| analyze_state(&survey_state(dim, root_seed, i)?, max_order, tol))
            .collect()
    })?
}

/// One temperature of an Ising sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingRow {
    pub beta: f64,
    pub negativity: f64,
    pub n3: f64,
    pub n5: f64,
    pub o3: Option<f64>,
    pub o4: Option<f64>,
    pub o5: Option<f64>,
}

impl IsingRow {
    fn from_report(beta: f64, r: &CriterionReport) -> Self {
        IsingRow {
            beta,
            negativity: r.negativity,
            n3: r.n3,
            n5: r.n5.unwrap_or(0.0),
            o3: r.o3,
            o4: r.o4,
            o5: r.o5,
        }
    }
}

/// Criteria of the Gibbs state at each inverse temperature in `betas`;
/// `params.inverse_temperature` is ignored.
pub fn ising_sweep(params: &IsingParams, betas: &[f64]) -> Result<Vec<IsingRow>> {
    ising_sweep_with(params, betas, &Tolerances::DEFAULT)
}

pub fn ising_sweep_with(
    params: &IsingParams,
    betas: &[f64],
    tol: &Tolerances,
) -> Result<Vec<IsingRow>> {
    let model = IsingModel::new(params)?;
    with_thread_limit(|| {
        betas
            .par_iter()
            .map(|&beta| {
                let report = analyze_state(&model.gibbs(beta)?, 5, tol)?;
                Ok(IsingRow::from_report(beta, &report))
            })
            .collect()
    })?
}

/// Where the optimal `p_3` bound exceeds `p_2^2` the most, relatively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub p2: f64,
    pub max_relative_gap: f64,
}

/// `(p_3^min - p_2^2) / p_2^2` with the dimension large enough not to bind.
pub fn relative_gap(p2: f64) -> Result<f64> {
    if !(p2 > 0.0 && p2 <= 1.0) {
        return Err(Error::invalid(format!("p_2 must lie in (0, 1], got {p2}")));
    }
    let dim = ((1.0 / p2).ceil() as usize).max(2);
    let lower = p3_bounds(p2, dim)?.lower();
    Ok((lower - p2 * p2) / (p2 * p2))
}

/// Scans `p_2 = k / grid_points` for `k = 1..=grid_points`, then refines the
/// best point by golden-section search on its neighbouring cells.
pub fn gap_scan(grid_points: usize) -> Result<GapScan> {
    if grid_points < 100 {
        return Err(Error::invalid(format!(
            "the scan needs at least 100 points, got {grid_points}"
        )));
    }
    let h = 1.0 / grid_points as f64;
    let mut best = GapScan {
        p2: 1.0,
        max_relative_gap: f64::NEG_INFINITY,
    };
    for k in 1..=grid_points {
        let p2 = k as f64 * h;
        let g = relative_gap(p2)?;
        if g > best.max_relative_gap {
            best = GapScan {
                p2,
                max_relative_gap: g,
            };
        }
    }
    let (mut a, mut b) = ((best.p2 - h).max(h), (best.p2 + h).min(1.0));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if relative_gap(c)? >= relative_gap(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let g = relative_gap(mid)?;
    if g > best.max_relative_gap {
        best = GapScan {
            p2: mid,
            max_relative_gap: g,
        };
    }
    Ok(best)
}

/// Inputs of the copy-count estimate for measuring `p_n` on `N` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetQuery {
    pub n_qubits: u32,
    pub moment_order: u32,
    pub p2_estimate: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// `⌈n² 2^N p_2^{n-1} / (ε² δ)⌉` copies: Chebyshev with the leading variance
/// term, so an order-of-magnitude estimate rather than a guarantee.
pub fn sample_complexity(q: &BudgetQuery) -> Result<u64> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(q.epsilon) || !open_unit(q.delta) {
        return Err(Error::invalid(format!(
            "epsilon and delta must lie in (0, 1), got {} and {}",
            q.epsilon, q.delta
        )));
    }
    if !(q.p2_estimate > 0.0 && q.p2_estimate <= 1.0) {
        return Err(Error::invalid(format!(
            "p_2 must lie in (0, 1], got {}",
            q.p2_estimate
        )));
    }
    if q.moment_order < 2 {
        return Err(Error::invalid(format!(
            "the moment order must be >= 2, got {}",
            q.moment_order
        )));
    }
    let n = f64::from(q.moment_order);
    let raw = n * n * 2f64.powi(q.n_qubits as i32) * q.p2_estimate.powi(q.moment_order as i32 - 1)
        / (q.epsilon * q.epsilon * q.delta);
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        return Err(Error::Scale(format!(
            "the estimate {raw:e} does not fit in 64 bits"
        )));
    }
    // Snap values within rounding of an integer before taking the ceiling.
    let nearest = raw.round();
    Ok(if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        raw.ceil() as u64
    })
}
