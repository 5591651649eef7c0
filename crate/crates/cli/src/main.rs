//! `ptmoments` command-line front end.
//!
//! Structural failures (unreadable input, invalid states, infeasible moment
//! prefixes) exit with status 2. Detecting entanglement is a result, not an
//! error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ptmoments::bounds::{p3_bounds, p4_bounds, p5_bounds, OptimalBounds};
use ptmoments::gallery::{build_counterexample, CounterexampleParams, IsingParams};
use ptmoments::hankel::elben_higher_check;
use ptmoments::io::{parse_cut, parse_grid, parse_moment_list, parse_state, state_to_json};
use ptmoments::linalg::eigenvalues_hermitian;
use ptmoments::moment_problem::{membership_mn, membership_mn_plus, realize_moments};
use ptmoments::moments::pt_moments;
use ptmoments::report::{analyze_state, Criterion, CriterionReport};
use ptmoments::survey::{
    gap_scan, ising_sweep_with, run_survey_with, sample_complexity, survey_reports, BudgetQuery,
    SurveyResult,
};
use ptmoments::{Error, MomentVector, Tolerances};

#[derive(Parser)]
#[command(
    name = "ptmoments",
    version,
    about = "Entanglement criteria from partial-transpose moments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every criterion on a state file.
    Analyze {
        state: PathBuf,
        /// Highest PT-moment used, 3 to 5.
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fractions of Hilbert-Schmidt random states detected by each criterion.
    Survey {
        /// Local dimension D of a D x D system.
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated subset of npt, npt3, onpt3, onpt4, npt5, onpt5.
        #[arg(long)]
        criteria: Option<String>,
        /// Per-sample CSV; the JSON summary goes to stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Criteria of transverse-field Ising Gibbs states over a temperature grid.
    Ising {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        #[arg(long, default_value_t = 2.5)]
        field: f64,
        /// Zero-based sites of side A, e.g. "0-4"; defaults to the first half.
        #[arg(long)]
        cut: Option<String>,
        /// Inverse temperatures as "start:stop:count" or a list.
        #[arg(long, default_value = "0:10:21")]
        betas: String,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal range of p_n given (p_2, ..., p_{n-1}).
    Bounds {
        /// p_2 [p_3 [p_4]].
        #[arg(required = true, num_args = 1..=3, allow_negative_numbers = true)]
        moments: Vec<f64>,
        #[arg(long)]
        dim: usize,
        /// Bounded order n; defaults to one past the last given moment.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Copies needed to estimate p_n to accuracy eps with confidence 1 - delta.
    Budget {
        #[arg(long)]
        qubits: u32,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Truncated moment problem: closure membership and exact realizability.
    MomentsCheck {
        /// m_0, m_1, ..., m_n separated by commas.
        #[arg(allow_hyphen_values = true)]
        moments: String,
        /// Ask for a positive semidefinite observable.
        #[arg(long)]
        stieltjes: bool,
    },
    /// Noisy Werner state passing p_3-PPT with λ_min + λ_max < 0.
    Counterexample {
        #[arg(long, default_value_t = 3)]
        d1: usize,
        /// Noise weight; defaults to half the largest PT eigenvalue.
        #[arg(long)]
        lambda: Option<f64>,
        /// Noise blocks N; defaults to the smallest that works.
        #[arg(long)]
        blocks: Option<usize>,
        /// Where to write the state file.
        #[arg(long)]
        state_out: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Largest relative gap between the optimal p_3 bound and p_2^2.
    GapScan {
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Detection threshold on every violation measure.
    #[arg(long, default_value_t = Tolerances::DEFAULT.detection)]
    tol: f64,
}

impl Common {
    fn tolerances(&self) -> Result<Tolerances, Failure> {
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Failure::new(
                "cli",
                format!(
                    "--tol must be a finite nonnegative number, got {}",
                    self.tol
                ),
            ));
        }
        Ok(Tolerances::with_detection(self.tol))
    }
}

/// An error tagged with the module that raised it.
struct Failure {
    module: &'static str,
    message: String,
}

impl Failure {
    fn new(module: &'static str, message: impl Into<String>) -> Self {
        Failure {
            module,
            message: message.into(),
        }
    }
}

fn tag(module: &'static str) -> impl Fn(Error) -> Failure {
    move |e| Failure::new(module, e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new("io", format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::new("io", e.to_string()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::new("io", e.to_string()))?;
    emit(out, &text)
}

#[derive(Serialize)]
struct AnalyzeOutput {
    dim_a: usize,
    dim_b: usize,
    pt_spectrum: Vec<f64>,
    #[serde(flatten)]
    report: CriterionReport,
}

fn analyze(state: &Path, order: usize, common: &Common) -> Result<(), Failure> {
    let text = fs::read_to_string(state)
        .map_err(|e| Failure::new("io", format!("{}: {e}", state.display())))?;
    let rho = parse_state(&text).map_err(tag("linalg-core"))?;
    let report = analyze_state(&rho, order, &common.tolerances()?).map_err(tag("criteria"))?;
    let output = AnalyzeOutput {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        pt_spectrum: rho.pt_spectrum().values().to_vec(),
        report,
    };
    emit_json(common.out.as_deref(), &output)
}

#[derive(Serialize)]
struct SampleRow {
    index: usize,
    p2: f64,
    p3: f64,
    p4: Option<f64>,
    p5: Option<f64>,
    negativity: f64,
    n3: f64,
    n5: Option<f64>,
    o3: Option<f64>,
    o4: Option<f64>,
    o5: Option<f64>,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::new("io", format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::new("io", e.to_string()))
}

fn parse_criteria(list: Option<&str>) -> Result<Vec<Criterion>, Failure> {
    match list {
        None => Ok(Criterion::ALL.to_vec()),
        Some(text) => text
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.parse::<Criterion>().map_err(tag("cli")))
            .collect(),
    }
}

fn survey(
    dim: usize,
    samples: u64,
    seed: u64,
    criteria: Option<&str>,
    csv_path: Option<&Path>,
    common: &Common,
) -> Result<(), Failure> {
    let criteria = parse_criteria(criteria)?;
    let tol = common.tolerances()?;
    let result: SurveyResult = match csv_path {
        None => {
            run_survey_with(dim, samples, seed, &criteria, &tol).map_err(tag("survey-harness"))?
        }
        Some(path) => {
            let order = criteria.iter().map(|c| c.moment_order()).max().unwrap_or(3);
            let reports =
                survey_reports(dim, samples, seed, order, &tol).map_err(tag("survey-harness"))?;
            write_csv(
                path,
                reports.iter().enumerate().map(|(index, r)| SampleRow {
                    index,
                    p2: r.moments.at(2),
                    p3: r.moments.at(3),
                    p4: r.moments.get(4),
                    p5: r.moments.get(5),
                    negativity: r.negativity,
                    n3: r.n3,
                    n5: r.n5,
                    o3: r.o3,
                    o4: r.o4,
                    o5: r.o5,
                }),
            )?;
            SurveyResult::from_reports(dim, seed, &reports, &criteria, tol.detection)
        }
    };
    emit_json(common.out.as_deref(), &result)
}

fn ising(
    qubits: usize,
    coupling: f64,
    field: f64,
    cut: Option<&str>,
    betas: &str,
    common: &Common,
) -> Result<(), Failure> {
    let mut params = IsingParams::half_chain(qubits, coupling, field, 0.0);
    if let Some(cut) = cut {
        params.cut = parse_cut(cut).map_err(tag("cli"))?;
    }
    let betas = parse_grid(betas).map_err(tag("cli"))?;
    let rows =
        ising_sweep_with(&params, &betas, &common.tolerances()?).map_err(tag("survey-harness"))?;
    match &common.out {
        Some(path) => write_csv(path, rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for row in rows {
                w.serialize(row)
                    .map_err(|e| Failure::new("io", e.to_string()))?;
            }
            w.flush().map_err(|e| Failure::new("io", e.to_string()))
        }
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    p_min: f64,
    p_max: f64,
    min_multiplicities: Vec<usize>,
    max_multiplicities: Vec<usize>,
    #[serde(flatten)]
    bounds: OptimalBounds,
}

fn bounds(
    moments: &[f64],
    dim: usize,
    order: Option<usize>,
    output: &Output,
) -> Result<(), Failure> {
    let n = order.unwrap_or(moments.len() + 2);
    if !(3..=5).contains(&n) {
        return Err(Failure::new(
            "optimal-bounds",
            format!("order must be 3, 4 or 5, got {n}"),
        ));
    }
    if moments.len() < n - 2 {
        return Err(Failure::new(
            "optimal-bounds",
            format!(
                "order {n} needs p_2 through p_{}, got {} values",
                n - 1,
                moments.len()
            ),
        ));
    }
    let prefix =
        MomentVector::from_pt_prefix(dim, &moments[..n - 2]).map_err(tag("optimal-bounds"))?;
    let b = match n {
        3 => p3_bounds(moments[0], dim),
        4 => p4_bounds(&prefix),
        _ => p5_bounds(&prefix),
    }
    .map_err(tag("optimal-bounds"))?;
    let report = BoundsOutput {
        p_min: b.lower(),
        p_max: b.upper(),
        min_multiplicities: b.min.multiplicities(),
        max_multiplicities: b.max.multiplicities(),
        bounds: b,
    };
    emit_json(output.out.as_deref(), &report)
}

fn moments_check(text: &str, stieltjes: bool) -> Result<(), Failure> {
    let values = parse_moment_list(text).map_err(tag("cli"))?;
    let m = MomentVector::new(values).map_err(tag("moment-problem"))?;
    let n = m.order();
    let (set, inside) = if stieltjes {
        (format!("cl(M_{n}^+)"), membership_mn_plus(&m))
    } else {
        (format!("cl(M_{n})"), membership_mn(&m))
    };
    let kind = if stieltjes {
        "PSD-realizable"
    } else {
        "exactly realizable"
    };
    let verdict = if !inside {
        "no (outside the closure)".to_string()
    } else {
        match realize_moments(&m, stieltjes) {
            Ok(r) => format!("yes (dimension {})", r.dim()),
            Err(Error::SingularHankel(_)) => "no (singular Hankel)".into(),
            Err(Error::NotStieltjes { .. }) => "no (shifted Hankel not positive definite)".into(),
            Err(e) => return Err(Failure::new("moment-problem", e.to_string())),
        }
    };
    let yes_no = if inside { "yes" } else { "no" };
    emit(None, &format!("in {set}: {yes_no}; {kind}: {verdict}"))
}

#[derive(Serialize)]
struct CounterexampleOutput {
    #[serde(flatten)]
    params: CounterexampleParams,
    dim_a: usize,
    dim_b: usize,
    p2: f64,
    p3: f64,
    lambda_min: f64,
    lambda_max: f64,
    /// Smallest n <= 25 where p_n^{n-2} >= p_{n-1}^{n-1} fails.
    first_power_violation: Option<usize>,
}

fn counterexample(
    d1: usize,
    lambda: Option<f64>,
    blocks: Option<usize>,
    state_out: &Path,
    output: &Output,
) -> Result<(), Failure> {
    let t = tag("state-gallery");
    let mut params = match lambda {
        Some(l) => CounterexampleParams::minimal(d1, l),
        None => CounterexampleParams::with_default_weight(d1),
    }
    .map_err(&t)?;
    if let Some(b) = blocks {
        params.noise_blocks = b;
    }
    let rho = build_counterexample(&params).map_err(&t)?;
    fs::write(state_out, state_to_json(&rho))
        .map_err(|e| Failure::new("io", format!("{}: {e}", state_out.display())))?;
    let p = pt_moments(&rho, 25).map_err(&t)?;
    let pt = eigenvalues_hermitian(&rho.partial_transpose()).map_err(&t)?;
    let first = elben_higher_check(&p)
        .map_err(&t)?
        .into_iter()
        .find(|o| !o.satisfied)
        .map(|o| o.n);
    let summary = CounterexampleOutput {
        params,
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        p2: p.at(2),
        p3: p.at(3),
        lambda_min: pt.min(),
        lambda_max: pt.max(),
        first_power_violation: first,
    };
    emit_json(output.out.as_deref(), &summary)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            state,
            order,
            common,
        } => analyze(&state, order, &common),
        Command::Survey {
            dim,
            samples,
            seed,
            criteria,
            csv,
            common,
        } => survey(
            dim,
            samples,
            seed,
            criteria.as_deref(),
            csv.as_deref(),
            &common,
        ),
        Command::Ising {
            qubits,
            coupling,
            field,
            cut,
            betas,
            common,
        } => ising(qubits, coupling, field, cut.as_deref(), &betas, &common),
        Command::Bounds {
            moments,
            dim,
            order,
            output,
        } => bounds(&moments, dim, order, &output),
        Command::Budget {
            qubits,
            order,
            p2,
            eps,
            delta,
        } => {
            let q = BudgetQuery {
                n_qubits: qubits,
                moment_order: order,
                p2_estimate: p2,
                epsilon: eps,
                delta,
            };
            let m = sample_complexity(&q).map_err(tag("survey-harness"))?;
            emit(None, &m.to_string())
        }
        Command::MomentsCheck { moments, stieltjes } => moments_check(&moments, stieltjes),
        Command::Counterexample {
            d1,
            lambda,
            blocks,
            state_out,
            output,
        } => counterexample(d1, lambda, blocks, &state_out, &output),
        Command::GapScan { grid, output } => {
            let scan = gap_scan(grid).map_err(tag("survey-harness"))?;
            emit_json(output.out.as_deref(), &scan)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.module, f.message);
            ExitCode::from(2)
        }
    }
}
