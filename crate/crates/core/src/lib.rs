//! Entanglement certification from moments of the partially transposed
//! density matrix.
//!
//! The crate computes PT-moments `p_k = Tr[(ρ^{T_A})^k]` and evaluates two
//! families of separability tests on them:
//!
//! - Hankel criteria ([`hankel`]): `B_{⌊(n-1)/2⌋}(p) ⪰ 0` for odd `n`, whose
//!   lowest member is `p_3 >= p_2^2`, with violation measure `N_n`.
//! - Optimal bounds ([`bounds`]): the exact range of `p_n` over nonnegative
//!   spectra with the lower moments fixed, for `n = 3, 4, 5`, with violation
//!   measure `O_n`.
//!
//! Supporting modules cover the truncated moment problem, generators for the
//! benchmark state families and a seeded survey driver.

pub mod bounds;
pub mod error;
pub mod gallery;
pub mod hankel;
pub mod io;
pub mod linalg;
pub mod moment_problem;
pub mod moments;
pub mod report;
pub mod survey;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{BipartiteState, CMatrix, Spectrum};
pub use moments::MomentVector;
pub use tolerances::Tolerances;
