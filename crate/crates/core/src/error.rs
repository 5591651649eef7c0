use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Matrix side does not equal `dim_a * dim_b`, or a matrix is not square.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max |M - M^H| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// A state invariant failed; the message names the invariant.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported moment order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("moment vector of order {available} is too short, order {required} is needed")]
    InsufficientOrder { required: usize, available: usize },

    /// The Hankel matrix is singular and the sequence admits no flat extension.
    #[error("singular Hankel matrix: {0}")]
    SingularHankel(String),

    /// A positive semidefinite observable was requested but the shifted Hankel
    /// matrix is not positive definite. `witness` is the eigenvector of its
    /// smallest eigenvalue.
    #[error("no positive semidefinite realization: B has eigenvalue {eigenvalue:e}")]
    NotStieltjes { eigenvalue: f64, witness: Vec<f64> },

    /// The moment prefix is not produced by any nonnegative spectrum of the
    /// given dimension.
    #[error("infeasible moments at order {order}: {condition}")]
    Infeasible { order: usize, condition: String },

    #[error("problem too large: {0}")]
    Scale(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn infeasible(order: usize, condition: impl Into<String>) -> Self {
        Error::Infeasible {
            order,
            condition: condition.into(),
        }
    }
}
