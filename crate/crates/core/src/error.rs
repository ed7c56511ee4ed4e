use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} overflows double precision")]
    Overflow { what: String },

    #[error("quadrature did not converge for {what}: discrepancy {discrepancy:.3e} across order doubling")]
    Accuracy { what: String, discrepancy: f64 },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),

    #[error("volume function is not monotone near lambda = {at}")]
    NonMonotone { at: f64 },

    #[error("degenerate set: {0}")]
    Degenerate(String),

    #[error("Newton iteration failed to converge for {0}")]
    NewtonFailed(String),

    #[error("invalid construction: {0}")]
    InvalidConstruction(String),

    #[error("spectral window unresolved: {0}")]
    Unresolved(String),

    #[error("non-positive eigenvalue at index {index}")]
    NonPositiveEigenvalue { index: usize },
}
