use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("steady state is not unique: two smallest singular values {first:.3e}, {second:.3e} below {threshold:.3e}")]
    NonUniqueSteadyState {
        first: f64,
        second: f64,
        threshold: f64,
    },

    #[error("steady-state residual {residual:.3e} exceeds bound {bound:.3e}")]
    SteadyStateResidual { residual: f64, bound: f64 },

    #[error("eigenbasis condition number {0:.3e} exceeds 1e12")]
    IllConditioned(f64),

    #[error("density matrix has eigenvalue {0:.3e} below -1e-10")]
    NegativeEigenvalue(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("integrator failure: {0}")]
    Integrator(String),
}
