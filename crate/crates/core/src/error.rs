use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too small: {nx}x{ny} (need at least {min}x{min})")]
    GridTooSmall { nx: usize, ny: usize, min: usize },

    #[error("non-finite value in input at index {0}")]
    NonFinite(usize),

    #[error("direction-product constraint violated: m1*m2 + n1*n2 = {0}")]
    DirectionConstraint(f64),

    #[error("non-positive {what} {value} at ({u1}, {u2})")]
    NonPositive {
        what: &'static str,
        value: f64,
        u1: f64,
        u2: f64,
    },

    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("repeated root at s = {0}")]
    RepeatedRoot(f64),

    #[error("root within {tol} of ±i: integral divisible by H, reducible candidate")]
    RootAtImaginaryUnit { tol: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigensolver failure")]
    Eigensolver,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("flat case; no simple wave needed (lambda = 0)")]
    FlatCase,

    #[error("alpha = 0 forces beta = 1, a root at ±i")]
    AlphaZero,

    #[error("fixed-point iteration did not converge at t = {time} after {iterations} iterations")]
    NonConvergence { time: f64, iterations: usize },

    #[error("metric positivity lost at t = {time}")]
    PositivityLost { time: f64 },

    #[error("factorization failed: division remainder {0:e}")]
    Factorization(f64),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}
