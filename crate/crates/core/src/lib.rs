//! Orthogonal polynomials, Hankel determinants and Painlevé-type identities
//! for the Gaussian weight with one or two Heaviside jumps,
//!
//! ```text
//! w(x, t1, t2) = e^{-x^2} (A + B1 θ(x - t1) + B2 θ(x - t2)),
//! ```
//!
//! computed at arbitrary precision (MPFR via `rug`).
//!
//! The crate builds the monic orthogonal system (recurrence coefficients
//! `alpha_n`, `beta_n`, squared norms `h_n`, determinants `D_n`), the ladder
//! auxiliary quantities `R_n`, `r_n`, `sigma_n` by two independent routes, and
//! evaluates the string, difference, Riccati/Toda, Painlevé IV, Chazy II and
//! σ-form identities as numerical residuals with derived tolerances.  An exact
//! series engine over ℚ(√2,√3) re-derives the large-`n` and large-`s`
//! expansions and checks them against the defining ODEs.
//!
//! The `hpk` binary exposes `tabulate`, `verify`, `asymptotics`, `series` and
//! `oracle` subcommands; see the crate README.

pub mod algebraic;
pub mod asymptotics;
pub mod cli;
pub mod identities;
pub mod ladder;
pub mod moments;
pub mod numerics;
pub mod ortho;
pub mod quad;
pub mod series;

use thiserror::Error;

/// Arbitrary-precision real scalar used throughout the crate.
pub type Real = rug::Float;

pub use ladder::{AuxDouble, AuxSingle};
pub use moments::WeightSpec;
pub use numerics::PrecisionContext;
pub use ortho::OrthoSystem;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("precision unachievable: {0}")]
    PrecisionUnachievable(String),

    #[error("finite-difference table did not converge: {0}")]
    FdNonConvergent(String),

    #[error("Cholesky breakdown at row {row} (bits = {bits}); moment matrix not numerically positive definite")]
    CholeskyBreakdown { row: usize, bits: u32 },

    #[error("singular moment matrix")]
    SingularMatrix,

    #[error("degenerate weight: A = B1 = B2 = 0")]
    DegenerateWeight,

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("index {n} out of range (n_max = {n_max})")]
    IndexOutOfRange { n: usize, n_max: usize },

    #[error("operation requires a single-jump weight (B2 = 0)")]
    SingleJumpRequired,

    #[error("operation requires a two-jump weight (B2 != 0)")]
    TwoJumpRequired,

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergent(String),

    #[error("series truncation insufficient: {0}")]
    InsufficientTruncation(String),

    #[error("order-by-order solve singular at order {0}")]
    SeriesSolveSingular(i64),

    #[error("internal consistency check failed: {0}")]
    ConsistencyFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
