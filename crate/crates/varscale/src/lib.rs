//! Numerical machinery for error analysis of linear ill-posed problems in
//! variable Hilbert scales.
//!
//! The crate is organised around index functions: continuous positive
//! functions on `(0, ∞)` that generalise power-type smoothness exponents.
//! [`indexfn`] provides an expression-tree calculus for them (evaluation,
//! property verification, numeric inversion, concave linear extension, the
//! involution `S`, and the transform chain `Ψ → ψ̄ → Θ → χ`). On top of that,
//! [`bounds`] evaluates interpolation-type error bounds and the two modulus
//! of continuity bounds together with a brute-force oracle, [`operators`]
//! supplies diagonal and Fourier-multiplier forward operators with
//! scale norms and range-inclusion checks, [`regularize`] implements
//! spectral regularisation schemes with verified constants and parameter
//! choice rules, and [`harness`] runs seeded, reproducible convergence-rate
//! experiments driven by JSON configs.
//!
//! Every runnable capability has a matching program under `examples/`; the
//! thin `varscale` binary exposes the same functionality as subcommands for
//! scripted use.

pub mod bounds;
pub mod harness;
pub mod indexfn;
pub mod operators;
pub mod regularize;
pub mod special;

/// Crate-wide error type.
///
/// Numeric routines distinguish domain violations (arguments outside a
/// declared floor or an operator grid) from bracket failures in numeric
/// inversion, because callers handle them differently: a bracket failure on
/// a smoothness weight is treated as saturation (the weight is effectively
/// beyond f64 range), while a domain error is a caller bug.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inverse bracket [{lo:e}, {hi:e}] does not straddle target {target:e}")]
    Bracket { lo: f64, hi: f64, target: f64 },
    #[error("property verification failed: {0}")]
    Unverified(String),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
