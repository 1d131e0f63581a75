//! Error taxonomy shared by every module of the crate.

use thiserror::Error;

/// All failure modes the library reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad construction parameters (grid sizes, scenario settings, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An array does not match the grid it claims to live on.
    #[error("dimension error: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Non-finite input data.
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A right-hand-side intermediate overflowed; carries the term name.
    #[error("numerical overflow in term `{term}` at t = {t}")]
    Overflow { term: &'static str, t: f64 },

    /// The gradient guard or a non-finite field tripped during stepping.
    #[error("blow-up suspected at t = {t}: {diagnostic}")]
    BlowUpSuspected { t: f64, diagnostic: String },

    /// The requested time step violates the advective CFL bound.
    #[error("time step {dt} exceeds CFL limit {limit} at t = {t}")]
    StepTooLarge { dt: f64, limit: f64, t: f64 },

    /// A characteristic or integration interval left the trusted window.
    #[error("window escape: position {position} outside trusted window [{lo}, {hi}]")]
    WindowEscape { position: f64, lo: f64, hi: f64 },

    /// Too few samples above the noise floor for a tail fit.
    #[error("insufficient tail data: {usable} usable samples, need {needed}")]
    InsufficientTailData { usable: usize, needed: usize },

    /// An exponential weight left the representable range.
    #[error("weight overflow: {0}")]
    WeightOverflow(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed config / manifest / snapshot file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
