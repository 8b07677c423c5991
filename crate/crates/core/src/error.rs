use thiserror::Error;

use crate::params::ExcludedSet;

/// Errors raised across the crate.
///
/// Variants are grouped by the module that raises them; the CLI maps them onto
/// exit codes through [`RicciError::is_inadmissible`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RicciError {
    #[error("inadmissible: (a,b,c) = ({a}, {b}, {c}) lies in {set}")]
    Inadmissible { a: f64, b: f64, c: f64, set: ExcludedSet },

    #[error("no surface for these parameters: {0}")]
    EmptyDomain(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("radicand b*s^2 + 2*c*s + d = {radicand} is not positive at s = {s}")]
    NonPositiveRadicand { s: f64, radicand: f64 },

    #[error("no root of the implicit profile equation at s = {s} on this branch")]
    NoBracket { s: f64 },

    #[error("branch violation: {0}")]
    BranchViolation(String),

    #[error("R(t) = t^2 - t - b/a^2 vanishes on [{t0}, {t}]")]
    SingularInterval { t0: f64, t: f64 },

    #[error("radius is not positive ({f}) at t = {t}")]
    NonPositiveRadius { t: f64, f: f64 },

    #[error("seed (s, x) = ({s}, {x}) is not in the region Omega")]
    NotInOmega { s: f64, x: f64 },

    #[error("horizontal tangent at s = {s}: mean curvature is unbounded")]
    HorizontalTangent { s: f64 },

    #[error("arc-length identity violated: f'^2 + g'^2 = {value}")]
    ArcLengthViolation { value: f64 },

    #[error("s = {s} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { s: f64, lo: f64, hi: f64 },

    #[error("unsupported export format {format} for {item}")]
    UnsupportedFormat { format: String, item: String },

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("no root of the boundary equation for b = {b}")]
    NoRoot { b: f64 },

    #[error("at least {needed} samples required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("curvature must be negative at every sample (found K = {k} at s = {s})")]
    NonNegativeK { s: f64, k: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl RicciError {
    pub fn is_inadmissible(&self) -> bool {
        matches!(self, RicciError::Inadmissible { .. })
    }
}

pub type Result<T> = std::result::Result<T, RicciError>;
