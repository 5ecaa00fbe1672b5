use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every computation in the crate.
///
/// Variants split into two families: input validation (bad parameters,
/// malformed grids) and numerical failure (a computation that cannot
/// produce a trustworthy number). [`Error::is_validation`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{param}`: {reason}")]
    Domain { param: &'static str, reason: String },

    #[error("degenerate operating point (g = 0 and kappa = gamma): closed form is 0/0")]
    DegeneratePoint,

    #[error("step size dt = {dt:e} s does not resolve the dynamics (need dt <= {limit:e} s)")]
    StepSize { dt: f64, limit: f64 },

    #[error("horizon too short: residual norm {residual:e} beyond t = {horizon:e} s exceeds {limit:e}")]
    Horizon { horizon: f64, residual: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insensitive operating point: responsivity is zero")]
    Insensitive,

    #[error("operating point is not at a responsivity maximum (relative slope {slope:e})")]
    NotAtMaximum { slope: f64 },

    #[error("no interior responsivity maximum in row {row}")]
    NoRidge { row: usize },

    #[error("unresolved splitting: found {found} peak(s) above prominence threshold")]
    UnresolvedSplitting { found: usize },

    #[error("degenerate design on the {axis} axis: all abscissae equal")]
    DegenerateDesign { axis: &'static str },

    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            param,
            reason: reason.into(),
        }
    }

    /// True for errors caused by invalid inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::DegeneratePoint
                | Error::StepSize { .. }
                | Error::GridMismatch(_)
                | Error::DegenerateDesign { .. }
                | Error::NotAtMaximum { .. }
        )
    }
}

pub(crate) fn ensure_positive(param: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(param, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn ensure_finite(param: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(param, format!("must be finite, got {value}")))
    }
}
