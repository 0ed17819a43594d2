use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} is outside the window (valid sites ..={max})")]
    OutOfRange { site: i64, max: i64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("newton iteration did not converge (last scaled residual {residual:e} at continuation parameter {stage})")]
    NoConvergence { residual: f64, stage: f64 },

    #[error("solution is nonphysical: B_{site} = {value:e} is not positive")]
    Nonphysical { site: usize, value: f64 },

    #[error("flow blew up at t = {time:e}: B_{site} = {value:e}")]
    BlowUp { time: f64, site: usize, value: f64 },

    #[error("flow became unstable at t = {time:e}")]
    Instability { time: f64 },

    #[error("quadrature failed to converge after {doublings} panel doublings (last relative change {change:e})")]
    QuadratureFailure { doublings: usize, change: f64 },

    #[error("precision loss: {0}")]
    Precision(String),

    #[error("weight is not integrable: the highest nonzero coupling must be negative")]
    InadmissibleWeight,

    #[error("continuum solution is multivalued at x = {x}")]
    MultivaluedRegion { x: f64 },

    #[error("no accessible continuum branch on the requested grid")]
    NoBranch,

    #[error("singular matrix in banded solve (column {0})")]
    Singular(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
