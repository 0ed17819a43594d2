use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

use shocklab_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(#[from] CoreError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(CoreError::NoConvergence { .. }) => 4,
            Self::Numeric(_) | Self::Io { .. } => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::Numeric(e) => match e {
                CoreError::OutOfRange { .. } => "out_of_range",
                CoreError::InvalidInput(_) => "invalid_input",
                CoreError::NoConvergence { .. } => "no_convergence",
                CoreError::Nonphysical { .. } => "nonphysical",
                CoreError::BlowUp { .. } => "blow_up",
                CoreError::Instability { .. } => "instability",
                CoreError::QuadratureFailure { .. } => "quadrature_failure",
                CoreError::Precision(_) => "precision",
                CoreError::InadmissibleWeight => "inadmissible_weight",
                CoreError::MultivaluedRegion { .. } => "multivalued_region",
                CoreError::NoBranch => "no_branch",
                CoreError::Singular(_) => "singular",
            },
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut details = json!({});
        if let Self::Numeric(e) = self {
            details = match e {
                CoreError::NoConvergence { residual, stage } => json!({ "residual": residual, "stage": stage }),
                CoreError::BlowUp { time, site, value } => json!({ "time": time, "site": site, "value": value }),
                CoreError::Instability { time } => json!({ "time": time }),
                CoreError::Nonphysical { site, value } => json!({ "site": site, "value": value }),
                CoreError::MultivaluedRegion { x } => json!({ "x": x }),
                CoreError::QuadratureFailure { doublings, change } => {
                    json!({ "doublings": doublings, "change": change })
                }
                _ => json!({}),
            };
        }
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "details": details,
            }
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
