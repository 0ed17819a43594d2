//! Run configuration: JSON parsing, validation and coupling resolution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use shocklab_core::flow::{FlowLeg, FlowMode};
use shocklab_core::lattice::SolverOptions;
use shocklab_core::shock::OscillationParams;
use shocklab_core::{CouplingKey, CouplingVector};

use crate::error::{CliError, CliResult};
use crate::presets::Preset;

pub const DEFAULT_SCALE: usize = 200;
pub const DEFAULT_X_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// `"t2j"` (raw) or `"T2j"` (rescaled) keys; one kind only.
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub oscillation: OscillationParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    /// Reserved; echoed but unused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Lattice window: either a reported range `0 < x <= x_max` or an explicit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowStart {
    /// `B_n = n` at zero coupling.
    #[default]
    Gaussian,
    /// String-equation solution at the configured couplings.
    String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowClosure {
    Truncate,
    Linear,
    #[default]
    Clamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowLegConfig {
    /// Coupling advanced by this leg, e.g. `"t4"` or `"T4"`.
    pub coupling: String,
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub mode: FlowMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(default)]
    pub start: FlowStart,
    #[serde(default)]
    pub closure: FlowClosure,
    #[serde(default)]
    pub legs: Vec<FlowLegConfig>,
    #[serde(default)]
    pub snapshot_every: usize,
    /// Compare the endpoint with a string-equation solve.
    #[serde(default = "yes")]
    pub compare: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Relative tolerance above which the two routes are flagged.
    #[serde(default = "default_agreement")]
    pub agreement_tol: f64,
}

fn default_n_max() -> usize {
    20
}

fn default_agreement() -> f64 {
    1e-8
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            agreement_tol: default_agreement(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub x_range: [f64; 2],
    pub t6_range: [f64; 2],
    pub grid: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Parse and validate a JSON configuration document.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let schema = |e: serde_json::Error| CliError::config(format!("schema: {e}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(schema)?;
    if !value.is_object() {
        return Err(CliError::config("schema: the configuration must be a JSON object"));
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(schema)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a coupling name, mapping failures to configuration errors.
pub fn parse_coupling_key(s: &str) -> CliResult<CouplingKey> {
    s.parse::<CouplingKey>().map_err(|e| CliError::config(e.to_string()))
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if let Some(name) = &self.preset {
            name.parse::<Preset>()?;
            if !self.couplings.is_empty() {
                return Err(CliError::config("give either a preset or couplings, not both"));
            }
        }
        let mut kinds = Vec::new();
        for (name, value) in &self.couplings {
            let key = parse_coupling_key(name)?;
            if !value.is_finite() {
                return Err(CliError::config(format!("coupling {name} is not finite")));
            }
            kinds.push(key.rescaled);
        }
        if kinds.iter().any(|&r| r) && kinds.iter().any(|&r| !r) {
            return Err(CliError::config("specify couplings either as raw t2j or as rescaled T2j, not both"));
        }
        let mut seen = BTreeMap::new();
        for name in self.couplings.keys() {
            let k = parse_coupling_key(name)?.k;
            if seen.insert(k, name).is_some() {
                return Err(CliError::config(format!("coupling index {} given twice", 2 * k)));
            }
        }
        if self.scale == Some(0) {
            return Err(CliError::config("N must be positive"));
        }
        match (self.window.x_max, self.window.len) {
            (Some(_), Some(_)) => return Err(CliError::config("window: give x_max or len, not both")),
            (Some(x), None) if !(x > 0.0 && x.is_finite()) => {
                return Err(CliError::config("window.x_max must be positive"))
            }
            (None, Some(0)) => return Err(CliError::config("window.len must be positive")),
            _ => {}
        }
        let s = &self.solver;
        if s.continuation_steps == 0 || s.max_continuation_steps < s.continuation_steps {
            return Err(CliError::config(
                "solver: continuation_steps must be positive and at most max_continuation_steps",
            ));
        }
        if !(s.tolerance > 0.0) || !(s.stage_tolerance > 0.0) {
            return Err(CliError::config("solver tolerances must be positive"));
        }
        if self.oscillation.window < 3 || !(self.oscillation.amp_tol >= 0.0) {
            return Err(CliError::config("oscillation: window >= 3 and amp_tol >= 0 required"));
        }
        if let Some(flow) = &self.flow {
            for leg in &flow.legs {
                parse_coupling_key(&leg.coupling)?;
                if !leg.target.is_finite() {
                    return Err(CliError::config("flow leg target must be finite"));
                }
                if let Some(h) = leg.h {
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(CliError::config("flow leg step h must be positive"));
                    }
                }
            }
            if flow.start == FlowStart::Gaussian && self.coupling_map().values().any(|v| *v != 0.0) {
                return Err(CliError::config("a gaussian flow start needs zero couplings"));
            }
        }
        if let Some(o) = &self.oracle {
            if o.n_max == 0 {
                return Err(CliError::config("oracle.n_max must be positive"));
            }
        }
        if let Some(p) = &self.phase {
            if p.grid[0] < 2 || p.grid[1] < 2 {
                return Err(CliError::config("phase.grid needs at least 2 points per axis"));
            }
            if !(p.x_range[0] < p.x_range[1]) || !(p.t6_range[0] < p.t6_range[1]) {
                return Err(CliError::config("phase ranges must be increasing"));
            }
        }
        Ok(())
    }

    pub fn scale_or_default(&self) -> usize {
        self.scale.unwrap_or(DEFAULT_SCALE)
    }

    pub fn preset(&self) -> CliResult<Option<Preset>> {
        self.preset.as_deref().map(str::parse).transpose()
    }

    /// Coupling map after preset expansion.
    pub fn coupling_map(&self) -> BTreeMap<String, f64> {
        match self.preset.as_deref().map(str::parse::<Preset>) {
            Some(Ok(p)) => p.coupling_map(),
            _ => self.couplings.clone(),
        }
    }

    /// Coupling vector at the resolved scale.
    pub fn couplings(&self) -> CliResult<CouplingVector> {
        let scale = self.scale_or_default();
        let mut raw = Vec::new();
        let mut rescaled = Vec::new();
        for (name, &v) in &self.coupling_map() {
            let key = parse_coupling_key(name)?;
            if key.rescaled {
                rescaled.push((key.k, v));
            } else {
                raw.push((key.k, v));
            }
        }
        let mut c = CouplingVector::from_raw(scale, raw)?;
        for (k, v) in rescaled {
            c.set_rescaled(k, v)?;
        }
        Ok(c)
    }

    /// Flow legs with targets converted to raw couplings.
    pub fn flow_legs(&self) -> CliResult<Vec<FlowLeg>> {
        let scale = self.scale_or_default() as f64;
        let Some(flow) = &self.flow else {
            return Ok(Vec::new());
        };
        flow.legs
            .iter()
            .map(|leg| {
                let key = parse_coupling_key(&leg.coupling)?;
                let target = if key.rescaled {
                    leg.target / scale.powi(key.k as i32 - 1)
                } else {
                    leg.target
                };
                Ok(FlowLeg {
                    k: key.k,
                    target,
                    h: leg.h,
                    mode: leg.mode,
                })
            })
            .collect()
    }

    /// Copy with every default made explicit, as echoed in result bundles.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.scale = Some(self.scale_or_default());
        if out.window.x_max.is_none() && out.window.len.is_none() {
            out.window.x_max = Some(DEFAULT_X_MAX);
        }
        out.output = None;
        out
    }
}
