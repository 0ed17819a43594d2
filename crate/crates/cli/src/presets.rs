//! Figure presets: caption couplings and the job each figure calls for.

use std::fmt;
use std::str::FromStr;

use crate::config::PhaseConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4a,
    Fig4b,
}

/// What `reproduce` computes for a preset.
#[derive(Debug, Clone, PartialEq)]
pub enum PresetJob {
    /// Lattice solve compared with the continuum branch.
    Comparison,
    /// Real roots of the equation of state along `x`.
    Roots,
    /// Phase grid and critical set in the `(x, T6)` plane.
    CriticalSet(PhaseConfig),
    /// Free energy at fixed `x` for several `T6`.
    FreeEnergy { x: f64, t6: Vec<f64> },
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::Fig1a,
        Preset::Fig1b,
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
        Preset::Fig3d,
        Preset::Fig4a,
        Preset::Fig4b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig3d => "fig3d",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
        }
    }

    /// Rescaled couplings `(T2, T4, T6)`.
    pub fn couplings(self) -> [f64; 3] {
        match self {
            Preset::Fig1a => [0.0, 0.1, -0.01],
            Preset::Fig1b => [0.0, 0.1, -0.008],
            // T6 is swept or listed by the job
            Preset::Fig2a | Preset::Fig2b => [0.0, 0.1, -0.008],
            Preset::Fig3a | Preset::Fig3b => [1.0, -0.25, -0.25],
            Preset::Fig3c | Preset::Fig3d => [1.0, 0.25, -0.25],
            Preset::Fig4a | Preset::Fig4b => [0.25, -1.0, -0.5],
        }
    }

    pub fn job(self) -> PresetJob {
        match self {
            Preset::Fig1a | Preset::Fig1b | Preset::Fig3b | Preset::Fig3d | Preset::Fig4b => PresetJob::Comparison,
            Preset::Fig3a | Preset::Fig3c | Preset::Fig4a => PresetJob::Roots,
            Preset::Fig2a => PresetJob::CriticalSet(PhaseConfig {
                x_range: [0.0, 1.0],
                t6_range: [-0.012, -0.002],
                grid: [181, 101],
            }),
            Preset::Fig2b => PresetJob::FreeEnergy {
                x: 0.22,
                t6: vec![-0.0067, -0.0051],
            },
        }
    }

    /// The coupling map placed in a run configuration.
    pub fn coupling_map(self) -> std::collections::BTreeMap<String, f64> {
        let [t2, t4, t6] = self.couplings();
        [("T2", t2), ("T4", t4), ("T6", t6)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                CliError::config(format!("unknown preset {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
