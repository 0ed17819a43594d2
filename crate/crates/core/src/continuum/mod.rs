//! Leading-order continuum limit: the equation of state
//! `Omega(u) = -x + u - sum_k 2k chi_k T_{2k} u^k = 0` with `chi_k = C(2k-1, k-1)`,
//! its free-energy density, and discriminant-based phase classification.

mod phase;
pub(crate) mod poly;
mod transport;

pub use phase::{
    classify, critical_set, discriminant, discriminant_zeros_in_x, Discriminant, Phase, PhasePoint,
    Polyline,
};
pub use poly::TIE_TOLERANCE;
pub use transport::{transport_consistency, TransportReport, TransportSample};

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingVector;
use crate::error::{Error, Result};

/// Central binomial weight `C(2k-1, k-1)`: 1, 3, 10, 35, 126, ...
pub fn chi(k: usize) -> f64 {
    assert!(k >= 1);
    let mut num: u128 = 1;
    for i in 0..(k - 1) as u128 {
        num = num * (2 * k as u128 - 1 - i) / (i + 1);
    }
    num as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    pub x: f64,
    /// `T_{2k}` for `k = 1..=q`.
    pub rescaled: Vec<f64>,
    /// Coefficients of `Omega` in ascending powers of `u`.
    pub coefficients: Vec<f64>,
}

impl EquationOfState {
    pub fn from_rescaled(x: f64, rescaled: &[f64]) -> Self {
        let mut coefficients = vec![0.0; rescaled.len().max(1) + 1];
        coefficients[0] = -x;
        coefficients[1] = 1.0;
        for (i, &big_t) in rescaled.iter().enumerate() {
            let k = i + 1;
            coefficients[k] -= 2.0 * k as f64 * chi(k) * big_t;
        }
        Self {
            x,
            rescaled: rescaled.to_vec(),
            coefficients,
        }
    }

    pub fn omega(&self, u: f64) -> f64 {
        poly::eval(&self.coefficients, u)
    }

    pub fn omega_prime(&self, u: f64) -> f64 {
        poly::eval(&poly::derivative(&self.coefficients), u)
    }

    /// Free-energy density whose `u`-derivative is `Omega`.
    pub fn free_energy(&self, u: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| a * u.powi(i as i32 + 1) / (i + 1) as f64)
            .sum()
    }

    pub fn degree(&self) -> usize {
        poly::trimmed(&self.coefficients).len().saturating_sub(1)
    }
}

pub fn eos_coefficients(c: &CouplingVector, x: f64) -> EquationOfState {
    EquationOfState::from_rescaled(x, &c.rescaled_vec())
}

/// Stationary-point type of the free energy at a root of `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stationarity {
    LocalMin,
    LocalMax,
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub u: f64,
    pub multiplicity: usize,
    /// `u >= 0`: a physical value of the order parameter.
    pub accessible: bool,
    pub kind: Stationarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn distinct_count(&self) -> usize {
        self.roots.len()
    }

    pub fn accessible(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.accessible)
    }

    pub fn accessible_minima(&self) -> impl Iterator<Item = &Root> {
        self.accessible().filter(|r| r.kind == Stationarity::LocalMin)
    }

    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.u).collect()
    }

    /// Global minimiser of the free energy among accessible local minima;
    /// ties go to the smaller `u`.
    pub fn equilibrium(&self, eos: &EquationOfState) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for r in self.accessible_minima() {
            let f = eos.free_energy(r.u);
            best = match best {
                None => Some((r.u, f)),
                Some((bu, bf)) => {
                    let tie = (f - bf).abs() <= TIE_TOLERANCE * (f.abs() + bf.abs()).max(f64::MIN_POSITIVE);
                    if f < bf && !tie {
                        Some((r.u, f))
                    } else {
                        Some((bu, bf))
                    }
                }
            };
        }
        best.map(|b| b.0)
    }
}

fn stationarity(coeffs: &[f64], u: f64, multiplicity: usize) -> Stationarity {
    if multiplicity % 2 == 0 {
        return Stationarity::Inflection;
    }
    let mut d = coeffs.to_vec();
    for _ in 0..multiplicity {
        d = poly::derivative(&d);
    }
    if poly::eval(&d, u) > 0.0 {
        Stationarity::LocalMin
    } else {
        Stationarity::LocalMax
    }
}

/// All real roots of `Omega`, ascending, labelled by accessibility and free-energy curvature.
pub fn solve_eos(e: &EquationOfState) -> Result<RootSet> {
    let roots = poly::real_roots(&e.coefficients)
        .ok_or_else(|| Error::InvalidInput("equation of state is identically zero".into()))?;
    let roots = roots
        .into_iter()
        .map(|r| Root {
            u: r.value,
            multiplicity: r.multiplicity,
            accessible: r.value >= 0.0,
            kind: stationarity(&e.coefficients, r.value, r.multiplicity),
        })
        .collect();
    Ok(RootSet { roots })
}

/// `F(u) = -x u + u^2/2 - sum_k (2k/(k+1)) chi_k T_{2k} u^{k+1}`.
pub fn free_energy(u: f64, x: f64, c: &CouplingVector) -> f64 {
    eos_coefficients(c, x).free_energy(u)
}

/// The accessible root when it is unique.
pub fn accessible_root(c: &CouplingVector, x: f64) -> Option<f64> {
    let e = eos_coefficients(c, x);
    let roots = solve_eos(&e).ok()?;
    let mut acc = roots.accessible();
    match (acc.next(), acc.next()) {
        (Some(r), None) => Some(r.u),
        _ => None,
    }
}

/// Equilibrium branch value at `x`, if any accessible minimum exists.
pub fn equilibrium_root(c: &CouplingVector, x: f64) -> Option<f64> {
    let e = eos_coefficients(c, x);
    solve_eos(&e).ok()?.equilibrium(&e)
}
