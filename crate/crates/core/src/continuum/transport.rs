//! Finite-difference check that the continuum root transports along the
//! Hopf hierarchy `u_{T_{2k}} = c(u) u_x`.

use serde::{Deserialize, Serialize};

use super::{accessible_root, chi, eos_coefficients};
use crate::coupling::CouplingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSample {
    pub x: f64,
    pub u: f64,
    /// Finite-difference `u_T / u_x`.
    pub ratio: f64,
    /// `2k chi_k u^k` from implicit differentiation.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub k: usize,
    pub samples: Vec<TransportSample>,
    /// `max |ratio - 2k chi_k u^k|`.
    pub max_defect: f64,
    /// Least-squares `C_k` in `ratio ~ C_k u^{2k-1}`.
    pub power_form_coefficient: f64,
    /// `max |ratio - C_k u^{2k-1}|` with the fitted `C_k`.
    pub max_power_form_defect: f64,
}

fn branch(c: &CouplingVector, x: f64) -> Result<f64> {
    let u = accessible_root(c, x).ok_or(Error::MultivaluedRegion { x })?;
    if eos_coefficients(c, x).omega_prime(u) <= 0.0 {
        return Err(Error::MultivaluedRegion { x });
    }
    Ok(u)
}

pub fn transport_consistency(
    c: &CouplingVector,
    k: usize,
    xs: &[f64],
    delta: f64,
) -> Result<TransportReport> {
    if k == 0 || !(delta > 0.0) {
        return Err(Error::InvalidInput("need k >= 1 and delta > 0".into()));
    }
    let big_t = c.rescaled(k);
    let mut up = c.clone();
    up.set_rescaled(k, big_t + delta)?;
    let mut dn = c.clone();
    dn.set_rescaled(k, big_t - delta)?;
    let mut samples = Vec::with_capacity(xs.len());
    for &x in xs {
        let u = branch(c, x)?;
        let u_t = (branch(&up, x)? - branch(&dn, x)?) / (2.0 * delta);
        let u_x = (branch(c, x + delta)? - branch(c, x - delta)?) / (2.0 * delta);
        let speed = 2.0 * k as f64 * chi(k) * u.powi(k as i32);
        samples.push(TransportSample {
            x,
            u,
            ratio: u_t / u_x,
            speed,
        });
    }
    let max_defect = samples.iter().map(|s| (s.ratio - s.speed).abs()).fold(0.0, f64::max);
    let p = 2 * k as i32 - 1;
    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), s| {
        let b = s.u.powi(p);
        (n + s.ratio * b, d + b * b)
    });
    let coef = if den > 0.0 { num / den } else { 0.0 };
    let max_power = samples
        .iter()
        .map(|s| (s.ratio - coef * s.u.powi(p)).abs())
        .fold(0.0, f64::max);
    Ok(TransportReport {
        k,
        samples,
        max_defect,
        power_form_coefficient: coef,
        max_power_form_defect: max_power,
    })
}
