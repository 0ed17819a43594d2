//! Residual and Jacobian of the string equation
//! `n = B_n - sum_k 2k t_{2k} V^{(2k)}_n`.

use super::vfunc::{v_explicit_padded, v_paths, v_paths_grad};
use super::window::LatticeWindow;
use crate::banded::BandedMatrix;
use crate::coupling::CouplingVector;

/// `B_n - sum_k 2k t_{2k} V^{(2k)}_n - n` for `n = 1..=M`.
pub fn string_residual(window: &LatticeWindow, c: &CouplingVector) -> Vec<f64> {
    let q = c.order().max(1);
    let p = window.padded(q + 1, q);
    (1..=window.len())
        .map(|n| {
            let ni = n as i64;
            let mut r = window.site(n) - n as f64;
            for (k, t) in c.iter_raw() {
                let v = if k <= 3 {
                    v_explicit_padded(&p, ni, k)
                } else {
                    v_paths(&p, ni, k)
                };
                r -= 2.0 * k as f64 * t * v;
            }
            r
        })
        .collect()
}

/// Residual divided by the site index, the quantity Newton drives to zero.
pub fn scaled_residual_norm(residual: &[f64]) -> f64 {
    residual
        .iter()
        .enumerate()
        .map(|(i, r)| r.abs() / (i + 1) as f64)
        .fold(0.0, f64::max)
}

/// Half-bandwidth of the string-equation Jacobian.
pub fn jacobian_bandwidth(c: &CouplingVector) -> usize {
    c.order().saturating_sub(1).max(1)
}

/// Banded Jacobian of [`string_residual`] with respect to `B_1..B_M`,
/// including the dependence of extrapolated ghost sites on the last two values.
pub fn string_jacobian(window: &LatticeWindow, c: &CouplingVector) -> BandedMatrix {
    let m = window.len();
    let q = c.order().max(1);
    let bw = jacobian_bandwidth(c);
    let p = window.padded(q + 1, q);
    let mut jac = BandedMatrix::zeros(m, bw, bw);
    for n in 1..=m {
        let row = n - 1;
        jac.add(row, row, 1.0);
        for (k, t) in c.iter_raw() {
            let (_, grad) = v_paths_grad(&p, n as i64, k);
            let coef = -2.0 * k as f64 * t;
            for (j, g) in grad.iter().enumerate() {
                let site = n as i64 - k as i64 + 1 + j as i64;
                if site < 1 || *g == 0.0 {
                    continue;
                }
                let site = site as usize;
                if site <= m {
                    jac.add(row, site - 1, coef * g);
                } else {
                    for (s, d) in p.ghost_sensitivity(site - m) {
                        jac.add(row, s - 1, coef * g * d);
                    }
                }
            }
        }
    }
    jac
}
