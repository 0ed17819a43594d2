//! Newton solver for the string equation with homotopy continuation from the
//! Gaussian point `B_n = n`.

use serde::{Deserialize, Serialize};

use super::residual::{scaled_residual_norm, string_jacobian, string_residual};
use super::window::{LatticeWindow, RightClosure};
use crate::coupling::CouplingVector;
use crate::error::{Error, Result};

/// Right-edge policy requested from the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClosureKind {
    #[default]
    Clamp,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Equal continuation steps from zero coupling to the target.
    pub continuation_steps: usize,
    /// Finest continuation step is `1 / max_continuation_steps`.
    pub max_continuation_steps: usize,
    /// Target for `max_n |residual_n| / n`.
    pub tolerance: f64,
    /// Looser tolerance used at intermediate continuation stages.
    pub stage_tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub closure: ClosureKind,
    /// Right-edge sites excluded from output; `None` uses `max(2q, ceil(0.05 M))`.
    pub buffer: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            continuation_steps: 50,
            max_continuation_steps: 800,
            tolerance: 1e-12,
            stage_tolerance: 1e-9,
            max_iterations: 50,
            max_halvings: 30,
            closure: ClosureKind::Clamp,
            buffer: None,
        }
    }
}

/// Diagnostics of a converged solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub residual: f64,
    pub stages: usize,
    pub newton_iterations: usize,
    pub finest_step: f64,
}

/// Default width of the discarded right-edge buffer.
pub fn default_buffer(len: usize, order: usize) -> usize {
    let b = (2 * order.max(1)).max((0.05 * len as f64).ceil() as usize);
    b.min(len)
}

/// Window length whose reported part covers `x <= x_max` at scale `N`.
pub fn window_len_for(x_max: f64, scale: usize, order: usize) -> usize {
    let report = (x_max * scale as f64).ceil().max(1.0) as usize;
    let mut len = report;
    while len - default_buffer(len, order) < report {
        len += 1;
    }
    len
}

fn closure_for(kind: ClosureKind, c: &CouplingVector) -> RightClosure {
    match kind {
        ClosureKind::Clamp => RightClosure::Clamp(c.clone()),
        ClosureKind::Linear => RightClosure::Linear,
    }
}

enum NewtonFailure {
    Stalled(f64),
    Singular(f64),
}

/// Sum of squared scaled residuals, the line-search merit function.
fn merit_of(residual: &[f64]) -> f64 {
    residual
        .iter()
        .enumerate()
        .map(|(i, r)| (r / (i + 1) as f64).powi(2))
        .sum()
}

/// Damped Newton at fixed couplings. Returns the final scaled residual and iteration count.
fn newton(
    values: &mut Vec<f64>,
    c: &CouplingVector,
    kind: ClosureKind,
    tol: f64,
    opts: &SolverOptions,
) -> std::result::Result<(f64, usize), NewtonFailure> {
    let closure = closure_for(kind, c);
    let mut window = LatticeWindow::new(std::mem::take(values), closure.clone());
    let mut residual = string_residual(&window, c);
    let mut norm = scaled_residual_norm(&residual);
    let mut merit = merit_of(&residual);
    let mut iters = 0;
    let outcome = loop {
        if norm <= tol {
            break Ok((norm, iters));
        }
        if iters >= opts.max_iterations || !norm.is_finite() {
            break Err(NewtonFailure::Stalled(norm));
        }
        iters += 1;
        let lu = match string_jacobian(&window, c).factor() {
            Ok(lu) => lu,
            Err(_) => break Err(NewtonFailure::Singular(norm)),
        };
        let neg: Vec<f64> = residual.iter().map(|r| -r).collect();
        let step = lu.solve(&neg);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = window
                .values()
                .iter()
                .zip(&step)
                .map(|(b, d)| b + lambda * d)
                .collect();
            if trial.iter().all(|&b| b > 0.0) {
                let tw = LatticeWindow::new(trial, closure.clone());
                let tr = string_residual(&tw, c);
                let tm = merit_of(&tr);
                if tm < merit {
                    accepted = Some((tw, tr, tm));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((tw, tr, tm)) => {
                window = tw;
                norm = scaled_residual_norm(&tr);
                residual = tr;
                merit = tm;
            }
            // no decrease possible: accept round-off stagnation near the target
            None if norm <= 1e2 * tol => break Ok((norm, iters)),
            None => break Err(NewtonFailure::Stalled(norm)),
        }
    };
    *values = window.into_values();
    outcome
}

/// Solve the string equation on sites `1..=len`; see [`solve_string_with_stats`].
pub fn solve_string(c: &CouplingVector, len: usize, opts: &SolverOptions) -> Result<LatticeWindow> {
    solve_string_with_stats(c, len, opts).map(|(w, _)| w)
}

/// Newton continuation in `s -> s c` from `s = 0` (where `B_n = n`) to `s = 1`.
///
/// A failed stage halves the continuation step; once the step would drop
/// below `1 / max_continuation_steps` the solve gives up.
pub fn solve_string_with_stats(
    c: &CouplingVector,
    len: usize,
    opts: &SolverOptions,
) -> Result<(LatticeWindow, SolveStats)> {
    if len == 0 {
        return Err(Error::InvalidInput("window length must be positive".into()));
    }
    if opts.continuation_steps == 0 || opts.max_continuation_steps < opts.continuation_steps {
        return Err(Error::InvalidInput("bad continuation step counts".into()));
    }
    let buffer = opts.buffer.unwrap_or_else(|| default_buffer(len, c.order()));
    let gaussian = LatticeWindow::gaussian(len, RightClosure::Linear);
    let mut stats = SolveStats {
        residual: 0.0,
        stages: 0,
        newton_iterations: 0,
        finest_step: 1.0,
    };
    if c.is_zero() {
        let w = gaussian.with_closure(closure_for(opts.closure, c)).with_buffer(buffer);
        return Ok((w, stats));
    }

    let base_step = 1.0 / opts.continuation_steps as f64;
    let min_step = 1.0 / opts.max_continuation_steps as f64;
    let mut s = 0.0f64;
    let mut current = gaussian.into_values();
    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut ds = base_step;
    let mut last_norm = 0.0;
    while s < 1.0 {
        let target = (s + ds).min(1.0);
        let last = target >= 1.0;
        let stage_c = c.scaled(target);
        let tol = if last { opts.tolerance } else { opts.stage_tolerance.max(opts.tolerance) };
        // secant predictor from the previous two stages
        let mut guess = current.clone();
        if let Some((ps, pv)) = &previous {
            let ratio = (target - s) / (s - ps);
            let predicted: Vec<f64> = current
                .iter()
                .zip(pv)
                .map(|(cur, old)| cur + ratio * (cur - old))
                .collect();
            if predicted.iter().all(|&b| b > 0.0) {
                guess = predicted;
            }
        }
        match newton(&mut guess, &stage_c, opts.closure, tol, opts) {
            Ok((norm, iters)) => {
                stats.stages += 1;
                stats.newton_iterations += iters;
                last_norm = norm;
                previous = Some((s, std::mem::replace(&mut current, guess)));
                s = target;
                ds = (ds * 2.0).min(base_step);
            }
            Err(NewtonFailure::Stalled(norm)) | Err(NewtonFailure::Singular(norm)) => {
                ds *= 0.5;
                stats.finest_step = stats.finest_step.min(ds);
                if ds < min_step * (1.0 - 1e-12) {
                    return Err(Error::NoConvergence {
                        residual: norm,
                        stage: target,
                    });
                }
            }
        }
    }
    stats.residual = last_norm;
    stats.finest_step = stats.finest_step.min(ds);
    let window = LatticeWindow::new(current, closure_for(opts.closure, c)).with_buffer(buffer);
    if let Some((site, value)) = window.first_nonpositive() {
        return Err(Error::Nonphysical { site, value });
    }
    Ok((window, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_is_exact() {
        let c = CouplingVector::zero(100);
        let w = solve_string(&c, 500, &SolverOptions::default()).unwrap();
        assert!(w.values().iter().enumerate().all(|(i, &b)| b == (i + 1) as f64));
        assert!(scaled_residual_norm(&string_residual(&w, &c)) < 1e-13);
        assert_eq!(w.buffer(), 25);
    }

    #[test]
    fn quartic_converges() {
        let c = CouplingVector::from_rescaled(50, [(2, -0.5)]).unwrap();
        let (w, stats) = solve_string_with_stats(&c, 120, &SolverOptions::default()).unwrap();
        assert!(stats.residual < 1e-12);
        assert!(w.values().iter().all(|&b| b > 0.0));
        assert!(scaled_residual_norm(&string_residual(&w, &c)) < 1e-12);
    }

    #[test]
    fn window_length_covers_requested_range() {
        let len = window_len_for(0.6, 200, 3);
        assert!(len - default_buffer(len, 3) >= 120);
        assert_eq!(window_len_for(0.0, 10, 1), 3);
    }

    #[test]
    fn rejects_empty_window() {
        let c = CouplingVector::zero(10);
        assert!(solve_string(&c, 0, &SolverOptions::default()).is_err());
    }
}
