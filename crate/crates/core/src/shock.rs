//! Lattice-versus-continuum comparison, detection of dispersive oscillations
//! and convergence in the scale `N`.

use serde::{Deserialize, Serialize};

use crate::continuum::{eos_coefficients, solve_eos, RootSet};
use crate::coupling::CouplingVector;
use crate::error::{Error, Result};
use crate::lattice::{order_parameter, solve_string, window_len_for, OrderParameterTrace, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationParams {
    /// Sliding window width in samples.
    pub window: usize,
    /// Minimum peak-to-trough amplitude in units of `u`.
    pub amp_tol: f64,
}

impl Default for OscillationParams {
    fn default() -> Self {
        Self {
            window: 12,
            amp_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub x: f64,
    pub u: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub flag: bool,
    /// Position of the first extremum of the first flagged window.
    pub onset: Option<f64>,
    /// Local extrema of the samples.
    pub envelope: Vec<Extremum>,
}

/// Strict local extrema after merging runs of equal values, so that maxima
/// and minima alternate.
fn extrema(samples: &[(f64, f64)]) -> Vec<Extremum> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if samples[r.0].1 == s.1 => r.1 = i,
            _ => runs.push((i, i)),
        }
    }
    let mut out = Vec::new();
    for w in runs.windows(3) {
        let (prev, cur, next) = (samples[w[0].0].1, samples[w[1].0].1, samples[w[2].0].1);
        let kind = if cur > prev && cur > next {
            ExtremumKind::Max
        } else if cur < prev && cur < next {
            ExtremumKind::Min
        } else {
            continue;
        };
        let index = (w[1].0 + w[1].1) / 2;
        out.push(Extremum {
            index,
            x: samples[index].0,
            u: samples[index].1,
            kind,
        });
    }
    out
}

pub fn detect_oscillations(trace: &OrderParameterTrace, params: &OscillationParams) -> Result<OscillationReport> {
    let w = params.window;
    if w < 3 {
        return Err(Error::InvalidInput("oscillation window must hold at least 3 samples".into()));
    }
    if trace.len() < 2 * w + 1 {
        return Err(Error::InvalidInput(format!(
            "oscillation detection needs at least {} samples, got {}",
            2 * w + 1,
            trace.len()
        )));
    }
    let envelope = extrema(&trace.samples);
    let mut onset = None;
    for start in 0..=trace.len() - w {
        let inside: Vec<&Extremum> = envelope
            .iter()
            .filter(|e| e.index >= start && e.index < start + w)
            .collect();
        // longest chain of consecutive extrema with large swings
        let mut run = 1;
        for (i, pair) in inside.windows(2).enumerate() {
            if (pair[1].u - pair[0].u).abs() > params.amp_tol {
                run += 1;
                if run >= 3 {
                    onset = Some(inside[i + 1 - (run - 1)].x);
                    break;
                }
            } else {
                run = 1;
            }
        }
        if onset.is_some() {
            break;
        }
    }
    Ok(OscillationReport {
        flag: onset.is_some(),
        onset,
        envelope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoint {
    pub x: f64,
    pub u_lattice: f64,
    /// Accessible roots of the equation of state, ascending.
    pub branches: Vec<f64>,
    /// Selected continuum value, if an accessible root exists.
    pub u_continuum: Option<f64>,
    pub deviation: Option<f64>,
    /// Exactly one real root.
    pub single_valued: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scale: usize,
    pub points: Vec<ComparisonPoint>,
    /// Largest deviation over single-valued points left of the oscillation onset.
    pub smooth_max_deviation: Option<f64>,
    pub oscillation: OscillationReport,
}

fn roots_at(c: &CouplingVector, x: f64) -> Result<(RootSet, f64)> {
    let eos = eos_coefficients(c, x);
    let roots = solve_eos(&eos)?;
    let eq = roots.equilibrium(&eos).unwrap_or(f64::NAN);
    Ok((roots, eq))
}

/// Compare a lattice trace with the continuum equilibrium branch.
///
/// Where several accessible minima coexist the branch nearest the previously
/// selected value is followed.
pub fn compare(
    trace: &OrderParameterTrace,
    c: &CouplingVector,
    params: &OscillationParams,
) -> Result<ComparisonReport> {
    let mut points = Vec::with_capacity(trace.len());
    let mut prev: Option<f64> = None;
    for &(x, u) in &trace.samples {
        let (roots, eq) = roots_at(c, x)?;
        let branches: Vec<f64> = roots.accessible().map(|r| r.u).collect();
        let minima: Vec<f64> = roots.accessible_minima().map(|r| r.u).collect();
        let chosen = match (minima.len(), prev) {
            (0, _) => branches.first().copied(),
            (1, _) => Some(minima[0]),
            (_, Some(p)) => minima
                .iter()
                .copied()
                .min_by(|a, b| (a - p).abs().total_cmp(&(b - p).abs())),
            (_, None) => Some(eq),
        };
        if chosen.is_some() {
            prev = chosen;
        }
        points.push(ComparisonPoint {
            x,
            u_lattice: u,
            deviation: chosen.map(|v| (u - v).abs()),
            u_continuum: chosen,
            single_valued: roots.distinct_count() == 1,
            branches,
        });
    }
    if !trace.is_empty() && points.iter().all(|p| p.u_continuum.is_none()) {
        return Err(Error::NoBranch);
    }
    // detection runs on the signed deviation, which removes the steep
    // continuum background near a gradient catastrophe
    let detrended = OrderParameterTrace {
        scale: trace.scale,
        samples: points
            .iter()
            .filter_map(|p| p.u_continuum.map(|v| (p.x, p.u_lattice - v)))
            .collect(),
    };
    let mut oscillation = if detrended.len() > 2 * params.window {
        detect_oscillations(&detrended, params)?
    } else {
        OscillationReport {
            flag: false,
            onset: None,
            envelope: Vec::new(),
        }
    };
    oscillation.envelope = extrema(&trace.samples);
    let limit = oscillation.onset.unwrap_or(f64::INFINITY);
    let smooth_max_deviation = points
        .iter()
        .filter(|p| p.single_valued && p.x < limit)
        .filter_map(|p| p.deviation)
        .reduce(f64::max);
    Ok(ComparisonReport {
        scale: trace.scale,
        points,
        smooth_max_deviation,
        oscillation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub scale: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub probe: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope `p` of `ln deviation = -p ln N + const`.
    pub order: Option<f64>,
}

/// `|B_n/N - u(x)|` at `x = n/N` for each scale in `scales`.
pub fn convergence_study(
    c: &CouplingVector,
    scales: &[usize],
    probe: f64,
    opts: &SolverOptions,
) -> Result<ConvergenceStudy> {
    let (roots, _) = roots_at(c, probe)?;
    let mut acc = roots.accessible();
    let u_cont = match (acc.next(), acc.next()) {
        (Some(r), None) if roots.distinct_count() == 1 => r.u,
        _ => return Err(Error::MultivaluedRegion { x: probe }),
    };
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let site = (probe * scale as f64).round();
        if site < 1.0 || (site / scale as f64 - probe).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("probe x = {probe} is not a lattice point at N = {scale}")));
        }
        let cn = c.with_scale(scale)?;
        let x_max = (probe * 1.5).max(probe + 0.1);
        let len = window_len_for(x_max, scale, cn.order());
        let window = solve_string(&cn, len, opts)?;
        let u = window.site(site as usize) / scale as f64;
        rows.push(ConvergenceRow {
            scale,
            deviation: (u - u_cont).abs(),
        });
    }
    let order = fit_order(&rows);
    Ok(ConvergenceStudy { probe, rows, order })
}

fn fit_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.deviation > 0.0)
        .map(|r| ((r.scale as f64).ln(), r.deviation.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// Solve, trace and compare in one call over `0 < x <= x_max`.
pub fn run_comparison(
    c: &CouplingVector,
    x_max: f64,
    opts: &SolverOptions,
    params: &OscillationParams,
) -> Result<(OrderParameterTrace, ComparisonReport)> {
    let len = window_len_for(x_max, c.scale(), c.order());
    let window = solve_string(c, len, opts)?;
    let trace = order_parameter(&window, c.scale());
    let report = compare(&trace, c, params)?;
    Ok((trace, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(us: &[f64]) -> OrderParameterTrace {
        OrderParameterTrace {
            scale: us.len(),
            samples: us.iter().enumerate().map(|(i, &u)| ((i + 1) as f64 * 0.01, u)).collect(),
        }
    }

    #[test]
    fn monotone_samples_do_not_flag() {
        let us: Vec<f64> = (0..60).map(|i| i as f64 * 0.01).collect();
        let r = detect_oscillations(&trace(&us), &OscillationParams::default()).unwrap();
        assert!(!r.flag);
        assert!(r.envelope.is_empty());
    }

    #[test]
    fn ringing_is_flagged_at_its_first_extremum() {
        let us: Vec<f64> = (0..60)
            .map(|i| {
                let base = 0.01 * i as f64;
                if i >= 30 {
                    base + 0.05 * ((i - 30) as f64 * 1.3).sin()
                } else {
                    base
                }
            })
            .collect();
        let r = detect_oscillations(&trace(&us), &OscillationParams::default()).unwrap();
        assert!(r.flag);
        let onset = r.onset.unwrap();
        assert!(onset > 0.3 && onset < 0.36, "{onset}");
        for pair in r.envelope.windows(2) {
            assert_ne!(pair[0].kind, pair[1].kind);
        }
    }

    #[test]
    fn plateaus_keep_extrema_alternating() {
        let us = [0.0, 1.0, 3.0, 2.0, 2.0, 3.0, 1.0, 1.0, 0.5];
        let e = extrema(&us.iter().enumerate().map(|(i, &u)| (i as f64, u)).collect::<Vec<_>>());
        let kinds: Vec<_> = e.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![ExtremumKind::Max, ExtremumKind::Min, ExtremumKind::Max]);
    }

    #[test]
    fn short_traces_are_rejected() {
        assert!(detect_oscillations(&trace(&[0.0; 10]), &OscillationParams::default()).is_err());
    }

    #[test]
    fn gaussian_comparison_is_exact() {
        let c = CouplingVector::zero(100);
        let (_, r) = run_comparison(&c, 0.8, &SolverOptions::default(), &OscillationParams::default()).unwrap();
        assert!(r.smooth_max_deviation.unwrap() < 1e-12);
        assert!(!r.oscillation.flag);
    }

    #[test]
    fn order_fit() {
        let rows: Vec<ConvergenceRow> = [100, 200, 400]
            .iter()
            .map(|&n| ConvergenceRow {
                scale: n,
                deviation: 3.0 / (n as f64).powi(2),
            })
            .collect();
        assert!((fit_order(&rows).unwrap() - 2.0).abs() < 1e-12);
    }
}
