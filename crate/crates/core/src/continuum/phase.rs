//! Cubic discriminant, phase labels and the critical set `Delta = 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::{self, tie_sign, TIE_TOLERANCE};
use super::{eos_coefficients, solve_eos, EquationOfState};
use crate::coupling::CouplingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discriminant {
    pub value: f64,
    /// Sum of term magnitudes, the reference for the tie tolerance.
    pub scale: f64,
    /// Leading cubic coefficient vanished; `value` is the quadratic discriminant.
    pub degenerate: bool,
}

impl Discriminant {
    pub fn sign(&self) -> i8 {
        tie_sign(self.value, self.scale)
    }
}

fn cubic_coefficients(x: f64, t2: f64, t4: f64, t6: f64) -> [f64; 4] {
    EquationOfState::from_rescaled(x, &[t2, t4, t6])
        .coefficients
        .try_into()
        .expect("cubic has four coefficients")
}

/// Discriminant of `Omega` in the cubic case `q <= 3`.
pub fn discriminant(x: f64, t2: f64, t4: f64, t6: f64) -> Discriminant {
    let [d, c, b, a] = cubic_coefficients(x, t2, t4, t6);
    if a == 0.0 {
        let (value, scale) = poly::quadratic_discriminant(b, c, d);
        return Discriminant {
            value,
            scale,
            degenerate: true,
        };
    }
    let (value, scale) = poly::cubic_discriminant(a, b, c, d);
    Discriminant {
        value,
        scale,
        degenerate: false,
    }
}

/// Values of `x` where the cubic discriminant vanishes.
///
/// `Delta` is quadratic in `x`; a vanishing quadratic discriminant yields the
/// vertex as a double zero.
pub fn discriminant_zeros_in_x(t2: f64, t4: f64, t6: f64) -> Vec<f64> {
    let [_, c, b, a] = cubic_coefficients(0.0, t2, t4, t6);
    let qa = -27.0 * a * a;
    let qb = 4.0 * b * b * b - 18.0 * a * b * c;
    let qc = b * b * c * c - 4.0 * a * c * c * c;
    if qa == 0.0 {
        return if qb == 0.0 { Vec::new() } else { vec![-qc / qb] };
    }
    poly::quadratic_roots(qc, qb, qa)
        .into_iter()
        .map(|r| r.value)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// `Delta < 0`: one local minimum of the free energy.
    SingleMinimum,
    /// `Delta > 0`: two minima and a maximum.
    Coexistence,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub t2: f64,
    pub t4: f64,
    pub t6: f64,
    pub discriminant: f64,
    pub degenerate: bool,
    pub phase: Phase,
    pub real_roots: usize,
    pub accessible_roots: usize,
    pub negative_minima: usize,
}

pub fn classify(x: f64, c: &CouplingVector) -> Result<PhasePoint> {
    if c.order() > 3 {
        return Err(Error::InvalidInput(
            "discriminant classification needs couplings up to T6 only".into(),
        ));
    }
    let (t2, t4, t6) = (c.rescaled(1), c.rescaled(2), c.rescaled(3));
    let d = discriminant(x, t2, t4, t6);
    let phase = match d.sign() {
        1 => Phase::Coexistence,
        -1 => Phase::SingleMinimum,
        _ => Phase::Critical,
    };
    let roots = solve_eos(&eos_coefficients(c, x))?;
    Ok(PhasePoint {
        x,
        t2,
        t4,
        t6,
        discriminant: d.value,
        degenerate: d.degenerate,
        phase,
        real_roots: roots.distinct_count(),
        accessible_roots: roots.accessible().count(),
        negative_minima: roots
            .roots
            .iter()
            .filter(|r| !r.accessible && r.kind == super::Stationarity::LocalMin)
            .count(),
    })
}

/// One connected piece of the zero contour, as `(x, T6)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Edge of the grid: (vertical?, i, j). Horizontal edges join (i,j)-(i+1,j).
type EdgeKey = (bool, usize, usize);

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo) >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if (f(mid) >= 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zero contour of `Delta(x, T6)` at fixed `T2`, `T4` on a rectilinear grid.
///
/// Sign changes along grid edges are located by bisection; crossings are joined
/// cell by cell (saddle cells resolved by the centre value) and chained into
/// polylines in a deterministic order.
pub fn critical_set(
    t2: f64,
    t4: f64,
    x_range: (f64, f64),
    t6_range: (f64, f64),
    grid: (usize, usize),
) -> Result<Vec<Polyline>> {
    let (nx, ny) = grid;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput("critical-set grid needs at least 2 points per axis".into()));
    }
    let xs: Vec<f64> = (0..nx)
        .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1) as f64)
        .collect();
    let ts: Vec<f64> = (0..ny)
        .map(|j| t6_range.0 + (t6_range.1 - t6_range.0) * j as f64 / (ny - 1) as f64)
        .collect();
    let delta = |x: f64, t6: f64| {
        let d = discriminant(x, t2, t4, t6);
        if d.value.abs() <= TIE_TOLERANCE * d.scale {
            0.0
        } else {
            d.value
        }
    };
    let values: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ts.iter().map(|&t| delta(x, t)).collect())
        .collect();
    let pos = |i: usize, j: usize| values[i][j] >= 0.0;

    let mut crossings: BTreeMap<EdgeKey, (f64, f64)> = BTreeMap::new();
    for i in 0..nx {
        for j in 0..ny {
            if i + 1 < nx && pos(i, j) != pos(i + 1, j) {
                let t = ts[j];
                let x = bisect(|x| delta(x, t), xs[i], xs[i + 1]);
                crossings.insert((false, i, j), (x, t));
            }
            if j + 1 < ny && pos(i, j) != pos(i, j + 1) {
                let x = xs[i];
                let t = bisect(|t| delta(x, t), ts[j], ts[j + 1]);
                crossings.insert((true, i, j), (x, t));
            }
        }
    }

    let mut adjacency: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut link = |a: EdgeKey, b: EdgeKey| {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    };
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let bottom = (false, i, j);
            let right = (true, i + 1, j);
            let top = (false, i, j + 1);
            let left = (true, i, j);
            let hits: Vec<EdgeKey> = [bottom, right, top, left]
                .into_iter()
                .filter(|e| crossings.contains_key(e))
                .collect();
            match hits.len() {
                2 => link(hits[0], hits[1]),
                4 => {
                    let centre = delta(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ts[j] + ts[j + 1])) >= 0.0;
                    if centre == pos(i, j) {
                        link(bottom, right);
                        link(top, left);
                    } else {
                        link(bottom, left);
                        link(right, top);
                    }
                }
                _ => {}
            }
        }
    }

    let mut visited: BTreeMap<EdgeKey, bool> = adjacency.keys().map(|k| (*k, false)).collect();
    let mut lines = Vec::new();
    let starts: Vec<EdgeKey> = adjacency
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(k, _)| *k)
        .chain(adjacency.keys().copied())
        .collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        let closed;
        loop {
            let next = adjacency[&cur].iter().find(|n| !visited[*n]).copied();
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => {
                    closed = chain.len() > 2 && adjacency[&cur].contains(&start);
                    break;
                }
            }
        }
        let mut points: Vec<(f64, f64)> = chain.iter().map(|k| crossings[k]).collect();
        if closed {
            points.push(points[0]);
        }
        lines.push(Polyline { points, closed });
    }
    Ok(lines)
}
