//! Even flows of the Volterra hierarchy, in lattice form
//! `dB_n/dt_{2k} = B_n (V_{n+1} - V_{n-1})` and in Lax form
//! `dL/dt_{2k} = [A/2, L]` with `A` the skew part of `L^{2k}`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingVector;
use crate::error::{Error, Result};
use crate::lattice::{v_range, LatticeWindow, RightClosure};

/// Growth factor of `max B` over its initial value treated as instability.
const INSTABILITY_GROWTH: f64 = 1e6;

/// `dB_n/dt_{2k}` for `n = 1..=M`.
pub fn flow_rhs(window: &LatticeWindow, k: usize) -> Vec<f64> {
    assert!(k >= 1, "flow index k must be positive");
    let m = window.len() as i64;
    let p = window.padded(k + 1, k + 1);
    let v = v_range(&p, 0, m + 1, k);
    (1..=m)
        .map(|n| {
            let i = n as usize;
            p.get(n) * (v[i + 1] - v[i - 1])
        })
        .collect()
}

/// Symmetric tridiagonal Lax matrix with zero diagonal, stored by its
/// off-diagonal `b_1..b_{M-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaxMatrix {
    b: Vec<f64>,
}

impl LaxMatrix {
    pub fn from_offdiagonal(b: Vec<f64>) -> Self {
        Self { b }
    }

    /// `b_n = sqrt(B_n)`; the matrix has dimension `M + 1`, so the chain is
    /// truncated after the window.
    pub fn from_window(window: &LatticeWindow) -> Result<Self> {
        if let Some((site, value)) = window.first_nonpositive() {
            return Err(Error::Nonphysical { site, value });
        }
        Ok(Self {
            b: window.values().iter().map(|v| v.sqrt()).collect(),
        })
    }

    pub fn to_window(&self) -> LatticeWindow {
        LatticeWindow::new(self.b.iter().map(|b| b * b).collect(), RightClosure::Truncate)
    }

    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    pub fn offdiagonal(&self) -> &[f64] {
        &self.b
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut l = DMatrix::zeros(d, d);
        for (i, &b) in self.b.iter().enumerate() {
            l[(i, i + 1)] = b;
            l[(i + 1, i)] = b;
        }
        l
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.dense()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Entries `(L^p)_{i,i+2}`, `i = 0..dim-2`, for even `p`, by banded products.
    fn second_superdiagonal_of_power(&self, p: usize) -> Vec<f64> {
        let d = self.dim();
        let b = &self.b;
        // rows of L^s restricted to the band |i-j| <= s, offset by p
        let w = 2 * p + 1;
        let mut cur = vec![0.0; d * w];
        for i in 0..d {
            cur[i * w + p] = 1.0;
        }
        let mut next = vec![0.0; d * w];
        for s in 0..p {
            next.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..d {
                let lo = i.saturating_sub(s + 1);
                let hi = (i + s + 1).min(d - 1);
                for j in lo..=hi {
                    // (L^{s+1})_{ij} = (L^s)_{i,j-1} b_{j-1} + (L^s)_{i,j+1} b_j
                    let mut acc = 0.0;
                    if j >= 1 && (i as i64 - (j as i64 - 1)).unsigned_abs() as usize <= s {
                        acc += cur[i * w + (j - 1 + p - i)] * b[j - 1];
                    }
                    if j + 1 < d && (i as i64 - (j as i64 + 1)).unsigned_abs() as usize <= s {
                        acc += cur[i * w + (j + 1 + p - i)] * b[j];
                    }
                    next[i * w + (j + p - i)] = acc;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        (0..d.saturating_sub(2)).map(|i| cur[i * w + p + 2]).collect()
    }

    /// `db_n/dt_{2k}` from the Lax equation, using only the band of `L^{2k}`.
    pub fn flow_rhs(&self, k: usize) -> Vec<f64> {
        let n = self.b.len();
        let a = self.second_superdiagonal_of_power(2 * k);
        let a_at = |i: i64| {
            if i < 0 || i as usize >= a.len() {
                0.0
            } else {
                a[i as usize]
            }
        };
        let b_at = |i: i64| {
            if i < 0 || i as usize >= n {
                0.0
            } else {
                self.b[i as usize]
            }
        };
        (0..n as i64)
            .map(|i| 0.5 * (a_at(i) * b_at(i + 1) - b_at(i - 1) * a_at(i - 1)))
            .collect()
    }
}

/// Dense `[A/2, L]` with `A = (L^{2k})_upper - (L^{2k})_lower`.
pub fn matrix_flow_rhs(l: &LaxMatrix, k: usize) -> DMatrix<f64> {
    let dense = l.dense();
    let mut pow = DMatrix::identity(l.dim(), l.dim());
    for _ in 0..2 * k {
        pow = &pow * &dense;
    }
    let d = l.dim();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = match i.cmp(&j) {
                std::cmp::Ordering::Less => pow[(i, j)],
                std::cmp::Ordering::Greater => -pow[(i, j)],
                std::cmp::Ordering::Equal => 0.0,
            };
        }
    }
    (&a * &dense - &dense * &a) * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    Lattice,
    /// Finite Lax matrix; the chain ends after the window.
    Matrix,
}

/// Advance `t_{2k}` to the raw value `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowLeg {
    pub k: usize,
    pub target: f64,
    /// Step size; `None` uses `min(1e-3, |span| / 1000)`.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub mode: FlowMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSchedule {
    /// Couplings at which the start window is given.
    pub origin: CouplingVector,
    pub legs: Vec<FlowLeg>,
    /// Record a snapshot every this many steps (0: leg endpoints only).
    #[serde(default)]
    pub snapshot_every: usize,
}

impl FlowSchedule {
    pub fn new(origin: CouplingVector) -> Self {
        Self {
            origin,
            legs: Vec::new(),
            snapshot_every: 0,
        }
    }

    pub fn leg(mut self, k: usize, target: f64) -> Self {
        self.legs.push(FlowLeg {
            k,
            target,
            h: None,
            mode: FlowMode::Lattice,
        });
        self
    }

    pub fn leg_with(mut self, leg: FlowLeg) -> Self {
        self.legs.push(leg);
        self
    }

    /// Couplings reached after all legs.
    pub fn endpoint(&self) -> Result<CouplingVector> {
        let mut c = self.origin.clone();
        for leg in &self.legs {
            c.set_raw(leg.k, leg.target)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSnapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub window: LatticeWindow,
    /// Couplings reached.
    pub couplings: CouplingVector,
    /// Smallest `B_n` seen along the trajectory.
    pub min_margin: f64,
    pub steps: usize,
    pub snapshots: Vec<FlowSnapshot>,
}

fn default_step(span: f64) -> f64 {
    (span.abs() / 1000.0).min(1e-3)
}

fn closure_at(closure: &RightClosure, c: &CouplingVector) -> RightClosure {
    match closure {
        RightClosure::Clamp(_) => RightClosure::Clamp(c.clone()),
        other => other.clone(),
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

struct Stepper<'a> {
    k: usize,
    mode: FlowMode,
    closure: &'a RightClosure,
    base: CouplingVector,
}

impl Stepper<'_> {
    fn rhs(&self, values: &[f64], t: f64) -> Vec<f64> {
        match self.mode {
            FlowMode::Lattice => {
                let mut c = self.base.clone();
                let _ = c.set_raw(self.k, t);
                let w = LatticeWindow::new(values.to_vec(), closure_at(self.closure, &c));
                flow_rhs(&w, self.k)
            }
            FlowMode::Matrix => {
                let b: Vec<f64> = values.iter().map(|v| v.max(0.0).sqrt()).collect();
                let db = LaxMatrix::from_offdiagonal(b.clone()).flow_rhs(self.k);
                b.iter().zip(db).map(|(b, d)| 2.0 * b * d).collect()
            }
        }
    }

    fn rk4(&self, y: &[f64], t: f64, h: f64) -> Vec<f64> {
        let k1 = self.rhs(y, t);
        let k2 = self.rhs(&axpy(y, 0.5 * h, &k1), t + 0.5 * h);
        let k3 = self.rhs(&axpy(y, 0.5 * h, &k2), t + 0.5 * h);
        let k4 = self.rhs(&axpy(y, h, &k3), t + h);
        y.iter()
            .enumerate()
            .map(|(i, y)| y + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }
}

/// Classical fourth-order Runge-Kutta along each leg in turn.
pub fn integrate_flow(start: &LatticeWindow, sched: &FlowSchedule) -> Result<FlowResult> {
    let mut values = start.values().to_vec();
    let mut c = sched.origin.clone();
    let mut min_margin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale_ref = values.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let mut snapshots = vec![FlowSnapshot {
        time: 0.0,
        values: values.clone(),
    }];
    let mut clock = 0.0;
    let mut steps = 0;
    for leg in &sched.legs {
        if leg.k == 0 {
            return Err(Error::InvalidInput("flow index k must be positive".into()));
        }
        let t0 = c.raw(leg.k);
        let span = leg.target - t0;
        if span == 0.0 {
            continue;
        }
        let h_req = leg.h.unwrap_or_else(|| default_step(span));
        if !(h_req > 0.0) || !h_req.is_finite() {
            return Err(Error::InvalidInput(format!("flow step must be positive, got {h_req}")));
        }
        let count = (span.abs() / h_req).ceil().max(1.0) as usize;
        let h = span / count as f64;
        let stepper = Stepper {
            k: leg.k,
            mode: leg.mode,
            closure: start.closure(),
            base: c.clone(),
        };
        for s in 0..count {
            let t = t0 + s as f64 * h;
            values = stepper.rk4(&values, t, h);
            steps += 1;
            let time = clock + (s + 1) as f64 * h.abs();
            for (i, &v) in values.iter().enumerate() {
                if !v.is_finite() || v.abs() > INSTABILITY_GROWTH * scale_ref {
                    return Err(Error::Instability { time });
                }
                if v <= 0.0 {
                    return Err(Error::BlowUp {
                        time,
                        site: i + 1,
                        value: v,
                    });
                }
                min_margin = min_margin.min(v);
            }
            if sched.snapshot_every > 0 && (s + 1) % sched.snapshot_every == 0 && s + 1 < count {
                snapshots.push(FlowSnapshot {
                    time,
                    values: values.clone(),
                });
            }
        }
        clock += span.abs();
        c.set_raw(leg.k, leg.target)?;
        snapshots.push(FlowSnapshot {
            time: clock,
            values: values.clone(),
        });
    }
    let window = LatticeWindow::new(values, closure_at(start.closure(), &c)).with_buffer(start.buffer());
    Ok(FlowResult {
        window,
        couplings: c,
        min_margin,
        steps,
        snapshots,
    })
}

/// Largest max-norm change of the sorted spectrum relative to the first snapshot.
pub fn spectrum_drift(snapshots: &[LaxMatrix]) -> f64 {
    let Some(first) = snapshots.first() else {
        return 0.0;
    };
    let base = first.spectrum();
    snapshots[1..]
        .iter()
        .map(|l| {
            l.spectrum()
                .iter()
                .zip(&base)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
