//! Reference recurrence coefficients computed directly from the eigenvalue
//! weight `w(λ) = exp(-λ²/2 + Σ t_{2j} λ^{2j})`, by composite Gauss-Legendre
//! quadrature followed by either Hankel determinants or a discretized
//! Stieltjes (Lanczos) procedure.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingVector;
use crate::error::{Error, Result};

const GL_POINTS: usize = 20;
const INITIAL_PANELS: usize = 16;
const MAX_DOUBLINGS: usize = 20;
const REFINE_TOL: f64 = 1e-13;
/// `ln 1e30`: the weight is cut where it falls this far below its maximum.
const LOG_CUTOFF: f64 = 69.077_552_789_821_37;
const GAUSSIAN_RADIUS: f64 = 14.0;

/// Even weight `exp(-λ²/2 + Σ_j t_{2j} λ^{2j})` from raw couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    couplings: CouplingVector,
}

impl WeightSpec {
    pub fn new(couplings: CouplingVector) -> Result<Self> {
        if !couplings.is_convergent() {
            return Err(Error::InadmissibleWeight);
        }
        Ok(Self { couplings })
    }

    pub fn couplings(&self) -> &CouplingVector {
        &self.couplings
    }

    /// `ln w(λ)`.
    pub fn log_weight(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let mut acc = -0.5 * l2;
        for (j, t) in self.couplings.iter_raw() {
            acc += t * l2.powi(j as i32);
        }
        acc
    }

    fn is_gaussian(&self) -> bool {
        self.couplings.is_zero()
    }

    /// Maximum of `ln w + power ln λ` over `λ >= 0` and the radius beyond which
    /// it stays `LOG_CUTOFF` below that maximum.
    fn envelope(&self, power: usize) -> (f64, f64) {
        let f = |l: f64| {
            let base = self.log_weight(l);
            if power == 0 {
                base
            } else if l == 0.0 {
                f64::NEG_INFINITY
            } else {
                base + power as f64 * l.ln()
            }
        };
        // outer bound where f is far below its value near the bulk
        let mut hi = 1.0;
        let mut peak = f(0.0).max(f(1.0));
        loop {
            let grid = 4000;
            peak = (0..=grid)
                .map(|i| f(hi * i as f64 / grid as f64))
                .fold(peak, f64::max);
            if f(hi) < peak - 2.0 * LOG_CUTOFF && f(2.0 * hi) < f(hi) {
                break;
            }
            hi *= 2.0;
        }
        // last crossing of peak - LOG_CUTOFF from the right
        let level = peak - LOG_CUTOFF;
        let grid = 20000;
        let mut lo = 0.0;
        for i in (0..grid).rev() {
            let l = hi * i as f64 / grid as f64;
            if f(l) >= level {
                lo = l;
                break;
            }
        }
        let mut a = lo;
        let mut b = lo + hi / grid as f64;
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if f(mid) >= level {
                a = mid;
            } else {
                b = mid;
            }
        }
        (peak, b)
    }
}

/// Quadrature nodes and (normalized) weights on `[-R, R]`.
#[derive(Debug, Clone)]
struct Discretization {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn discretize(w: &WeightSpec, radius: f64, panels: usize, log_scale: f64, rule: &GaussLegendre) -> Discretization {
    let width = 2.0 * radius / panels as f64;
    let mut nodes = Vec::with_capacity(panels * GL_POINTS);
    let mut weights = Vec::with_capacity(panels * GL_POINTS);
    for p in 0..panels {
        let a = -radius + p as f64 * width;
        let mid = a + 0.5 * width;
        for &(x, wt) in rule.as_node_weight_pairs() {
            let l = mid + 0.5 * width * x;
            nodes.push(l);
            weights.push(0.5 * width * wt * (w.log_weight(l) - log_scale).exp());
        }
    }
    Discretization { nodes, weights }
}

fn even_moments(d: &Discretization, max_order: usize) -> Vec<f64> {
    let mut m = vec![0.0; max_order + 1];
    for (&l, &wt) in d.nodes.iter().zip(&d.weights) {
        let l2 = l * l;
        let mut pow = wt;
        for k in (0..=max_order).step_by(2) {
            m[k] += pow;
            pow *= l2;
        }
    }
    m
}

/// Moments of the weight divided by `exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub values: Vec<f64>,
    pub log_scale: f64,
    pub radius: f64,
    pub panels: usize,
    pub doublings: usize,
    pub last_change: f64,
}

impl Moments {
    /// Unnormalized `m_k`.
    pub fn moment(&self, k: usize) -> f64 {
        self.values[k] * self.log_scale.exp()
    }
}

struct Refined {
    moments: Moments,
    grid: Discretization,
}

fn refine(w: &WeightSpec, max_order: usize) -> Result<Refined> {
    let (log_scale, radius) = if w.is_gaussian() {
        (0.0, GAUSSIAN_RADIUS)
    } else {
        let (peak, r0) = w.envelope(0);
        let (_, r1) = w.envelope(max_order);
        (peak, r0.max(r1))
    };
    let rule = GaussLegendre::new(NonZeroUsize::new(GL_POINTS).expect("nonzero"));
    let mut panels = INITIAL_PANELS;
    let mut grid = discretize(w, radius, panels, log_scale, &rule);
    let mut prev = even_moments(&grid, max_order);
    let mut change = f64::INFINITY;
    for doubling in 1..=MAX_DOUBLINGS {
        panels *= 2;
        let next_grid = discretize(w, radius, panels, log_scale, &rule);
        let next = even_moments(&next_grid, max_order);
        change = next
            .iter()
            .zip(&prev)
            .step_by(2)
            .map(|(a, b)| if *a == 0.0 { (a - b).abs() } else { ((a - b) / a).abs() })
            .fold(0.0, f64::max);
        grid = next_grid;
        prev = next;
        if change < REFINE_TOL {
            return Ok(Refined {
                moments: Moments {
                    values: prev,
                    log_scale,
                    radius,
                    panels,
                    doublings: doubling,
                    last_change: change,
                },
                grid,
            });
        }
    }
    Err(Error::QuadratureFailure {
        doublings: MAX_DOUBLINGS,
        change,
    })
}

/// `m_0..=m_{max_order}` with odd moments exactly zero.
pub fn moments(w: &WeightSpec, max_order: usize) -> Result<Moments> {
    Ok(refine(w, max_order.max(2))?.moments).map(|mut m| {
        m.values.truncate(max_order + 1);
        m
    })
}

/// `ln τ_n` with `τ_n = det(m_{i+j})_{i,j<n}`.
pub fn hankel_log_tau(m: &Moments, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if m.values.len() < 2 * n - 1 {
        return Err(Error::InvalidInput(format!("tau_{n} needs moments up to order {}", 2 * n - 2)));
    }
    // symmetric diagonal scaling keeps the entries bounded by one
    let d: Vec<f64> = (0..n).map(|i| m.values[2 * i].sqrt()).collect();
    let h = DMatrix::from_fn(n, n, |i, j| m.values[i + j] / (d[i] * d[j]));
    let chol = Cholesky::new(h).ok_or_else(|| {
        Error::Precision(format!(
            "Hankel matrix of order {n} is not numerically positive definite; use the stieltjes method"
        ))
    })?;
    let l = chol.l();
    let mut log_det = 0.0;
    for i in 0..n {
        log_det += 2.0 * l[(i, i)].ln() + 2.0 * d[i].ln();
    }
    Ok(log_det + n as f64 * m.log_scale)
}

pub fn hankel_tau(m: &Moments, n: usize) -> Result<f64> {
    hankel_log_tau(m, n).map(f64::exp)
}

/// `ln τ_n` at zero coupling: `(n/2) ln 2π + Σ_{j<n} ln j!`.
pub fn gaussian_log_tau(n: usize) -> f64 {
    let mut log_fact = 0.0;
    let mut acc = 0.5 * n as f64 * (2.0 * PI).ln();
    for j in 1..n {
        log_fact += (j as f64).ln();
        acc += log_fact;
    }
    acc
}

pub fn gaussian_tau(n: usize) -> f64 {
    gaussian_log_tau(n).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Hankel,
    Stieltjes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub radius: f64,
    pub panels: usize,
    pub doublings: usize,
    pub last_change: f64,
    pub nodes: usize,
    /// Largest `|a_n|` of the Lanczos diagonal, zero in exact arithmetic.
    pub max_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub moments: Moments,
    /// `ln τ_0 ..= ln τ_{n+1}`.
    pub log_tau: Vec<f64>,
    /// `B_1..=B_n`.
    pub recurrence: Vec<f64>,
    pub method: OracleMethod,
    pub precision: PrecisionReport,
}

impl OracleResult {
    pub fn tau(&self, n: usize) -> f64 {
        self.log_tau[n].exp()
    }
}

/// `ln τ_n = Σ_{j<n} (ln m_0 + Σ_{k<=j} ln B_k)`.
fn log_tau_from_recurrence(log_m0: f64, b: &[f64], count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    out.push(0.0);
    let mut inner = log_m0;
    let mut acc = 0.0;
    for j in 0..count {
        if j > 0 {
            inner += b[j - 1].ln();
        }
        acc += inner;
        out.push(acc);
    }
    out
}

fn lanczos(grid: &Discretization, n_max: usize) -> Result<(Vec<f64>, f64)> {
    let size = grid.nodes.len();
    if n_max + 1 >= size {
        return Err(Error::Precision("too few quadrature nodes for the requested order".into()));
    }
    let norm: f64 = grid.weights.iter().sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![grid.weights.iter().map(|w| w.sqrt() / norm).collect()];
    let mut b = Vec::with_capacity(n_max);
    let mut max_diag: f64 = 0.0;
    for n in 0..n_max {
        let q = &basis[n];
        let mut r: Vec<f64> = q.iter().zip(&grid.nodes).map(|(q, l)| q * l).collect();
        let a: f64 = r.iter().zip(q).map(|(r, q)| r * q).sum();
        max_diag = max_diag.max(a.abs());
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = r.iter().zip(v).map(|(r, v)| r * v).sum();
                r.iter_mut().zip(v).for_each(|(r, v)| *r -= c * v);
            }
        }
        let beta: f64 = r.iter().map(|r| r * r).sum::<f64>().sqrt();
        let big_b = beta * beta;
        if !(big_b > 0.0) || !big_b.is_finite() {
            return Err(Error::Precision(format!("recurrence coefficient B_{} lost positivity", n + 1)));
        }
        b.push(big_b);
        r.iter_mut().for_each(|r| *r /= beta);
        basis.push(r);
    }
    Ok((b, max_diag))
}

/// Recurrence coefficients `B_1..=B_{n_max}` by the Stieltjes procedure.
pub fn stieltjes_recurrence(w: &WeightSpec, n_max: usize) -> Result<OracleResult> {
    tau_oracle(w, n_max, OracleMethod::Stieltjes)
}

/// Oracle values up to `B_{n_max}` and `τ_{n_max+1}` by the chosen route.
pub fn tau_oracle(w: &WeightSpec, n_max: usize, method: OracleMethod) -> Result<OracleResult> {
    let order = 2 * n_max + 2;
    let Refined { moments, grid } = refine(w, order)?;
    let log_m0 = moments.values[0].ln() + moments.log_scale;
    let (recurrence, log_tau, max_diagonal) = match method {
        OracleMethod::Stieltjes => {
            let (b, diag) = lanczos(&grid, n_max)?;
            let log_tau = log_tau_from_recurrence(log_m0, &b, n_max + 1);
            (b, log_tau, diag)
        }
        OracleMethod::Hankel => {
            let log_tau = (0..=n_max + 1)
                .map(|n| hankel_log_tau(&moments, n))
                .collect::<Result<Vec<_>>>()?;
            let b: Vec<f64> = (1..=n_max)
                .map(|n| (log_tau[n + 1] + log_tau[n - 1] - 2.0 * log_tau[n]).exp())
                .collect();
            if let Some(i) = b.iter().position(|v| !(*v > 0.0)) {
                return Err(Error::Precision(format!("recurrence coefficient B_{} lost positivity", i + 1)));
            }
            (b, log_tau, 0.0)
        }
    };
    Ok(OracleResult {
        precision: PrecisionReport {
            radius: moments.radius,
            panels: moments.panels,
            doublings: moments.doublings,
            last_change: moments.last_change,
            nodes: grid.nodes.len(),
            max_diagonal,
        },
        moments,
        log_tau,
        recurrence,
        method,
    })
}
