use serde::{Deserialize, Serialize};

use crate::continuum;
use crate::coupling::CouplingVector;

/// How values to the right of the window are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightClosure {
    /// Finite chain: `B_n = 0` beyond the window.
    Truncate,
    /// Linear extrapolation through the last two sites.
    Linear,
    /// `B_n = N u(n/N)` from the accessible continuum root of these couplings,
    /// falling back to linear extrapolation where that root is not unique.
    Clamp(CouplingVector),
}

/// Squared Flaschka coordinates `B_1..B_M` with `B_n = 0` for `n <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeWindow {
    values: Vec<f64>,
    closure: RightClosure,
    buffer: usize,
}

impl LatticeWindow {
    pub fn new(values: Vec<f64>, closure: RightClosure) -> Self {
        Self {
            values,
            closure,
            buffer: 0,
        }
    }

    /// The Gaussian solution `B_n = n`.
    pub fn gaussian(len: usize, closure: RightClosure) -> Self {
        Self::new((1..=len).map(|n| n as f64).collect(), closure)
    }

    pub fn with_buffer(mut self, buffer: usize) -> Self {
        self.buffer = buffer.min(self.values.len());
        self
    }

    pub fn with_closure(mut self, closure: RightClosure) -> Self {
        self.closure = closure;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn closure(&self) -> &RightClosure {
        &self.closure
    }

    pub fn buffer(&self) -> usize {
        self.buffer
    }

    /// Number of leading sites reported as output.
    pub fn reported_len(&self) -> usize {
        self.values.len() - self.buffer
    }

    /// `B_n` for `1 <= n <= M`.
    pub fn site(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// True if any site value is not strictly positive.
    pub fn first_nonpositive(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .find(|(_, &b)| !(b > 0.0))
            .map(|(i, &b)| (i + 1, b))
    }

    fn linear_ghost(&self, i: usize) -> f64 {
        let m = self.values.len();
        match m {
            0 => 0.0,
            1 => self.values[0],
            _ => {
                let last = self.values[m - 1];
                last + i as f64 * (last - self.values[m - 2])
            }
        }
    }

    /// Value at the `i`-th ghost site `M + i`, `i >= 1`.
    pub fn ghost(&self, i: usize) -> f64 {
        self.ghost_rule(i).0
    }

    /// Ghost value and whether it came from linear extrapolation.
    fn ghost_rule(&self, i: usize) -> (f64, bool) {
        match &self.closure {
            RightClosure::Truncate => (0.0, false),
            RightClosure::Linear => (self.linear_ghost(i), true),
            RightClosure::Clamp(c) => {
                let n = self.values.len() + i;
                let x = n as f64 / c.scale() as f64;
                match continuum::accessible_root(c, x) {
                    Some(u) => (c.scale() as f64 * u, false),
                    None => (self.linear_ghost(i), true),
                }
            }
        }
    }

    /// Window values padded with `left` zeros (sites `1-left..=0`) and `right` ghosts.
    pub(crate) fn padded(&self, left: usize, right: usize) -> Padded {
        let m = self.values.len();
        let mut data = Vec::with_capacity(left + m + right);
        data.extend(std::iter::repeat_n(0.0, left));
        data.extend_from_slice(&self.values);
        let mut linear = Vec::with_capacity(right);
        for i in 1..=right {
            let (g, lin) = self.ghost_rule(i);
            data.push(g);
            linear.push(lin);
        }
        Padded {
            data,
            left,
            len: m,
            linear_ghosts: linear,
        }
    }
}

/// Contiguous copy of a window including boundary sites.
#[derive(Debug, Clone)]
pub(crate) struct Padded {
    data: Vec<f64>,
    left: usize,
    len: usize,
    linear_ghosts: Vec<bool>,
}

impl Padded {
    /// `B_n`; zero left of the stored range.
    #[inline]
    pub fn get(&self, n: i64) -> f64 {
        let i = n - 1 + self.left as i64;
        if i < 0 {
            0.0
        } else {
            self.data[i as usize]
        }
    }

    /// Sensitivity of ghost `M + i` to `(site, coefficient)` pairs inside the window.
    pub fn ghost_sensitivity(&self, i: usize) -> Vec<(usize, f64)> {
        let m = self.len;
        if !self.linear_ghosts[i - 1] || m == 0 {
            return Vec::new();
        }
        if m == 1 {
            return vec![(1, 1.0)];
        }
        let fi = i as f64;
        vec![(m, 1.0 + fi), (m - 1, -fi)]
    }
}
