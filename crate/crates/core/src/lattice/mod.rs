//! Semi-infinite lattice of squared Flaschka coordinates and the string equation.

mod residual;
mod solve;
mod vfunc;
mod window;

pub(crate) use vfunc::v_range;

pub use residual::{jacobian_bandwidth, scaled_residual_norm, string_jacobian, string_residual};
pub use solve::{
    default_buffer, solve_string, solve_string_with_stats, window_len_for, ClosureKind, SolveStats,
    SolverOptions,
};
pub use vfunc::{v_explicit, v_general};
pub use window::{LatticeWindow, RightClosure};

use serde::{Deserialize, Serialize};

/// Samples `(x, u) = (n/N, B_n/N)` of the order parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterTrace {
    pub scale: usize,
    pub samples: Vec<(f64, f64)>,
}

impl OrderParameterTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn us(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }
}

/// Rescale the reported part of a window into an order-parameter trace.
pub fn order_parameter(window: &LatticeWindow, scale: usize) -> OrderParameterTrace {
    let nf = scale as f64;
    let samples = window.values()[..window.reported_len()]
        .iter()
        .enumerate()
        .map(|(i, &b)| ((i + 1) as f64 / nf, b / nf))
        .collect();
    OrderParameterTrace { scale, samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_trace_is_identity() {
        let w = LatticeWindow::gaussian(30, RightClosure::Linear).with_buffer(5);
        let t = order_parameter(&w, 10);
        assert_eq!(t.len(), 25);
        for (x, u) in &t.samples {
            assert_eq!(x, u);
        }
        let empty = order_parameter(&LatticeWindow::new(vec![], RightClosure::Linear), 10);
        assert!(empty.is_empty());
    }
}
