//! The functions `V^{(2k)}_n` driving the Volterra hierarchy.
//!
//! With `J` the tridiagonal matrix carrying `1` above the diagonal and `B_n`
//! below it (similar to the Lax matrix `L`), `V^{(2k)}_n = (J^{2k-1})_{n+1,n}`:
//! a weighted count of lattice paths from row `n+1` to row `n` with `k` down
//! steps, each down step from row `r` contributing `B_{r-1}`. This equals
//! `b_n (L^{2k-1})_{n+1,n}` and telescopes the diagonal of `L^{2k}`.

use super::window::{LatticeWindow, Padded};
use crate::error::{Error, Result};

fn path_table(p: &Padded, n: i64, k: usize) -> (i64, Vec<Vec<f64>>) {
    let lo = n + 1 - k as i64;
    let size = 2 * k;
    let steps = 2 * k - 1;
    let mut f = vec![vec![0.0; size]; steps + 1];
    f[0][(n + 1 - lo) as usize] = 1.0;
    for s in 0..steps {
        let (cur, next) = f.split_at_mut(s + 1);
        let (cur, next) = (&cur[s], &mut next[0]);
        for i in 0..size {
            let w = cur[i];
            if w == 0.0 {
                continue;
            }
            let r = lo + i as i64;
            if i > 0 {
                next[i - 1] += w * p.get(r - 1);
            }
            if i + 1 < size {
                next[i + 1] += w;
            }
        }
    }
    (lo, f)
}

/// `V^{(2k)}_n` by path summation.
pub(crate) fn v_paths(p: &Padded, n: i64, k: usize) -> f64 {
    if n <= 0 {
        return 0.0;
    }
    let (lo, f) = path_table(p, n, k);
    f[2 * k - 1][(n - lo) as usize]
}

/// `V^{(2k)}_n` and its gradient with respect to `B_m`, `m = n-k+1 ..= n+k-1`.
pub(crate) fn v_paths_grad(p: &Padded, n: i64, k: usize) -> (f64, Vec<f64>) {
    if n <= 0 {
        return (0.0, vec![0.0; 2 * k - 1]);
    }
    let steps = 2 * k - 1;
    let size = 2 * k;
    let (lo, f) = path_table(p, n, k);
    let value = f[steps][(n - lo) as usize];
    // g[s][i]: weight of completing a path from row lo+i after s steps
    let mut g = vec![vec![0.0; size]; steps + 1];
    g[steps][(n - lo) as usize] = 1.0;
    for s in (0..steps).rev() {
        for i in 0..size {
            let r = lo + i as i64;
            let mut acc = 0.0;
            if i > 0 {
                acc += p.get(r - 1) * g[s + 1][i - 1];
            }
            if i + 1 < size {
                acc += g[s + 1][i + 1];
            }
            g[s][i] = acc;
        }
    }
    // down step from row m+1 to m at step s+1 uses B_m
    let mut grad = vec![0.0; 2 * k - 1];
    for (j, slot) in grad.iter_mut().enumerate() {
        let i_from = j + 1; // row m+1 with m = lo + j
        let i_to = j;
        *slot = (0..steps).map(|s| f[s][i_from] * g[s + 1][i_to]).sum();
    }
    (value, grad)
}

fn check_site(window: &LatticeWindow, n: i64) -> Result<()> {
    let max = window.len() as i64 + 1;
    if n > max {
        return Err(Error::OutOfRange { site: n, max });
    }
    Ok(())
}

/// `V^{(2)}`, `V^{(4)}`, `V^{(6)}` from their closed forms.
pub fn v_explicit(window: &LatticeWindow, n: i64, k: usize) -> Result<f64> {
    check_site(window, n)?;
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidInput(format!("explicit V is defined for k = 1, 2, 3, not {k}")));
    }
    let p = window.padded(4, 4);
    Ok(v_explicit_padded(&p, n, k))
}

pub(crate) fn v_explicit_padded(p: &Padded, n: i64, k: usize) -> f64 {
    if n <= 0 {
        return 0.0;
    }
    let b = |m: i64| p.get(m);
    let v4 = |m: i64| if m <= 0 { 0.0 } else { b(m) * (b(m - 1) + b(m) + b(m + 1)) };
    match k {
        1 => b(n),
        2 => v4(n),
        3 => b(n) * (b(n - 1) * b(n + 1) + v4(n - 1) + v4(n) + v4(n + 1)),
        _ => unreachable!("k checked by caller"),
    }
}

/// `V^{(2k)}_n` for any `k >= 1`.
pub fn v_general(window: &LatticeWindow, n: i64, k: usize) -> Result<f64> {
    check_site(window, n)?;
    if k == 0 {
        return Err(Error::InvalidInput("flow index k must be positive".into()));
    }
    let p = window.padded(k + 1, k + 1);
    Ok(v_paths(&p, n, k))
}

/// `V^{(2k)}_n` for `n = lo..=hi` on one padded copy (explicit forms for `k <= 3`).
pub(crate) fn v_range(p: &Padded, lo: i64, hi: i64, k: usize) -> Vec<f64> {
    (lo..=hi)
        .map(|n| {
            if k <= 3 {
                v_explicit_padded(p, n, k)
            } else {
                v_paths(p, n, k)
            }
        })
        .collect()
}
