//! Banded LU factorisation with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: every row keeps `kl` extra slots
//! on the upper side to absorb fill-in from row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// True if `(i, j)` lies inside the declared band.
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Add `v` to entry `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factorise in place.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = self.data[self.slot(c, c)].abs();
            for r in c + 1..=last {
                let v = self.data[self.slot(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(c));
            }
            pivots[c] = p;
            let jmax = (c + kl + ku).min(n - 1);
            if p != c {
                for j in c..=jmax {
                    let a = self.slot(c, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.slot(c, c)];
            for r in c + 1..=last {
                let s = self.slot(r, c);
                let l = self.data[s] / diag;
                self.data[s] = l;
                if l != 0.0 {
                    for j in c + 1..=jmax {
                        let src = self.data[self.slot(c, j)];
                        let dst = self.slot(r, j);
                        self.data[dst] -= l * src;
                    }
                }
            }
        }
        Ok(BandedLu {
            lu: self,
            pivots,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = &self.lu;
        let n = m.n;
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for c in 0..n {
            x.swap(c, self.pivots[c]);
            let xc = x[c];
            for r in c + 1..=(c + m.kl).min(n - 1) {
                x[r] -= m.data[m.slot(r, c)] * xc;
            }
        }
        for c in (0..n).rev() {
            let mut acc = x[c];
            for j in c + 1..=(c + m.kl + m.ku).min(n - 1) {
                acc -= m.data[m.slot(c, j)] * x[j];
            }
            x[c] = acc / m.data[m.slot(c, c)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_dense_solve(
            n in 1usize..25,
            kl in 0usize..4,
            ku in 0usize..4,
            seed in proptest::collection::vec(-1.0f64..1.0, 625),
            rhs in proptest::collection::vec(-1.0f64..1.0, 25),
        ) {
            let mut band = BandedMatrix::zeros(n, kl, ku);
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if band.in_band(i, j) {
                        // keep it comfortably nonsingular but not diagonally dominant
                        let v = seed[i * 25 + j] + if i == j { 0.5 } else { 0.0 };
                        band.add(i, j, v);
                        dense[(i, j)] = v;
                    }
                }
            }
            prop_assume!(dense.determinant().abs() > 1e-3);
            let b = &rhs[..n];
            let x = band.clone().factor().unwrap().solve(b);
            let expect = dense.lu().solve(&DVector::from_column_slice(b)).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - expect[i]).abs() < 1e-7 * (1.0 + expect[i].abs()));
            }
            let back = band.mul_vec(&x);
            for i in 0..n {
                prop_assert!((back[i] - b[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero on the diagonal forces a row swap
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 2, 2.0);
        a.add(2, 1, 3.0);
        a.add(2, 2, 1.0);
        let x = a.clone().factor().unwrap().solve(&[1.0, 5.0, 5.0]);
        let back = a.mul_vec(&x);
        for (b, e) in back.iter().zip([1.0, 5.0, 5.0]) {
            assert!((b - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = BandedMatrix::zeros(2, 1, 1);
        assert!(matches!(a.factor(), Err(Error::Singular(0))));
    }
}
