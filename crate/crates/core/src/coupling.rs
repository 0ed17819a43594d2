//! Coupling constants of the even matrix model.
//!
//! The raw couplings `t_{2k}` multiply `Tr M^{2k}` in the Hamiltonian. Under the
//! large-`N` rescaling the continuum couplings are `T_{2k} = N^{k-1} t_{2k}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings `t_{2k}`, keyed by the flow index `k >= 1`, together with the scale `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingVector {
    raw: BTreeMap<usize, f64>,
    scale: usize,
}

impl CouplingVector {
    /// The Gaussian point: every coupling zero.
    pub fn zero(scale: usize) -> Self {
        assert!(scale > 0, "scale N must be positive");
        Self {
            raw: BTreeMap::new(),
            scale,
        }
    }

    /// Build from raw couplings `(k, t_{2k})`.
    pub fn from_raw<I>(scale: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut c = Self::try_zero(scale)?;
        for (k, t) in entries {
            c.set_raw(k, t)?;
        }
        Ok(c)
    }

    /// Build from rescaled couplings `(k, T_{2k})`.
    pub fn from_rescaled<I>(scale: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut c = Self::try_zero(scale)?;
        for (k, big_t) in entries {
            c.set_rescaled(k, big_t)?;
        }
        Ok(c)
    }

    fn try_zero(scale: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidInput("scale N must be positive".into()));
        }
        Ok(Self::zero(scale))
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    fn n_pow(&self, k: usize) -> f64 {
        (self.scale as f64).powi(k as i32 - 1)
    }

    pub fn set_raw(&mut self, k: usize, t: f64) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidInput("coupling index must be t2, t4, ...".into()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("coupling t{} is not finite", 2 * k)));
        }
        if t == 0.0 {
            self.raw.remove(&k);
        } else {
            self.raw.insert(k, t);
        }
        Ok(())
    }

    pub fn set_rescaled(&mut self, k: usize, big_t: f64) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidInput("coupling index must be T2, T4, ...".into()));
        }
        self.set_raw(k, big_t / self.n_pow(k))
    }

    /// Raw coupling `t_{2k}`.
    pub fn raw(&self, k: usize) -> f64 {
        self.raw.get(&k).copied().unwrap_or(0.0)
    }

    /// Rescaled coupling `T_{2k} = N^{k-1} t_{2k}`.
    pub fn rescaled(&self, k: usize) -> f64 {
        self.raw(k) * self.n_pow(k)
    }

    /// Highest `k` with a nonzero coupling, or 0 at the Gaussian point.
    pub fn order(&self) -> usize {
        self.raw.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_empty()
    }

    /// Nonzero raw couplings in increasing `k`.
    pub fn iter_raw(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.raw.iter().map(|(&k, &t)| (k, t))
    }

    /// Rescaled couplings `T_{2k}` for `k = 1..=order` (zeros included).
    pub fn rescaled_vec(&self) -> Vec<f64> {
        (1..=self.order()).map(|k| self.rescaled(k)).collect()
    }

    /// True when the eigenvalue integral converges: Gaussian, or top coupling negative.
    pub fn is_convergent(&self) -> bool {
        match self.raw.iter().next_back() {
            None => true,
            Some((_, &t)) => t < 0.0,
        }
    }

    /// All couplings multiplied by `s` (homotopy parameter).
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self::zero(self.scale);
        for (k, t) in self.iter_raw() {
            // scaling a finite value by a finite s cannot fail
            let _ = out.set_raw(k, s * t);
        }
        out
    }

    /// Copy with `t_{2k}` shifted by `delta`.
    pub fn shifted(&self, k: usize, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        out.set_raw(k, self.raw(k) + delta)?;
        Ok(out)
    }

    /// Copy with a different scale, keeping the rescaled couplings fixed.
    pub fn with_scale(&self, scale: usize) -> Result<Self> {
        let entries: Vec<_> = (1..=self.order()).map(|k| (k, self.rescaled(k))).collect();
        Self::from_rescaled(scale, entries)
    }
}

/// A parsed coupling name such as `t4` or `T6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingKey {
    pub k: usize,
    pub rescaled: bool,
}

impl FromStr for CouplingKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad coupling name {s:?}; expected t2j or T2j"));
        let mut chars = s.chars();
        let rescaled = match chars.next() {
            Some('t') => false,
            Some('T') => true,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || digits.len() > 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if digits.starts_with('0') {
            return Err(bad());
        }
        let index: usize = digits.parse().map_err(|_| bad())?;
        if index == 0 || index % 2 != 0 {
            return Err(bad());
        }
        Ok(Self {
            k: index / 2,
            rescaled,
        })
    }
}

impl fmt::Display for CouplingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.rescaled { 'T' } else { 't' };
        write!(f, "{c}{}", 2 * self.k)
    }
}
