//! Finitely supported vectors over the integer lattice, the ambient space for
//! shift orbits and perturbation constructions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Norm the ambient sequence space carries: ℓ_p with p ∈ [1, ∞), or the sup
/// norm (ℓ_∞ / c_0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p")]
pub enum NormKind {
    Sup,
    Lp(f64),
}

impl NormKind {
    pub fn lp(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::domain(format!("lp norm requires p >= 1, got {p}")));
        }
        Ok(NormKind::Lp(p))
    }
}

/// Sparse vector: finitely many nonzero real coefficients indexed by ℤ.
///
/// Zero coefficients are never stored, so support queries and norm
/// evaluations are exact over the stored entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FiniteVector {
    coords: BTreeMap<i64, f64>,
}

impl FiniteVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// κ·e_n style singleton.
    pub fn unit(n: i64) -> Self {
        Self::single(n, 1.0)
    }

    pub fn single(n: i64, value: f64) -> Self {
        let mut v = Self::zero();
        v.set(n, value);
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let mut v = Self::zero();
        for (n, c) in pairs {
            v.set(n, c);
        }
        v
    }

    pub fn get(&self, n: i64) -> f64 {
        self.coords.get(&n).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, n: i64, value: f64) {
        if value == 0.0 {
            self.coords.remove(&n);
        } else {
            self.coords.insert(n, value);
        }
    }

    pub fn add_assign_scaled(&mut self, other: &FiniteVector, factor: f64) {
        for (&n, &c) in &other.coords {
            let v = self.get(n) + factor * c;
            self.set(n, v);
        }
    }

    pub fn add(&self, other: &FiniteVector) -> FiniteVector {
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &FiniteVector) -> FiniteVector {
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        out
    }

    pub fn scale(&self, factor: f64) -> FiniteVector {
        let mut out = Self::zero();
        if factor != 0.0 {
            for (&n, &c) in &self.coords {
                out.set(n, factor * c);
            }
        }
        out
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.coords.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coords.iter().map(|(&n, &c)| (n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.coords.len()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.coords.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.coords.keys().next_back().copied()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Sup => self
                .coords
                .values()
                .map(|c| c.abs())
                .fold(0.0, f64::max),
            NormKind::Lp(p) => {
                if p == 1.0 {
                    self.coords.values().map(|c| c.abs()).sum()
                } else if p == 2.0 {
                    self.coords
                        .values()
                        .map(|c| c * c)
                        .sum::<f64>()
                        .sqrt()
                } else {
                    self.coords
                        .values()
                        .map(|c| c.abs().powf(p))
                        .sum::<f64>()
                        .powf(1.0 / p)
                }
            }
        }
    }

    pub fn distance(&self, other: &FiniteVector, kind: NormKind) -> f64 {
        self.sub(other).norm(kind)
    }
}

impl FromIterator<(i64, f64)> for FiniteVector {
    fn from_iter<T: IntoIterator<Item = (i64, f64)>>(iter: T) -> Self {
        Self::from_pairs(iter)
    }
}
