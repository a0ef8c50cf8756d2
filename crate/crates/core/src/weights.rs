//! Weight sequence models for bilateral and unilateral backward shifts,
//! log-domain window products, and shift application.
//!
//! The shift acts by (B_w x)_n = w_{n+1} x_{n+1}, i.e. e_n ↦ w_n e_{n−1};
//! its inverse (bilateral models only) sends e_n ↦ e_{n+1}/w_{n+1}.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kothe::PowerSeriesSpace;
use crate::numeric::CompensatedSum;
use crate::vector::FiniteVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Bilateral,
    Unilateral,
}

fn ser_space<S: Serializer>(space: &Arc<PowerSeriesSpace>, s: S) -> std::result::Result<S::Ok, S::Error> {
    PowerSeriesSpace::serialize(space, s)
}

/// A weight sequence (w_n). Bounded families carry explicit positive bounds;
/// the block-exponent family is unbounded above and unilateral (n ≥ 1).
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightModel {
    Constant {
        value: f64,
    },
    /// values[i] applies at index anchor + i, repeating with the list period.
    Periodic {
        values: Vec<f64>,
        anchor: i64,
    },
    /// neg governs n < cut, pos governs n ≥ cut.
    Split {
        neg: Box<WeightModel>,
        pos: Box<WeightModel>,
        cut: i64,
    },
    /// Finite table plus two fallback constants for indices below/above it.
    Explicit {
        table: BTreeMap<i64, f64>,
        neg_fill: f64,
        pos_fill: f64,
    },
    /// w_n = 2^{α_n} off block starts, w_{N_k} = 2^{α_{N_k} − (α_{N_{k−1}} + ⋯ + α_{N_k −1})}.
    FhcBlock {
        #[serde(serialize_with = "ser_space")]
        space: Arc<PowerSeriesSpace>,
    },
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::spec(format!("{what} must be a positive finite real, got {value}")));
    }
    Ok(())
}

impl WeightModel {
    pub fn constant(value: f64) -> Result<Self> {
        check_positive(value, "constant weight")?;
        Ok(WeightModel::Constant { value })
    }

    pub fn periodic(values: Vec<f64>, anchor: i64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::spec("periodic weight list must be nonempty"));
        }
        for &v in &values {
            check_positive(v, "periodic weight")?;
        }
        Ok(WeightModel::Periodic { values, anchor })
    }

    pub fn split(neg: WeightModel, pos: WeightModel, cut: i64) -> Result<Self> {
        if neg.orientation() != Orientation::Bilateral || pos.orientation() != Orientation::Bilateral {
            return Err(Error::spec("split sides must be bilateral models"));
        }
        Ok(WeightModel::Split {
            neg: Box::new(neg),
            pos: Box::new(pos),
            cut,
        })
    }

    pub fn explicit(table: BTreeMap<i64, f64>, neg_fill: f64, pos_fill: f64) -> Result<Self> {
        check_positive(neg_fill, "negative-side fill")?;
        check_positive(pos_fill, "positive-side fill")?;
        for (&n, &v) in &table {
            check_positive(v, &format!("table weight at {n}"))?;
        }
        Ok(WeightModel::Explicit {
            table,
            neg_fill,
            pos_fill,
        })
    }

    pub fn fhc(space: Arc<PowerSeriesSpace>) -> Self {
        WeightModel::FhcBlock { space }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            WeightModel::FhcBlock { .. } => Orientation::Unilateral,
            _ => Orientation::Bilateral,
        }
    }

    /// Declared lower bound b with 0 < b ≤ w_n everywhere.
    pub fn lower_bound(&self) -> f64 {
        match self {
            WeightModel::Constant { value } => *value,
            WeightModel::Periodic { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
            WeightModel::Split { neg, pos, .. } => neg.lower_bound().min(pos.lower_bound()),
            WeightModel::Explicit { table, neg_fill, pos_fill } => table
                .values()
                .copied()
                .fold(neg_fill.min(*pos_fill), f64::min),
            // w_{N_1} = 1; every other exponent is a positive integer.
            WeightModel::FhcBlock { .. } => 1.0,
        }
    }

    /// Declared upper bound B; None for the unbounded block-exponent family.
    pub fn upper_bound(&self) -> Option<f64> {
        match self {
            WeightModel::Constant { value } => Some(*value),
            WeightModel::Periodic { values, .. } => {
                Some(values.iter().copied().fold(0.0, f64::max))
            }
            WeightModel::Split { neg, pos, .. } => Some(neg.upper_bound()?.max(pos.upper_bound()?)),
            WeightModel::Explicit { table, neg_fill, pos_fill } => Some(
                table
                    .values()
                    .copied()
                    .fold(neg_fill.max(*pos_fill), f64::max),
            ),
            WeightModel::FhcBlock { .. } => None,
        }
    }

    fn check_index(&self, n: i64) -> Result<()> {
        if self.orientation() == Orientation::Unilateral && n < 1 {
            return Err(Error::domain(format!(
                "index {n} outside the unilateral range n >= 1"
            )));
        }
        Ok(())
    }

    pub fn weight_at(&self, n: i64) -> Result<f64> {
        self.check_index(n)?;
        match self {
            WeightModel::Constant { value } => Ok(*value),
            WeightModel::Periodic { values, anchor } => {
                let len = values.len() as i64;
                let idx = (n - anchor).rem_euclid(len) as usize;
                Ok(values[idx])
            }
            WeightModel::Split { neg, pos, cut } => {
                if n < *cut {
                    neg.weight_at(n)
                } else {
                    pos.weight_at(n)
                }
            }
            WeightModel::Explicit { table, neg_fill, pos_fill } => {
                if let Some(&v) = table.get(&n) {
                    return Ok(v);
                }
                match (table.keys().next(), table.keys().next_back()) {
                    (Some(&lo), Some(&hi)) if n > lo && n < hi => Err(Error::domain(format!(
                        "explicit table has a gap at index {n}"
                    ))),
                    (Some(&lo), _) if n < lo => Ok(*neg_fill),
                    (_, Some(&hi)) if n > hi => Ok(*pos_fill),
                    _ => Ok(if n < 0 { *neg_fill } else { *pos_fill }),
                }
            }
            WeightModel::FhcBlock { space } => {
                let e = space.weight_exponent(n as u64)?;
                let ef = e.to_f64().unwrap_or(f64::INFINITY);
                if ef.abs() > 1023.0 {
                    return Err(Error::domain(format!(
                        "weight 2^{e} at n = {n} exceeds f64 range; use log-domain accessors"
                    )));
                }
                Ok(ef.exp2())
            }
        }
    }

    /// log2 w_n; exact integers for the block-exponent family.
    pub fn log2_weight_at(&self, n: i64) -> Result<f64> {
        match self {
            WeightModel::FhcBlock { space } => {
                self.check_index(n)?;
                let e = space.weight_exponent(n as u64)?;
                Ok(e.to_f64().unwrap_or(f64::INFINITY))
            }
            _ => Ok(self.weight_at(n)?.log2()),
        }
    }

    /// The reflected-reciprocal model w'_n = 1/w_{−n+1}, which swaps the roles
    /// of the two sides of the lattice.
    pub fn conjugate(&self) -> Result<WeightModel> {
        match self {
            WeightModel::Constant { value } => WeightModel::constant(1.0 / value),
            WeightModel::Periodic { values, .. } => {
                let p = values.len() as i64;
                let mut out = Vec::with_capacity(values.len());
                for i in 0..p {
                    out.push(1.0 / self.weight_at(1 - i)?);
                }
                WeightModel::periodic(out, 0)
            }
            WeightModel::Split { neg, pos, cut } => {
                WeightModel::split(pos.conjugate()?, neg.conjugate()?, 2 - cut)
            }
            WeightModel::Explicit { table, neg_fill, pos_fill } => {
                let reflected: BTreeMap<i64, f64> =
                    table.iter().map(|(&n, &v)| (1 - n, 1.0 / v)).collect();
                WeightModel::explicit(reflected, 1.0 / pos_fill, 1.0 / neg_fill)
            }
            WeightModel::FhcBlock { .. } => Err(Error::precondition(
                "conjugation is defined for bilateral models only",
            )),
        }
    }
}

/// log2 of a window product w_k ⋯ w_{k+L−1}, carried with its window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogProduct {
    pub start: i64,
    pub len: u64,
    pub log2: f64,
}

impl LogProduct {
    /// Concatenate with the adjacent window starting at start+len.
    pub fn concat(&self, next: &LogProduct) -> Result<LogProduct> {
        if next.start != self.start + self.len as i64 {
            return Err(Error::precondition(format!(
                "windows [{}..+{}] and [{}..+{}] are not adjacent",
                self.start, self.len, next.start, next.len
            )));
        }
        Ok(LogProduct {
            start: self.start,
            len: self.len + next.len,
            log2: self.log2 + next.log2,
        })
    }
}

/// log2(w_k ⋯ w_{k+L−1}); the empty window (L = 0) is the empty product 1.
pub fn log_product(model: &WeightModel, k: i64, len: u64) -> Result<LogProduct> {
    if len == 0 {
        return Ok(LogProduct { start: k, len: 0, log2: 0.0 });
    }
    let log2 = match model {
        WeightModel::FhcBlock { space } => {
            model.check_index(k)?;
            let mut sum = num_bigint::BigInt::from(0);
            for n in k..k + len as i64 {
                sum += space.weight_exponent(n as u64)?;
            }
            sum.to_f64().unwrap_or(f64::INFINITY)
        }
        _ => {
            let mut sum = CompensatedSum::new();
            for n in k..k + len as i64 {
                sum.add(model.log2_weight_at(n)?);
            }
            sum.value()
        }
    };
    Ok(LogProduct { start: k, len, log2 })
}

/// Apply the shift (or its inverse) to a finitely supported vector.
pub fn apply_shift(model: &WeightModel, x: &FiniteVector, direction: Direction) -> Result<FiniteVector> {
    let unilateral = model.orientation() == Orientation::Unilateral;
    match direction {
        Direction::Forward => {
            let mut out = FiniteVector::zero();
            for (n, c) in x.iter() {
                if unilateral {
                    if n < 0 {
                        return Err(Error::domain(format!(
                            "vector index {n} outside the unilateral range"
                        )));
                    }
                    // e_0 has no predecessor: the component is annihilated.
                    if n == 0 {
                        continue;
                    }
                }
                out.set(n - 1, model.weight_at(n)? * c + out.get(n - 1));
            }
            Ok(out)
        }
        Direction::Inverse => {
            if unilateral {
                return Err(Error::precondition(
                    "the unilateral backward shift is not invertible",
                ));
            }
            let mut out = FiniteVector::zero();
            for (n, c) in x.iter() {
                out.set(n + 1, c / model.weight_at(n + 1)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::FrequencySchedule;
    use crate::kothe;

    fn split_c() -> WeightModel {
        WeightModel::split(
            WeightModel::constant(0.5).unwrap(),
            WeightModel::constant(2.0).unwrap(),
            1,
        )
        .unwrap()
    }

    fn small_space() -> Arc<PowerSeriesSpace> {
        let schedule = FrequencySchedule::explicit(vec![0, 3, 9]).unwrap();
        Arc::new(PowerSeriesSpace::new(schedule, 9).unwrap())
    }

    #[test]
    fn constant_is_everywhere_constant() {
        let m = WeightModel::constant(2.0).unwrap();
        assert_eq!(m.weight_at(-7).unwrap(), 2.0);
        assert_eq!(m.weight_at(0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(WeightModel::constant(0.0).is_err());
        assert!(WeightModel::constant(-1.0).is_err());
        assert!(WeightModel::constant(f64::NAN).is_err());
        assert!(WeightModel::periodic(vec![1.0, 0.0], 0).is_err());
    }

    #[test]
    fn periodic_anchor() {
        let m = WeightModel::periodic(vec![1.0, 2.0, 3.0], -1).unwrap();
        assert_eq!(m.weight_at(-1).unwrap(), 1.0);
        assert_eq!(m.weight_at(0).unwrap(), 2.0);
        assert_eq!(m.weight_at(1).unwrap(), 3.0);
        assert_eq!(m.weight_at(2).unwrap(), 1.0);
        assert_eq!(m.weight_at(-4).unwrap(), 1.0);
    }

    #[test]
    fn split_sides() {
        let m = split_c();
        assert_eq!(m.weight_at(0).unwrap(), 0.5);
        assert_eq!(m.weight_at(1).unwrap(), 2.0);
        assert_eq!(m.lower_bound(), 0.5);
        assert_eq!(m.upper_bound(), Some(2.0));
    }

    #[test]
    fn explicit_fills_and_gaps() {
        let table: BTreeMap<i64, f64> = [(0, 1.5), (1, 2.5), (3, 0.5)].into_iter().collect();
        let m = WeightModel::explicit(table, 1.0, 3.0).unwrap();
        assert_eq!(m.weight_at(-5).unwrap(), 1.0);
        assert_eq!(m.weight_at(5).unwrap(), 3.0);
        assert_eq!(m.weight_at(0).unwrap(), 1.5);
        assert!(m.weight_at(2).is_err());
    }

    #[test]
    fn fhc_weights_match_block_exponents() {
        let m = WeightModel::fhc(small_space());
        assert_eq!(m.weight_at(3).unwrap(), 1.0);
        assert_eq!(m.weight_at(4).unwrap(), 8.0);
        assert_eq!(m.weight_at(9).unwrap(), 8.0);
        assert!(m.weight_at(0).is_err());
        assert_eq!(m.lower_bound(), 1.0);
        assert_eq!(m.upper_bound(), None);
    }

    #[test]
    fn log_products() {
        let c2 = WeightModel::constant(2.0).unwrap();
        assert_eq!(log_product(&c2, -11, 4).unwrap().log2, 4.0);
        assert_eq!(log_product(&c2, 3, 0).unwrap().log2, 0.0);

        let m = WeightModel::fhc(small_space());
        assert_eq!(log_product(&m, 1, 4).unwrap().log2, 5.0);

        let s = split_c();
        assert_eq!(log_product(&s, -2, 2).unwrap().log2, -2.0);
    }

    #[test]
    fn log_product_concat() {
        let s = split_c();
        let a = log_product(&s, -3, 4).unwrap();
        let b = log_product(&s, 1, 2).unwrap();
        let whole = log_product(&s, -3, 6).unwrap();
        let joined = a.concat(&b).unwrap();
        assert_eq!(joined.len, whole.len);
        assert!((joined.log2 - whole.log2).abs() < 1e-12);
        assert!(b.concat(&a).is_err());
    }

    #[test]
    fn forward_shift_definition() {
        let c2 = WeightModel::constant(2.0).unwrap();
        let out = apply_shift(&c2, &FiniteVector::unit(1), Direction::Forward).unwrap();
        assert_eq!(out, FiniteVector::single(0, 2.0));

        let s = split_c();
        let x = FiniteVector::from_pairs([(0, 1.0), (1, 1.0)]);
        let out = apply_shift(&s, &x, Direction::Forward).unwrap();
        assert_eq!(out, FiniteVector::from_pairs([(-1, 0.5), (0, 2.0)]));
    }

    #[test]
    fn inverse_then_forward_is_identity() {
        let s = split_c();
        let x = FiniteVector::from_pairs([(-2, 1.25), (0, -3.0), (4, 0.5)]);
        let back = apply_shift(&s, &x, Direction::Inverse).unwrap();
        let again = apply_shift(&s, &back, Direction::Forward).unwrap();
        for (n, c) in x.iter() {
            assert!((again.get(n) - c).abs() <= 1e-12 * c.abs());
        }
    }

    #[test]
    fn unilateral_shift_edges() {
        let m = WeightModel::fhc(small_space());
        let out = apply_shift(&m, &FiniteVector::unit(0), Direction::Forward).unwrap();
        assert!(out.is_zero());
        assert!(apply_shift(&m, &FiniteVector::unit(0), Direction::Inverse).is_err());
        assert!(apply_shift(&m, &FiniteVector::unit(-1), Direction::Forward).is_err());
    }

    #[test]
    fn conjugate_reflects_and_inverts() {
        let m = WeightModel::split(
            WeightModel::constant(0.5).unwrap(),
            WeightModel::constant(3.0).unwrap(),
            5,
        )
        .unwrap();
        let c = m.conjugate().unwrap();
        for n in -20..20 {
            let direct = 1.0 / m.weight_at(1 - n).unwrap();
            assert!((c.weight_at(n).unwrap() - direct).abs() < 1e-15);
        }

        let p = WeightModel::periodic(vec![1.0, 2.0, 4.0], 7).unwrap();
        let cp = p.conjugate().unwrap();
        for n in -20..20 {
            let direct = 1.0 / p.weight_at(1 - n).unwrap();
            assert!((cp.weight_at(n).unwrap() - direct).abs() < 1e-15);
        }

        assert!(WeightModel::fhc(small_space()).conjugate().is_err());
    }

    #[test]
    fn fhc_weight_too_large_for_f64_is_a_domain_error() {
        let schedule = FrequencySchedule::geometric(4).unwrap();
        let space = Arc::new(PowerSeriesSpace::new(schedule, 100_000).unwrap());
        let m = WeightModel::fhc(space);
        // α at n = 70000 is astronomically large; the raw weight cannot be a f64.
        assert!(m.weight_at(70_000).is_err());
        assert!(m.log2_weight_at(70_000).unwrap() > 1e19);
        let _ = kothe::v_value(&m, 0).unwrap();
    }
}
