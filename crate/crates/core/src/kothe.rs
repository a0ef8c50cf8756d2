//! A power-series space of order 0 built over a block schedule, its
//! seminorms, the induced unbounded shift weights, and numerical
//! verification of the two estimates behind frequent hypercyclicity.
//!
//! The exponent sequence (α_n) is determined by the schedule: α_0 = 1,
//! α is constant on each block [N_k, N_{k+1}), and at every jump point
//! α_{N_k} = Σ_{n<N_k} α_n. These grow far beyond f64 range, so every
//! derived quantity is carried as an exact big-integer power of two plus
//! a small float remainder.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq::{FrequencySchedule, FrequencySets};
use crate::vector::FiniteVector;
use crate::weights::WeightModel;

/// Serialize big integers as decimal strings: they routinely exceed u64/f64.
pub(crate) mod bigint_string {
    use num_bigint::BigInt;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
struct BlockInfo {
    /// N_k, the first index of block k (block 0 starts at 0).
    start: u64,
    /// α_{N_k}, the exponent on [N_k, N_{k+1}).
    #[serde(with = "bigint_string")]
    alpha: BigInt,
    /// Σ_{n < N_k} α_n.
    #[serde(with = "bigint_string")]
    prefix: BigInt,
}

/// The exponent sequence of the space, materialized as one cached record
/// per block up to a horizon. All per-index queries are O(log #blocks).
#[derive(Debug, Clone, Serialize)]
pub struct PowerSeriesSpace {
    schedule: FrequencySchedule,
    horizon: u64,
    blocks: Vec<BlockInfo>,
}

impl PowerSeriesSpace {
    /// Build the block cache for indices 0..=horizon. Block 0 covers
    /// [0, N_1); the jump points are the schedule's starts N_k, k ≥ 1.
    pub fn new(schedule: FrequencySchedule, horizon: u64) -> Result<Self> {
        let mut blocks = vec![BlockInfo {
            start: 0,
            alpha: BigInt::from(1),
            prefix: BigInt::from(0),
        }];
        for k in 1.. {
            let start = match schedule.block_start(k) {
                Ok(s) => s,
                Err(_) => break,
            };
            if start > horizon {
                break;
            }
            let prev = blocks.last().unwrap();
            let width = BigInt::from(start - prev.start);
            let prefix = &prev.prefix + width * &prev.alpha;
            blocks.push(BlockInfo {
                start,
                alpha: prefix.clone(),
                prefix,
            });
        }
        Ok(PowerSeriesSpace {
            schedule,
            horizon,
            blocks,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn schedule(&self) -> &FrequencySchedule {
        &self.schedule
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_start_of(&self, k: usize) -> Result<u64> {
        self.blocks
            .get(k)
            .map(|b| b.start)
            .ok_or_else(|| Error::domain(format!("block {k} beyond the cached horizon")))
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n > self.horizon {
            return Err(Error::domain(format!(
                "index {n} beyond the space horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }

    fn block(&self, n: u64) -> &BlockInfo {
        let k = self.blocks.partition_point(|b| b.start <= n) - 1;
        &self.blocks[k]
    }

    /// Index k of the block containing n.
    pub fn block_index_of(&self, n: u64) -> Result<usize> {
        self.check_index(n)?;
        Ok(self.blocks.partition_point(|b| b.start <= n) - 1)
    }

    /// The next block boundary strictly above block k, if the schedule
    /// defines one (it may lie beyond the cached horizon).
    pub fn next_boundary(&self, k: usize) -> Option<u64> {
        if k + 1 < self.blocks.len() {
            return Some(self.blocks[k + 1].start);
        }
        self.schedule.block_start(k + 1).ok()
    }

    /// True when n is a jump point N_k, k ≥ 1.
    pub fn is_jump(&self, n: u64) -> bool {
        n > 0
            && self
                .blocks
                .binary_search_by_key(&n, |b| b.start)
                .is_ok()
    }

    /// α_n.
    pub fn alpha(&self, n: u64) -> Result<BigInt> {
        self.check_index(n)?;
        Ok(self.block(n).alpha.clone())
    }

    /// Σ_{j < n} α_j.
    pub fn alpha_prefix(&self, n: u64) -> Result<BigInt> {
        self.check_index(n)?;
        let b = self.block(n);
        Ok(&b.prefix + BigInt::from(n - b.start) * &b.alpha)
    }

    /// log2 w_n for the induced shift: α_n off jump points, and at a jump
    /// point N_k the deficit α_{N_k} − (α_{N_{k−1}} + ⋯ + α_{N_k − 1}),
    /// which telescopes to Σ_{j < N_{k−1}} α_j.
    pub fn weight_exponent(&self, n: u64) -> Result<BigInt> {
        if n == 0 {
            return Err(Error::domain("weights are indexed from n = 1"));
        }
        self.check_index(n)?;
        match self.blocks.binary_search_by_key(&n, |b| b.start) {
            Ok(k) if k >= 1 => Ok(self.blocks[k - 1].prefix.clone()),
            _ => Ok(self.block(n).alpha.clone()),
        }
    }

    /// log2 v_n where v_n = 1/(w_1 ⋯ w_n): equals α_0 − (n − N_k + 1)·α_{N_k}
    /// for n in block k. (Telescoping the weight exponents leaves the α_0
    /// correction; see `v_log2_telescoped` for the definitional cross-check.)
    pub fn v_log2(&self, n: u64) -> Result<BigInt> {
        self.check_index(n)?;
        let b = self.block(n);
        Ok(BigInt::from(1) - BigInt::from(n - b.start + 1) * &b.alpha)
    }
}

/// log2 v_n summed weight by weight, as a slow independent oracle for the
/// closed form above.
pub fn v_log2_telescoped(space: &PowerSeriesSpace, n: u64) -> Result<BigInt> {
    let mut sum = BigInt::from(0);
    for j in 1..=n {
        sum += space.weight_exponent(j)?;
    }
    Ok(-sum)
}

/// α_n for a schedule, without keeping the space around.
pub fn build_alpha(schedule: &FrequencySchedule, n: u64) -> Result<BigInt> {
    PowerSeriesSpace::new(schedule.clone(), n)?.alpha(n)
}

/// A positive magnitude carried as value = 2^(exp2 + rest), with exp2 an
/// exact big integer and rest a small float (0 when the value is an exact
/// power of two). Zero is represented by rest = −∞.
#[derive(Debug, Clone, Serialize)]
pub struct LogMagnitude {
    #[serde(with = "bigint_string")]
    pub exp2: BigInt,
    pub rest: f64,
}

impl LogMagnitude {
    pub fn from_exact(exp2: impl Into<BigInt>) -> Self {
        LogMagnitude { exp2: exp2.into(), rest: 0.0 }
    }

    pub fn from_parts(exp2: impl Into<BigInt>, rest: f64) -> Self {
        LogMagnitude { exp2: exp2.into(), rest }
    }

    pub fn from_float_log2(log2: f64) -> Self {
        LogMagnitude { exp2: BigInt::from(0), rest: log2 }
    }

    pub fn zero() -> Self {
        LogMagnitude { exp2: BigInt::from(0), rest: f64::NEG_INFINITY }
    }

    pub fn is_zero(&self) -> bool {
        self.rest == f64::NEG_INFINITY
    }

    /// True when the magnitude is an exactly represented power of two.
    pub fn is_exact(&self) -> bool {
        self.rest == 0.0
    }

    pub fn approx_log2(&self) -> f64 {
        self.exp2.to_f64().unwrap_or(f64::NAN) + self.rest
    }

    /// The magnitude as f64 (0 or ∞ outside the representable range).
    pub fn value(&self) -> f64 {
        self.approx_log2().exp2()
    }

    /// log2(self) − log2(other), in float precision.
    pub fn log2_margin(&self, other: &LogMagnitude) -> f64 {
        (&self.exp2 - &other.exp2).to_f64().unwrap_or(f64::NAN) + (self.rest - other.rest)
    }

    /// Compare magnitudes. When the float remainders coincide bitwise the
    /// comparison reduces to the exact integer parts; otherwise it falls
    /// back to float log differences.
    pub fn cmp_log(&self, other: &LogMagnitude) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        if self.rest == other.rest {
            return self.exp2.cmp(&other.exp2);
        }
        let d = self.log2_margin(other);
        if d < 0.0 {
            Ordering::Less
        } else if d > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }
}

/// The exponent when v is an exact power of two, read off the bit pattern.
fn exact_log2(v: f64) -> Option<i64> {
    if !(v.is_finite() && v > 0.0) {
        return None;
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp != 0 {
        (mant == 0).then_some(exp - 1023)
    } else {
        mant.is_power_of_two()
            .then(|| mant.trailing_zeros() as i64 - 1074)
    }
}

/// p = 2^t · q with q odd.
fn two_adic(p: u32) -> (u32, u32) {
    let t = p.trailing_zeros();
    (t, p >> t)
}

/// The seminorm sup_n |x_n| p^{α_n} for integer p ≥ 1, in log form.
pub fn seminorm(space: &PowerSeriesSpace, p: u32, x: &FiniteVector) -> Result<LogMagnitude> {
    if p < 1 {
        return Err(Error::precondition("seminorm index p must be >= 1"));
    }
    let (t, q) = two_adic(p);
    let lq = if q > 1 { (q as f64).log2() } else { 0.0 };
    let mut best = LogMagnitude::zero();
    for (n, c) in x.iter() {
        if n < 0 {
            return Err(Error::domain(format!(
                "index {n} outside the unilateral range of the space"
            )));
        }
        let alpha = space.alpha(n as u64)?;
        let mut exp2 = &alpha * BigInt::from(t);
        let mut rest = if q > 1 {
            alpha.to_f64().unwrap_or(f64::INFINITY) * lq
        } else {
            0.0
        };
        match exact_log2(c.abs()) {
            Some(e) => exp2 += e,
            None => rest += c.abs().log2(),
        }
        let term = LogMagnitude { exp2, rest };
        if best.is_zero() || term.cmp_log(&best) == std::cmp::Ordering::Greater {
            best = term;
        }
    }
    Ok(best)
}

/// An exact nonnegative rational in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactRatio {
    #[serde(with = "bigint_string")]
    pub num: BigInt,
    #[serde(with = "bigint_string")]
    pub den: BigInt,
}

impl ExactRatio {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::domain("ratio denominator is zero"));
        }
        let (mut num, mut den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g > BigInt::from(1) {
            num /= &g;
            den /= &g;
        }
        Ok(ExactRatio { num, den })
    }

    pub fn to_f64(&self) -> f64 {
        let (a, b) = (self.num.to_f64(), self.den.to_f64());
        match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => f64::INFINITY,
        }
    }
}

/// (Σ_{j<n} α_j) / α_n — the functional whose liminf over n separates the
/// chaotic space from the non-chaotic one.
pub fn chaos_ratio(space: &PowerSeriesSpace, n: u64) -> Result<ExactRatio> {
    if n == 0 {
        return Err(Error::precondition("the ratio is defined for n >= 1"));
    }
    ExactRatio::new(space.alpha_prefix(n)?, space.alpha(n)?)
}

/// Exponent data for the chaos-ratio diagnostic: either a cached space or a
/// raw nondecreasing exponent slice indexed from 0.
pub enum AlphaSource<'a> {
    Space(&'a PowerSeriesSpace),
    Raw(&'a [u64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaosVerdict {
    EvidenceDiverges,
    EvidenceBounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosPoint {
    pub n: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosEvidence {
    pub verdict: ChaosVerdict,
    /// The ratio at each requested checkpoint.
    pub trace: Vec<ChaosPoint>,
    /// inf of the ratio over [checkpoint, horizon], per checkpoint; the
    /// liminf is approached from below by these tail infima.
    pub tail_minima: Vec<ChaosPoint>,
    pub note: String,
}

fn diverging(minima: &[ChaosPoint]) -> bool {
    minima.len() >= 2
        && minima.windows(2).all(|w| w[1].ratio > w[0].ratio)
        && minima.last().unwrap().ratio >= 4.0
        && minima.last().unwrap().ratio >= 4.0 * minima[0].ratio
}

/// Finite evidence for or against liminf_n (Σ_{j<n} α_j)/α_n = ∞, the
/// dividing line for chaos of the induced shift. "Diverges" requires the
/// tail infima to grow strictly and at least fourfold across the
/// checkpoints; anything else is reported as bounded evidence.
pub fn supports_chaotic_verdict(source: AlphaSource<'_>, checkpoints: &[u64]) -> Result<ChaosEvidence> {
    let mut cps: Vec<u64> = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if cps.is_empty() {
        return Err(Error::precondition("at least one checkpoint is required"));
    }
    if cps[0] == 0 {
        return Err(Error::precondition("checkpoints must be >= 1"));
    }
    match source {
        AlphaSource::Space(space) => {
            if space.block_count() < 2 {
                return Err(Error::precondition(
                    "the horizon covers no block jump; exponents look constant",
                ));
            }
            let horizon = space.horizon();
            if *cps.last().unwrap() > horizon {
                return Err(Error::domain("checkpoint beyond the space horizon"));
            }
            let mut trace = Vec::new();
            let mut tail_minima = Vec::new();
            for &cp in &cps {
                trace.push(ChaosPoint { n: cp, ratio: chaos_ratio(space, cp)?.to_f64() });
                // Within a block the ratio increases with n and resets to
                // exactly 1 at each jump, so the tail infimum is 1 whenever
                // a jump lies in [cp, horizon].
                let has_jump = space
                    .blocks
                    .iter()
                    .skip(1)
                    .any(|b| b.start >= cp && b.start <= horizon);
                let m = if has_jump { 1.0 } else { chaos_ratio(space, cp)?.to_f64() };
                tail_minima.push(ChaosPoint { n: cp, ratio: m });
            }
            let verdict = if diverging(&tail_minima) {
                ChaosVerdict::EvidenceDiverges
            } else {
                ChaosVerdict::EvidenceBounded
            };
            let note = "block jumps reset the ratio to 1, so the tail infimum stays pinned".into();
            Ok(ChaosEvidence { verdict, trace, tail_minima, note })
        }
        AlphaSource::Raw(alpha) => {
            if alpha.len() < 2 {
                return Err(Error::precondition("need at least two exponent values"));
            }
            if alpha[0] < 1 {
                return Err(Error::precondition("exponents must be >= 1"));
            }
            if alpha.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::precondition("exponents must be nondecreasing"));
            }
            let last = *alpha.last().unwrap();
            if last <= alpha[0] || last <= alpha[alpha.len() / 2] {
                return Err(Error::precondition(
                    "exponents do not grow over the sample; the diagnostic needs α_n → ∞",
                ));
            }
            let horizon = (alpha.len() - 1) as u64;
            if *cps.last().unwrap() > horizon {
                return Err(Error::domain("checkpoint beyond the exponent sample"));
            }
            // prefix sums fit u128 comfortably for u64 entries.
            let mut prefix: Vec<u128> = Vec::with_capacity(alpha.len() + 1);
            prefix.push(0);
            for &a in alpha {
                prefix.push(prefix.last().unwrap() + a as u128);
            }
            let ratio = |n: usize| prefix[n] as f64 / alpha[n] as f64;
            let mut trace: Vec<ChaosPoint> = cps
                .iter()
                .map(|&cp| ChaosPoint { n: cp, ratio: ratio(cp as usize) })
                .collect();
            trace.sort_by_key(|p| p.n);
            let mut tail_minima = vec![ChaosPoint { n: 0, ratio: 0.0 }; cps.len()];
            let mut min = f64::INFINITY;
            let mut idx = cps.len();
            for n in (1..alpha.len()).rev() {
                min = min.min(ratio(n));
                while idx > 0 && cps[idx - 1] == n as u64 {
                    idx -= 1;
                    tail_minima[idx] = ChaosPoint { n: n as u64, ratio: min };
                }
            }
            let verdict = if diverging(&tail_minima) {
                ChaosVerdict::EvidenceDiverges
            } else {
                ChaosVerdict::EvidenceBounded
            };
            let note = "tail infima computed exhaustively over the sample".into();
            Ok(ChaosEvidence { verdict, trace, tail_minima, note })
        }
    }
}

/// The shift weights induced by the space: w_n = 2^{α_n} off jump points,
/// with the deficit exponent at each jump.
pub fn build_fhc_weights(space: Arc<PowerSeriesSpace>) -> WeightModel {
    WeightModel::fhc(space)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityViolation {
    pub p: u32,
    pub n: u64,
    pub margin_log2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub p_max: u32,
    pub horizon: u64,
    pub checked: u64,
    /// Smallest log2 of (2p)^{α_{n+1}} / (w_{n+1} p^{α_n}) over the sweep.
    pub min_margin_log2: f64,
    pub min_margin_at: Option<(u32, u64)>,
    pub violations: Vec<ContinuityViolation>,
    pub violations_truncated: bool,
}

const VIOLATION_CAP: usize = 1024;

/// Verify w_{n+1} p^{α_n} ≤ (2p)^{α_{n+1}} for 1 ≤ p ≤ p_max, 0 ≤ n ≤ horizon
/// — the estimate that makes the shift act continuously on the space.
/// The dyadic part of the margin is decided exactly; when an odd factor of p
/// contributes, its (always nonnegative) float term is added and the verdict
/// uses a 1e−9 tolerance.
pub fn continuity_check_with<F>(
    space: &PowerSeriesSpace,
    exponent: F,
    p_max: u32,
    horizon: u64,
) -> Result<ContinuityReport>
where
    F: Fn(u64) -> Result<BigInt>,
{
    if p_max < 1 {
        return Err(Error::precondition("p_max must be >= 1"));
    }
    if space.horizon() < horizon + 1 {
        return Err(Error::precondition(format!(
            "space horizon {} too small: the sweep reads index {}",
            space.horizon(),
            horizon + 1
        )));
    }
    let mut report = ContinuityReport {
        p_max,
        horizon,
        checked: 0,
        min_margin_log2: f64::INFINITY,
        min_margin_at: None,
        violations: Vec::new(),
        violations_truncated: false,
    };
    for n in 0..=horizon {
        let a0 = space.alpha(n)?;
        let a1 = space.alpha(n + 1)?;
        let e1 = exponent(n + 1)?;
        let da = (&a1 - &a0).to_f64().unwrap_or(f64::INFINITY);
        for p in 1..=p_max {
            let (t, q) = two_adic(p);
            // margin = A + B with A exact dyadic and B ≥ 0 from the odd part.
            let a = &a1 * BigInt::from(t + 1) - &e1 - &a0 * BigInt::from(t);
            let b = if q > 1 { da * (q as f64).log2() } else { 0.0 };
            let margin = a.to_f64().unwrap_or(f64::INFINITY) + b;
            report.checked += 1;
            if margin < report.min_margin_log2 {
                report.min_margin_log2 = margin;
                report.min_margin_at = Some((p, n));
            }
            let holds = !a.is_negative() || (q > 1 && margin >= -1e-9);
            if !holds {
                if report.violations.len() < VIOLATION_CAP {
                    report.violations.push(ContinuityViolation { p, n, margin_log2: margin });
                } else {
                    report.violations_truncated = true;
                }
            }
        }
    }
    Ok(report)
}

/// `continuity_check_with` over the model's own weight exponents.
pub fn continuity_check(model: &WeightModel, p_max: u32, horizon: u64) -> Result<ContinuityReport> {
    match model {
        WeightModel::FhcBlock { space } => {
            continuity_check_with(space, |n| space.weight_exponent(n), p_max, horizon)
        }
        _ => Err(Error::precondition(
            "the continuity sweep applies to block-exponent weights",
        )),
    }
}

/// v_n = 1/(w_1 ⋯ w_n): exact for block-exponent weights, float otherwise.
pub fn v_value(model: &WeightModel, n: u64) -> Result<LogMagnitude> {
    match model {
        WeightModel::FhcBlock { space } => Ok(LogMagnitude::from_exact(space.v_log2(n)?)),
        _ => {
            let lp = crate::weights::log_product(model, 1, n)?;
            Ok(LogMagnitude::from_float_log2(-lp.log2))
        }
    }
}

/// log2(2^{−r} r), the tolerance budget attached to the r-th frequency set.
pub fn eps_log2(r: u32) -> f64 {
    (r as f64).log2() - r as f64
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FhcViolation {
    /// An index (or index difference) escapes the block the estimates pin it to.
    BlockMembership {
        n: u64,
        m: Option<u64>,
        j: u32,
        detail: String,
    },
    /// A term exceeds its closed-form budget.
    BoundBreach {
        n: u64,
        m: Option<u64>,
        j: u32,
        value_log2: f64,
        bound_log2: f64,
    },
    /// Per-block maxima fail to decrease strictly.
    MonotonicityBreach {
        block_a: usize,
        block_b: usize,
        max_a: f64,
        max_b: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct FhcTracePoint {
    pub n: u64,
    pub block: usize,
    pub value: LogMagnitude,
    pub value_log2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockMax {
    pub block: usize,
    pub value_log2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FhcConditionIReport {
    pub r: u32,
    pub p: u32,
    pub horizon: u64,
    pub elements_checked: u64,
    pub trace: Vec<FhcTracePoint>,
    pub trace_truncated: bool,
    pub block_maxima: Vec<BlockMax>,
    pub final_block_max_log2: Option<f64>,
    pub violations: Vec<FhcViolation>,
    pub violations_truncated: bool,
}

const TRACE_CAP: usize = 256;

fn push_violation(report: &mut Vec<FhcViolation>, truncated: &mut bool, v: FhcViolation) {
    if report.len() < VIOLATION_CAP {
        report.push(v);
    } else {
        *truncated = true;
    }
}

/// First decay estimate: for every n in the r-th set, the seminorm-p size of
/// the orbit tail term p^{α_n} v_{n+r} must stay below 2 · (p/2^k)^{α_{N_k}}
/// (k the block of n), and the per-block maxima must decrease strictly.
pub fn verify_fhc_condition_i(
    space: &PowerSeriesSpace,
    sets: &FrequencySets,
    r: u32,
    p: u32,
    horizon: u64,
) -> Result<FhcConditionIReport> {
    if p < 1 {
        return Err(Error::precondition("p must be >= 1"));
    }
    if horizon > sets.horizon {
        return Err(Error::precondition("horizon exceeds the generated sets"));
    }
    if space.horizon() < horizon + r as u64 {
        return Err(Error::precondition(format!(
            "space horizon {} too small: values read index up to {}",
            space.horizon(),
            horizon + r as u64
        )));
    }
    let elements = sets.set(r)?;
    let (t, q) = two_adic(p);
    let lq = if q > 1 { (q as f64).log2() } else { 0.0 };
    let mut report = FhcConditionIReport {
        r,
        p,
        horizon,
        elements_checked: 0,
        trace: Vec::new(),
        trace_truncated: false,
        block_maxima: Vec::new(),
        final_block_max_log2: None,
        violations: Vec::new(),
        violations_truncated: false,
    };
    let mut maxima: BTreeMap<usize, LogMagnitude> = BTreeMap::new();
    for &n in elements.iter().take_while(|&&n| n <= horizon) {
        report.elements_checked += 1;
        let k = space.block_index_of(n)?;
        let k_end = space.block_index_of(n + r as u64)?;
        if k_end != k {
            push_violation(
                &mut report.violations,
                &mut report.violations_truncated,
                FhcViolation::BlockMembership {
                    n,
                    m: None,
                    j: r,
                    detail: format!("n + r = {} crosses into block {k_end}", n + r as u64),
                },
            );
        }
        let bk = &space.blocks[k_end];
        let alpha = &bk.alpha;
        let alpha_f = alpha.to_f64().unwrap_or(f64::INFINITY);
        // value = p^{α_n} v_{n+r} = 2^{α_0 + t·α − T·α} q^{α},
        // T = n + r − N_k + 1 counting the exponents the tail picks up.
        let big_t = BigInt::from(n + r as u64 - bk.start + 1);
        let value = LogMagnitude {
            exp2: BigInt::from(1) + alpha * BigInt::from(t) - &big_t * alpha,
            rest: alpha_f * lq,
        };
        // budget 2 (p / 2^k)^{α_{N_k}} with k the block of n.
        let bn = &space.blocks[k];
        let bound = LogMagnitude {
            exp2: BigInt::from(1) + &bn.alpha * BigInt::from(t) - BigInt::from(k as u64) * &bn.alpha,
            rest: bn.alpha.to_f64().unwrap_or(f64::INFINITY) * lq,
        };
        if value.cmp_log(&bound) == std::cmp::Ordering::Greater {
            push_violation(
                &mut report.violations,
                &mut report.violations_truncated,
                FhcViolation::BoundBreach {
                    n,
                    m: None,
                    j: r,
                    value_log2: value.approx_log2(),
                    bound_log2: bound.approx_log2(),
                },
            );
        }
        if report.trace.len() < TRACE_CAP {
            report.trace.push(FhcTracePoint {
                n,
                block: k,
                value: value.clone(),
                value_log2: value.approx_log2(),
            });
        } else {
            report.trace_truncated = true;
        }
        match maxima.get(&k) {
            Some(best) if value.cmp_log(best) != std::cmp::Ordering::Greater => {}
            _ => {
                maxima.insert(k, value);
            }
        }
    }
    let mut prev: Option<(usize, &LogMagnitude)> = None;
    for (&k, v) in &maxima {
        if let Some((pk, pv)) = prev {
            if pv.cmp_log(v) != std::cmp::Ordering::Greater {
                push_violation(
                    &mut report.violations,
                    &mut report.violations_truncated,
                    FhcViolation::MonotonicityBreach {
                        block_a: pk,
                        block_b: k,
                        max_a: pv.approx_log2(),
                        max_b: v.approx_log2(),
                    },
                );
            }
        }
        report.block_maxima.push(BlockMax { block: k, value_log2: v.approx_log2() });
        prev = Some((k, v));
    }
    report.final_block_max_log2 = report.block_maxima.last().map(|b| b.value_log2);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FhcPairWitness {
    pub m: u64,
    pub n: u64,
    pub j: u32,
    pub value: LogMagnitude,
    pub value_log2: f64,
    /// log2(value) − log2(min(ε_r, ε_s)); nonpositive when the estimate holds.
    pub margin_log2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FhcConditionIIReport {
    pub r: u32,
    pub s: u32,
    pub horizon: u64,
    pub pairs_checked: u64,
    pub epsilon_bound_log2: f64,
    pub max_term: Option<FhcPairWitness>,
    pub violations: Vec<FhcViolation>,
    pub violations_truncated: bool,
}

/// Second (cross-interference) estimate: for every n in the r-th set,
/// m < n in the s-th set and 0 ≤ j ≤ r, the term
/// s^{α_{n−m+j}} v_{n−m+j} = 2^{α_0 − T·α_{N_k}} s^{α_{N_k}} (k the block of
/// n − m, T = n − m + j − N_k + 1) must stay within min(ε_r, ε_s),
/// ε_r = 2^{−r} r. Block membership of n − m (with max(r, s) clearance on
/// both sides) is checked as well.
///
/// The sweep covers every ordered pair, so the inner test is reduced to an
/// integer threshold on T precomputed per block; values and witnesses are
/// reconstructed exactly only where needed.
pub fn verify_fhc_condition_ii(
    space: &PowerSeriesSpace,
    sets: &FrequencySets,
    r: u32,
    s: u32,
    horizon: u64,
) -> Result<FhcConditionIIReport> {
    if horizon > sets.horizon {
        return Err(Error::precondition("horizon exceeds the generated sets"));
    }
    if space.horizon() < horizon + r as u64 {
        return Err(Error::precondition(format!(
            "space horizon {} too small: values read index up to {}",
            space.horizon(),
            horizon + r as u64
        )));
    }
    let a: Vec<u64> = sets.set(r)?.iter().copied().take_while(|&n| n <= horizon).collect();
    let b: Vec<u64> = sets.set(s)?.iter().copied().take_while(|&n| n <= horizon).collect();
    let clearance = r.max(s) as u64;
    let min_eps = eps_log2(r).min(eps_log2(s));
    let (ts, qs) = two_adic(s);
    let lqs = if qs > 1 { (qs as f64).log2() } else { 0.0 };
    let ls = (s as f64).log2();

    // Per block: the smallest admissible T (number of α-terms absorbed), so
    // the hot loop is one integer comparison per pair.
    let n_blocks = space.blocks.len();
    let mut t_min: Vec<u64> = Vec::with_capacity(n_blocks);
    for bk in &space.blocks {
        let alpha_f = bk.alpha.to_f64().unwrap_or(f64::INFINITY);
        let value = |t: u64| 1.0 + alpha_f * ls - t as f64 * alpha_f;
        let mut t = ((1.0 + alpha_f * ls - min_eps) / alpha_f).ceil().max(1.0) as u64;
        while t > 1 && value(t - 1) <= min_eps + 1e-9 {
            t -= 1;
        }
        while value(t) > min_eps + 1e-9 {
            t += 1;
        }
        t_min.push(t);
    }

    let mut report = FhcConditionIIReport {
        r,
        s,
        horizon,
        pairs_checked: 0,
        epsilon_bound_log2: min_eps,
        max_term: None,
        violations: Vec::new(),
        violations_truncated: false,
    };
    // Smallest realized T per block, which pins the largest realized term.
    let mut extremal: BTreeMap<usize, (u64, u64, u64)> = BTreeMap::new();
    for &n in &a {
        for &m in b.iter().take_while(|&&m| m < n) {
            let d = n - m;
            report.pairs_checked += 1;
            let k = space.block_index_of(d)?;
            let start = space.blocks[k].start;
            let ok_lo = d >= start + clearance;
            let ok_hi = match space.next_boundary(k) {
                Some(next) => d + clearance < next,
                None => true,
            };
            if !ok_lo || !ok_hi {
                push_violation(
                    &mut report.violations,
                    &mut report.violations_truncated,
                    FhcViolation::BlockMembership {
                        n,
                        m: Some(m),
                        j: 0,
                        detail: format!(
                            "difference {d} lacks {clearance} clearance inside block {k}"
                        ),
                    },
                );
            }
            let t0 = d - start + 1;
            if t0 < t_min[k] {
                let alpha = &space.blocks[k].alpha;
                let alpha_f = alpha.to_f64().unwrap_or(f64::INFINITY);
                for j in 0..=r {
                    let t = t0 + j as u64;
                    if t < t_min[k] {
                        let value_log2 = 1.0 + alpha_f * ls - t as f64 * alpha_f;
                        push_violation(
                            &mut report.violations,
                            &mut report.violations_truncated,
                            FhcViolation::BoundBreach {
                                n,
                                m: Some(m),
                                j,
                                value_log2,
                                bound_log2: min_eps,
                            },
                        );
                    }
                }
            }
            match extremal.get(&k) {
                Some(&(t, _, _)) if t <= t0 => {}
                _ => {
                    extremal.insert(k, (t0, m, n));
                }
            }
        }
    }
    for (&k, &(t0, m, n)) in &extremal {
        let alpha = &space.blocks[k].alpha;
        let alpha_f = alpha.to_f64().unwrap_or(f64::INFINITY);
        let value = LogMagnitude {
            exp2: BigInt::from(1) + alpha * BigInt::from(ts) - BigInt::from(t0) * alpha,
            rest: alpha_f * lqs,
        };
        let value_log2 = value.approx_log2();
        let better = report
            .max_term
            .as_ref()
            .map(|w| value_log2 > w.value_log2)
            .unwrap_or(true);
        if better {
            report.max_term = Some(FhcPairWitness {
                m,
                n,
                j: 0,
                value,
                value_log2,
                margin_log2: value_log2 - min_eps,
            });
        }
    }
    Ok(report)
}
