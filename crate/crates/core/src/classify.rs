//! Finite-evidence decisions of the asymptotic window-product conditions
//! and the resulting stability classification of a bilateral shift.
//!
//! A window statistic is (1/L)·log2 of a product of L consecutive weights;
//! the six conditions compare its limiting sup/inf over window positions
//! against 1 (0 in log scale). For structured models the limits are exact
//! tail means; one-sided certificates additionally follow from Fekete-style
//! sub/superadditivity of the window sup/inf sums. Unstructured models are
//! never extrapolated: they report Inconclusive with the evidence trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{log2_add_exp2, CompensatedSum, Log2Sum};
use crate::weights::{Orientation, WeightModel};

pub const DEFAULT_N_MAX: u32 = 64;
pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_K_MAX: u64 = 10_000;

/// Snap width around 0: an exact limit this close to 1 (log 0) fails the
/// strict inequalities.
const ZERO_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Pos,
    Neg,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Sup,
    Inf,
}

/// The six asymptotic conditions. Positive-side windows ascend from k ≥ 1;
/// negative-side windows descend leftward from −k, k ≥ 1; the Z variants
/// range over every window position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionId {
    /// lim_n sup_{k∈ℕ} (w_k⋯w_{k+n})^{1/n} < 1.
    #[serde(rename = "SSS1")]
    Sss1,
    /// lim_n inf_{k∈ℕ} (w_k⋯w_{k+n})^{1/n} > 1.
    #[serde(rename = "SSS2")]
    Sss2,
    /// lim_n inf_{k∈ℕ} (w_{−k}⋯w_{−k−n})^{1/n} > 1.
    #[serde(rename = "SSS5")]
    Sss5,
    /// lim_n sup_{k∈ℕ} (w_{−k}⋯w_{−k−n})^{1/n} < 1.
    #[serde(rename = "SSS6")]
    Sss6,
    /// sup over k ∈ ℤ variant of the contraction condition.
    #[serde(rename = "A-SUP-Z")]
    ASupZ,
    /// inf over k ∈ ℤ variant of the expansion condition.
    #[serde(rename = "B-INF-Z")]
    BInfZ,
}

pub const ALL_CONDITIONS: [ConditionId; 6] = [
    ConditionId::Sss1,
    ConditionId::Sss2,
    ConditionId::Sss5,
    ConditionId::Sss6,
    ConditionId::ASupZ,
    ConditionId::BInfZ,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CondVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionDecision {
    pub condition: ConditionId,
    pub verdict: CondVerdict,
    /// (L, a_L/L) pairs in log2 units, L = 1..=n_max.
    pub trace: Vec<(u32, f64)>,
    /// Exact limiting value (log2), available for structured models.
    pub exact_limit: Option<f64>,
    /// Smallest L whose bound clears the margin in the certifying direction.
    pub certificate_l: Option<u32>,
    pub n_max: u32,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    A,
    B,
    C,
    #[serde(rename = "none")]
    None,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub conditions: Vec<ConditionDecision>,
    pub verdict: Verdict,
    pub hyperbolic: bool,
    pub generalized_hyperbolic: bool,
    pub sss: bool,
    pub shadowing: bool,
    pub lemma23_pattern: bool,
}

impl ClassificationReport {
    pub fn condition(&self, id: ConditionId) -> &ConditionDecision {
        self.conditions
            .iter()
            .find(|c| c.condition == id)
            .expect("all six conditions are always present")
    }
}

// ---------------------------------------------------------------------------
// Structure extraction: exact tail means and critical window positions.

fn period_log2_mean(values: &[f64]) -> f64 {
    let mut s = CompensatedSum::new();
    for &v in values {
        s.add(v.log2());
    }
    s.value() / values.len() as f64
}

/// Exact limit of window means over windows drifting to +∞.
fn pos_tail_mean(model: &WeightModel) -> Option<f64> {
    match model {
        WeightModel::Constant { value } => Some(value.log2()),
        WeightModel::Periodic { values, .. } => Some(period_log2_mean(values)),
        WeightModel::Split { pos, .. } => pos_tail_mean(pos),
        _ => None,
    }
}

/// Exact limit of window means over windows drifting to −∞.
fn neg_tail_mean(model: &WeightModel) -> Option<f64> {
    match model {
        WeightModel::Constant { value } => Some(value.log2()),
        WeightModel::Periodic { values, .. } => Some(period_log2_mean(values)),
        WeightModel::Split { neg, .. } => neg_tail_mean(neg),
        _ => None,
    }
}

fn simple_period(model: &WeightModel) -> Option<u64> {
    match model {
        WeightModel::Constant { .. } => Some(1),
        WeightModel::Periodic { values, .. } => Some(values.len() as u64),
        _ => None,
    }
}

struct StructureInfo {
    cut: i64,
    p_neg: i64,
    p_pos: i64,
}

/// Present when every window statistic is attained on a small critical set
/// of positions: one transition point with periodic behavior on each side.
fn structure(model: &WeightModel) -> Option<StructureInfo> {
    match model {
        WeightModel::Constant { .. } | WeightModel::Periodic { .. } => {
            let p = simple_period(model)? as i64;
            Some(StructureInfo { cut: 0, p_neg: p, p_pos: p })
        }
        WeightModel::Split { neg, pos, cut } => Some(StructureInfo {
            cut: *cut,
            p_neg: simple_period(neg)? as i64,
            p_pos: simple_period(pos)? as i64,
        }),
        _ => None,
    }
}

/// The position-reversed model n ↦ w_{−n}, structured inputs only.
fn reflect(model: &WeightModel) -> Option<WeightModel> {
    match model {
        WeightModel::Constant { .. } => Some(model.clone()),
        WeightModel::Periodic { values, .. } => {
            let p = values.len() as i64;
            let vals: Result<Vec<f64>> = (0..p).map(|i| model.weight_at(-i)).collect();
            WeightModel::periodic(vals.ok()?, 0).ok()
        }
        WeightModel::Split { neg, pos, cut } => {
            WeightModel::split(reflect(pos)?, reflect(neg)?, 1 - cut).ok()
        }
        _ => None,
    }
}

fn window_log2_sum(model: &WeightModel, k: i64, l: u32) -> Result<f64> {
    let mut s = CompensatedSum::new();
    for i in k..k + l as i64 {
        s.add(model.log2_weight_at(i)?);
    }
    Ok(s.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    /// Ascending windows from k ∈ ℕ.
    PosAsc,
    /// Descending windows from −k, k ∈ ℕ.
    NegDesc,
    /// Ascending windows anywhere on ℤ.
    AllZ,
}

/// Exact extremal window sum over the full (infinite) position family, by
/// enumerating a critical set that provably realizes every weight pattern:
/// periodic representatives on each side plus every transition-straddling
/// position.
fn exact_window_extremum(model: &WeightModel, l: u32, family: Family, ext: Extremum) -> Option<f64> {
    if family == Family::NegDesc {
        return exact_window_extremum(&reflect(model)?, l, Family::PosAsc, ext);
    }
    let info = structure(model)?;
    let li = l as i64;
    let (lo, hi) = match family {
        Family::PosAsc => (
            (info.cut - li - info.p_neg - 1).max(1),
            (info.cut.max(1)) + info.p_pos,
        ),
        Family::AllZ => (info.cut - li - info.p_neg - 1, info.cut + info.p_pos),
        Family::NegDesc => unreachable!(),
    };
    let mut best: Option<f64> = None;
    for k in lo..=hi {
        let s = window_log2_sum(model, k, l).ok()?;
        best = Some(match (best, ext) {
            (None, _) => s,
            (Some(b), Extremum::Sup) => b.max(s),
            (Some(b), Extremum::Inf) => b.min(s),
        });
    }
    best
}

/// Finite sweep over k = 1..k_max (per the side convention) of the
/// (1/L)·log2 window products, reduced by sup or inf.
pub fn window_statistic(
    model: &WeightModel,
    l: u32,
    side: Side,
    extremum: Extremum,
    k_max: u64,
) -> Result<f64> {
    if l < 1 {
        return Err(Error::precondition("window length must be >= 1"));
    }
    if k_max < 1 {
        return Err(Error::precondition("k_max must be >= 1"));
    }
    let li = l as i64;
    let unilateral = model.orientation() == Orientation::Unilateral;
    let (s_lo, s_hi) = match side {
        Side::Pos => {
            let mut hi = k_max as i64;
            if unilateral {
                if let WeightModel::FhcBlock { space } = model {
                    let cap = space.horizon() as i64 - li + 1;
                    if cap < 1 {
                        return Err(Error::domain(
                            "window length exceeds the model horizon",
                        ));
                    }
                    hi = hi.min(cap);
                }
            }
            (1, hi)
        }
        Side::Neg | Side::All if unilateral => {
            return Err(Error::precondition(
                "negative-side windows are undefined for unilateral models",
            ));
        }
        // Descending windows w_{−k}⋯w_{−k−L+1} are ascending windows that
        // start at −k−L+1.
        Side::Neg => (-(k_max as i64) - li + 1, -li),
        Side::All => (-(k_max as i64), k_max as i64),
    };
    // Prefix sums over the touched index range make the sweep O(range).
    let n = (s_hi - s_lo) as usize + l as usize;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    for i in 0..n {
        let w = model.log2_weight_at(s_lo + i as i64)?;
        prefix.push(prefix[i] + w);
    }
    let mut best = match extremum {
        Extremum::Sup => f64::NEG_INFINITY,
        Extremum::Inf => f64::INFINITY,
    };
    for k in 0..=(s_hi - s_lo) as usize {
        let s = prefix[k + l as usize] - prefix[k];
        best = match extremum {
            Extremum::Sup => best.max(s),
            Extremum::Inf => best.min(s),
        };
    }
    Ok(best / l as f64)
}

fn condition_family(cond: ConditionId) -> (Family, Extremum, bool) {
    // (family, extremum, wants_contraction): contraction conditions compare
    // the sup limit against < 1, expansion conditions the inf against > 1.
    match cond {
        ConditionId::Sss1 => (Family::PosAsc, Extremum::Sup, true),
        ConditionId::Sss2 => (Family::PosAsc, Extremum::Inf, false),
        ConditionId::Sss5 => (Family::NegDesc, Extremum::Inf, false),
        ConditionId::Sss6 => (Family::NegDesc, Extremum::Sup, true),
        ConditionId::ASupZ => (Family::AllZ, Extremum::Sup, true),
        ConditionId::BInfZ => (Family::AllZ, Extremum::Inf, false),
    }
}

fn exact_limit_for(model: &WeightModel, cond: ConditionId) -> Option<f64> {
    let pos = pos_tail_mean(model);
    let neg = neg_tail_mean(model);
    match cond {
        // One-sided window families drift into the corresponding tail, so
        // sup and inf share the same limiting mean.
        ConditionId::Sss1 | ConditionId::Sss2 => pos,
        ConditionId::Sss5 | ConditionId::Sss6 => neg,
        ConditionId::ASupZ => Some(pos?.max(neg?)),
        ConditionId::BInfZ => Some(pos?.min(neg?)),
    }
}

fn sweep_side(cond: ConditionId) -> Side {
    match condition_family(cond).0 {
        Family::PosAsc => Side::Pos,
        Family::NegDesc => Side::Neg,
        Family::AllZ => Side::All,
    }
}

/// Decide one condition from finite evidence. Structured models are decided
/// exactly; unstructured ones return Inconclusive with the sampled trace.
pub fn decide_condition(
    model: &WeightModel,
    cond: ConditionId,
    n_max: u32,
    margin: f64,
) -> Result<ConditionDecision> {
    if !(margin > 0.0) {
        return Err(Error::precondition("margin must be > 0"));
    }
    if n_max < 1 {
        return Err(Error::precondition("n_max must be >= 1"));
    }
    let (family, ext, wants_contraction) = condition_family(cond);
    let structured = structure(model).is_some();
    let mut trace = Vec::with_capacity(n_max as usize);
    for l in 1..=n_max {
        let a_l = if structured {
            exact_window_extremum(model, l, family, ext)
                .ok_or_else(|| Error::domain("structured extremum unavailable"))?
        } else {
            window_statistic(model, l, sweep_side(cond), ext, DEFAULT_K_MAX)? * l as f64
        };
        trace.push((l, a_l / l as f64));
    }
    let certificate_l = trace
        .iter()
        .find(|(_, bound)| {
            if wants_contraction {
                *bound <= -margin
            } else {
                *bound >= margin
            }
        })
        .map(|(l, _)| *l);
    let exact_limit = if structured { exact_limit_for(model, cond) } else { None };
    let verdict = match exact_limit {
        Some(limit) => {
            let snapped = if limit.abs() <= ZERO_SNAP { 0.0 } else { limit };
            let holds = if wants_contraction { snapped < 0.0 } else { snapped > 0.0 };
            if holds {
                CondVerdict::Holds
            } else {
                CondVerdict::Fails
            }
        }
        None => CondVerdict::Inconclusive,
    };
    Ok(ConditionDecision {
        condition: cond,
        verdict,
        trace,
        exact_limit,
        certificate_l,
        n_max,
        margin,
    })
}

/// Decide all six conditions and combine them: contraction on both sides
/// gives A, expansion on both sides gives B, expansion right of a
/// contraction gives C (the generalized splitting); the reverse pattern is
/// the known non-stable one and yields None with `lemma23_pattern` set.
pub fn classify_sss(model: &WeightModel, n_max: u32, margin: f64) -> Result<ClassificationReport> {
    if model.orientation() != Orientation::Bilateral {
        return Err(Error::precondition(
            "classification applies to bilateral models",
        ));
    }
    let conditions: Vec<ConditionDecision> = ALL_CONDITIONS
        .iter()
        .map(|&c| decide_condition(model, c, n_max, margin))
        .collect::<Result<_>>()?;
    let holds = |id: ConditionId| {
        conditions
            .iter()
            .find(|c| c.condition == id)
            .map(|c| c.verdict == CondVerdict::Holds)
            .unwrap_or(false)
    };
    let inconclusive = conditions
        .iter()
        .filter(|c| {
            matches!(
                c.condition,
                ConditionId::Sss1 | ConditionId::Sss2 | ConditionId::Sss5 | ConditionId::Sss6
            )
        })
        .any(|c| c.verdict == CondVerdict::Inconclusive);
    let mut lemma23_pattern = false;
    let verdict = if holds(ConditionId::Sss1) && holds(ConditionId::Sss6) {
        Verdict::A
    } else if holds(ConditionId::Sss2) && holds(ConditionId::Sss5) {
        Verdict::B
    } else if holds(ConditionId::Sss2) && holds(ConditionId::Sss6) {
        Verdict::C
    } else if holds(ConditionId::Sss1) && holds(ConditionId::Sss5) {
        lemma23_pattern = true;
        Verdict::None
    } else if inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::None
    };
    let hyperbolic = matches!(verdict, Verdict::A | Verdict::B);
    let generalized_hyperbolic = matches!(verdict, Verdict::C);
    let sss = hyperbolic || generalized_hyperbolic;
    Ok(ClassificationReport {
        conditions,
        verdict,
        hyperbolic,
        generalized_hyperbolic,
        sss,
        shadowing: sss,
        lemma23_pattern,
    })
}

// ---------------------------------------------------------------------------
// Equivalent-quantity sweeps for positive sequences x_k = w_k, k ≥ 1.

#[derive(Debug, Clone, Serialize)]
pub struct SumEvidence {
    /// sup over the scanned parameter of the partial sums, log2 and linear
    /// (the linear value saturates to ∞ for fast-growing sequences).
    pub sup_log2: f64,
    pub sup_value: f64,
    /// Parameter (t or m) achieving the sup.
    pub arg: u64,
    /// The same quantity at half the horizon, for the growth indicator.
    pub half_horizon_log2: f64,
    /// True when the tail half contributes more than 0.1% — the sum is
    /// still visibly growing at the horizon.
    pub diverging: bool,
}

fn growth_flag(full_log2: f64, half_log2: f64) -> bool {
    if full_log2 == f64::NEG_INFINITY {
        return false;
    }
    // relative tail increment 1 − 2^(half − full)
    1.0 - (half_log2 - full_log2).exp2() > 1e-3
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma22Report {
    /// Evidence for the window-contraction condition on the sequence.
    pub fekete: ConditionDecision,
    /// (ii): sup over t ≤ t_max of Σ_{k=0}^{K} x_{1+t}⋯x_{k+t}, K = m_max.
    pub sum_forward: SumEvidence,
    /// (iii): sup over m ≤ m_max of Σ_{k=0}^{m−1} x_{m−k}⋯x_m.
    pub sum_backward: SumEvidence,
    /// The three finite-horizon indicators agree: condition certified ⟺
    /// both sums stopped growing. None when the condition is undecided.
    pub indicators_agree: Option<bool>,
    pub t_max: u32,
    pub m_max: u64,
}

/// The three equivalent boundedness quantities for the positive sequence
/// x_k = w_k (k ≥ 1): the window-contraction evidence, the forward
/// cumulative-product sums, and the backward ones. Sums are accumulated in
/// the log domain so fast growth cannot overflow.
pub fn lemma22_quantities(model: &WeightModel, t_max: u32, m_max: u64) -> Result<Lemma22Report> {
    if m_max < 2 {
        return Err(Error::precondition("m_max must be >= 2"));
    }
    let fekete = decide_condition(model, ConditionId::Sss1, DEFAULT_N_MAX, DEFAULT_MARGIN)?;

    // (ii): for each offset t, S(K) = Σ_{k=0}^{K} x_{1+t}⋯x_{k+t}.
    let mut fwd: Option<SumEvidence> = None;
    for t in 0..=t_max {
        let mut sum = Log2Sum::empty();
        let mut term = 0.0f64; // log2 of the running product, k = 0 term is 1
        let mut half = f64::NEG_INFINITY;
        sum.add_log2_term(0.0);
        for k in 1..=m_max {
            term += model.log2_weight_at((k + t as u64) as i64)?;
            sum.add_log2_term(term);
            if k == m_max / 2 {
                half = sum.log2();
            }
        }
        let cand = SumEvidence {
            sup_log2: sum.log2(),
            sup_value: sum.value(),
            arg: t as u64,
            half_horizon_log2: half,
            diverging: growth_flag(sum.log2(), half),
        };
        if fwd.as_ref().map(|b| cand.sup_log2 > b.sup_log2).unwrap_or(true) {
            fwd = Some(cand);
        }
    }
    let sum_forward = fwd.unwrap();

    // (iii): S(m) = Σ_{k=0}^{m−1} x_{m−k}⋯x_m obeys S(m+1) = x_{m+1}(1 + S(m)).
    // S(m) oscillates with any periodicity in the weights, so the growth
    // indicator compares running sups, not point values at two horizons.
    let mut s_log2 = model.log2_weight_at(1)?; // S(1) = x_1
    let mut best_m = (s_log2, 1u64);
    let mut half = s_log2;
    for m in 2..=m_max {
        s_log2 = model.log2_weight_at(m as i64)? + log2_add_exp2(0.0, s_log2);
        if s_log2 > best_m.0 {
            best_m = (s_log2, m);
        }
        if m == m_max / 2 {
            half = best_m.0;
        }
    }
    let sum_backward = SumEvidence {
        sup_log2: best_m.0,
        sup_value: best_m.0.exp2(),
        arg: best_m.1,
        half_horizon_log2: half,
        diverging: growth_flag(best_m.0, half),
    };

    let indicators_agree = match fekete.verdict {
        CondVerdict::Holds => Some(!sum_forward.diverging && !sum_backward.diverging),
        CondVerdict::Fails => Some(sum_forward.diverging && sum_backward.diverging),
        CondVerdict::Inconclusive => None,
    };
    Ok(Lemma22Report {
        fekete,
        sum_forward,
        sum_backward,
        indicators_agree,
        t_max,
        m_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma23Report {
    /// Contraction certificate on ascending positive-side windows.
    pub pos_contraction: ConditionDecision,
    /// Expansion certificate on descending negative-side windows.
    pub neg_expansion: ConditionDecision,
    /// Both certified: the contraction-left-of-expansion pattern that rules
    /// out strong structural stability.
    pub pattern: bool,
}

/// Detect the non-stable pattern: positive windows eventually contract while
/// negative windows eventually expand.
pub fn detect_lemma23(model: &WeightModel, n_max: u32, margin: f64) -> Result<Lemma23Report> {
    if model.orientation() != Orientation::Bilateral {
        return Err(Error::precondition("the pattern is defined for bilateral models"));
    }
    let pos_contraction = decide_condition(model, ConditionId::Sss1, n_max, margin)?;
    let neg_expansion = decide_condition(model, ConditionId::Sss5, n_max, margin)?;
    let pattern = pos_contraction.verdict == CondVerdict::Holds
        && neg_expansion.verdict == CondVerdict::Holds;
    Ok(Lemma23Report {
        pos_contraction,
        neg_expansion,
        pattern,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_c() -> WeightModel {
        WeightModel::split(
            WeightModel::constant(0.5).unwrap(),
            WeightModel::constant(2.0).unwrap(),
            1,
        )
        .unwrap()
    }

    fn split_lemma23() -> WeightModel {
        WeightModel::split(
            WeightModel::constant(2.0).unwrap(),
            WeightModel::constant(0.5).unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn window_statistic_oracles() {
        let c2 = WeightModel::constant(2.0).unwrap();
        assert_eq!(window_statistic(&c2, 2, Side::Pos, Extremum::Sup, 100).unwrap(), 1.0);

        let alt = WeightModel::periodic(vec![2.0, 0.5], 0).unwrap();
        assert_eq!(window_statistic(&alt, 2, Side::Pos, Extremum::Sup, 100).unwrap(), 0.0);

        assert_eq!(
            window_statistic(&split_c(), 8, Side::Neg, Extremum::Sup, 100).unwrap(),
            -1.0
        );
    }

    #[test]
    fn exact_extrema_match_long_sweeps() {
        let models = [
            WeightModel::periodic(vec![3.0, 1.0 / 3.0, 2.0], 1).unwrap(),
            split_c(),
            WeightModel::split(
                WeightModel::periodic(vec![2.0, 0.25], 0).unwrap(),
                WeightModel::constant(1.5).unwrap(),
                -3,
            )
            .unwrap(),
        ];
        for model in &models {
            for l in [1u32, 2, 3, 5, 8, 13] {
                for (family, side) in [
                    (Family::PosAsc, Side::Pos),
                    (Family::NegDesc, Side::Neg),
                    (Family::AllZ, Side::All),
                ] {
                    for ext in [Extremum::Sup, Extremum::Inf] {
                        let exact = exact_window_extremum(model, l, family, ext).unwrap() / l as f64;
                        let swept = window_statistic(model, l, side, ext, 2_000).unwrap();
                        assert!(
                            (exact - swept).abs() < 1e-9,
                            "L={l} {family:?} {ext:?}: exact {exact} vs sweep {swept}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn decide_condition_oracles() {
        let half = WeightModel::constant(0.5).unwrap();
        let d = decide_condition(&half, ConditionId::Sss1, 4, 0.5).unwrap();
        assert_eq!(d.verdict, CondVerdict::Holds);
        assert_eq!(d.certificate_l, Some(1));
        assert!(d.trace.iter().all(|&(_, b)| b == -1.0));

        let one = WeightModel::constant(1.0).unwrap();
        let d = decide_condition(&one, ConditionId::Sss1, 8, 0.05).unwrap();
        assert_eq!(d.verdict, CondVerdict::Fails);
        assert_eq!(d.exact_limit, Some(0.0));

        let d = decide_condition(&split_c(), ConditionId::Sss2, 8, 0.05).unwrap();
        assert_eq!(d.verdict, CondVerdict::Holds);
        assert_eq!(d.exact_limit, Some(1.0));
    }

    #[test]
    fn classification_oracles() {
        let r = classify_sss(&WeightModel::constant(0.5).unwrap(), 16, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::A);
        assert!(r.hyperbolic && r.sss && r.shadowing && !r.generalized_hyperbolic);
        assert_eq!(r.condition(ConditionId::ASupZ).verdict, CondVerdict::Holds);

        let r = classify_sss(&WeightModel::constant(2.0).unwrap(), 16, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::B);
        assert!(r.hyperbolic);

        let r = classify_sss(&split_c(), 16, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::C);
        assert!(r.generalized_hyperbolic && !r.hyperbolic && r.sss && r.shadowing);

        let r = classify_sss(&WeightModel::constant(1.0).unwrap(), 16, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::None);
        assert!(!r.sss && !r.shadowing && !r.lemma23_pattern);

        let r = classify_sss(&split_lemma23(), 16, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::None);
        assert!(r.lemma23_pattern && !r.sss);
    }

    #[test]
    fn conjugation_swaps_the_sides() {
        let models = [
            WeightModel::constant(0.5).unwrap(),
            WeightModel::constant(2.0).unwrap(),
            split_c(),
            WeightModel::constant(1.0).unwrap(),
            split_lemma23(),
        ];
        for m in &models {
            let r = classify_sss(m, 16, 0.05).unwrap();
            let rc = classify_sss(&m.conjugate().unwrap(), 16, 0.05).unwrap();
            let expected = match r.verdict {
                Verdict::A => Verdict::B,
                Verdict::B => Verdict::A,
                other => other,
            };
            assert_eq!(rc.verdict, expected);
        }
    }

    #[test]
    fn unstructured_models_stay_inconclusive() {
        let table = [(0i64, 0.5), (1, 0.5), (2, 0.5)].into_iter().collect();
        let m = WeightModel::explicit(table, 0.5, 0.5).unwrap();
        let d = decide_condition(&m, ConditionId::Sss1, 8, 0.05).unwrap();
        assert_eq!(d.verdict, CondVerdict::Inconclusive);
        assert!(d.exact_limit.is_none());
        let r = classify_sss(&m, 8, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn unilateral_models_are_rejected() {
        use crate::freq::FrequencySchedule;
        use crate::kothe::PowerSeriesSpace;
        use std::sync::Arc;
        let space = PowerSeriesSpace::new(FrequencySchedule::geometric(4).unwrap(), 100).unwrap();
        let m = WeightModel::fhc(Arc::new(space));
        assert!(classify_sss(&m, 8, 0.05).is_err());
        assert!(window_statistic(&m, 2, Side::Neg, Extremum::Sup, 10).is_err());
        // positive-side sweeps remain available within the horizon
        assert!(window_statistic(&m, 2, Side::Pos, Extremum::Sup, 10).is_ok());
    }

    #[test]
    fn lemma22_oracles() {
        let half = WeightModel::constant(0.5).unwrap();
        let r = lemma22_quantities(&half, 4, 60).unwrap();
        assert_eq!(r.fekete.verdict, CondVerdict::Holds);
        assert!((r.sum_forward.sup_value - (2.0 - 2f64.powi(-60))).abs() < 1e-9);
        assert!((r.sum_backward.sup_value - 1.0).abs() < 1e-9);
        assert!(!r.sum_forward.diverging && !r.sum_backward.diverging);
        assert_eq!(r.indicators_agree, Some(true));

        let one = WeightModel::constant(1.0).unwrap();
        let r = lemma22_quantities(&one, 2, 60).unwrap();
        assert!((r.sum_forward.sup_value - 61.0).abs() < 1e-6);
        assert!((r.sum_backward.sup_value - 60.0).abs() < 1e-6);
        assert!(r.sum_forward.diverging && r.sum_backward.diverging);
        assert_eq!(r.indicators_agree, Some(true));

        let two = WeightModel::constant(2.0).unwrap();
        let r = lemma22_quantities(&two, 2, 200).unwrap();
        assert!(r.sum_forward.diverging && r.sum_backward.diverging);
        assert!(r.sum_forward.sup_log2 > 190.0);
        assert_eq!(r.indicators_agree, Some(true));
    }

    #[test]
    fn lemma23_oracles() {
        let r = detect_lemma23(&split_lemma23(), 16, 0.05).unwrap();
        assert!(r.pattern);
        let r = detect_lemma23(&split_c(), 16, 0.05).unwrap();
        assert!(!r.pattern);
        let r = detect_lemma23(&WeightModel::constant(1.0).unwrap(), 16, 0.05).unwrap();
        assert!(!r.pattern);
    }
}
