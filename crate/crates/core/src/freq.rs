//! Block schedules (N_k) and the pairwise disjoint positive-lower-density
//! index sets (A_r), built by a greedy difference-filtered construction and
//! re-verified exhaustively.
//!
//! Property (a): n ∈ A_r with N_k ≤ n < N_{k+1} satisfies
//! N_k + k ≤ n < N_{k+1} − r.
//! Property (b): for n ∈ A_r, m ∈ A_s with n > m and N_k ≤ n−m < N_{k+1},
//! N_k + max(r,s) ≤ n−m < N_{k+1} − max(r,s).

use serde::Serialize;

use crate::error::{Error, Result};

/// Rule producing the strictly increasing block starts N_0 = 0 < N_1 < ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "value")]
pub enum BlockRule {
    /// N_0 = 0, N_k = base^k for k >= 1.
    Geometric { base: u64 },
    /// Explicit finite list of starts; the last block extends upward
    /// unbounded (queries needing the next start beyond it fail).
    Explicit { starts: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencySchedule {
    pub rule: BlockRule,
}

impl Default for FrequencySchedule {
    fn default() -> Self {
        FrequencySchedule {
            rule: BlockRule::Geometric { base: 4 },
        }
    }
}

impl FrequencySchedule {
    pub fn geometric(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::spec(format!(
                "geometric block rule requires base >= 2, got {base}"
            )));
        }
        Ok(FrequencySchedule {
            rule: BlockRule::Geometric { base },
        })
    }

    pub fn explicit(starts: Vec<u64>) -> Result<Self> {
        if starts.first() != Some(&0) {
            return Err(Error::spec("block starts must begin with N_0 = 0"));
        }
        if !starts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::spec("block starts must be strictly increasing"));
        }
        if starts.len() < 2 {
            return Err(Error::spec("need at least N_0 and N_1"));
        }
        Ok(FrequencySchedule {
            rule: BlockRule::Explicit { starts },
        })
    }

    /// N_k. Errors when the rule cannot produce block k (explicit list
    /// exhausted, or geometric growth past u64 range).
    pub fn block_start(&self, k: usize) -> Result<u64> {
        match &self.rule {
            BlockRule::Geometric { base } => {
                if k == 0 {
                    return Ok(0);
                }
                base.checked_pow(k as u32)
                    .ok_or_else(|| Error::domain(format!("block start {k} exceeds u64 range")))
            }
            BlockRule::Explicit { starts } => starts
                .get(k)
                .copied()
                .ok_or_else(|| Error::domain(format!("block {k} beyond the explicit schedule"))),
        }
    }

    /// All block starts ≤ horizon (always includes N_0 = 0).
    pub fn starts_up_to(&self, horizon: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        while let Ok(start) = self.block_start(k) {
            if start > horizon {
                break;
            }
            out.push(start);
            k += 1;
        }
        out
    }

    /// Largest k with N_k ≤ n.
    pub fn block_index(&self, n: u64) -> Result<usize> {
        match &self.rule {
            BlockRule::Geometric { base } => {
                let mut k = 0usize;
                let mut next = *base;
                while next <= n {
                    k += 1;
                    next = match next.checked_mul(*base) {
                        Some(v) => v,
                        None => return Ok(k),
                    };
                }
                Ok(k)
            }
            BlockRule::Explicit { starts } => {
                Ok(starts.partition_point(|&s| s <= n).saturating_sub(1))
            }
        }
    }

    /// In-block candidate stride for A_r.
    pub fn stride(r: u32) -> u64 {
        1u64 << (r + 1)
    }

    /// Set index the block k >= 1 is dedicated to: blocks cycle through
    /// r = 1..r_max in order, so K_r = {r, r + r_max, r + 2 r_max, ...}.
    pub fn dedicated_set(k: usize, r_max: u32) -> u32 {
        debug_assert!(k >= 1);
        ((k - 1) % r_max as usize) as u32 + 1
    }
}

/// The generated sets A_1..A_{r_max} restricted to [0, H], plus provenance.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencySets {
    pub schedule: FrequencySchedule,
    pub r_max: u32,
    pub horizon: u64,
    /// sets[r-1] = sorted elements of A_r ∩ [0, H].
    pub sets: Vec<Vec<u64>>,
}

impl FrequencySets {
    pub fn set(&self, r: u32) -> Result<&[u64]> {
        if r == 0 || r > self.r_max {
            return Err(Error::domain(format!("set index {r} outside 1..={}", self.r_max)));
        }
        Ok(&self.sets[(r - 1) as usize])
    }

    /// Assemble from raw element lists (testing, re-verification of external
    /// data). No properties are assumed; run `verify_properties` to check.
    pub fn from_raw(
        schedule: FrequencySchedule,
        r_max: u32,
        horizon: u64,
        sets: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if sets.len() != r_max as usize {
            return Err(Error::precondition(format!(
                "expected {r_max} element lists, got {}",
                sets.len()
            )));
        }
        Ok(FrequencySets {
            schedule,
            r_max,
            horizon,
            sets,
        })
    }
}

/// One failed property instance found by `verify_properties`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "property")]
pub enum PropertyViolation {
    /// n appears in both A_r and A_s.
    Overlap { n: u64, r: u32, s: u32 },
    /// Property (a) fails for n ∈ A_r in block k: requires lo ≤ n < hi.
    ClearanceA { r: u32, n: u64, k: usize, lo: u64, hi: u64 },
    /// Property (b) fails for the difference d = n − m in block k.
    ClearanceB {
        r: u32,
        s: u32,
        n: u64,
        m: u64,
        d: u64,
        k: usize,
        lo: u64,
        hi: u64,
    },
}

/// Greedy construction. Blocks k = 1, 2, ... (N_k ≤ H) are dedicated
/// round-robin to the sets; candidates inside block k are
/// n = N_k + k + i·g_r, kept below N_{k+1} − r, and a candidate is accepted
/// iff its difference to every previously accepted element (any set) lands in
/// the safe zone of the difference's own block. Acceptance depends only on
/// earlier accepted elements, which makes the output prefix-stable in H.
pub fn generate_sets(schedule: &FrequencySchedule, r_max: u32, horizon: u64) -> Result<FrequencySets> {
    if r_max < 1 {
        return Err(Error::precondition("r_max must be >= 1"));
    }
    let needed = schedule.block_start(r_max as usize + 1)?;
    if horizon < needed {
        return Err(Error::domain(format!(
            "horizon {horizon} too small: need at least N_(r_max+1) = {needed}"
        )));
    }

    // Block starts covering all differences ≤ horizon, plus the next one so
    // every in-range difference has a known enclosing block.
    let mut starts = schedule.starts_up_to(horizon);
    if let Ok(next) = schedule.block_start(starts.len()) {
        starts.push(next);
    }
    let block_of = |d: u64| -> usize { starts.partition_point(|&s| s <= d) - 1 };

    let mut sets: Vec<Vec<u64>> = vec![Vec::new(); r_max as usize];
    let mut accepted: Vec<(u64, u32)> = Vec::new();

    let n_blocks = starts.len() - 1;
    for k in 1..n_blocks {
        let r = FrequencySchedule::dedicated_set(k, r_max);
        let g = FrequencySchedule::stride(r);
        let lo = starts[k] + k as u64;
        let hi = (starts[k + 1] - r as u64).min(horizon + 1);
        let mut n = lo;
        while n < hi {
            let ok = accepted.iter().all(|&(m, s)| {
                let d = n - m;
                let kd = block_of(d);
                let clearance = r.max(s) as u64;
                let (dlo, dhi) = (starts[kd] + clearance, starts[kd + 1] - clearance);
                dlo <= d && d < dhi
            });
            if ok {
                sets[(r - 1) as usize].push(n);
                accepted.push((n, r));
            }
            n += g;
        }
    }

    Ok(FrequencySets {
        schedule: schedule.clone(),
        r_max,
        horizon,
        sets,
    })
}

/// Exhaustive re-verification of disjointness and properties (a), (b) over
/// the stored horizon. Violations are reported as data.
pub fn verify_properties(sets: &FrequencySets) -> Result<Vec<PropertyViolation>> {
    let mut violations = Vec::new();
    let schedule = &sets.schedule;
    let mut starts = schedule.starts_up_to(sets.horizon);
    if let Ok(next) = schedule.block_start(starts.len()) {
        starts.push(next);
    }
    let block_of = |d: u64| -> usize { starts.partition_point(|&s| s <= d) - 1 };

    // Disjointness + property (a).
    let mut all: Vec<(u64, u32)> = Vec::new();
    for (idx, elements) in sets.sets.iter().enumerate() {
        let r = idx as u32 + 1;
        for &n in elements {
            all.push((n, r));
            let k = block_of(n);
            if k + 1 >= starts.len() {
                return Err(Error::domain(format!(
                    "element {n} beyond the covered block range"
                )));
            }
            let lo = starts[k] + k as u64;
            let hi = starts[k + 1].saturating_sub(r as u64);
            if !(lo <= n && n < hi) {
                violations.push(PropertyViolation::ClearanceA { r, n, k, lo, hi });
            }
        }
    }
    all.sort_unstable();
    for w in all.windows(2) {
        if w[0].0 == w[1].0 {
            violations.push(PropertyViolation::Overlap {
                n: w[0].0,
                r: w[0].1.min(w[1].1),
                s: w[0].1.max(w[1].1),
            });
        }
    }

    // Property (b) over all ordered pairs.
    for j in 1..all.len() {
        let (n, r) = all[j];
        for &(m, s) in &all[..j] {
            if n == m {
                continue;
            }
            let d = n - m;
            let k = block_of(d);
            let clearance = r.max(s) as u64;
            let lo = starts[k] + clearance;
            let hi = starts[k + 1].saturating_sub(clearance);
            if !(lo <= d && d < hi) {
                violations.push(PropertyViolation::ClearanceB { r, s, n, m, d, k, lo, hi });
            }
        }
    }

    Ok(violations)
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityPoint {
    pub checkpoint: u64,
    pub count: u64,
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile {
    pub r: u32,
    pub points: Vec<DensityPoint>,
    pub min_density: f64,
}

/// card(A_r ∩ [0, N]) / N at each checkpoint N, plus the minimum over the
/// checkpoints.
pub fn lower_density_profile(
    sets: &FrequencySets,
    r: u32,
    checkpoints: &[u64],
) -> Result<DensityProfile> {
    let elements = sets.set(r)?;
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut min_density = f64::INFINITY;
    for &cp in checkpoints {
        if cp == 0 {
            return Err(Error::domain("checkpoint must be >= 1"));
        }
        if cp > sets.horizon {
            return Err(Error::domain(format!(
                "checkpoint {cp} beyond the stored horizon {}",
                sets.horizon
            )));
        }
        let count = elements.partition_point(|&n| n <= cp) as u64;
        let density = count as f64 / cp as f64;
        min_density = min_density.min(density);
        points.push(DensityPoint {
            checkpoint: cp,
            count,
            density,
        });
    }
    if points.is_empty() {
        min_density = 0.0;
    }
    Ok(DensityProfile { r, points, min_density })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_schedule() -> FrequencySchedule {
        FrequencySchedule::default()
    }

    #[test]
    fn block_starts_default_rule() {
        let s = default_schedule();
        assert_eq!(s.block_start(0).unwrap(), 0);
        assert_eq!(s.block_start(1).unwrap(), 4);
        assert_eq!(s.block_start(3).unwrap(), 64);
        assert_eq!(s.block_index(100).unwrap(), 3);
        assert_eq!(s.block_index(0).unwrap(), 0);
        assert_eq!(s.block_index(4).unwrap(), 1);
    }

    #[test]
    fn explicit_schedule_validation() {
        assert!(FrequencySchedule::explicit(vec![0, 3, 9]).is_ok());
        assert!(FrequencySchedule::explicit(vec![1, 3]).is_err());
        assert!(FrequencySchedule::explicit(vec![0, 3, 3]).is_err());
        assert!(FrequencySchedule::explicit(vec![0]).is_err());
    }

    #[test]
    fn generator_smallest_case() {
        let sets = generate_sets(&default_schedule(), 1, 300).unwrap();
        let a1 = sets.set(1).unwrap();
        assert!(!a1.is_empty());
        assert!(a1[0] >= 5, "property (a) forces n >= N_1 + 1 = 5, got {}", a1[0]);
        assert!(verify_properties(&sets).unwrap().is_empty());
    }

    #[test]
    fn generator_rejects_small_horizon() {
        assert!(generate_sets(&default_schedule(), 2, 10).is_err());
    }

    #[test]
    fn prefix_stability() {
        let small = generate_sets(&default_schedule(), 3, 2_000).unwrap();
        let large = generate_sets(&default_schedule(), 3, 8_000).unwrap();
        for r in 1..=3 {
            let a = small.set(r).unwrap();
            let b = large.set(r).unwrap();
            assert!(a.len() <= b.len());
            assert_eq!(a, &b[..a.len()], "prefix stability failed for r = {r}");
        }
    }

    #[test]
    fn planted_clearance_a_violation() {
        let schedule = default_schedule();
        // N_4 − 2 = 254 violates n < N_4 − r for r = 5.
        let sets = FrequencySets::from_raw(schedule, 5, 1024, vec![
            vec![],
            vec![],
            vec![],
            vec![],
            vec![254],
        ])
        .unwrap();
        let violations = verify_properties(&sets).unwrap();
        assert!(violations.iter().any(|v| matches!(
            v,
            PropertyViolation::ClearanceA { r: 5, n: 254, .. }
        )));
    }

    #[test]
    fn planted_difference_violation() {
        let schedule = default_schedule();
        // Difference exactly N_2 = 16 sits on a block boundary: requires
        // d >= N_2 + max(r,s), violated.
        let sets = FrequencySets::from_raw(schedule, 2, 1024, vec![
            vec![70, 86],
            vec![],
        ])
        .unwrap();
        let violations = verify_properties(&sets).unwrap();
        assert!(violations.iter().any(|v| matches!(
            v,
            PropertyViolation::ClearanceB { d: 16, .. }
        )));
    }

    #[test]
    fn planted_overlap_violation() {
        let schedule = default_schedule();
        let sets = FrequencySets::from_raw(schedule, 2, 1024, vec![vec![70], vec![70]]).unwrap();
        let violations = verify_properties(&sets).unwrap();
        assert!(violations
            .iter()
            .any(|v| matches!(v, PropertyViolation::Overlap { n: 70, r: 1, s: 2 })));
    }

    #[test]
    fn density_profile_synthetic_full_set() {
        let schedule = default_schedule();
        let all: Vec<u64> = (1..=1000).collect();
        let sets = FrequencySets::from_raw(schedule, 1, 1000, vec![all]).unwrap();
        let profile = lower_density_profile(&sets, 1, &[10, 100, 1000]).unwrap();
        assert!(profile.points.iter().all(|p| p.density == 1.0));
        assert_eq!(profile.min_density, 1.0);
    }

    #[test]
    fn density_profile_empty_set() {
        let schedule = default_schedule();
        let sets = FrequencySets::from_raw(schedule, 1, 1000, vec![vec![]]).unwrap();
        let profile = lower_density_profile(&sets, 1, &[100]).unwrap();
        assert_eq!(profile.min_density, 0.0);
    }

    #[test]
    fn dedicated_blocks_cycle_all_sets() {
        assert_eq!(FrequencySchedule::dedicated_set(1, 6), 1);
        assert_eq!(FrequencySchedule::dedicated_set(4, 6), 4);
        assert_eq!(FrequencySchedule::dedicated_set(6, 6), 6);
        assert_eq!(FrequencySchedule::dedicated_set(7, 6), 1);
    }
}
