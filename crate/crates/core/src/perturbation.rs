//! Construction and verification of the compactly supported Lipschitz
//! perturbation that pins a finite orbit segment of a weighted shift, plus
//! the finite sums that witness why no such construction can stay bounded
//! on an expanding-by-summation sequence.
//!
//! The perturbation α is a sum of m tent bumps. Bump k is centered at
//! c[k] = κ·a_k·e_{2m+t−k} + y[k] and feeds the coordinate m−1−k+t, where
//! a_k is the descending weight product ending at 2m+t and y[k] collects the
//! bumps already injected along the orbit. Scaling the spikes by
//! κ = 4 / (min pairwise distance of the bare spikes) keeps the unit balls
//! around distinct centers separated by more than 2, which is what makes α
//! both well defined (one bump active at a time) and δ-Lipschitz.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{log2_add_exp2, Log2Sum};
use crate::vector::{FiniteVector, NormKind};
use crate::weights::{apply_shift, log_product, Direction, LogProduct, Orientation, WeightModel};

/// The unit tent: 1 at 0, affine down to 0 at |s| = 1, zero beyond.
pub fn bump(s: f64) -> f64 {
    (1.0 - s.abs()).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationData {
    pub delta: f64,
    pub m: u64,
    pub t: u64,
    pub kappa: f64,
    /// a_k = w_{2m+t}⋯w_{2m+t−k+1} as log-domain window products; a_0 = 1.
    pub a: Vec<LogProduct>,
    /// y[j]: the orbit's accumulated bump contributions, y[0] = 0.
    pub y: Vec<FiniteVector>,
    /// c[k] = κ·a_k·e_{2m+t−k} + y[k].
    pub centers: Vec<FiniteVector>,
    /// Starting point u = κ·e_{2m+t}.
    pub u: FiniteVector,
    pub norm: NormKind,
}

fn bare_spike_index(m: u64, t: u64, k: u64) -> i64 {
    (2 * m + t - k) as i64
}

fn add_spike(v: &mut FiniteVector, n: i64, value: f64) {
    let cur = v.get(n);
    v.set(n, cur + value);
}

fn fed_coordinate(m: u64, t: u64, k: u64) -> i64 {
    (m - 1 - k + t) as i64
}

/// Minimal pairwise distance of the unscaled spikes a_j·e_{i_j}; κ is 4 over
/// this. With a single bump there is no pair and κ defaults to 4.
fn minimal_kappa(a_lin: &[f64], m: u64, t: u64, norm: NormKind) -> f64 {
    if a_lin.len() < 2 {
        return 4.0;
    }
    let mut min_d = f64::INFINITY;
    for j in 0..a_lin.len() {
        for k in j + 1..a_lin.len() {
            let d = FiniteVector::from_pairs([
                (bare_spike_index(m, t, j as u64), a_lin[j]),
                (bare_spike_index(m, t, k as u64), -a_lin[k]),
            ])
            .norm(norm);
            min_d = min_d.min(d);
        }
    }
    4.0 / min_d
}

fn build_with_kappa(
    model: &WeightModel,
    delta: f64,
    m: u64,
    t: u64,
    norm: NormKind,
    kappa: Option<f64>,
) -> Result<PerturbationData> {
    if model.orientation() != Orientation::Bilateral {
        return Err(Error::precondition("the construction needs a bilateral model"));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::precondition("delta must be finite and >= 0"));
    }
    if m < 1 {
        return Err(Error::precondition("m must be >= 1"));
    }
    let mut a = Vec::with_capacity(m as usize);
    let mut a_lin = Vec::with_capacity(m as usize);
    for k in 0..m {
        // ascending window of k factors ending at 2m+t
        let lp = log_product(model, (2 * m + t - k + 1) as i64, k)?;
        a_lin.push(lp.log2.exp2());
        a.push(lp);
    }
    let kappa = match kappa {
        Some(k) if k > 0.0 && k.is_finite() => k,
        Some(_) => return Err(Error::precondition("kappa override must be positive")),
        None => minimal_kappa(&a_lin, m, t, norm),
    };

    let mut y: Vec<FiniteVector> = Vec::with_capacity(m as usize);
    let mut centers: Vec<FiniteVector> = Vec::with_capacity(m as usize);
    y.push(FiniteVector::zero());
    for j in 0..m {
        let mut c = y[j as usize].clone();
        add_spike(&mut c, bare_spike_index(m, t, j), kappa * a_lin[j as usize]);
        centers.push(c);
        if j + 1 < m {
            // Along the orbit, bump j contributes exactly δ at its fed
            // coordinate and the shift carries the running sum forward.
            let mut next = apply_shift(model, &y[j as usize], Direction::Forward)?;
            add_spike(&mut next, fed_coordinate(m, t, j), delta);
            y.push(next);
        }
    }
    let u = FiniteVector::single(bare_spike_index(m, t, 0), kappa);
    Ok(PerturbationData {
        delta,
        m,
        t,
        kappa,
        a,
        y,
        centers,
        u,
        norm,
    })
}

/// Build the m-bump perturbation for the given shift, offset t, and size δ.
pub fn build_perturbation(
    model: &WeightModel,
    delta: f64,
    m: u64,
    t: u64,
    norm: NormKind,
) -> Result<PerturbationData> {
    build_with_kappa(model, delta, m, t, norm, None)
}

/// Same construction with a caller-chosen κ. Shrinking κ below the minimal
/// safe value collapses the ball separation; the verifier exists to catch
/// exactly that, so this entry point is how tests and the CLI plant a
/// violation on purpose.
pub fn build_perturbation_with_kappa(
    model: &WeightModel,
    delta: f64,
    m: u64,
    t: u64,
    norm: NormKind,
    kappa: f64,
) -> Result<PerturbationData> {
    build_with_kappa(model, delta, m, t, norm, Some(kappa))
}

/// Evaluate α at x: each bump contributes δ·ρ(‖x − c[k]‖) at coordinate
/// m−1−k+t. Ball separation means at most one term is active for points the
/// dynamics ever visits.
pub fn evaluate_alpha(pert: &PerturbationData, x: &FiniteVector) -> FiniteVector {
    let mut out = FiniteVector::zero();
    for k in 0..pert.m {
        let rho = bump(x.distance(&pert.centers[k as usize], pert.norm));
        if rho > 0.0 {
            add_spike(&mut out, fed_coordinate(pert.m, pert.t, k), pert.delta * rho);
        }
    }
    out
}

/// Orbit of u under the perturbed map x ↦ B_w x + α(x), recorded at steps
/// 0..=steps. Beyond m steps the construction makes no promises, so that is
/// the cap.
pub fn perturbed_orbit(
    pert: &PerturbationData,
    model: &WeightModel,
    steps: u64,
) -> Result<Vec<FiniteVector>> {
    if steps > pert.m {
        return Err(Error::domain(format!(
            "orbit is pinned for at most m = {} steps, got {steps}",
            pert.m
        )));
    }
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(pert.u.clone());
    for _ in 0..steps {
        let z = out.last().unwrap();
        let mut next = apply_shift(model, z, Direction::Forward)?;
        let alpha = evaluate_alpha(pert, z);
        next.add_assign_scaled(&alpha, 1.0);
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationViolation {
    /// ‖α(x)‖ exceeded δ.
    SupBound { norm: f64, x: FiniteVector },
    /// ‖α(x) − α(y)‖ > δ‖x − y‖ beyond tolerance.
    Lipschitz { ratio: f64, x: FiniteVector, y: FiniteVector },
    /// Orbit step j strayed from its predicted center.
    OrbitMismatch { j: u64, rel_err: f64 },
    /// α failed to deliver δ at the scheduled coordinate on the orbit.
    HitMiss { k: u64, value: f64 },
    /// Two bump balls are not strictly separated.
    BallOverlap { j: u64, k: u64, distance: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationVerification {
    pub samples: u64,
    pub seed: u64,
    pub min_center_distance: f64,
    pub max_alpha_norm: f64,
    pub max_lipschitz_ratio: f64,
    pub orbit_max_rel_err: f64,
    pub violations: Vec<PerturbationViolation>,
}

impl PerturbationVerification {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn random_coord(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.random_range(lo..=hi)
}

/// A random vector of a few spikes with norm ≤ scale.
fn random_vector(
    rng: &mut ChaCha8Rng,
    lo: i64,
    hi: i64,
    scale: f64,
    norm: NormKind,
) -> FiniteVector {
    let spikes = rng.random_range(1..=3usize);
    let mut v = FiniteVector::zero();
    for _ in 0..spikes {
        let value = rng.random_range(-1.0..1.0f64);
        add_spike(&mut v, random_coord(rng, lo, hi), value);
    }
    let n = v.norm(norm);
    if n > 0.0 {
        v = v.scale(scale * rng.random::<f64>() / n);
    }
    v
}

/// Randomized audit of the construction's four contracts: the sup bound
/// ‖α‖ ≤ δ, the Lipschitz bound with constant δ, the exact δ-feeds along
/// the orbit (which also pins the orbit to the centers), and strict
/// pairwise ball separation.
pub fn verify_perturbation(
    pert: &PerturbationData,
    model: &WeightModel,
    samples: u64,
    seed: u64,
) -> Result<PerturbationVerification> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let m = pert.m;
    let norm = pert.norm;
    let lo = pert.t as i64 - 3;
    let hi = (2 * m + pert.t) as i64 + 3;
    let sup_tol = pert.delta * 1e-12 + 1e-15;
    let lip_tol = 1e-6;

    // Strict ball separation first: everything else leans on it.
    let mut min_center_distance = f64::INFINITY;
    for j in 0..m as usize {
        for k in j + 1..m as usize {
            let d = pert.centers[j].distance(&pert.centers[k], norm);
            min_center_distance = min_center_distance.min(d);
            if d <= 2.0 {
                violations.push(PerturbationViolation::BallOverlap {
                    j: j as u64,
                    k: k as u64,
                    distance: d,
                });
            }
        }
    }

    // Sample points stratified between ball neighborhoods and open space.
    let mut points = Vec::with_capacity(samples as usize + m as usize);
    for k in 0..m as usize {
        points.push(pert.centers[k].clone());
    }
    for i in 0..samples {
        let x = if i % 2 == 0 {
            let c = &pert.centers[(i as usize / 2) % m as usize];
            let mut x = c.clone();
            let r = random_vector(&mut rng, lo, hi, 1.5, norm);
            x.add_assign_scaled(&r, 1.0);
            x
        } else {
            random_vector(&mut rng, lo, hi, 2.5 * pert.kappa, norm)
        };
        points.push(x);
    }

    let mut max_alpha_norm = 0.0f64;
    for x in &points {
        let n = evaluate_alpha(pert, x).norm(norm);
        max_alpha_norm = max_alpha_norm.max(n);
        if n > pert.delta + sup_tol {
            violations.push(PerturbationViolation::SupBound { norm: n, x: x.clone() });
        }
    }

    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let i = rng.random_range(0..points.len());
        let j = rng.random_range(0..points.len());
        let d = points[i].distance(&points[j], norm);
        if d < 1e-12 {
            continue;
        }
        let da = evaluate_alpha(pert, &points[i])
            .sub(&evaluate_alpha(pert, &points[j]))
            .norm(norm);
        let ratio = da / d;
        max_ratio = max_ratio.max(ratio);
        if ratio > pert.delta * (1.0 + lip_tol) + 1e-15 {
            violations.push(PerturbationViolation::Lipschitz {
                ratio,
                x: points[i].clone(),
                y: points[j].clone(),
            });
        }
    }

    // Orbit contract: step j sits on center j, and α pays δ at coordinate
    // k+t when the orbit has m−k−1 steps behind it.
    let orbit = perturbed_orbit(pert, model, m - 1)?;
    let mut orbit_max_rel_err = 0.0f64;
    for j in 0..m {
        let c = &pert.centers[j as usize];
        let scale = c.norm(norm).max(1.0);
        let rel = orbit[j as usize].distance(c, norm) / scale;
        orbit_max_rel_err = orbit_max_rel_err.max(rel);
        if rel > 1e-9 {
            violations.push(PerturbationViolation::OrbitMismatch { j, rel_err: rel });
        }
    }
    for k in 0..m {
        let at = evaluate_alpha(pert, &orbit[(m - k - 1) as usize]).get((k + pert.t) as i64);
        if (at - pert.delta).abs() > pert.delta.abs().max(1.0) * 1e-9 {
            violations.push(PerturbationViolation::HitMiss { k, value: at });
        }
    }

    Ok(PerturbationVerification {
        samples,
        seed,
        min_center_distance: if m > 1 { min_center_distance } else { f64::INFINITY },
        max_alpha_norm,
        max_lipschitz_ratio: max_ratio,
        orbit_max_rel_err,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Witnesses that bounded perturbations cannot pin diverging-sum dynamics.

/// Smallest m ≤ m_max with Σ_{k=0}^{m−1} 1/(w_{k+1+t}⋯w_{m+t}) ≥ (1+δ)/δ².
/// The running sum obeys S(m+1) = (1 + S(m))/w_{m+1+t} and is tracked in
/// log2, so slow growth over many steps cannot lose precision to overflow.
pub fn find_divergence_witness(
    model: &WeightModel,
    delta: f64,
    t: u64,
    m_max: u64,
) -> Result<Option<u64>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::precondition("delta must be finite and > 0"));
    }
    let threshold_log2 = ((1.0 + delta) / (delta * delta)).log2();
    // Comparison slack: the threshold is crossed when the sum reaches it up
    // to accumulated rounding, keeping integer-valued crossings exact.
    let slack = 1e-9;
    let mut s_log2 = -model.log2_weight_at((1 + t) as i64)?; // S(1)
    for m in 1..=m_max {
        if s_log2 >= threshold_log2 - slack {
            return Ok(Some(m));
        }
        s_log2 = log2_add_exp2(0.0, s_log2) - model.log2_weight_at((m + 1 + t) as i64)?;
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContradictionBound {
    pub sum: f64,
    pub threshold: f64,
    pub violated: bool,
    pub m: u64,
    pub t: u64,
}

/// The partial sum Σ_{k=0}^{m−1} w_{1+t}⋯w_{k+t} (empty product 1 at k = 0)
/// against the cap 1 + 1/δ that any δ-pinned orbit forces on it. A sum over
/// the cap certifies that no such perturbation exists for this (δ, t, m).
pub fn contradiction_bound(
    model: &WeightModel,
    delta: f64,
    t: u64,
    m: u64,
) -> Result<ContradictionBound> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::precondition("delta must be finite and > 0"));
    }
    if m < 1 {
        return Err(Error::precondition("m must be >= 1"));
    }
    let mut sum = Log2Sum::empty();
    let mut term = 0.0f64;
    sum.add_log2_term(0.0);
    for k in 1..m {
        term += model.log2_weight_at((k + t) as i64)?;
        sum.add_log2_term(term);
    }
    let threshold = 1.0 + 1.0 / delta;
    let value = sum.value();
    Ok(ContradictionBound {
        sum: value,
        threshold,
        violated: value > threshold,
        m,
        t,
    })
}
