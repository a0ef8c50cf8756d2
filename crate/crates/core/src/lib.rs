//! Computational models of weighted backward shifts on sequence spaces:
//! stability classification with subadditivity certificates, explicit
//! Lipschitz perturbations with disjoint supports, orbit-divergence
//! witnesses, frequency index sets with block clearance, a power-series
//! space with unbounded induced weights, and finite-window shadowing with
//! certified constants.

pub mod classify;
pub mod error;
pub mod freq;
pub mod kothe;
pub mod numeric;
pub mod perturbation;
pub mod shadowing;
pub mod vector;
pub mod weights;

pub use classify::{
    classify_sss, decide_condition, detect_lemma23, lemma22_quantities, window_statistic,
    ClassificationReport, CondVerdict, ConditionDecision, ConditionId, Extremum, Lemma22Report,
    Lemma23Report, Side, SumEvidence, Verdict, DEFAULT_K_MAX, DEFAULT_MARGIN, DEFAULT_N_MAX,
};
pub use error::{Error, Result};
pub use perturbation::{
    build_perturbation, build_perturbation_with_kappa, bump, contradiction_bound, evaluate_alpha,
    find_divergence_witness, perturbed_orbit, verify_perturbation, ContradictionBound,
    PerturbationData, PerturbationVerification, PerturbationViolation,
};
pub use shadowing::{
    best_window_shadow, make_pseudotrajectory, pseudotrajectory_from_defects, shadow,
    shadow_certificate, shadow_error, shadow_with_verdict, BestShadowReport, DefectStyle,
    Pseudotrajectory, ShadowCertificate, ShadowOutcome, Splitting,
};
pub use freq::{
    generate_sets, lower_density_profile, verify_properties, BlockRule, DensityPoint,
    DensityProfile, FrequencySchedule, FrequencySets, PropertyViolation,
};
pub use kothe::{
    build_alpha, build_fhc_weights, chaos_ratio, continuity_check, continuity_check_with,
    eps_log2, seminorm, supports_chaotic_verdict, v_value, verify_fhc_condition_i,
    verify_fhc_condition_ii, AlphaSource, ChaosEvidence,
    ChaosVerdict, ContinuityReport, ExactRatio, FhcConditionIIReport, FhcConditionIReport,
    FhcViolation, LogMagnitude, PowerSeriesSpace,
};
pub use vector::{FiniteVector, NormKind};
pub use weights::{apply_shift, log_product, Direction, LogProduct, Orientation, WeightModel};
