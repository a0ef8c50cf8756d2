//! Command-line driver for the weighted-shift dynamics toolbox.
//!
//! Every subcommand prints one JSON report to stdout (and to `--json PATH`
//! when given): an envelope with the echoed configuration, a results
//! payload, and a flat list of invariant violations. The process exits 0
//! when the violation list is empty, 1 when it is not, and 2 on invalid
//! input or a failed precondition. `--csv PATH` writes the command's main
//! numeric series as a flat table for plotting.

mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use shiftlab_core::{
    best_window_shadow, build_perturbation, build_perturbation_with_kappa, chaos_ratio,
    classify_sss, continuity_check, contradiction_bound, find_divergence_witness, generate_sets,
    lemma22_quantities, lower_density_profile, make_pseudotrajectory, shadow_with_verdict,
    supports_chaotic_verdict, verify_fhc_condition_i, verify_fhc_condition_ii, verify_perturbation,
    verify_properties, AlphaSource, ConditionId, DefectStyle, FiniteVector, PowerSeriesSpace,
    WeightModel, DEFAULT_MARGIN, DEFAULT_N_MAX,
};

use report::{num, to_value, CsvTrace, RunReport};

#[derive(Parser)]
#[command(
    name = "shiftlab",
    version,
    about = "Weighted-shift dynamics toolbox: window-product classification, \
             Lipschitz perturbations, frequency sets, power-series spaces, shadowing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write the command's numeric trace as a CSV table.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Seed for every randomized step; equal seeds give identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress stdout; reports still go to --json/--csv.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the six window-product conditions and classify the shift.
    Classify(ClassifyArgs),
    /// Build an orbit-pinning Lipschitz perturbation and audit its contracts.
    Perturb(PerturbArgs),
    /// Generate the disjoint positive-density index sets and verify their
    /// spacing properties.
    Freqsets(FreqsetsArgs),
    /// Diagnostics for the power-series space and its induced weights.
    Kothe(KotheArgs),
    /// Generate a pseudotrajectory and correct it to a true orbit.
    Shadow(ShadowArgs),
    /// The equivalent boundedness quantities for one-sided weight sums.
    Lemma22(Lemma22Args),
}

/// Weight model grammar shared by all `--weights` flags; see `spec.rs`.
const WEIGHTS_HELP: &str = "Weight model, e.g. constant:0.5, periodic:2,0.5@-1, \
    split:neg=constant:2;pos=constant:0.5;cut=0, explicit:FILE;negfill=1;posfill=1, \
    fhc:blocks=geometric:4;horizon=100000";

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, help = WEIGHTS_HELP)]
    weights: String,
    /// Largest window length scanned for certificates.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: u32,
    /// Decision margin on the per-length window means (log2 units).
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long, help = WEIGHTS_HELP)]
    weights: String,
    /// Perturbation size and hitting level.
    #[arg(long)]
    delta: f64,
    /// Number of pinned steps.
    #[arg(long)]
    m: u64,
    /// Index offset of the whole construction.
    #[arg(long, default_value_t = 0)]
    t: u64,
    /// Norm used by the bump profiles: sup or lp:<p>.
    #[arg(long, default_value = "sup")]
    norm: String,
    /// Random points per verification contract.
    #[arg(long, default_value_t = 2_000)]
    samples: u64,
    /// Replace the computed spike scale (diagnostic: values below the safe
    /// minimum collapse the ball separation, which the verifier reports).
    #[arg(long, hide = true)]
    kappa_override: Option<f64>,
}

#[derive(Args)]
struct FreqsetsArgs {
    /// Block schedule: geometric:<base> or explicit:<n1,n2,...>.
    #[arg(long)]
    blocks: String,
    /// Number of sets to generate.
    #[arg(long, default_value_t = 4)]
    r_max: u32,
    /// Largest index included in the sets.
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,
    /// Comma-separated density checkpoints (default: powers of four).
    #[arg(long)]
    checkpoints: Option<String>,
}

#[derive(Args)]
struct KotheArgs {
    /// Block schedule: geometric:<base> or explicit:<n1,n2,...>.
    #[arg(long)]
    blocks: String,
    #[command(subcommand)]
    action: KotheAction,
}

#[derive(Subcommand)]
enum KotheAction {
    /// Prefix-sum-to-exponent ratios: bounded ratios along a subsequence
    /// support the chaotic regime, divergence rules it out.
    Chaos {
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
    },
    /// Sweep the seminorm-continuity margin of the induced weights.
    Continuity {
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        /// Largest seminorm parameter checked (each p against 2p).
        #[arg(long, default_value_t = 16)]
        p_max: u32,
    },
    /// Check the two frequency-set decay estimates on the induced weights.
    Fhc {
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        /// Which frequency set drives the single-set decay estimate.
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Seminorm parameter of the single-set estimate.
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// Also check the cross-set estimate against this second set.
        #[arg(long)]
        s: Option<u32>,
    },
}

#[derive(Args)]
struct ShadowArgs {
    #[arg(long, help = WEIGHTS_HELP)]
    weights: String,
    /// Defect size of the generated pseudotrajectory.
    #[arg(long)]
    delta: f64,
    /// Half-width of the time window (states run from -T to T).
    #[arg(long, default_value_t = 50)]
    t_window: u64,
    /// Defect pattern of the generated window.
    #[arg(long, value_enum, default_value_t = StyleArg::Random)]
    style: StyleArg,
    /// Norm for defects and errors: sup or lp:<p>.
    #[arg(long, default_value = "sup")]
    norm: String,
    /// Also search for the best achievable window error (T <= 20).
    #[arg(long)]
    best: bool,
}

#[derive(Args)]
struct Lemma22Args {
    #[arg(long, help = WEIGHTS_HELP)]
    weights: String,
    /// Largest index offset scanned by the forward sums.
    #[arg(long, default_value_t = 8)]
    t_max: u32,
    /// Number of terms in each partial sum.
    #[arg(long, default_value_t = 60)]
    m_max: u64,
    /// Also report a divergence witness and partial-sum cap at this delta.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StyleArg {
    Random,
    ConstantAtZero,
}

impl StyleArg {
    fn to_core(self) -> DefectStyle {
        match self {
            StyleArg::Random => DefectStyle::Random,
            StyleArg::ConstantAtZero => DefectStyle::ConstantAtZero,
        }
    }

    fn label(self) -> &'static str {
        match self {
            StyleArg::Random => "random",
            StyleArg::ConstantAtZero => "constant-at-zero",
        }
    }
}

/// Everything a finished subcommand hands back to `main` for packaging.
struct Ran {
    command: &'static str,
    config: Value,
    results: Value,
    violations: Vec<Value>,
    csv: CsvTrace,
}

trait OrMsg<T> {
    fn msg(self) -> Result<T, String>;
}

impl<T, E: std::fmt::Display> OrMsg<T> for Result<T, E> {
    fn msg(self) -> Result<T, String> {
        self.map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(ran) => {
            let mut rep = RunReport::new(ran.command, ran.config, cli.seed);
            rep.results = ran.results;
            rep.violations = ran.violations;
            rep.duration_ms = started.elapsed().as_secs_f64() * 1e3;
            let text = rep.to_json();
            if let Some(path) = &cli.json {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if let Some(path) = &cli.csv {
                if let Err(e) = ran.csv.write_to(path) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if !cli.quiet {
                print!("{text}");
            }
            ExitCode::from(rep.exit_code())
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Ran, String> {
    match &cli.command {
        Command::Classify(a) => classify_cmd(a),
        Command::Perturb(a) => perturb_cmd(a, cli.seed),
        Command::Freqsets(a) => freqsets_cmd(a),
        Command::Kothe(a) => kothe_cmd(a),
        Command::Shadow(a) => shadow_cmd(a, cli.seed),
        Command::Lemma22(a) => lemma22_cmd(a),
    }
}

/// Move a payload's embedded `violations` array into the envelope list,
/// leaving a count behind so the payload stays self-describing.
fn lift_violations(results: &mut Value, out: &mut Vec<Value>) {
    if let Value::Object(map) = results {
        if let Some(Value::Array(items)) = map.remove("violations") {
            map.insert("violation_count".into(), json!(items.len()));
            out.extend(items);
        }
    }
}

/// Ensure a violation object carries a "kind" discriminator.
fn tagged(kind: &str, value: Value) -> Value {
    match value {
        Value::Object(mut map) => {
            map.entry("kind").or_insert_with(|| json!(kind));
            Value::Object(map)
        }
        other => json!({ "kind": kind, "value": other }),
    }
}

fn condition_label(c: ConditionId) -> String {
    match to_value(&c) {
        Value::String(s) => s,
        _ => unreachable!("condition ids serialize as strings"),
    }
}

#[derive(Serialize)]
struct ClassifyConfig<'a> {
    weights: &'a str,
    n_max: u32,
    margin: f64,
}

fn classify_cmd(a: &ClassifyArgs) -> Result<Ran, String> {
    let model = spec::parse_model(&a.weights).msg()?;
    let report = classify_sss(&model, a.n_max, a.margin).msg()?;

    let mut csv = CsvTrace::new(&["condition", "l", "window_mean_log2"]);
    for cond in &report.conditions {
        let label = condition_label(cond.condition);
        for &(l, v) in &cond.trace {
            csv.push(vec![label.clone(), l.to_string(), num(v)]);
        }
    }

    Ok(Ran {
        command: "classify",
        config: to_value(&ClassifyConfig {
            weights: &a.weights,
            n_max: a.n_max,
            margin: a.margin,
        }),
        results: to_value(&report),
        violations: Vec::new(),
        csv,
    })
}

#[derive(Serialize)]
struct PerturbConfig<'a> {
    weights: &'a str,
    delta: f64,
    m: u64,
    t: u64,
    norm: &'a str,
    samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_override: Option<f64>,
}

fn perturb_cmd(a: &PerturbArgs, seed: u64) -> Result<Ran, String> {
    let model = spec::parse_model(&a.weights).msg()?;
    let norm = spec::parse_norm(&a.norm).msg()?;
    let pert = match a.kappa_override {
        Some(k) => build_perturbation_with_kappa(&model, a.delta, a.m, a.t, norm, k),
        None => build_perturbation(&model, a.delta, a.m, a.t, norm),
    }
    .msg()?;
    let verification = verify_perturbation(&pert, &model, a.samples, seed).msg()?;

    let violations: Vec<Value> = verification.violations.iter().map(to_value).collect();
    let mut ver_value = to_value(&verification);
    let mut sink = Vec::new();
    lift_violations(&mut ver_value, &mut sink); // keep only the count in results

    let mut csv = CsvTrace::new(&["metric", "value"]);
    csv.push(vec!["kappa".into(), num(pert.kappa)]);
    csv.push(vec![
        "min_center_distance".into(),
        num(verification.min_center_distance),
    ]);
    csv.push(vec!["max_alpha_norm".into(), num(verification.max_alpha_norm)]);
    csv.push(vec![
        "max_lipschitz_ratio".into(),
        num(verification.max_lipschitz_ratio),
    ]);
    csv.push(vec![
        "orbit_max_rel_err".into(),
        num(verification.orbit_max_rel_err),
    ]);
    for (k, lp) in pert.a.iter().enumerate() {
        csv.push(vec![format!("window_product[{k}]_log2"), num(lp.log2)]);
    }

    Ok(Ran {
        command: "perturb",
        config: to_value(&PerturbConfig {
            weights: &a.weights,
            delta: a.delta,
            m: a.m,
            t: a.t,
            norm: &a.norm,
            samples: a.samples,
            kappa_override: a.kappa_override,
        }),
        results: json!({ "construction": to_value(&pert), "verification": ver_value }),
        violations,
        csv,
    })
}

#[derive(Serialize)]
struct FreqsetsConfig<'a> {
    blocks: &'a str,
    r_max: u32,
    horizon: u64,
    checkpoints: &'a [u64],
}

fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut cp = 64u64;
    while cp <= horizon {
        cps.push(cp);
        match cp.checked_mul(4) {
            Some(next) => cp = next,
            None => break,
        }
    }
    if cps.is_empty() {
        cps.push(horizon.max(1));
    }
    cps
}

fn parse_checkpoints(text: &str) -> Result<Vec<u64>, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<u64>()
                .map_err(|e| format!("invalid checkpoint {part:?}: {e}"))
        })
        .collect()
}

fn freqsets_cmd(a: &FreqsetsArgs) -> Result<Ran, String> {
    let schedule = spec::parse_schedule(&a.blocks).msg()?;
    let sets = generate_sets(&schedule, a.r_max, a.horizon).msg()?;
    let property_violations = verify_properties(&sets).msg()?;
    let violations: Vec<Value> = property_violations.iter().map(to_value).collect();

    let checkpoints = match &a.checkpoints {
        Some(text) => parse_checkpoints(text)?,
        None => default_checkpoints(a.horizon),
    };
    let mut profiles = Vec::new();
    for r in 1..=a.r_max {
        profiles.push(lower_density_profile(&sets, r, &checkpoints).msg()?);
    }

    let mut csv = CsvTrace::new(&["r", "checkpoint", "count", "density"]);
    for profile in &profiles {
        for point in &profile.points {
            csv.push(vec![
                profile.r.to_string(),
                point.checkpoint.to_string(),
                point.count.to_string(),
                num(point.density),
            ]);
        }
    }

    let sizes: Vec<usize> = sets.sets.iter().map(|s| s.len()).collect();
    Ok(Ran {
        command: "freqsets",
        config: to_value(&FreqsetsConfig {
            blocks: &a.blocks,
            r_max: a.r_max,
            horizon: a.horizon,
            checkpoints: &checkpoints,
        }),
        results: json!({
            "schedule": spec::schedule_rule_name(&schedule),
            "r_max": a.r_max,
            "horizon": a.horizon,
            "set_sizes": sizes,
            "density_profiles": to_value(&profiles),
            "violation_count": violations.len(),
        }),
        violations,
        csv,
    })
}

#[derive(Serialize)]
struct KotheChaosConfig<'a> {
    blocks: &'a str,
    horizon: u64,
}

#[derive(Serialize)]
struct KotheContinuityConfig<'a> {
    blocks: &'a str,
    horizon: u64,
    p_max: u32,
}

#[derive(Serialize)]
struct KotheFhcConfig<'a> {
    blocks: &'a str,
    horizon: u64,
    r: u32,
    p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<u32>,
}

fn kothe_cmd(a: &KotheArgs) -> Result<Ran, String> {
    let schedule = spec::parse_schedule(&a.blocks).msg()?;
    match &a.action {
        KotheAction::Chaos { horizon } => {
            let space = PowerSeriesSpace::new(schedule.clone(), *horizon).msg()?;
            let starts: Vec<u64> = schedule
                .starts_up_to(*horizon)
                .into_iter()
                .filter(|&n| n >= 1)
                .collect();
            if starts.is_empty() {
                return Err(format!(
                    "horizon {horizon} is below the first block start; nothing to check"
                ));
            }
            let evidence = supports_chaotic_verdict(AlphaSource::Space(&space), &starts).msg()?;

            let mut violations = Vec::new();
            let mut block_rows = Vec::new();
            let mut csv = CsvTrace::new(&["series", "n", "ratio"]);
            for &n in &starts {
                // The construction pins the prefix sum to the exponent at
                // every block start, so the exact ratio there must be 1.
                let ratio = chaos_ratio(&space, n).msg()?;
                let is_one = ratio.num == ratio.den;
                if !is_one {
                    violations.push(json!({
                        "kind": "block_start_ratio",
                        "n": n,
                        "ratio": to_value(&ratio),
                    }));
                }
                csv.push(vec![
                    "block_start".into(),
                    n.to_string(),
                    format!("{}/{}", ratio.num, ratio.den),
                ]);
                block_rows.push(json!({ "n": n, "ratio": to_value(&ratio), "is_one": is_one }));
            }
            for point in &evidence.trace {
                csv.push(vec!["trace".into(), point.n.to_string(), num(point.ratio)]);
            }
            for point in &evidence.tail_minima {
                csv.push(vec!["tail_min".into(), point.n.to_string(), num(point.ratio)]);
            }

            Ok(Ran {
                command: "kothe chaos",
                config: to_value(&KotheChaosConfig {
                    blocks: &a.blocks,
                    horizon: *horizon,
                }),
                results: json!({
                    "horizon": horizon,
                    "blocks": space.block_count(),
                    "evidence": to_value(&evidence),
                    "block_start_ratios": block_rows,
                }),
                violations,
                csv,
            })
        }
        KotheAction::Continuity { horizon, p_max } => {
            let space = PowerSeriesSpace::new(schedule, horizon + 1).msg()?;
            let model = WeightModel::fhc(Arc::new(space));
            let report = continuity_check(&model, *p_max, *horizon).msg()?;

            let mut csv = CsvTrace::new(&["metric", "value"]);
            csv.push(vec!["checked".into(), report.checked.to_string()]);
            csv.push(vec!["min_margin_log2".into(), num(report.min_margin_log2)]);
            if let Some((p, n)) = report.min_margin_at {
                csv.push(vec!["min_margin_p".into(), p.to_string()]);
                csv.push(vec!["min_margin_n".into(), n.to_string()]);
            }

            let mut results = to_value(&report);
            let mut raw = Vec::new();
            lift_violations(&mut results, &mut raw);
            let violations = raw.into_iter().map(|v| tagged("continuity", v)).collect();

            Ok(Ran {
                command: "kothe continuity",
                config: to_value(&KotheContinuityConfig {
                    blocks: &a.blocks,
                    horizon: *horizon,
                    p_max: *p_max,
                }),
                results,
                violations,
                csv,
            })
        }
        KotheAction::Fhc { horizon, r, p, s } => {
            if *r < 1 {
                return Err("r must be >= 1".into());
            }
            let r_top = s.map_or(*r, |s| s.max(*r));
            // The decay traces read a few indices past the horizon; build
            // the space with enough slack for both estimates.
            let space_h = horizon + r_top as u64 + *p as u64 + 2;
            let space = PowerSeriesSpace::new(schedule.clone(), space_h).msg()?;
            let sets = generate_sets(&schedule, r_top, *horizon).msg()?;

            let rep_i = verify_fhc_condition_i(&space, &sets, *r, *p, *horizon).msg()?;
            let rep_ii = match s {
                Some(s) => Some(verify_fhc_condition_ii(&space, &sets, *r, *s, *horizon).msg()?),
                None => None,
            };

            let mut csv = CsvTrace::new(&["series", "index", "value_log2"]);
            for bm in &rep_i.block_maxima {
                csv.push(vec![
                    "block_max".into(),
                    bm.block.to_string(),
                    num(bm.value_log2),
                ]);
            }
            if let Some(rep) = &rep_ii {
                if let Some(w) = &rep.max_term {
                    csv.push(vec!["pair_max_value".into(), w.n.to_string(), num(w.value_log2)]);
                    csv.push(vec![
                        "pair_max_margin".into(),
                        w.n.to_string(),
                        num(w.margin_log2),
                    ]);
                }
            }

            let mut violations = Vec::new();
            let mut value_i = to_value(&rep_i);
            lift_violations(&mut value_i, &mut violations);
            let value_ii = match &rep_ii {
                Some(rep) => {
                    let mut v = to_value(rep);
                    lift_violations(&mut v, &mut violations);
                    v
                }
                None => Value::Null,
            };

            Ok(Ran {
                command: "kothe fhc",
                config: to_value(&KotheFhcConfig {
                    blocks: &a.blocks,
                    horizon: *horizon,
                    r: *r,
                    p: *p,
                    s: *s,
                }),
                results: json!({ "condition_i": value_i, "condition_ii": value_ii }),
                violations,
                csv,
            })
        }
    }
}

#[derive(Serialize)]
struct ShadowConfig<'a> {
    weights: &'a str,
    delta: f64,
    t_window: u64,
    style: &'a str,
    norm: &'a str,
    best: bool,
}

fn shadow_cmd(a: &ShadowArgs, seed: u64) -> Result<Ran, String> {
    let model = spec::parse_model(&a.weights).msg()?;
    let norm = spec::parse_norm(&a.norm).msg()?;
    let classification = classify_sss(&model, DEFAULT_N_MAX, DEFAULT_MARGIN).msg()?;

    let x_start = FiniteVector::single(0, 1.0);
    let pt = make_pseudotrajectory(
        &model,
        &x_start,
        a.delta,
        a.t_window,
        seed,
        a.style.to_core(),
        norm,
    )
    .msg()?;

    let mut violations = Vec::new();
    let outcome_value = if classification.shadowing {
        let outcome = shadow_with_verdict(&model, &pt, classification.verdict).msg()?;
        if let Some(bound) = outcome.certified_bound {
            if outcome.measured_error > bound * (1.0 + 1e-9) + 1e-15 {
                violations.push(json!({
                    "kind": "shadow_bound_exceeded",
                    "measured_error": outcome.measured_error,
                    "certified_bound": bound,
                }));
            }
        }
        to_value(&outcome)
    } else {
        Value::Null
    };

    let best_value = if a.best {
        let best = best_window_shadow(&model, &pt).msg()?;
        to_value(&best)
    } else {
        Value::Null
    };

    let mut csv = CsvTrace::new(&["metric", "value"]);
    csv.push(vec!["max_defect_norm".into(), num(pt.max_defect_norm())]);
    if let Value::Object(map) = &outcome_value {
        if let Some(Value::Number(e)) = map.get("measured_error") {
            csv.push(vec!["measured_error".into(), e.to_string()]);
        }
        if let Some(Value::Number(b)) = map.get("certified_bound") {
            csv.push(vec!["certified_bound".into(), b.to_string()]);
        }
    }
    if let Value::Object(map) = &best_value {
        if let Some(Value::Number(v)) = map.get("value") {
            csv.push(vec!["best_window_error".into(), v.to_string()]);
        }
    }

    Ok(Ran {
        command: "shadow",
        config: to_value(&ShadowConfig {
            weights: &a.weights,
            delta: a.delta,
            t_window: a.t_window,
            style: a.style.label(),
            norm: &a.norm,
            best: a.best,
        }),
        results: json!({
            "classification": {
                "verdict": to_value(&classification.verdict),
                "hyperbolic": classification.hyperbolic,
                "generalized_hyperbolic": classification.generalized_hyperbolic,
                "sss": classification.sss,
                "shadowing": classification.shadowing,
                "lemma23_pattern": classification.lemma23_pattern,
            },
            "pseudotrajectory": {
                "t_window": pt.t_window,
                "delta": pt.delta,
                "style": a.style.label(),
                "norm": to_value(&pt.norm),
                "seed": pt.seed,
                "max_defect_norm": pt.max_defect_norm(),
            },
            "outcome": outcome_value,
            "best_window": best_value,
        }),
        violations,
        csv,
    })
}

#[derive(Serialize)]
struct Lemma22Config<'a> {
    weights: &'a str,
    t_max: u32,
    m_max: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

fn lemma22_cmd(a: &Lemma22Args) -> Result<Ran, String> {
    let model = spec::parse_model(&a.weights).msg()?;
    let report = lemma22_quantities(&model, a.t_max, a.m_max).msg()?;

    let mut violations = Vec::new();
    if report.indicators_agree == Some(false) {
        violations.push(json!({
            "kind": "indicator_disagreement",
            "condition": to_value(&report.fekete.verdict),
            "forward_diverging": report.sum_forward.diverging,
            "backward_diverging": report.sum_backward.diverging,
        }));
    }

    let witness_value = match a.delta {
        Some(delta) => {
            let witness = find_divergence_witness(&model, delta, 0, a.m_max.max(2)).msg()?;
            let bound = match witness {
                Some(m) => Some(contradiction_bound(&model, delta, 0, m).msg()?),
                None => None,
            };
            json!({
                "delta": delta,
                "witness_m": witness,
                "contradiction_bound": bound.as_ref().map(to_value),
            })
        }
        None => Value::Null,
    };

    let mut csv = CsvTrace::new(&["series", "index", "value"]);
    for &(l, v) in &report.fekete.trace {
        csv.push(vec!["window_mean_log2".into(), l.to_string(), num(v)]);
    }
    csv.push(vec![
        "forward_sup_log2".into(),
        report.sum_forward.arg.to_string(),
        num(report.sum_forward.sup_log2),
    ]);
    csv.push(vec![
        "backward_sup_log2".into(),
        report.sum_backward.arg.to_string(),
        num(report.sum_backward.sup_log2),
    ]);

    Ok(Ran {
        command: "lemma22",
        config: to_value(&Lemma22Config {
            weights: &a.weights,
            t_max: a.t_max,
            m_max: a.m_max,
            delta: a.delta,
        }),
        results: json!({
            "report": to_value(&report),
            "divergence": witness_value,
        }),
        violations,
        csv,
    })
}
