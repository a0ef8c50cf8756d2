//! Text grammar for weight models, block schedules, and norms.
//!
//! Model specs:
//!   constant:<c>
//!   periodic:<v1,v2,...>[@<anchor>]
//!   split:neg=<spec>;pos=<spec>;cut=<n>      (sides must not be splits)
//!   explicit:<file.csv>;negfill=<c>;posfill=<c>
//!   fhc:blocks=<blockspec>[;horizon=<n>]
//! Block schedule specs:
//!   geometric:<base>
//!   explicit:<s0,s1,...>                     (must start at 0, increasing)
//!
//! Errors carry the byte position of the offending token.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use shiftlab_core::freq::{BlockRule, FrequencySchedule};
use shiftlab_core::kothe::PowerSeriesSpace;
use shiftlab_core::vector::NormKind;
use shiftlab_core::weights::WeightModel;

const DEFAULT_FHC_HORIZON: u64 = 100_000;

#[derive(Debug)]
pub struct SpecError {
    pub position: usize,
    pub message: String,
}

impl SpecError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        SpecError {
            position,
            message: message.into(),
        }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for SpecError {}

fn parse_f64(text: &str, pos: usize, what: &str) -> Result<f64, SpecError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| SpecError::new(pos, format!("{what}: expected a number, got {text:?}")))
}

fn parse_i64(text: &str, pos: usize, what: &str) -> Result<i64, SpecError> {
    text.trim()
        .parse::<i64>()
        .map_err(|_| SpecError::new(pos, format!("{what}: expected an integer, got {text:?}")))
}

fn parse_u64(text: &str, pos: usize, what: &str) -> Result<u64, SpecError> {
    text.trim()
        .parse::<u64>()
        .map_err(|_|

            SpecError::new(pos, format!("{what}: expected a nonnegative integer, got {text:?}")))
}

/// Split `body` into `key=value` fields on `;`, tracking byte positions.
fn key_value_fields(body: &str, base: usize) -> Result<Vec<(String, String, usize)>, SpecError> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for part in body.split(';') {
        let pos = base + offset;
        offset += part.len() + 1;
        if part.is_empty() {
            continue;
        }
        match part.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.to_string(), pos)),
            None => {
                return Err(SpecError::new(
                    pos,
                    format!("expected key=value, got {part:?}"),
                ))
            }
        }
    }
    Ok(out)
}

fn semantic(pos: usize, err: shiftlab_core::Error) -> SpecError {
    SpecError::new(pos, err.to_string())
}

/// Parse a weight-model spec. `allow_split` is cleared while parsing the
/// sides of a split so nesting is rejected at the grammar level.
fn parse_model_at(text: &str, base: usize, allow_split: bool) -> Result<WeightModel, SpecError> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| SpecError::new(base, "expected <family>:<parameters>"))?;
    let body_base = base + head.len() + 1;
    match head.trim() {
        "constant" => {
            let c = parse_f64(body, body_base, "constant weight")?;
            WeightModel::constant(c).map_err(|e| semantic(body_base, e))
        }
        "periodic" => {
            let (values_text, anchor_text) = match body.split_once('@') {
                Some((v, a)) => (v, Some(a)),
                None => (body, None),
            };
            let mut values = Vec::new();
            let mut offset = 0usize;
            for piece in values_text.split(',') {
                let pos = body_base + offset;
                offset += piece.len() + 1;
                values.push(parse_f64(piece, pos, "periodic value")?);
            }
            let anchor = match anchor_text {
                Some(a) => parse_i64(a, body_base + values_text.len() + 1, "anchor")?,
                None => 0,
            };
            WeightModel::periodic(values, anchor).map_err(|e| semantic(body_base, e))
        }
        "split" => {
            if !allow_split {
                return Err(SpecError::new(base, "split sides must not be splits"));
            }
            let mut neg = None;
            let mut pos_side = None;
            let mut cut = None;
            for (key, value, pos) in key_value_fields(body, body_base)? {
                match key.as_str() {
                    "neg" => neg = Some(parse_model_at(&value, pos + 4, false)?),
                    "pos" => pos_side = Some(parse_model_at(&value, pos + 4, false)?),
                    "cut" => cut = Some(parse_i64(&value, pos + 4, "cut")?),
                    other => {
                        return Err(SpecError::new(pos, format!("unknown split key {other:?}")))
                    }
                }
            }
            let neg = neg.ok_or_else(|| SpecError::new(base, "split needs neg="))?;
            let pos_side = pos_side.ok_or_else(|| SpecError::new(base, "split needs pos="))?;
            let cut = cut.ok_or_else(|| SpecError::new(base, "split needs cut="))?;
            WeightModel::split(neg, pos_side, cut).map_err(|e| semantic(base, e))
        }
        "explicit" => {
            let mut file = None;
            let mut neg_fill = None;
            let mut pos_fill = None;
            let mut offset = 0usize;
            for part in body.split(';') {
                let pos = body_base + offset;
                offset += part.len() + 1;
                if part.is_empty() {
                    continue;
                }
                match part.split_once('=') {
                    None => {
                        if file.is_some() {
                            return Err(SpecError::new(pos, "duplicate table path"));
                        }
                        file = Some(part.to_string());
                    }
                    Some(("negfill", v)) => {
                        neg_fill = Some(parse_f64(v, pos + 8, "negfill")?);
                    }
                    Some(("posfill", v)) => {
                        pos_fill = Some(parse_f64(v, pos + 8, "posfill")?);
                    }
                    Some((other, _)) => {
                        return Err(SpecError::new(
                            pos,
                            format!("unknown explicit key {other:?}"),
                        ));
                    }
                }
            }
            let file = file.ok_or_else(|| SpecError::new(base, "explicit needs a csv path"))?;
            let neg_fill =
                neg_fill.ok_or_else(|| SpecError::new(base, "explicit needs negfill="))?;
            let pos_fill =
                pos_fill.ok_or_else(|| SpecError::new(base, "explicit needs posfill="))?;
            let table = load_weight_table(&file)
                .map_err(|m| SpecError::new(body_base, m))?;
            WeightModel::explicit(table, neg_fill, pos_fill).map_err(|e| semantic(base, e))
        }
        "fhc" => {
            let mut blocks = None;
            let mut horizon = DEFAULT_FHC_HORIZON;
            for (key, value, pos) in key_value_fields(body, body_base)? {
                match key.as_str() {
                    "blocks" => blocks = Some(parse_schedule_at(&value, pos + 7)?),
                    "horizon" => horizon = parse_u64(&value, pos + 8, "horizon")?,
                    other => {
                        return Err(SpecError::new(pos, format!("unknown fhc key {other:?}")))
                    }
                }
            }
            let schedule = blocks.ok_or_else(|| SpecError::new(base, "fhc needs blocks="))?;
            let space =
                PowerSeriesSpace::new(schedule, horizon).map_err(|e| semantic(base, e))?;
            Ok(WeightModel::fhc(Arc::new(space)))
        }
        other => Err(SpecError::new(
            base,
            format!("unknown weight family {other:?}"),
        )),
    }
}

pub fn parse_model(text: &str) -> Result<WeightModel, SpecError> {
    parse_model_at(text, 0, true)
}

fn parse_schedule_at(text: &str, base: usize) -> Result<FrequencySchedule, SpecError> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| SpecError::new(base, "expected <rule>:<parameters>"))?;
    let body_base = base + head.len() + 1;
    match head.trim() {
        "geometric" => {
            let b = parse_u64(body, body_base, "geometric base")?;
            FrequencySchedule::geometric(b).map_err(|e| semantic(body_base, e))
        }
        "explicit" => {
            let mut starts = Vec::new();
            let mut offset = 0usize;
            for piece in body.split(',') {
                let pos = body_base + offset;
                offset += piece.len() + 1;
                starts.push(parse_u64(piece, pos, "block start")?);
            }
            FrequencySchedule::explicit(starts).map_err(|e| semantic(body_base, e))
        }
        other => Err(SpecError::new(
            base,
            format!("unknown block rule {other:?}"),
        )),
    }
}

pub fn parse_schedule(text: &str) -> Result<FrequencySchedule, SpecError> {
    parse_schedule_at(text, 0)
}

/// `sup` or `lp:<p>` with p ≥ 1.
pub fn parse_norm(text: &str) -> Result<NormKind, SpecError> {
    if text.trim() == "sup" {
        return Ok(NormKind::Sup);
    }
    match text.split_once(':') {
        Some(("lp", p)) => {
            let p = parse_f64(p, 3, "lp exponent")?;
            NormKind::lp(p).map_err(|e| semantic(0, e))
        }
        _ => Err(SpecError::new(
            0,
            format!("expected 'sup' or 'lp:<p>', got {text:?}"),
        )),
    }
}

/// CSV rows `index,weight` (a `index,weight` header row is allowed).
fn load_weight_table(path: &str) -> Result<BTreeMap<i64, f64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read weight table {path:?}: {e}"))?;
    let mut table = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.eq_ignore_ascii_case("index,weight")) {
            continue;
        }
        let (idx, w) = line
            .split_once(',')
            .ok_or_else(|| format!("{path}:{}: expected index,weight", lineno + 1))?;
        let idx: i64 = idx
            .trim()
            .parse()
            .map_err(|_| format!("{path}:{}: bad index {idx:?}", lineno + 1))?;
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| format!("{path}:{}: bad weight {w:?}", lineno + 1))?;
        if table.insert(idx, w).is_some() {
            return Err(format!("{path}:{}: duplicate index {idx}", lineno + 1));
        }
    }
    if table.is_empty() {
        return Err(format!("{path}: empty weight table"));
    }
    Ok(table)
}

pub fn schedule_rule_name(schedule: &FrequencySchedule) -> String {
    match &schedule.rule {
        BlockRule::Geometric { base } => format!("geometric:{base}"),
        BlockRule::Explicit { starts } => format!(
            "explicit:{}",
            starts
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_periodics_parse() {
        assert!(matches!(
            parse_model("constant:0.5").unwrap(),
            WeightModel::Constant { value } if value == 0.5
        ));
        match parse_model("periodic:2,0.5@-1").unwrap() {
            WeightModel::Periodic { values, anchor } => {
                assert_eq!(values, vec![2.0, 0.5]);
                assert_eq!(anchor, -1);
            }
            other => panic!("{other:?}"),
        }
        match parse_model("periodic:3").unwrap() {
            WeightModel::Periodic { anchor, .. } => assert_eq!(anchor, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_parses_and_rejects_nesting() {
        let m = parse_model("split:neg=constant:0.5;pos=constant:2;cut=1").unwrap();
        match m {
            WeightModel::Split { cut, .. } => assert_eq!(cut, 1),
            other => panic!("{other:?}"),
        }
        let err = parse_model("split:neg=split:neg=constant:1;pos=constant:1;cut=0;pos=constant:2;cut=1")
            .unwrap_err();
        assert!(err.message.contains("split"), "{err}");
    }

    #[test]
    fn semantic_errors_carry_positions() {
        let err = parse_model("constant:-1").unwrap_err();
        assert_eq!(err.position, 9);
        assert!(err.message.contains("positive"), "{err}");
        let err = parse_model("blorp:1").unwrap_err();
        assert!(err.message.contains("unknown weight family"));
        let err = parse_model("periodic:1,x,3").unwrap_err();
        assert_eq!(err.position, 11);
    }

    #[test]
    fn schedules_parse() {
        assert!(parse_schedule("geometric:4").is_ok());
        assert!(parse_schedule("explicit:0,3,9").is_ok());
        assert!(parse_schedule("geometric:1").is_err());
        assert!(parse_schedule("explicit:1,2").is_err());
    }

    #[test]
    fn norms_parse() {
        assert_eq!(parse_norm("sup").unwrap(), NormKind::Sup);
        assert!(matches!(parse_norm("lp:2").unwrap(), NormKind::Lp(p) if p == 2.0));
        assert!(parse_norm("lp:0.5").is_err());
        assert!(parse_norm("l2").is_err());
    }

    #[test]
    fn fhc_specs_build_spaces() {
        let m = parse_model("fhc:blocks=geometric:4;horizon=1000").unwrap();
        match m {
            WeightModel::FhcBlock { space } => assert_eq!(space.horizon(), 1000),
            other => panic!("{other:?}"),
        }
    }
}
