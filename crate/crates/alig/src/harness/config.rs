//! Experiment configuration: a flat `key = value` text format with dotted
//! keys, strict about unknown keys and about fields that do not belong to
//! the selected variant.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::FeasibleRegion;
use crate::optimizer::{MomentumConfig, MomentumFlavor};
use crate::problems::ProblemSpec;
use crate::step_rules::{BoundSchedule, StepRuleConfig};

/// Every key the config format accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "problem.kind",
    "problem.n",
    "problem.p",
    "problem.width",
    "problem.noise",
    "problem.margin",
    "problem.seed",
    "rule.variant",
    "rule.eta",
    "rule.delta",
    "rule.c",
    "rule.bound",
    "rule.bound_schedule",
    "rule.bound_factor",
    "rule.bound_period",
    "rule.lr",
    "rule.f_star",
    "momentum.mu",
    "momentum.flavor",
    "region.variant",
    "region.r",
    "epochs",
    "seed",
    "eval_every",
    "out_dir",
    "export_data",
];

/// A fully validated experiment description with defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub rule: StepRuleConfig,
    pub momentum: MomentumConfig,
    pub region: FeasibleRegion,
    pub epochs: u64,
    pub seed: u64,
    pub eval_every: u64,
    pub out_dir: PathBuf,
    pub export_data: bool,
}

/// Ordered `key = value` pairs as read from a config file, before any
/// interpretation. Kept so sweeps can override single fields and re-build.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pairs: Vec<(String, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_assignment(line, line_no)?;
            check_key(&key, line_no)?;
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!("line {line_no}: duplicate key '{key}'")));
            }
            pairs.push((key, value));
        }
        Ok(RawConfig { pairs })
    }

    /// Replace or append pairs; keys must be known.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<RawConfig> {
        let mut pairs = self.pairs.clone();
        for (key, value) in overrides {
            check_key(key, 0)?;
            if let Some(slot) = pairs.iter_mut().find(|(k, _)| k == key) {
                slot.1 = value.clone();
            } else {
                pairs.push((key.clone(), value.clone()));
            }
        }
        Ok(RawConfig { pairs })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// Interpret the pairs, apply defaults and validate everything.
    pub fn build(&self) -> Result<ExperimentConfig> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in &self.pairs {
            map.insert(k.as_str(), v.as_str());
        }

        let problem = build_problem(&mut map)?;
        let rule = build_rule_prefixed(&mut map)?;
        let momentum = build_momentum(&mut map)?;
        let region = build_region(&mut map)?;

        let epochs = take_u64(&mut map, "epochs")?.unwrap_or(100);
        let seed = take_u64(&mut map, "seed")?.unwrap_or(0);
        let eval_every = take_u64(&mut map, "eval_every")?.unwrap_or(1);
        if eval_every == 0 {
            return Err(Error::Config("eval_every: must be a positive integer".into()));
        }
        let out_dir = PathBuf::from(map.remove("out_dir").unwrap_or("out"));
        let export_data = take_bool(&mut map, "export_data")?.unwrap_or(false);

        if let Some((key, _)) = map.iter().next() {
            // known key that no section consumed, e.g. problem.margin on an mlp
            return Err(Error::Config(format!("{key}: not valid for this configuration")));
        }

        let config = ExperimentConfig {
            problem,
            rule,
            momentum,
            region,
            epochs,
            seed,
            eval_every,
            out_dir,
            export_data,
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.rule.validate()?;
        self.momentum.validate()?;
        if let FeasibleRegion::L2Ball { r } = self.region {
            FeasibleRegion::l2_ball(r)?;
        }
        Ok(())
    }
}

/// Parse and validate a config file's text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    RawConfig::parse(text)?.build()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn split_assignment(line: &str, line_no: usize) -> Result<(String, String)> {
    let Some((key, value)) = line.split_once('=') else {
        return Err(Error::Config(format!(
            "line {line_no}: expected 'key = value', got '{line}'"
        )));
    };
    let key = key.trim().to_string();
    let value = value.trim().to_string();
    if key.is_empty() || value.is_empty() {
        return Err(Error::Config(format!(
            "line {line_no}: expected 'key = value', got '{line}'"
        )));
    }
    Ok((key, value))
}

fn check_key(key: &str, line_no: usize) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        return Ok(());
    }
    let nearest = KNOWN_KEYS
        .iter()
        .min_by_key(|k| edit_distance(key, k))
        .unwrap();
    let at = if line_no > 0 {
        format!("line {line_no}: ")
    } else {
        String::new()
    };
    Err(Error::Config(format!(
        "{at}unknown key '{key}' (did you mean '{nearest}'?)"
    )))
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    if value == "inf" {
        return Ok(f64::INFINITY);
    }
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected 'true' or 'false', got '{value}'"
        ))),
    }
}

fn take_f64(map: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<f64>> {
    map.remove(key).map(|v| parse_f64(key, v)).transpose()
}

fn take_u64(map: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<u64>> {
    map.remove(key).map(|v| parse_u64(key, v)).transpose()
}

fn take_usize(map: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<usize>> {
    map.remove(key).map(|v| parse_usize(key, v)).transpose()
}

fn take_bool(map: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<bool>> {
    map.remove(key).map(|v| parse_bool(key, v)).transpose()
}

fn reject_leftover(map: &mut BTreeMap<&str, &str>, prefix: &str, context: &str) -> Result<()> {
    let stray: Vec<String> = map
        .keys()
        .filter(|k| k.starts_with(prefix))
        .map(|k| k.to_string())
        .collect();
    if let Some(key) = stray.first() {
        return Err(Error::Config(format!("{key}: not valid for {context}")));
    }
    Ok(())
}

fn build_problem(map: &mut BTreeMap<&str, &str>) -> Result<ProblemSpec> {
    let Some(kind) = map.remove("problem.kind") else {
        return Err(Error::Config("problem.kind: required".into()));
    };
    let seed = take_u64(map, "problem.seed")?.unwrap_or(0);
    let spec = match kind {
        "interp_least_squares" => ProblemSpec::InterpLeastSquares {
            n: take_usize(map, "problem.n")?.unwrap_or(20),
            p: take_usize(map, "problem.p")?.unwrap_or(50),
            seed,
        },
        "separable_logistic" => ProblemSpec::SeparableLogistic {
            n: take_usize(map, "problem.n")?.unwrap_or(100),
            p: take_usize(map, "problem.p")?.unwrap_or(10),
            margin: take_f64(map, "problem.margin")?.unwrap_or(0.5),
            seed,
        },
        "two_moons_mlp" => ProblemSpec::TwoMoonsMlp {
            n: take_usize(map, "problem.n")?.unwrap_or(200),
            width: take_usize(map, "problem.width")?.unwrap_or(32),
            noise: take_f64(map, "problem.noise")?.unwrap_or(0.1),
            seed,
        },
        "noninterp_least_squares" => ProblemSpec::NonInterpLeastSquares {
            n: take_usize(map, "problem.n")?.unwrap_or(50),
            p: take_usize(map, "problem.p")?.unwrap_or(10),
            noise: take_f64(map, "problem.noise")?.unwrap_or(0.1),
            seed,
        },
        other => {
            return Err(Error::Config(format!(
                "problem.kind: unknown kind '{other}' (expected interp_least_squares, \
                 separable_logistic, two_moons_mlp or noninterp_least_squares)"
            )))
        }
    };
    reject_leftover(map, "problem.", &format!("problem kind '{kind}'"))?;
    Ok(spec)
}

/// Build a step rule from `rule.*` keys.
fn build_rule_prefixed(map: &mut BTreeMap<&str, &str>) -> Result<StepRuleConfig> {
    let Some(variant) = map.remove("rule.variant") else {
        return Err(Error::Config("rule.variant: required".into()));
    };
    let rule = build_rule_fields(variant, map, "rule.")?;
    reject_leftover(map, "rule.", &format!("rule variant '{variant}'"))?;
    Ok(rule)
}

/// Shared by config files (`rule.` prefix) and compare rules files (no
/// prefix).
pub(crate) fn build_rule_fields(
    variant: &str,
    map: &mut BTreeMap<&str, &str>,
    prefix: &str,
) -> Result<StepRuleConfig> {
    let key = |suffix: &str| format!("{prefix}{suffix}");
    let mut take = |suffix: &str| -> Option<String> {
        map.remove(key(suffix).as_str()).map(|v| v.to_string())
    };
    match variant {
        "alig" => {
            let eta = match take("eta") {
                Some(v) => parse_f64(&key("eta"), &v)?,
                None => 0.1,
            };
            let delta = match take("delta") {
                Some(v) => parse_f64(&key("delta"), &v)?,
                None => 1e-5,
            };
            Ok(StepRuleConfig::AliG { eta, delta })
        }
        "sps" => {
            let c = match take("c") {
                Some(v) => parse_f64(&key("c"), &v)?,
                None => 0.5,
            };
            let gamma_bound = match take("bound") {
                Some(v) => parse_f64(&key("bound"), &v)?,
                None => f64::INFINITY,
            };
            let schedule_name = take("bound_schedule").unwrap_or_else(|| "constant".to_string());
            let bound_schedule = match schedule_name.as_str() {
                "constant" => {
                    if take("bound_factor").is_some() || take("bound_period").is_some() {
                        return Err(Error::Config(format!(
                            "{}/{}: only valid with bound_schedule = multiplicative_decay",
                            key("bound_factor"),
                            key("bound_period"),
                        )));
                    }
                    BoundSchedule::Constant
                }
                "multiplicative_decay" => {
                    let factor = take("bound_factor").ok_or_else(|| {
                        Error::Config(format!("{}: required for multiplicative_decay", key("bound_factor")))
                    })?;
                    let period = take("bound_period").ok_or_else(|| {
                        Error::Config(format!("{}: required for multiplicative_decay", key("bound_period")))
                    })?;
                    BoundSchedule::MultiplicativeDecay {
                        factor: parse_f64(&key("bound_factor"), &factor)?,
                        period: parse_u64(&key("bound_period"), &period)?,
                    }
                }
                other => {
                    return Err(Error::Config(format!(
                        "{}: unknown schedule '{other}' (expected constant or multiplicative_decay)",
                        key("bound_schedule")
                    )))
                }
            };
            Ok(StepRuleConfig::Sps {
                c,
                gamma_bound,
                bound_schedule,
            })
        }
        "constant_lr" => {
            let lr = match take("lr") {
                Some(v) => parse_f64(&key("lr"), &v)?,
                None => 0.1,
            };
            Ok(StepRuleConfig::ConstantLr { lr })
        }
        "exact_polyak" => {
            let f_star = match take("f_star") {
                Some(v) => parse_f64(&key("f_star"), &v)?,
                None => 0.0,
            };
            Ok(StepRuleConfig::ExactPolyak { f_star })
        }
        other => Err(Error::Config(format!(
            "{}variant: unknown variant '{other}' (expected alig, sps, constant_lr or exact_polyak)",
            prefix
        ))),
    }
}

fn build_momentum(map: &mut BTreeMap<&str, &str>) -> Result<MomentumConfig> {
    let mu = take_f64(map, "momentum.mu")?.unwrap_or(0.9);
    let flavor = match map.remove("momentum.flavor") {
        None | Some("heavy_ball") => MomentumFlavor::HeavyBall,
        Some("nesterov") => MomentumFlavor::Nesterov,
        Some(other) => {
            return Err(Error::Config(format!(
                "momentum.flavor: unknown flavor '{other}' (expected heavy_ball or nesterov)"
            )))
        }
    };
    Ok(MomentumConfig { mu, flavor })
}

fn build_region(map: &mut BTreeMap<&str, &str>) -> Result<FeasibleRegion> {
    let variant = map.remove("region.variant").unwrap_or("l2_ball");
    match variant {
        "l2_ball" => {
            let r = take_f64(map, "region.r")?.unwrap_or(100.0);
            FeasibleRegion::l2_ball(r)
        }
        "unconstrained" => {
            if map.remove("region.r").is_some() {
                return Err(Error::Config(
                    "region.r: not valid for region variant 'unconstrained'".into(),
                ));
            }
            Ok(FeasibleRegion::Unconstrained)
        }
        other => Err(Error::Config(format!(
            "region.variant: unknown variant '{other}' (expected l2_ball or unconstrained)"
        ))),
    }
}

/// Parse a sweep grid: the config format, except each value is a
/// comma-separated list. `out_dir` cannot be swept.
pub fn parse_grid(text: &str) -> Result<Vec<(String, Vec<String>)>> {
    let mut grid: Vec<(String, Vec<String>)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(line, line_no)?;
        check_key(&key, line_no)?;
        if key == "out_dir" {
            return Err(Error::Config(format!("line {line_no}: out_dir cannot be swept")));
        }
        if grid.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("line {line_no}: duplicate key '{key}'")));
        }
        let values: Vec<String> = value
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::Config(format!("line {line_no}: '{key}' has no values")));
        }
        grid.push((key, values));
    }
    Ok(grid)
}

/// Parse a compare rules file: one rule per block, blocks separated by
/// blank lines, fields as in the config's `rule.` section without the
/// prefix.
pub fn parse_rules(text: &str) -> Result<Vec<StepRuleConfig>> {
    let mut blocks: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (idx, raw_line) in text.lines().enumerate() {
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
            continue;
        }
        blocks.last_mut().unwrap().push(split_assignment(line, idx + 1)?);
    }

    let mut rules = Vec::new();
    for assignments in blocks.iter().filter(|b| !b.is_empty()) {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in assignments {
            map.insert(k.as_str(), v.as_str());
        }
        let Some(variant) = map.remove("variant") else {
            return Err(Error::Config("rules file: each block needs 'variant'".into()));
        };
        let rule = build_rule_fields(variant, &mut map, "")?;
        if let Some((key, _)) = map.iter().next() {
            return Err(Error::Config(format!(
                "rules file: '{key}' not valid for variant '{variant}'"
            )));
        }
        rule.validate()?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Parse an inline problem spec like
/// `two_moons_mlp,n=200,width=32,noise=0.1,seed=0`.
pub fn parse_problem_arg(arg: &str) -> Result<ProblemSpec> {
    let mut parts = arg.split(',');
    let kind = parts.next().unwrap_or("").trim().to_string();
    if kind.is_empty() {
        return Err(Error::Config("problem spec: empty kind".into()));
    }
    let mut pairs: Vec<(String, String)> = vec![("problem.kind".into(), kind)];
    for part in parts {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((k, v)) = part.split_once('=') else {
            return Err(Error::Config(format!(
                "problem spec: expected key=value, got '{part}'"
            )));
        };
        pairs.push((format!("problem.{}", k.trim()), v.trim().to_string()));
    }
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in &pairs {
        check_key(k, 0)?;
        map.insert(k.as_str(), v.as_str());
    }
    let spec = build_problem(&mut map)?;
    spec.validate()?;
    Ok(spec)
}
