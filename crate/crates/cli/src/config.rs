//! Source definitions and run parameters from a key-value file, with
//! command-line flags taking precedence.

use crate::error::CliError;
use std::collections::BTreeMap;
use std::path::PathBuf;
use varlen::bounds::AnRule;
use varlen::{Distribution, SwitchRule, SwitchingSchedule};

/// Keys accepted in a config file.
const KEYS: &[&str] = &[
    "model",
    "probs",
    "probs2",
    "weight",
    "K",
    "rule",
    "n",
    "n_grid",
    "eps",
    "delta",
    "eta_grid",
    "gamma",
    "a_rule",
    "rate",
    "seed",
    "samples",
    "tail_fraction",
    "format",
    "out",
];

#[derive(Debug, Clone)]
pub enum Source {
    Iid(Distribution),
    Mixed {
        first: Distribution,
        second: Distribution,
        weight: f64,
    },
    Switching(SwitchingSchedule),
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::Iid(_) => "iid",
            Source::Mixed { .. } => "mixed",
            Source::Switching(_) => "switching",
        }
    }

    pub fn base(&self) -> u32 {
        match self {
            Source::Iid(d) | Source::Mixed { first: d, .. } => d.base(),
            Source::Switching(s) => s.components()[0].base(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Entropy,
    Value(f64),
}

/// Everything a command needs, validated for syntax; range checks that
/// depend on the command happen in the command before any computation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub n: Option<u32>,
    pub n_grid: Option<Vec<u32>>,
    pub eps: Vec<f64>,
    pub delta: Option<f64>,
    pub eta_grid: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub a_rule: String,
    pub rate: Option<Rate>,
    pub seed: u64,
    pub samples: usize,
    pub tail_fraction: f64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn a_rule(&self, gamma: f64) -> Result<AnRule, CliError> {
        match self.a_rule.as_str() {
            "first" => Ok(AnRule::FirstOrder { gamma }),
            "second" => Ok(AnRule::SecondOrder { gamma }),
            other => Err(CliError::invalid(
                "a_rule",
                format!("expected first or second, got {other:?}"),
            )),
        }
    }
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; everything after a `#` elsewhere is kept as part of the value.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::invalid(key, "unknown key"));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(CliError::invalid(key, "given more than once"));
        }
    }
    Ok(out)
}

/// Builds the run configuration from file pairs overlaid with flag values.
pub fn build(
    mut pairs: BTreeMap<String, String>,
    flags: BTreeMap<&str, String>,
) -> Result<RunConfig, CliError> {
    for (k, v) in flags {
        pairs.insert(k.to_string(), v);
    }
    let pairs = pairs;
    let get = |k: &str| lookup(&pairs, k);

    let base: u32 = match get("K") {
        Some(v) => parse_num("K", v)?,
        None => 2,
    };
    let source = parse_source(&pairs, base)?;
    let opt = |k: &'static str| -> Result<Option<f64>, CliError> {
        get(k).map(|v| parse_num::<f64>(k, v)).transpose()
    };

    Ok(RunConfig {
        source,
        n: get("n").map(|v| parse_num("n", v)).transpose()?,
        n_grid: get("n_grid").map(|v| parse_grid("n_grid", v)).transpose()?,
        eps: match get("eps") {
            Some(v) => parse_grid("eps", v)?,
            None => vec![0.0],
        },
        delta: opt("delta")?,
        eta_grid: get("eta_grid")
            .map(|v| parse_grid("eta_grid", v))
            .transpose()?,
        gamma: opt("gamma")?,
        a_rule: get("a_rule").unwrap_or("first").to_string(),
        rate: get("rate").map(parse_rate).transpose()?,
        seed: get("seed")
            .map(|v| parse_num("seed", v))
            .transpose()?
            .unwrap_or(0),
        samples: get("samples")
            .map(|v| parse_num("samples", v))
            .transpose()?
            .unwrap_or(10_000),
        tail_fraction: opt("tail_fraction")?.unwrap_or(varlen::asymptotics::DEFAULT_TAIL_FRACTION),
        format: get("format").map(parse_format).transpose()?,
        out: get("out").filter(|v| !v.is_empty()).map(PathBuf::from),
    })
}

fn lookup<'a>(pairs: &'a BTreeMap<String, String>, key: &str) -> Option<&'a str> {
    pairs.get(key).map(String::as_str)
}

fn parse_source(pairs: &BTreeMap<String, String>, base: u32) -> Result<Source, CliError> {
    let get = |k: &str| lookup(pairs, k);
    let dist = |key: &'static str| -> Result<Distribution, CliError> {
        let raw = get(key).ok_or_else(|| CliError::invalid(key, "missing"))?;
        let probs: Vec<f64> = parse_list(key, raw)?;
        Distribution::new(&probs, base).map_err(|e| CliError::invalid(key, e.to_string()))
    };
    match get("model").unwrap_or("iid") {
        "iid" => Ok(Source::Iid(dist("probs")?)),
        "mixed" => {
            let weight: f64 = parse_num(
                "weight",
                get("weight").ok_or_else(|| CliError::invalid("weight", "missing"))?,
            )?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(CliError::invalid("weight", "expected 0 <= weight <= 1"));
            }
            let (first, second) = (dist("probs")?, dist("probs2")?);
            if first.alphabet_size() != second.alphabet_size() {
                return Err(CliError::invalid(
                    "probs2",
                    "alphabet size differs from probs",
                ));
            }
            Ok(Source::Mixed {
                first,
                second,
                weight,
            })
        }
        "switching" => {
            let rule = match get("rule").unwrap_or("ceil-log2-parity") {
                "ceil-log2-parity" => SwitchRule::CeilLog2Parity { even: 0, odd: 1 },
                "fixed:0" => SwitchRule::Fixed(0),
                "fixed:1" => SwitchRule::Fixed(1),
                other => {
                    return Err(CliError::invalid(
                        "rule",
                        format!("expected ceil-log2-parity, fixed:0 or fixed:1, got {other:?}"),
                    ))
                }
            };
            let s = SwitchingSchedule::new(dist("probs")?, dist("probs2")?, rule)
                .map_err(|e| CliError::invalid("probs2", e.to_string()))?;
            Ok(Source::Switching(s))
        }
        other => Err(CliError::invalid(
            "model",
            format!("expected iid, mixed or switching, got {other:?}"),
        )),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::invalid(key, format!("cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// Grid values: a comma list, `a..b+step` (arithmetic) or `a..b*factor`
/// (geometric). Both range forms include `b` when it is hit exactly.
pub fn parse_grid<T>(key: &str, v: &str) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr + GridValue,
{
    let v = v.trim();
    let Some((start, rest)) = v.split_once("..") else {
        return parse_list(key, v);
    };
    let (end, step, geometric) = if let Some((e, s)) = rest.split_once('*') {
        (e, s, true)
    } else if let Some((e, s)) = rest.split_once('+') {
        (e, s, false)
    } else {
        return Err(CliError::invalid(key, "range needs +step or *factor"));
    };
    let (a, b, s): (f64, f64, f64) = (
        parse_num(key, start)?,
        parse_num(key, end)?,
        parse_num(key, step)?,
    );
    let ok = if geometric {
        a > 0.0 && s > 1.0
    } else {
        s > 0.0
    };
    if !ok {
        return Err(CliError::invalid(
            key,
            "range step must move towards the end",
        ));
    }
    let mut out = Vec::new();
    let mut x = a;
    let mut i = 0u32;
    while x <= b * (1.0 + 1e-12) {
        out.push(T::from_f64(key, x)?);
        i += 1;
        if i > 1_000_000 {
            return Err(CliError::invalid(key, "range has too many points"));
        }
        x = if geometric {
            a * s.powi(i as i32)
        } else {
            a + s * f64::from(i)
        };
    }
    Ok(out)
}

pub trait GridValue: Sized {
    fn from_f64(key: &str, x: f64) -> Result<Self, CliError>;
}

impl GridValue for f64 {
    fn from_f64(_: &str, x: f64) -> Result<Self, CliError> {
        Ok(x)
    }
}

impl GridValue for u32 {
    fn from_f64(key: &str, x: f64) -> Result<Self, CliError> {
        let r = x.round();
        if (x - r).abs() > 1e-9 || !(0.0..=f64::from(u32::MAX)).contains(&r) {
            return Err(CliError::invalid(key, format!("{x} is not a block length")));
        }
        Ok(r as u32)
    }
}

fn parse_rate(v: &str) -> Result<Rate, CliError> {
    if v.trim() == "H" {
        Ok(Rate::Entropy)
    } else {
        parse_num("rate", v).map(Rate::Value)
    }
}

fn parse_format(v: &str) -> Result<Format, CliError> {
    match v.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(CliError::invalid(
            "format",
            format!("expected csv or json, got {other:?}"),
        )),
    }
}
