//! Experiment configuration: `key=value` lines, also fed by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use aon_core::classify::ToleranceConfig;
use aon_core::numeric::{parse_biguint, parse_rational};
use aon_core::sim::SimLimits;
use aon_core::thresholds::SearchBudget;
use aon_core::{Family, Graph};
use num_bigint::BigUint;
use num_rational::BigRational;

use crate::grid::{parse_p_grid, parse_unit_grid};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format, ConfigError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(err(format!("unknown format {s:?} (json, csv or svg)"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

/// Where the pattern comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSource {
    Family(Family),
    File(PathBuf),
}

impl PatternSource {
    pub fn resolve(&self) -> anyhow::Result<Graph> {
        match self {
            PatternSource::Family(f) => Ok(aon_core::generate(f)?),
            PatternSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("reading {}: {e}", p.display()))?;
                Ok(aon_core::parse_graph(&text)?)
            }
        }
    }
}

fn parse_count(name: &str, s: &str) -> Result<usize, ConfigError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| err(format!("{name}: not a non-negative integer: {s:?}")))
}

/// `clique:4`, `cycle:6`, `path:3`, `matching:8`, `sun:5`, `cycle-out:6`,
/// `cliques:8,4,4`, or `file:PATH`.
pub fn parse_pattern(spec: &str) -> Result<PatternSource, ConfigError> {
    let spec = spec.trim();
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| err(format!("pattern {spec:?} should look like family:param or file:path")))?;
    let k = || parse_count(kind, arg);
    let family = match kind {
        "file" => {
            if arg.is_empty() {
                return Err(err("file: needs a path"));
            }
            return Ok(PatternSource::File(PathBuf::from(arg)));
        }
        "clique" => Family::Clique(k()?),
        "cycle" => Family::Cycle(k()?),
        "path" => Family::Path(k()?),
        "matching" => Family::PerfectMatching(k()?),
        "sun" => Family::Sun(k()?),
        "cycle-out" => Family::CycleWithOutEdges(k()?),
        "cliques" => Family::DisjointCliques(
            arg.split(',')
                .map(|s| parse_count("cliques", s))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        _ => return Err(err(format!("unknown pattern family {kind:?}"))),
    };
    Ok(PatternSource::Family(family))
}

/// Everything a command may read; unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub pattern: Option<PatternSource>,
    pub n: Option<BigUint>,
    pub q_grid: Option<Vec<BigRational>>,
    pub p_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub alpha_only: bool,
    pub tolerances: ToleranceConfig,
    pub budget: SearchBudget,
    pub limits: SimLimits,
    pub epsilon: Option<f64>,
    pub delta_first: Option<BigRational>,
    pub delta_second: Option<BigRational>,
    /// Accepted settings, normalized, for the run manifest.
    pub echo: BTreeMap<String, String>,
}

fn flag(s: &str) -> Result<bool, ConfigError> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(err(format!("not a boolean: {s:?}"))),
    }
}

fn positive_f64(name: &str, s: &str) -> Result<f64, ConfigError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(err(format!("{name}: expected a positive number, got {s:?}"))),
    }
}

fn rational(name: &str, s: &str) -> Result<BigRational, ConfigError> {
    parse_rational(s).map_err(|e| err(format!("{name}: {e}")))
}

impl ExperimentConfig {
    /// Applies one setting; later settings win.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "pattern" => self.pattern = Some(parse_pattern(value)?),
            "n" => self.n = Some(parse_biguint(value).map_err(|e| err(format!("n: {e}")))?),
            "q_grid" => self.q_grid = Some(parse_unit_grid(value)?),
            "p_grid" => self.p_grid = Some(parse_p_grid(value)?),
            "trials" => {
                let t = parse_count(key, value)?;
                if t == 0 {
                    return Err(err("trials must be at least 1"));
                }
                self.trials = Some(t);
            }
            "seed" => self.seed = Some(value.parse().map_err(|_| err(format!("seed: not a 64-bit integer: {value:?}")))?),
            "out" => self.out = Some(PathBuf::from(value)),
            "jobs" => self.jobs = Some(parse_count(key, value)?),
            "format" => self.format = Some(Format::parse(value)?),
            "alpha_only" => self.alpha_only = flag(value)?,
            "epsilon" => self.epsilon = Some(positive_f64(key, value)?),
            "delta_first" => self.delta_first = Some(rational(key, value)?),
            "delta_second" => self.delta_second = Some(rational(key, value)?),
            "search_nodes" => self.budget.nodes = parse_count(key, value)?,
            "search_supports" => self.budget.supports = parse_count(key, value)? as u64,
            "max_n" => self.limits.max_n = parse_count(key, value)?,
            "max_copies" => self.limits.max_copies = parse_count(key, value)? as u64,
            "ratio_tol" => self.tolerances.ratio_tol = positive_f64(key, value)?,
            "deloc_c" => self.tolerances.deloc_c = positive_f64(key, value)?,
            "dense_threshold" => self.tolerances.dense_threshold = positive_f64(key, value)?,
            "deloc_q" => self.tolerances.deloc_q = rational(key, value)?,
            "stable_delta" => self.tolerances.stable_delta = rational(key, value)?,
            "flat_pairs" => {
                let mut pairs = Vec::new();
                for part in value.split(',') {
                    let (a, b) = part
                        .split_once(':')
                        .ok_or_else(|| err(format!("flat_pairs: expected q:q', got {part:?}")))?;
                    pairs.push((rational(key, a)?, rational(key, b)?));
                }
                self.tolerances.flat_pairs = pairs;
            }
            _ => return Err(err(format!("unknown key {key:?}"))),
        }
        if key.starts_with("flat") || matches!(key, "ratio_tol" | "deloc_c" | "dense_threshold" | "deloc_q" | "stable_delta") {
            self.tolerances.validate().map_err(|e| err(e.to_string()))?;
        }
        self.echo.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `key=value` settings such as `ratio_tol=0.05`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got {pair:?}")))?;
        self.set(k, v)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn resolve_pattern(&self) -> anyhow::Result<Graph> {
        match &self.pattern {
            Some(p) => p.resolve(),
            None => Err(anyhow::Error::new(err("no pattern given (use --pattern or pattern=...)"))),
        }
    }

    pub fn require_n(&self) -> Result<BigUint, ConfigError> {
        self.n.clone().ok_or_else(|| err("no host size given (use --n or n=...)"))
    }
}

/// Parses a config document: `key=value` per line, `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    apply_config(&mut cfg, text)?;
    Ok(cfg)
}

pub fn apply_config(cfg: &mut ExperimentConfig, text: &str) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        cfg.set_pair(line).map_err(|e| ConfigError {
            line: Some(i + 1),
            message: e.message,
        })?;
    }
    Ok(())
}
