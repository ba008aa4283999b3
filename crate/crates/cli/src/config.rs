//! Experiment configuration: flat `key = value` text or a flat JSON object.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Schema version written to every manifest.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown verb `{given}`; valid verbs: {}", Verb::names().join(", "))]
    UnknownVerb { given: String },
    #[error("no verb given on the command line or in the config file; valid verbs: {}", Verb::names().join(", "))]
    NoVerb,
    #[error("verb `{cli}` on the command line conflicts with `{file}` in the config file")]
    ConflictingVerb { cli: String, file: String },
    #[error("missing required key `{key}` for verb `{verb}`")]
    MissingKey { key: String, verb: Verb },
    #[error("key `{key}` is out of range: got {value}, expected {expected}")]
    OutOfRange { key: String, value: String, expected: String },
    #[error("key `{key}` has an invalid value `{value}`: expected {expected}")]
    InvalidValue { key: String, value: String, expected: String },
    #[error("unknown key `{key}` for verb `{verb}`")]
    UnknownKey { key: String, verb: Verb },
    #[error("unsupported combination: {reason}")]
    Incompatible { reason: String },
    #[error("syntax error on line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Read { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Simulate,
    MiRegion,
    Kmax,
    Stationary,
    Pnb,
    CompareFlows,
    KernelDecay,
    UnitaryGap,
    MiPattern,
    Mobility,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Simulate,
        Verb::MiRegion,
        Verb::Kmax,
        Verb::Stationary,
        Verb::Pnb,
        Verb::CompareFlows,
        Verb::KernelDecay,
        Verb::UnitaryGap,
        Verb::MiPattern,
        Verb::Mobility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::MiRegion => "mi-region",
            Verb::Kmax => "kmax",
            Verb::Stationary => "stationary",
            Verb::Pnb => "pnb",
            Verb::CompareFlows => "compare-flows",
            Verb::KernelDecay => "kernel-decay",
            Verb::UnitaryGap => "unitary-gap",
            Verb::MiPattern => "mi-pattern",
            Verb::Mobility => "mobility",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|v| v.name()).collect()
    }

    /// Keys this verb accepts, besides the common ones.
    pub fn keys(self) -> &'static [KeySpec] {
        use Kind::*;
        use Need::*;
        match self {
            Verb::Simulate => const { &[
                KeySpec::new("alpha", PositiveOrInf, Required),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("N", Count(1), Default("128")),
                KeySpec::new("bc", Choice(&["dirichlet", "periodic"]), Default("dirichlet")),
                KeySpec::new("convention", Choice(&["full", "window"]), Default("full")),
                KeySpec::new("dt", Positive, Default("1e-3")),
                KeySpec::new("t_end", Positive, Default("10")),
                KeySpec::new("record_every", Count(1), Default("100")),
                KeySpec::new("initial", Choice(&["sech", "gaussian", "cw", "impulse", "onsite"]), Default("sech")),
                KeySpec::new("A", Positive, Default("1")),
                KeySpec::new("width", Positive, Default("3")),
                KeySpec::new("v", Finite, Default("0")),
                KeySpec::new("w", Positive, Default("1")),
                KeySpec::new("mu", Choice(&["-1", "1"]), Default("-1")),
                KeySpec::new("p", Count(3), Default("3")),
                KeySpec::new("scheme", Choice(&["rk4", "strang"]), Default("rk4")),
            ] },
            Verb::MiRegion => const { &[
                KeySpec::new("sweep", Choice(&["A", "alpha"]), Default("A")),
                KeySpec::new("alpha", PositiveOrInf, Optional),
                KeySpec::new("A", Positive, Default("1")),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("k_points", Count(2), Default("512")),
                KeySpec::new("points", Count(2), Default("512")),
                KeySpec::new("a_max", Positive, Default("3")),
                KeySpec::new("alpha_min", Positive, Default("0.5")),
                KeySpec::new("alpha_max", Positive, Default("10")),
            ] },
            Verb::Kmax => const { &[
                KeySpec::new("A", Positive, Default("1")),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("alpha_min", Positive, Default("0.25")),
                KeySpec::new("alpha_max", Positive, Default("10")),
                KeySpec::new("points", Count(2), Default("100")),
                KeySpec::new("tol", Positive, Default("1e-10")),
            ] },
            Verb::Stationary => const { &[
                KeySpec::new("model", Choice(&["fdnls", "dnls"]), Default("fdnls")),
                KeySpec::new("kind", Choice(&["onsite", "offsite"]), Default("onsite")),
                KeySpec::new("alpha", Positive, Optional),
                KeySpec::new("w", Positive, Default("1")),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("N", Count(1), Default("128")),
                KeySpec::new("window", Count(1), Optional),
                KeySpec::new("eps1", Positive, Default("0.1")),
            ] },
            Verb::Pnb => const { &[
                KeySpec::new("model", Choice(&["fdnls", "dnls"]), Default("fdnls")),
                KeySpec::new("alpha", Positive, Optional),
                KeySpec::new("eps", Positive, Default("10")),
                KeySpec::new("w", Positive, Default("1")),
                KeySpec::new("w_min", Positive, Default("0.1")),
                KeySpec::new("w_max", Positive, Default("100")),
                KeySpec::new("eps_min", Positive, Default("0.01")),
                KeySpec::new("eps_max", Positive, Default("10")),
                KeySpec::new("points", Count(2), Default("40")),
                KeySpec::new("N", Count(2), Default("256")),
                KeySpec::new("n_e", Count(1), Default("128")),
            ] },
            Verb::CompareFlows => const { &[
                KeySpec::new("alpha", Positive, Required),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("N", Count(2), Default("64")),
                KeySpec::new("bc", Choice(&["dirichlet", "periodic"]), Default("dirichlet")),
                KeySpec::new("dt", Positive, Default("1e-3")),
                KeySpec::new("t_end", Positive, Default("5")),
                KeySpec::new("record_every", Count(1), Default("100")),
                KeySpec::new("width", Positive, Default("2")),
            ] },
            Verb::KernelDecay => const { &[
                KeySpec::new("alpha", Positive, Default("4")),
                KeySpec::new("times", PositiveList(2), Default("10,40,160")),
            ] },
            Verb::UnitaryGap => const { &[
                KeySpec::new("alphas", PositiveList(1), Default("6,8,10,12")),
                KeySpec::new("x0", Interval(0.0, std::f64::consts::FRAC_PI_2), Default("1")),
            ] },
            Verb::MiPattern => const { &[
                KeySpec::new("alpha", Positive, Required),
                KeySpec::new("A", Positive, Default("1")),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("N", Count(2), Default("128")),
                KeySpec::new("dt", Positive, Default("1e-3")),
                KeySpec::new("t_end", Positive, Default("50")),
                KeySpec::new("noise", NonNegative, Default("1e-6")),
                KeySpec::new("record_every", Count(1), Default("100")),
            ] },
            Verb::Mobility => const { &[
                KeySpec::new("alpha", Positive, Required),
                KeySpec::new("eps", Positive, Default("1")),
                KeySpec::new("w", Positive, Default("1")),
                KeySpec::new("v", Finite, Default("1")),
                KeySpec::new("N", Count(1), Default("256")),
                KeySpec::new("convention", Choice(&["full", "window"]), Default("full")),
                KeySpec::new("dt", Positive, Default("1e-3")),
                KeySpec::new("t_end", Positive, Default("100")),
                KeySpec::new("record_every", Count(1), Default("100")),
                KeySpec::new("intensity", Choice(&["true", "false"]), Default("true")),
            ] },
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Verb {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| ConfigError::UnknownVerb { given: s.to_string() })
    }
}

/// Keys every verb accepts.
pub const COMMON_KEYS: &[KeySpec] = &[
    KeySpec::new("version", Kind::Choice(&[SCHEMA_VERSION]), Need::Default(SCHEMA_VERSION)),
    KeySpec::new("seed", Kind::Seed, Need::Default("42")),
    KeySpec::new("output_path", Kind::Text, Need::Default("out")),
    KeySpec::new("format", Kind::Choice(&["csv", "json"]), Need::Default("csv")),
];

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Positive,
    PositiveOrInf,
    NonNegative,
    Finite,
    /// Open interval.
    Interval(f64, f64),
    /// Integer at least this large.
    Count(usize),
    Seed,
    Choice(&'static [&'static str]),
    /// Comma-separated positive reals, at least this many.
    PositiveList(usize),
    Text,
}

#[derive(Debug, Clone, Copy)]
pub enum Need {
    Required,
    Optional,
    Default(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub need: Need,
}

impl KeySpec {
    pub const fn new(name: &'static str, kind: Kind, need: Need) -> Self {
        Self { name, kind, need }
    }

    fn check(&self, value: &str) -> Result<(), ConfigError> {
        let key = self.name;
        let invalid = |expected: &str| ConfigError::InvalidValue {
            key: key.into(),
            value: value.into(),
            expected: expected.into(),
        };
        let range = |expected: &str| ConfigError::OutOfRange {
            key: key.into(),
            value: value.into(),
            expected: expected.into(),
        };
        let real = || value.trim().parse::<f64>().map_err(|_| invalid("a real number"));
        match self.kind {
            Kind::Positive => {
                let x = real()?;
                if !(x.is_finite() && x > 0.0) {
                    return Err(range("a finite value > 0"));
                }
            }
            Kind::PositiveOrInf => {
                let x = real()?;
                if x.is_nan() || x <= 0.0 {
                    return Err(range("a value > 0 (inf selects the nearest-neighbour model)"));
                }
            }
            Kind::NonNegative => {
                let x = real()?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(range("a finite value >= 0"));
                }
            }
            Kind::Finite => {
                if !real()?.is_finite() {
                    return Err(range("a finite value"));
                }
            }
            Kind::Interval(lo, hi) => {
                let x = real()?;
                if !(x > lo && x < hi) {
                    return Err(range(&format!("a value in ({lo}, {hi})")));
                }
            }
            Kind::Count(min) => {
                let n: i64 = value.trim().parse().map_err(|_| invalid("an integer"))?;
                if n < min as i64 {
                    return Err(range(&format!("an integer >= {min}")));
                }
            }
            Kind::Seed => {
                value.trim().parse::<u64>().map_err(|_| invalid("an unsigned 64-bit integer"))?;
            }
            Kind::Choice(options) => {
                if !options.contains(&value.trim()) {
                    return Err(invalid(&format!("one of {}", options.join(", "))));
                }
            }
            Kind::PositiveList(min) => {
                let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                if items.len() < min {
                    return Err(range(&format!("a comma-separated list of at least {min} values")));
                }
                for s in items {
                    let x: f64 = s.parse().map_err(|_| invalid("comma-separated real numbers"))?;
                    if !(x.is_finite() && x > 0.0) {
                        return Err(range("finite values > 0"));
                    }
                }
            }
            Kind::Text => {
                if value.trim().is_empty() {
                    return Err(invalid("a non-empty string"));
                }
            }
        }
        Ok(())
    }
}

/// Raw `key → value` pairs as written, before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_flat(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, reason: "expected `key = value`".into() });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, reason: "empty key".into() });
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Syntax { line: i + 1, reason: format!("duplicate key `{k}`") });
            }
        }
        Ok(Self { entries })
    }

    /// Parses a flat JSON object whose values are strings, numbers or booleans.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::Syntax { line: e.line(), reason: e.to_string() })?;
        let serde_json::Value::Object(map) = value else {
            return Err(ConfigError::Syntax { line: 1, reason: "expected a JSON object".into() });
        };
        let mut entries = BTreeMap::new();
        for (k, v) in map {
            let s = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                _ => {
                    return Err(ConfigError::InvalidValue {
                        key: k,
                        value: v.to_string(),
                        expected: "a string, number, boolean or array".into(),
                    })
                }
            };
            entries.insert(k, s);
        }
        Ok(Self { entries })
    }

    /// Picks the parser from the extension, falling back to the first character.
    pub fn from_text(text: &str, path: Option<&Path>) -> Result<Self, ConfigError> {
        let json = match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => true,
            Some(_) => false,
            None => text.trim_start().starts_with('{'),
        };
        if json {
            Self::from_json(text)
        } else {
            Self::from_flat(text)
        }
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError::Syntax { line: 0, reason: format!("override `{assignment}` is not `key=value`") });
        };
        self.entries.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub verb: Verb,
    pub version: String,
    /// Every known key with its value; optional keys appear only when set.
    pub params: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Validates `raw` for `verb` (taken from the raw `verb` key when `None`).
    pub fn resolve(mut raw: RawConfig, verb: Option<&str>) -> Result<Self, ConfigError> {
        let file_verb = raw.entries.remove("verb");
        let verb: Verb = match (verb, file_verb) {
            (Some(cli), Some(file)) if cli != file => {
                return Err(ConfigError::ConflictingVerb { cli: cli.into(), file })
            }
            (Some(v), _) => v.parse()?,
            (None, Some(v)) => v.parse()?,
            (None, None) => return Err(ConfigError::NoVerb),
        };
        let specs: Vec<&KeySpec> = COMMON_KEYS.iter().chain(verb.keys()).collect();
        if let Some(key) = raw.entries.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            return Err(ConfigError::UnknownKey { key: key.clone(), verb });
        }
        let mut params = BTreeMap::new();
        for spec in specs {
            let value = match (raw.entries.remove(spec.name), spec.need) {
                (Some(v), _) => v,
                (None, Need::Default(d)) => d.to_string(),
                (None, Need::Optional) => continue,
                (None, Need::Required) => return Err(ConfigError::MissingKey { key: spec.name.into(), verb }),
            };
            spec.check(&value)?;
            params.insert(spec.name.to_string(), value.trim().to_string());
        }
        let version = params["version"].clone();
        let cfg = Self { verb, version, params };
        cfg.cross_checks()?;
        Ok(cfg)
    }

    fn cross_checks(&self) -> Result<(), ConfigError> {
        let order = |lo: &str, hi: &str| -> Result<(), ConfigError> {
            if self.real(lo) >= self.real(hi) {
                return Err(ConfigError::OutOfRange {
                    key: hi.into(),
                    value: self.params[hi].clone(),
                    expected: format!("a value > {lo} = {}", self.params[lo]),
                });
            }
            Ok(())
        };
        match self.verb {
            Verb::Kmax => order("alpha_min", "alpha_max")?,
            Verb::MiRegion if self.text("sweep") == "alpha" => order("alpha_min", "alpha_max")?,
            Verb::MiRegion if !self.has("alpha") => {
                return Err(ConfigError::MissingKey { key: "alpha".into(), verb: self.verb })
            }
            Verb::Pnb => {
                order("w_min", "w_max")?;
                order("eps_min", "eps_max")?;
                if self.count("n_e") > self.count("N") {
                    return Err(ConfigError::OutOfRange {
                        key: "n_e".into(),
                        value: self.params["n_e"].clone(),
                        expected: format!("an integer <= N = {}", self.params["N"]),
                    });
                }
            }
            _ => {}
        }
        if matches!(self.verb, Verb::Stationary | Verb::Pnb)
            && self.text("model") == "fdnls"
            && !self.params.contains_key("alpha")
        {
            return Err(ConfigError::MissingKey { key: "alpha".into(), verb: self.verb });
        }
        if self.params.get("bc").map(String::as_str) == Some("periodic") && self.count("N") < 2 {
            return Err(ConfigError::OutOfRange {
                key: "N".into(),
                value: self.params["N"].clone(),
                expected: "an integer >= 2 for a periodic cell".into(),
            });
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    /// Validated real; panics only on a key missing from the verb's table.
    pub fn real(&self, key: &str) -> f64 {
        self.params[key].parse().expect("validated real")
    }

    pub fn count(&self, key: &str) -> usize {
        self.params[key].parse().expect("validated count")
    }

    pub fn text(&self, key: &str) -> &str {
        &self.params[key]
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        self.params[key]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().expect("validated list"))
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.params["seed"].parse().expect("validated seed")
    }

    pub fn format(&self) -> Format {
        match self.text("format") {
            "json" => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn output_path(&self) -> PathBuf {
        PathBuf::from(self.text("output_path"))
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.to_path_buf(), reason: e.to_string() })?;
    ExperimentConfig::resolve(RawConfig::from_text(&text, Some(path))?, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let raw = RawConfig::from_flat("# header\n\nverb = kmax # trailing\nA=0.5\n").unwrap();
        assert_eq!(raw.entries["verb"], "kmax");
        assert_eq!(raw.entries["A"], "0.5");
    }

    #[test]
    fn duplicate_key_is_a_syntax_error() {
        assert!(matches!(RawConfig::from_flat("a = 1\na = 2"), Err(ConfigError::Syntax { line: 2, .. })));
    }

    #[test]
    fn json_arrays_become_lists() {
        let raw = RawConfig::from_json(r#"{"verb": "unitary-gap", "alphas": [6, 8]}"#).unwrap();
        assert_eq!(raw.entries["alphas"], "6,8");
    }
}
