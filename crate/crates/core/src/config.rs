//! Scenario configuration files.
//!
//! The text format is one `key = value` pair per line with dotted keys, `#`
//! starting a comment:
//!
//! ```text
//! params.mu = 0.04
//! bathymetry.kind = gaussian
//! orders.amplitudes = 0.2, 0.1, 0.05, 0.025
//! ```
//!
//! A JSON document is accepted instead when the first non-blank character is
//! `{`; nested objects are flattened to the same dotted keys. Missing keys take
//! the values of [`Scenario::gaussian_bump`] and [`OrderConfig::default`].
//! Environment variables `BILAYER_GN_<KEY>` (key upper-cased, `.` replaced by
//! `_`) override file values.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagnostics::Thresholds;
use crate::fields::BathymetryProfile;
use crate::orders::OrderConfig;
use crate::scenario::{InitialProfile, Scenario};

pub const ENV_PREFIX: &str = "BILAYER_GN_";

const KEYS: &[&str] = &[
    "params.mu",
    "params.eps",
    "params.delta",
    "params.gamma",
    "params.beta",
    "params.bo_inv",
    "params.m",
    "params.nu0",
    "bounds.mu_max",
    "bounds.delta_min",
    "bounds.delta_max",
    "bounds.beta_max",
    "bounds.bo_inv_max",
    "grid.length",
    "grid.n",
    "bathymetry.kind",
    "bathymetry.center",
    "bathymetry.width",
    "bathymetry.height",
    "bathymetry.k",
    "initial.zeta.kind",
    "initial.zeta.amp",
    "initial.zeta.width",
    "initial.zeta.center",
    "initial.zeta.k",
    "initial.v.kind",
    "initial.v.amp",
    "initial.v.width",
    "initial.v.center",
    "initial.v.k",
    "control.cfl",
    "control.t",
    "control.snapshot_stride",
    "control.s_energy",
    "control.h01",
    "control.h02",
    "control.h03",
    "control.lambda_cap",
    "orders.amplitudes",
    "orders.expansion_n",
    "orders.form_ns",
    "orders.spatial_ns",
    "orders.temporal_dts",
    "orders.temporal_n",
    "orders.seed",
];

/// Problem with a configuration file, located by line when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Raw dotted key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    /// Parses either format.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_flat(text)
        }
    }

    pub fn parse_flat(text: &str) -> Result<Self, ParseError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = Some(i + 1);
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ParseError::at(lineno, format!("expected `key = value`, found `{content}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(ParseError::at(lineno, format!("missing value for `{key}`")));
            }
            raw.insert(key, value.to_string(), lineno)?;
        }
        Ok(raw)
    }

    pub fn parse_json(text: &str) -> Result<Self, ParseError> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ParseError::at(Some(e.line()), format!("invalid JSON: {e}")))?;
        let mut raw = RawConfig::default();
        flatten_json("", &doc, &mut raw)?;
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: String, line: Option<usize>) -> Result<(), ParseError> {
        let key = key.to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(ParseError::at(line, format!("unknown key `{key}`")));
        }
        if self.entries.contains_key(&key) {
            return Err(ParseError::at(line, format!("duplicate key `{key}`")));
        }
        self.entries.insert(key, Entry { value, line });
        Ok(())
    }

    /// Applies `BILAYER_GN_*` overrides from `vars`; variables without the prefix are ignored.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ParseError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (name, value) in vars {
            let Some(suffix) = name.as_ref().strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = KEYS
                .iter()
                .find(|k| k.to_ascii_uppercase().replace('.', "_") == suffix)
                .ok_or_else(|| {
                    ParseError::at(None, format!("unknown override {}", name.as_ref()))
                })?;
            self.entries.insert(
                key.to_string(),
                Entry {
                    value: value.as_ref().trim().to_string(),
                    line: None,
                },
            );
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    fn bad(&self, key: &str, what: &str) -> ParseError {
        ParseError::at(
            self.line(key),
            format!(
                "`{key}`: expected {what}, found `{}`",
                self.get(key).unwrap_or("")
            ),
        )
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ParseError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => parse_real(s).ok_or_else(|| self.bad(key, "a real number")),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ParseError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| self.bad(key, "a non-negative integer")),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ParseError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| self.bad(key, "a non-negative integer")),
        }
    }

    fn list_or<T: Clone>(
        &self,
        key: &str,
        default: &[T],
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Vec<T>, ParseError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .map(|item| parse(item.trim()))
                .collect::<Option<Vec<T>>>()
                .ok_or_else(|| self.bad(key, "a comma-separated list")),
        }
    }

    fn bathymetry(&self, default: BathymetryProfile) -> Result<BathymetryProfile, ParseError> {
        let (kind0, center0, width0, height0, k0) = match default {
            BathymetryProfile::Flat => ("flat", 0.0, 1.0, 0.0, 1.0),
            BathymetryProfile::Gaussian {
                center,
                width,
                height,
            } => ("gaussian", center, width, height, 1.0),
            BathymetryProfile::Sinusoid { k, height } => ("sinusoid", 0.0, 1.0, height, k),
        };
        let kind = self
            .get("bathymetry.kind")
            .unwrap_or(kind0)
            .to_ascii_lowercase();
        let height = self.f64_or("bathymetry.height", height0)?;
        match kind.as_str() {
            "flat" => Ok(BathymetryProfile::Flat),
            "gaussian" => Ok(BathymetryProfile::Gaussian {
                center: self.f64_or("bathymetry.center", center0)?,
                width: self.f64_or("bathymetry.width", width0)?,
                height,
            }),
            "sinusoid" => Ok(BathymetryProfile::Sinusoid {
                k: self.f64_or("bathymetry.k", k0)?,
                height,
            }),
            _ => Err(self.bad("bathymetry.kind", "one of flat, gaussian, sinusoid")),
        }
    }

    fn initial(&self, prefix: &str, default: InitialProfile) -> Result<InitialProfile, ParseError> {
        let key = |s: &str| format!("initial.{prefix}.{s}");
        let (amp0, width0, center0, k0) = match default {
            InitialProfile::Gaussian { amp, width, center } => (amp, width, center, 1.0),
            InitialProfile::Sinusoid { k, amp } => (amp, 1.0, 0.0, k),
            InitialProfile::Rest => (0.0, 1.0, 0.0, 1.0),
        };
        let kind_key = key("kind");
        let kind0 = match default {
            InitialProfile::Rest => "rest",
            InitialProfile::Gaussian { .. } => "gaussian",
            InitialProfile::Sinusoid { .. } => "sinusoid",
        };
        let kind = self.get(&kind_key).unwrap_or(kind0).to_ascii_lowercase();
        let amp = self.f64_or(&key("amp"), amp0)?;
        match kind.as_str() {
            "rest" => Ok(InitialProfile::Rest),
            "gaussian" => Ok(InitialProfile::Gaussian {
                amp,
                width: self.f64_or(&key("width"), width0)?,
                center: self.f64_or(&key("center"), center0)?,
            }),
            "sinusoid" => Ok(InitialProfile::Sinusoid {
                k: self.f64_or(&key("k"), k0)?,
                amp,
            }),
            _ => Err(self.bad(&kind_key, "one of rest, gaussian, sinusoid")),
        }
    }
}

/// Reals, plus `inf`/`infinity` for convenience.
fn parse_real(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Some(f64::INFINITY),
        t => t.parse().ok(),
    }
}

fn flatten_json(
    prefix: &str,
    value: &serde_json::Value,
    raw: &mut RawConfig,
) -> Result<(), ParseError> {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, raw)?;
            }
            Ok(())
        }
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(ParseError::at(
                        None,
                        format!("`{prefix}`: list entries must be numbers"),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            raw.insert(prefix, parts.join(","), None)
        }
        Value::Number(n) => raw.insert(prefix, n.to_string(), None),
        Value::String(s) => raw.insert(prefix, s.clone(), None),
        Value::Bool(_) | Value::Null => Err(ParseError::at(
            None,
            format!("`{prefix}`: unsupported value"),
        )),
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub orders: OrderConfig,
}

impl Config {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ParseError> {
        let base = Scenario::gaussian_bump();
        let mut s = base.clone();
        let p = &mut s.params;
        p.mu = raw.f64_or("params.mu", p.mu)?;
        p.eps = raw.f64_or("params.eps", p.eps)?;
        p.delta = raw.f64_or("params.delta", p.delta)?;
        p.gamma = raw.f64_or("params.gamma", p.gamma)?;
        p.beta = raw.f64_or("params.beta", p.beta)?;
        p.bo_inv = raw.f64_or("params.bo_inv", p.bo_inv)?;
        p.m = raw.f64_or("params.m", p.m)?;
        p.nu0 = raw.f64_or("params.nu0", p.nu0)?;
        let b = &mut p.bounds;
        b.mu_max = raw.f64_or("bounds.mu_max", b.mu_max)?;
        b.delta_min = raw.f64_or("bounds.delta_min", b.delta_min)?;
        b.delta_max = raw.f64_or("bounds.delta_max", b.delta_max)?;
        b.beta_max = raw.f64_or("bounds.beta_max", b.beta_max)?;
        b.bo_inv_max = raw.f64_or("bounds.bo_inv_max", b.bo_inv_max)?;

        s.grid.length = raw.f64_or("grid.length", s.grid.length)?;
        s.grid.n = raw.usize_or("grid.n", s.grid.n)?;
        s.bathymetry = raw.bathymetry(base.bathymetry)?;
        s.zeta0 = raw.initial("zeta", base.zeta0)?;
        s.v0 = raw.initial("v", base.v0)?;

        let c = &mut s.control;
        c.cfl = raw.f64_or("control.cfl", c.cfl)?;
        c.horizon = raw.f64_or("control.t", c.horizon)?;
        c.snapshot_stride = raw.usize_or("control.snapshot_stride", c.snapshot_stride)?;
        c.s_energy = raw.f64_or("control.s_energy", c.s_energy)?;
        c.thresholds = Thresholds {
            h01: raw.f64_or("control.h01", c.thresholds.h01)?,
            h02: raw.f64_or("control.h02", c.thresholds.h02)?,
            h03: raw.f64_or("control.h03", c.thresholds.h03)?,
        };
        c.lambda_cap = raw.f64_or("control.lambda_cap", c.lambda_cap)?;

        let d = OrderConfig::default();
        let orders = OrderConfig {
            amplitudes: raw.list_or("orders.amplitudes", &d.amplitudes, parse_real)?,
            expansion_n: raw.usize_or("orders.expansion_n", d.expansion_n)?,
            form_ns: raw.list_or("orders.form_ns", &d.form_ns, |s| s.parse().ok())?,
            spatial_ns: raw.list_or("orders.spatial_ns", &d.spatial_ns, |s| s.parse().ok())?,
            temporal_dts: raw.list_or("orders.temporal_dts", &d.temporal_dts, parse_real)?,
            temporal_n: raw.usize_or("orders.temporal_n", d.temporal_n)?,
            seed: raw.u64_or("orders.seed", d.seed)?,
        };
        Ok(Config {
            scenario: s,
            orders,
        })
    }

    /// Parses `text` and applies overrides from `env`.
    pub fn load<I, K, V>(text: &str, env: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut raw = RawConfig::parse(text)?;
        raw.apply_env(env)?;
        Self::from_raw(&raw)
    }
}
