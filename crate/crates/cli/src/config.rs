//! Run configuration: a strict JSON document whose defaults are echoed into
//! every report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

/// A strictly positive, finite tolerance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(v: f64) -> Result<Self, String> {
        if v.is_finite() && v > 0.0 {
            Ok(Tolerance(v))
        } else {
            Err(format!("tolerance must be positive and finite, got {v}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Tolerance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Tolerance::new(v).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Tolerance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
        Tolerance::new(v)
    }
}

/// Check groups of `verify-all`, named after the library modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Picard,
    Aklines,
    Nodal,
    Delliptic,
    Weylmetrics,
}

impl Module {
    pub const ALL: [Module; 5] = [
        Module::Picard,
        Module::Aklines,
        Module::Nodal,
        Module::Delliptic,
        Module::Weylmetrics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Picard => "picard",
            Module::Aklines => "aklines",
            Module::Nodal => "nodal",
            Module::Delliptic => "delliptic",
            Module::Weylmetrics => "weylmetrics",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Module {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Module::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Module::ALL.iter().map(|m| m.name()).collect();
                format!("unknown module {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Parses `picard,nodal` into a sorted, deduplicated module list.
pub fn parse_module_list(s: &str) -> Result<Vec<Module>, String> {
    let mut out = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(Module::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("empty module list".to_string());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// A `--only` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleList(pub Vec<Module>);

impl FromStr for ModuleList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_module_list(s).map(ModuleList)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Largest `ℓ` of the `A(2ℓ−1)` rows.
    pub ell_max: u32,
    /// Largest `k` of the `D(k)` rows.
    pub k_max: u32,
    /// Largest `k` for the blow-up cross-check.
    pub blowup_k_max: u32,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            ell_max: 6,
            k_max: 10,
            blowup_k_max: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AklinesConfig {
    pub k_max: usize,
    pub draws: usize,
    pub tol: Tolerance,
}

impl Default for AklinesConfig {
    fn default() -> Self {
        AklinesConfig {
            k_max: 6,
            draws: 200,
            tol: Tolerance(1e-10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodalConfig {
    /// Restricts the run to one `ℓ`; by default the seeded cases are
    /// `ℓ = 2, 3` and the oracle cases `ℓ = 2..=oracle_ell_max`.
    pub ell: Option<usize>,
    pub oracle_ell_max: usize,
    pub oracles_per_ell: usize,
    pub tol: Tolerance,
    /// Smallest accepted ratio between kept and discarded singular values.
    pub min_gap: f64,
}

impl Default for NodalConfig {
    fn default() -> Self {
        NodalConfig {
            ell: None,
            oracle_ell_max: 5,
            oracles_per_ell: 3,
            tol: Tolerance(1e-10),
            min_gap: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DellipticConfig {
    pub moduli: usize,
    pub divisors: usize,
    pub tol: Tolerance,
}

impl Default for DellipticConfig {
    fn default() -> Self {
        DellipticConfig {
            moduli: 20,
            divisors: 3,
            tol: Tolerance(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// Finite-difference step.
    pub h: Tolerance,
    pub ricci_tol: Tolerance,
    pub min_slope: f64,
    pub moment_samples: usize,
    pub moment_tol: Tolerance,
    pub kappa_tol: Tolerance,
    pub hyperbolic_tol: Tolerance,
    pub toda_tol: Tolerance,
    pub weyl_tol: Tolerance,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            h: Tolerance(1e-3),
            ricci_tol: Tolerance(1e-6),
            min_slope: 1.9,
            moment_samples: 50,
            moment_tol: Tolerance(4.0 * f64::EPSILON),
            kappa_tol: Tolerance(1e-14),
            hyperbolic_tol: Tolerance(1e-5),
            toda_tol: Tolerance(1e-10),
            weyl_tol: Tolerance(1e-10),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// When set, replaces every upper-bound tolerance.
    pub tol: Option<Tolerance>,
    pub seed: u64,
    pub only: Option<Vec<Module>>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub picard: PicardConfig,
    pub aklines: AklinesConfig,
    pub nodal: NodalConfig,
    pub delliptic: DellipticConfig,
    pub weylmetrics: MetricsConfig,
}

impl RunConfig {
    /// Modules selected for the run, in canonical order.
    pub fn modules(&self) -> Vec<Module> {
        match &self.only {
            Some(list) => {
                let mut v = list.clone();
                v.sort();
                v.dedup();
                v
            }
            None => Module::ALL.to_vec(),
        }
    }

    /// `t` unless a global override is set.
    pub fn tol(&self, t: Tolerance) -> f64 {
        self.tol.unwrap_or(t).get()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: &str| ConfigError::Invalid {
            field: field.to_string(),
            message: message.to_string(),
        };
        if matches!(&self.only, Some(v) if v.is_empty()) {
            return Err(invalid("only", "module list is empty"));
        }
        if let Some(ell) = self.nodal.ell {
            if !(2..=8).contains(&ell) {
                return Err(invalid("nodal.ell", "must lie in 2..=8"));
            }
        }
        if self.nodal.oracle_ell_max > 8 {
            return Err(invalid("nodal.oracle_ell_max", "must be at most 8"));
        }
        if self.picard.ell_max == 0 || self.picard.k_max < 4 || self.picard.blowup_k_max < 4 {
            return Err(invalid("picard", "need ell_max >= 1, k_max >= 4 and blowup_k_max >= 4"));
        }
        if !(self.nodal.min_gap.is_finite() && self.nodal.min_gap > 0.0) {
            return Err(invalid("nodal.min_gap", "must be positive"));
        }
        if !self.weylmetrics.min_slope.is_finite() {
            return Err(invalid("weylmetrics.min_slope", "must be finite"));
        }
        if self.weylmetrics.h.get() > 0.05 {
            return Err(invalid("weylmetrics.h", "must be at most 0.05"));
        }
        Ok(())
    }
}

/// Strict parse of a run configuration; `source_name` labels diagnostics.
pub fn parse_config(text: &str, source_name: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        source_name: source_name.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text, &path.display().to_string())
}

// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(parse_config("{}", "cfg").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_tolerance_is_rejected_with_position() {
        let err = parse_config("{\n  \"tol\": -1\n}", "cfg").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert!(line >= 2, "{line}");
                assert!(message.contains("positive"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_config(r#"{"nodal": {"ell": 2, "typo": 1}}"#, "cfg").unwrap_err();
        assert!(err.to_string().contains("typo"), "{err}");
        assert!(parse_config(r#"{"bogus": true}"#, "cfg").is_err());
    }

    #[test]
    fn restricted_run() {
        let cfg = parse_config(r#"{"only": ["nodal"], "nodal": {"ell": 2}}"#, "cfg").unwrap();
        assert_eq!(cfg.modules(), vec![Module::Nodal]);
        assert_eq!(cfg.nodal.ell, Some(2));
    }

    #[test]
    fn module_lists() {
        assert_eq!(
            parse_module_list("weylmetrics,picard,picard").unwrap(),
            vec![Module::Picard, Module::Weylmetrics]
        );
        assert!(parse_module_list("picard,metric").is_err());
        assert!(parse_module_list("").is_err());
    }

    #[test]
    fn global_override_wins() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.tol(cfg.aklines.tol), 1e-10);
        cfg.tol = Some(Tolerance::new(1e-3).unwrap());
        assert_eq!(cfg.tol(cfg.aklines.tol), 1e-3);
    }
}
