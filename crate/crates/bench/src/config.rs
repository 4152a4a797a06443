//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use emacfem::problems::ProblemKind;
use emacfem::{ConvectionForm, SchemeKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("missing {key}: {choices}")]
    Missing { key: &'static str, choices: String },
    #[error("invalid {key} {value:?}: {reason}")]
    Invalid {
        key: &'static str,
        value: String,
        reason: String,
    },
}

/// Keys accepted in a config file and as overrides.
pub const KEYS: [&str; 12] = [
    "problem",
    "scheme",
    "form",
    "nx",
    "ny",
    "dt",
    "t_end",
    "nu",
    "grad_div",
    "out",
    "vtk_stride",
    "deterministic",
];

/// Parse `key = value` lines. Blank lines and `#` comments are skipped;
/// later keys override earlier ones.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let k = k.trim().replace('-', "_");
        let v = v.trim();
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        map.insert(k, v.to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub scheme: SchemeKind,
    pub form: ConvectionForm,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub nu: f64,
    pub grad_div: f64,
    pub out: PathBuf,
    /// Write a VTK snapshot every this many steps.
    pub vtk_stride: Option<usize>,
    /// Accepted for reproducibility records; assembly is always sequential.
    pub deterministic: bool,
}

fn required<T: FromStr>(
    map: &BTreeMap<String, String>,
    key: &'static str,
    choices: &str,
) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let v = map.get(key).ok_or_else(|| ConfigError::Missing {
        key,
        choices: choices.to_string(),
    })?;
    v.parse().map_err(|e: T::Err| ConfigError::Invalid {
        key,
        value: v.clone(),
        reason: e.to_string(),
    })
}

fn optional<T: FromStr>(
    map: &BTreeMap<String, String>,
    key: &'static str,
) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.parse().map_err(|e: T::Err| ConfigError::Invalid {
                key,
                value: v.clone(),
                reason: e.to_string(),
            })
        })
        .transpose()
}

fn choices<T: std::fmt::Display>(all: impl IntoIterator<Item = T>) -> String {
    let names: Vec<String> = all.into_iter().map(|x| x.to_string()).collect();
    format!("expected one of {{{}}}", names.join(", "))
}

impl RunConfig {
    /// Resolve a key map, filling mesh, step and physics defaults from the
    /// problem's desk-scale preset.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let problem: ProblemKind = required(map, "problem", &choices(ProblemKind::ALL))?;
        let scheme: SchemeKind = required(map, "scheme", &choices(SchemeKind::ALL))?;
        let form: ConvectionForm = required(map, "form", &choices(ConvectionForm::ALL))?;
        let spec = problem.spec();
        let nx = optional(map, "nx")?.unwrap_or(spec.desk.nx);
        let ny = optional(map, "ny")?.unwrap_or_else(|| {
            if map.contains_key("nx") {
                let aspect = spec.domain.height() / spec.domain.width();
                ((nx as f64 * aspect).round() as usize).max(1)
            } else {
                spec.desk.ny
            }
        });
        let cfg = Self {
            problem,
            scheme,
            form,
            nx,
            ny,
            dt: optional(map, "dt")?.unwrap_or(spec.desk.dt),
            t_end: optional(map, "t_end")?.unwrap_or(spec.desk.t_end),
            nu: optional(map, "nu")?.unwrap_or(spec.nu),
            grad_div: optional(map, "grad_div")?.unwrap_or(spec.grad_div),
            out: optional(map, "out")?.unwrap_or_else(|| PathBuf::from("out")),
            vtk_stride: optional(map, "vtk_stride")?.filter(|&s: &usize| s > 0),
            deterministic: optional(map, "deterministic")?.unwrap_or(false),
        };
        if cfg.nx == 0 || cfg.ny == 0 {
            return Err(ConfigError::Invalid {
                key: "nx",
                value: format!("{}x{}", cfg.nx, cfg.ny),
                reason: "mesh needs at least one cell per direction".into(),
            });
        }
        Ok(cfg)
    }

    /// Config file text that reproduces this run.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("problem", &self.problem);
        put("scheme", &self.scheme);
        put("form", &self.form);
        put("nx", &self.nx);
        put("ny", &self.ny);
        put("dt", &self.dt);
        put("t_end", &self.t_end);
        put("nu", &self.nu);
        put("grad_div", &self.grad_div);
        put("out", &self.out.display());
        if let Some(k) = self.vtk_stride {
            put("vtk_stride", &k);
        }
        put("deterministic", &self.deterministic);
        s
    }
}
