use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::basis::{DiscretizationOrder, MAX_DEGREE, MAX_TEMPORAL_DEGREE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("`{key}` = {value} out of range: {reason}")]
    Range {
        key: String,
        value: String,
        reason: String,
    },
    #[error("reading config: {0}")]
    Io(String),
}

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Default,
    File,
    Cli,
    /// Computed from other keys (`n_pic` from `p_gamma`).
    Derived,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshSource {
    /// Structured periodic mesh of `[-pi, pi]^2` with `n x n` cells.
    Generate(usize),
    File(PathBuf),
}

/// Fully resolved run parameters. Every field is echoed into `run.json`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub p: usize,
    pub p_gamma: usize,
    pub nu: f64,
    pub cfl: f64,
    pub n_pic: usize,
    pub t_end: f64,
    pub mesh: MeshSource,
    pub periodic: bool,
    pub out: PathBuf,
    pub momentum_tol: f64,
    pub pressure_tol: f64,
    pub max_iter: usize,
    pub vtk: bool,
    pub log_picard: bool,
    pub provenance: BTreeMap<String, Provenance>,
}

const KEYS: &[&str] = &[
    "p",
    "p_gamma",
    "nu",
    "cfl",
    "n_pic",
    "t_end",
    "mesh",
    "gen",
    "periodic",
    "out",
    "momentum_tol",
    "pressure_tol",
    "max_iter",
    "vtk",
    "log_picard",
];

impl Default for RunConfig {
    fn default() -> Self {
        let provenance = KEYS
            .iter()
            .filter(|k| **k != "gen")
            .map(|k| (k.to_string(), Provenance::Default))
            .collect();
        let mut c = RunConfig {
            p: 2,
            p_gamma: 2,
            nu: 0.1,
            cfl: 0.4,
            n_pic: 3,
            t_end: 0.1,
            mesh: MeshSource::Generate(6),
            periodic: true,
            out: PathBuf::from("out"),
            momentum_tol: 1e-12,
            pressure_tol: 1e-10,
            max_iter: 5000,
            vtk: true,
            log_picard: false,
            provenance,
        };
        c.provenance.insert("n_pic".into(), Provenance::Derived);
        c
    }
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: value.into(),
    })
}

fn range(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Set one key. `n_pic` follows `p_gamma` until it is set explicitly.
    pub fn set(&mut self, key: &str, value: &str, source: Provenance) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "p" => {
                let p: usize = parse(key, value)?;
                if !(1..=MAX_DEGREE).contains(&p) {
                    return Err(range(
                        key,
                        value,
                        format!("spatial degree cap is 1..={MAX_DEGREE}"),
                    ));
                }
                self.p = p;
            }
            "p_gamma" | "pgamma" => {
                let pg: usize = parse(key, value)?;
                if pg > MAX_TEMPORAL_DEGREE {
                    return Err(range(
                        key,
                        value,
                        format!("temporal degree cap is 0..={MAX_TEMPORAL_DEGREE}"),
                    ));
                }
                self.p_gamma = pg;
                if self.provenance.get("n_pic") == Some(&Provenance::Derived) {
                    self.n_pic = pg + 1;
                }
            }
            "nu" => {
                let nu: f64 = parse(key, value)?;
                if !(nu >= 0.0 && nu.is_finite()) {
                    return Err(range(
                        key,
                        value,
                        "viscosity must be finite and non-negative",
                    ));
                }
                self.nu = nu;
            }
            "cfl" => {
                let cfl: f64 = parse(key, value)?;
                if !(cfl > 0.0 && cfl.is_finite()) {
                    return Err(range(key, value, "CFL must be positive"));
                }
                self.cfl = cfl;
            }
            "n_pic" => {
                let n: usize = parse(key, value)?;
                if n == 0 {
                    return Err(range(key, value, "at least one Picard iteration"));
                }
                self.n_pic = n;
            }
            "t_end" | "tend" => {
                let t: f64 = parse(key, value)?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(range(key, value, "final time must be positive"));
                }
                self.t_end = t;
            }
            "mesh" => {
                self.mesh = MeshSource::File(PathBuf::from(value));
                self.provenance.insert("mesh".into(), source);
                return Ok(());
            }
            "gen" => {
                let n: usize = parse(key, value)?;
                if n == 0 {
                    return Err(range(key, value, "generator level must be positive"));
                }
                self.mesh = MeshSource::Generate(n);
                self.provenance.insert("mesh".into(), source);
                return Ok(());
            }
            "periodic" => self.periodic = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "momentum_tol" | "pressure_tol" => {
                let tol: f64 = parse(key, value)?;
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(range(key, value, "tolerance must lie in (0, 1)"));
                }
                if key == "momentum_tol" {
                    self.momentum_tol = tol;
                } else {
                    self.pressure_tol = tol;
                }
            }
            "max_iter" => {
                self.max_iter = parse(key, value)?;
                if self.max_iter == 0 {
                    return Err(range(key, value, "at least one iteration"));
                }
            }
            "vtk" => self.vtk = parse(key, value)?,
            "log_picard" => self.log_picard = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        let canonical = match key {
            "pgamma" => "p_gamma",
            "tend" => "t_end",
            k => k,
        };
        self.provenance.insert(canonical.into(), source);
        Ok(())
    }

    pub fn order(&self) -> DiscretizationOrder {
        DiscretizationOrder::new(self.p, self.p_gamma).expect("validated by set")
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        parse_config(&text, overrides)
    }
}

/// Resolve a `key = value` config text (`#` starts a comment) and then the
/// command-line overrides, which win.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        config.set(key.trim(), value, Provenance::File)?;
    }
    for (key, value) in overrides {
        config.set(key, value, Provenance::Cli)?;
    }
    Ok(config)
}
