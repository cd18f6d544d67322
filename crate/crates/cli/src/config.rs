//! Line-based `key = value` run configuration.
//!
//! Unknown keys are rejected and every error carries its line number.
//! Derived quantities (omega, the boundary time, C1) are computed, never
//! user-supplied; the only expert override is a multiplicative `c1_scale`
//! used for negative-control experiments.

use std::fmt;

use undulator_core::{PhysicalParams, PropagationConfig, DEFAULT_OVERFLOW_BOUND};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

/// Fully validated run configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass: f64,
    pub charge: f64,
    pub hbar: f64,
    pub field: f64,
    pub alpha_entry: f64,
    pub n_periods: usize,
    /// Absent means "one boundary time", the recipe default.
    pub drift_duration: Option<f64>,
    pub samples_per_region: usize,
    pub interface_tol: f64,
    pub uncertainty_tol: f64,
    pub oracle_tol: f64,
    pub oracle_dt: f64,
    pub grid_check: bool,
    pub oracle_check: bool,
    pub grid_points: usize,
    pub grid_extent: f64,
    pub c1_scale: f64,
    pub trajectory_csv: String,
    pub summary_json: String,
    pub psi_density_csv: Option<String>,
}

impl RunConfig {
    pub fn defaults_with_required(
        mass: f64,
        charge: f64,
        field: f64,
        alpha_entry: f64,
        n_periods: usize,
    ) -> Self {
        Self {
            mass,
            charge,
            hbar: 1.0,
            field,
            alpha_entry,
            n_periods,
            drift_duration: None,
            samples_per_region: 50,
            interface_tol: 1e-10,
            uncertainty_tol: 1e-12,
            oracle_tol: 1e-8,
            oracle_dt: 1e-3,
            grid_check: true,
            oracle_check: true,
            grid_points: 256,
            grid_extent: 8.0,
            c1_scale: 1.0,
            trajectory_csv: "trajectory.csv".into(),
            summary_json: "summary.json".into(),
            psi_density_csv: None,
        }
    }

    pub fn propagation(&self) -> Result<PropagationConfig, ConfigError> {
        let params = PhysicalParams::new(self.mass, self.charge, self.hbar)
            .map_err(|e| ConfigError { line: None, message: e.to_string() })?;
        Ok(PropagationConfig {
            params,
            field: self.field,
            alpha_entry: self.alpha_entry,
            n_periods: self.n_periods,
            drift_duration: self.drift_duration,
            samples_per_region: self.samples_per_region,
            c1_scale: self.c1_scale,
            interface_tol: self.interface_tol,
            overflow_bound: DEFAULT_OVERFLOW_BOUND,
        })
    }

    /// Serializes back to config text; parsing the result reproduces the
    /// identical configuration.
    #[allow(dead_code)] // exercised by the round-trip tests
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mass = {}\n", self.mass));
        out.push_str(&format!("charge = {}\n", self.charge));
        out.push_str(&format!("hbar = {}\n", self.hbar));
        out.push_str(&format!("field = {}\n", self.field));
        out.push_str(&format!("alpha_I = {}\n", self.alpha_entry));
        out.push_str(&format!("periods = {}\n", self.n_periods));
        if let Some(d) = self.drift_duration {
            out.push_str(&format!("drift_duration = {d}\n"));
        }
        out.push_str(&format!("samples_per_region = {}\n", self.samples_per_region));
        out.push_str(&format!("interface_tol = {}\n", self.interface_tol));
        out.push_str(&format!("uncertainty_tol = {}\n", self.uncertainty_tol));
        out.push_str(&format!("oracle_tol = {}\n", self.oracle_tol));
        out.push_str(&format!("oracle_dt = {}\n", self.oracle_dt));
        out.push_str(&format!("grid_check = {}\n", self.grid_check));
        out.push_str(&format!("oracle_check = {}\n", self.oracle_check));
        out.push_str(&format!("grid_points = {}\n", self.grid_points));
        out.push_str(&format!("grid_extent = {}\n", self.grid_extent));
        out.push_str(&format!("c1_scale = {}\n", self.c1_scale));
        out.push_str(&format!("trajectory_csv = {}\n", self.trajectory_csv));
        out.push_str(&format!("summary_json = {}\n", self.summary_json));
        if let Some(p) = &self.psi_density_csv {
            out.push_str(&format!("psi_density_csv = {p}\n"));
        }
        out
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key} expects a number, got '{value}'")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse::<usize>()
        .map_err(|_| err(line, format!("{key} expects a non-negative integer, got '{value}'")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(err(line, format!("{key} expects true/false, got '{value}'"))),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut mass = None;
    let mut charge = None;
    let mut field = None;
    let mut alpha_entry = None;
    let mut periods = None;
    let mut cfg = RunConfig::defaults_with_required(f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0);

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(n, format!("expected 'key = value', got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "mass" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("mass must be > 0, got {v}")));
                }
                mass = Some(v);
            }
            "charge" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("charge must be > 0, got {v}")));
                }
                charge = Some(v);
            }
            "hbar" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("hbar must be > 0, got {v}")));
                }
                cfg.hbar = v;
            }
            "field" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("field must be > 0, got {v}")));
                }
                field = Some(v);
            }
            "alpha_I" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("alpha_I must be > 0, got {v}")));
                }
                alpha_entry = Some(v);
            }
            "periods" => {
                let v = parse_usize(n, key, value)?;
                if v == 0 {
                    return Err(err(n, "periods must be >= 1"));
                }
                periods = Some(v);
            }
            "drift_duration" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("drift_duration must be > 0, got {v}")));
                }
                cfg.drift_duration = Some(v);
            }
            "samples_per_region" => {
                let v = parse_usize(n, key, value)?;
                if v < 2 {
                    return Err(err(n, "samples_per_region must be >= 2"));
                }
                cfg.samples_per_region = v;
            }
            "interface_tol" | "uncertainty_tol" | "oracle_tol" | "oracle_dt" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("{key} must be > 0, got {v}")));
                }
                match key {
                    "interface_tol" => cfg.interface_tol = v,
                    "uncertainty_tol" => cfg.uncertainty_tol = v,
                    "oracle_tol" => cfg.oracle_tol = v,
                    _ => cfg.oracle_dt = v,
                }
            }
            "grid_check" => cfg.grid_check = parse_bool(n, key, value)?,
            "oracle_check" => cfg.oracle_check = parse_bool(n, key, value)?,
            "grid_points" => {
                let v = parse_usize(n, key, value)?;
                if v < 16 {
                    return Err(err(n, "grid_points must be >= 16"));
                }
                cfg.grid_points = v;
            }
            "grid_extent" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("grid_extent must be > 0, got {v}")));
                }
                cfg.grid_extent = v;
            }
            "c1_scale" => {
                let v = parse_f64(n, key, value)?;
                if v <= 0.0 {
                    return Err(err(n, format!("c1_scale must be > 0, got {v}")));
                }
                cfg.c1_scale = v;
            }
            "trajectory_csv" => cfg.trajectory_csv = value.to_string(),
            "summary_json" => cfg.summary_json = value.to_string(),
            "psi_density_csv" => cfg.psi_density_csv = Some(value.to_string()),
            _ => return Err(err(n, format!("unknown key '{key}'"))),
        }
    }

    let mass = mass.ok_or(ConfigError { line: None, message: "mass is required".into() })?;
    let charge = charge.ok_or(ConfigError { line: None, message: "charge is required".into() })?;
    let field = field.ok_or(ConfigError { line: None, message: "field is required".into() })?;
    let alpha_entry =
        alpha_entry.ok_or(ConfigError { line: None, message: "alpha_I is required".into() })?;
    let periods = periods.ok_or(ConfigError { line: None, message: "periods is required".into() })?;

    cfg.mass = mass;
    cfg.charge = charge;
    cfg.field = field;
    cfg.alpha_entry = alpha_entry;
    cfg.n_periods = periods;
    Ok(cfg)
}
