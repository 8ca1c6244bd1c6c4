//! Run configuration: defaults, an optional `key = value` file, then flags.
//!
//! File grammar: one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored; keys are the long flag names with `-` or `_`.

use std::fs;
use std::path::{Path, PathBuf};

use lo_dynamics::integrator::{IntegratorConfig, ShootConfig};

pub const CONFIG_ENV: &str = "LO_DYNAMICS_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut f = Formats {
            json: false,
            csv: false,
            svg: false,
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "json" => f.json = true,
                "csv" => f.csv = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown output format '{other}'")),
            }
        }
        if !(f.json || f.csv || f.svg) {
            return Err("at least one output format is required".into());
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rtol: f64,
    pub atol: f64,
    pub conv_tol: f64,
    pub event_tol: f64,
    pub max_step: f64,
    pub eps: f64,
    pub t_max: f64,
    pub max_crossings: usize,
    pub grid: usize,
    pub samples: usize,
    pub fd_step: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub jobs: usize,
    pub allow_inadmissible: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let shoot = ShootConfig::default();
        Self {
            rtol: shoot.integrator.rtol,
            atol: shoot.integrator.atol,
            conv_tol: shoot.conv_tol,
            event_tol: shoot.event_tol,
            max_step: shoot.integrator.max_step,
            eps: shoot.eps,
            t_max: shoot.t_max,
            max_crossings: shoot.max_crossings,
            grid: 400,
            samples: 100,
            fd_step: 1e-5,
            seed: 2024,
            out_dir: PathBuf::from("."),
            formats: Formats {
                json: true,
                csv: true,
                svg: true,
            },
            jobs: 1,
            allow_inadmissible: false,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value '{value}' for '{key}'"))
}

fn boolean(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid boolean '{value}' for '{key}'")),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key_norm = key.trim().replace('-', "_");
        let value = value.trim();
        match key_norm.as_str() {
            "rtol" => self.rtol = num(key, value)?,
            "atol" => self.atol = num(key, value)?,
            "conv_tol" => self.conv_tol = num(key, value)?,
            "event_tol" => self.event_tol = num(key, value)?,
            "max_step" => self.max_step = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "t_max" => self.t_max = num(key, value)?,
            "max_crossings" => self.max_crossings = num(key, value)?,
            "grid" => self.grid = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "fd_step" => self.fd_step = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "formats" => self.formats = Formats::parse(value)?,
            "jobs" => self.jobs = num(key, value)?,
            "allow_inadmissible" => self.allow_inadmissible = boolean(key, value)?,
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(k, v).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("conv_tol", self.conv_tol),
            ("event_tol", self.event_tol),
            ("max_step", self.max_step),
            ("eps", self.eps),
            ("fd_step", self.fd_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        if self.grid < 2 || self.samples == 0 {
            return Err("grid must be >= 2 and samples >= 1".into());
        }
        Ok(())
    }

    pub fn shoot_config(&self) -> ShootConfig {
        ShootConfig {
            eps: self.eps,
            t_max: self.t_max,
            max_crossings: self.max_crossings,
            conv_tol: self.conv_tol,
            event_tol: self.event_tol,
            integrator: IntegratorConfig {
                rtol: self.rtol,
                atol: self.atol,
                max_step: self.max_step,
                ..IntegratorConfig::default()
            },
        }
    }
}
