use std::path::{Path, PathBuf};

use binormal_core::frame::Frame;
use binormal_core::io::FORMAT_VERSION;
use binormal_core::spectral::{TaperConfig, MIN_WINDOW_SAMPLES};
use binormal_core::AlphaSequence;
use serde::{Deserialize, Serialize};

fn default_version() -> u32 {
    FORMAT_VERSION
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_max_steps() -> usize {
    5_000_000
}
fn default_half_domain() -> f64 {
    30.0
}
fn default_grid_h() -> f64 {
    0.005
}
fn default_taper_fraction() -> f64 {
    0.25
}
fn default_taper_margin() -> f64 {
    2.0
}
fn default_k_min() -> i64 {
    8
}
fn default_k_max() -> i64 {
    14
}
fn default_samples() -> usize {
    65
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub alphas: AlphaSequence,
    pub t_start: f64,
    pub t_end: f64,
    /// Defaults to `[t_end]`.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_rel_tol")]
    pub ode_rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub ode_abs_tol: f64,
    #[serde(default = "default_max_steps")]
    pub ode_max_steps: usize,
    #[serde(default = "default_half_domain")]
    pub x_half_domain: f64,
    #[serde(default = "default_grid_h")]
    pub grid_h: f64,
    #[serde(default = "default_taper_fraction")]
    pub taper_fraction: f64,
    #[serde(default = "default_taper_margin")]
    pub taper_margin: f64,
    #[serde(default = "default_k_min")]
    pub k_min: i64,
    #[serde(default = "default_k_max")]
    pub k_max: i64,
    #[serde(default = "default_samples")]
    pub xi_samples_per_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_frame: Option<Frame>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// Settings the `energy` and `reconstruct` commands read when no config is given.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSettings {
    pub x_half_domain: f64,
    pub grid_h: f64,
    pub taper: TaperConfig,
    pub k_min: i64,
    pub k_max: i64,
    pub samples: usize,
    pub seed: Frame,
}

impl Default for SliceSettings {
    fn default() -> Self {
        Self {
            x_half_domain: default_half_domain(),
            grid_h: default_grid_h(),
            taper: TaperConfig {
                half_width: default_half_domain(),
                taper_fraction: default_taper_fraction(),
                margin: default_taper_margin(),
            },
            k_min: default_k_min(),
            k_max: default_k_max(),
            samples: default_samples(),
            seed: Frame::canonical(),
        }
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> String {
    format!("{field}: {msg}")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn times(&self) -> Vec<f64> {
        if self.snapshot_times.is_empty() {
            vec![self.t_end]
        } else {
            self.snapshot_times.clone()
        }
    }

    pub fn seed(&self) -> Frame {
        self.seed_frame.unwrap_or_else(Frame::canonical)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_err("format_version", format!("expected {FORMAT_VERSION}, got {}", self.format_version)));
        }
        if !(self.t_start > 0.0) {
            return Err(field_err("t_start", format!("must be > 0, got {}", self.t_start)));
        }
        if !(self.t_end >= self.t_start) {
            return Err(field_err("t_end", format!("must be >= t_start, got {}", self.t_end)));
        }
        let times = self.times();
        if times.iter().any(|&t| !(t >= self.t_start && t <= self.t_end)) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field_err("snapshot_times", "must be strictly increasing within [t_start, t_end]"));
        }
        if !(self.ode_rel_tol > 0.0) {
            return Err(field_err("ode_rel_tol", "must be > 0"));
        }
        if !(self.ode_abs_tol > 0.0) {
            return Err(field_err("ode_abs_tol", "must be > 0"));
        }
        if self.ode_max_steps == 0 {
            return Err(field_err("ode_max_steps", "must be >= 1"));
        }
        if !(self.x_half_domain > 0.0) {
            return Err(field_err("x_half_domain", "must be > 0"));
        }
        if !(self.grid_h > 0.0 && self.grid_h < self.x_half_domain) {
            return Err(field_err("grid_h", "must lie in (0, x_half_domain)"));
        }
        if !(self.taper_fraction > 0.0 && self.taper_fraction <= 0.25) {
            return Err(field_err("taper_fraction", "must lie in (0, 0.25]"));
        }
        if !(self.taper_margin >= 0.0) {
            return Err(field_err("taper_margin", "must be >= 0"));
        }
        if self.k_max < self.k_min {
            return Err(field_err("k_max", "must be >= k_min"));
        }
        if self.xi_samples_per_window < MIN_WINDOW_SAMPLES || self.xi_samples_per_window.is_multiple_of(2) {
            return Err(field_err(
                "xi_samples_per_window",
                format!("must be odd and >= {MIN_WINDOW_SAMPLES}"),
            ));
        }
        if let Some(seed) = &self.seed_frame {
            seed.validate(1e-12).map_err(|e| field_err("seed_frame", e))?;
        }
        Ok(())
    }

    pub fn slice_settings(&self) -> SliceSettings {
        SliceSettings {
            x_half_domain: self.x_half_domain,
            grid_h: self.grid_h,
            taper: TaperConfig {
                half_width: self.x_half_domain,
                taper_fraction: self.taper_fraction,
                margin: self.taper_margin,
            },
            k_min: self.k_min,
            k_max: self.k_max,
            samples: self.xi_samples_per_window,
            seed: self.seed(),
        }
    }
}
