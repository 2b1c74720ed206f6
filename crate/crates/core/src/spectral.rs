//! Fourier transforms of `T_x` and `N_x` in `x`, windowed energies
//!
//! ```text
//! T_x^(t, xi) = int e^{2 pi i x xi} Re(conj(u) N)(t, x) dx
//! Xi_k        = int_k^{k+1} |T_x^(t, xi)|^2 dxi
//! ```
//!
//! and the diagnostics near the lattice `4 pi xi in Z / t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Result};
use crate::field::{sample_unchecked, Modes};
use crate::frame::{CVec3, FrameField, Grid, Vec3};

/// Truncation of the `x` integral to `[-L, L]` with a raised-cosine edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperConfig {
    pub half_width: f64,
    pub taper_fraction: f64,
    pub margin: f64,
}

impl TaperConfig {
    pub fn new(half_width: f64, taper_fraction: f64, margin: f64) -> Result<Self> {
        let cfg = Self { half_width, taper_fraction, margin };
        if !(half_width > 0.0) {
            return Err(argument(format!("taper half width must be > 0, got {half_width}")));
        }
        if !(taper_fraction > 0.0 && taper_fraction <= 0.25) {
            return Err(argument(format!("taper fraction must lie in (0, 0.25], got {taper_fraction}")));
        }
        if !(margin >= 0.0) {
            return Err(argument(format!("taper margin must be >= 0, got {margin}")));
        }
        Ok(cfg)
    }

    /// Edge of the untapered core.
    pub fn core(&self) -> f64 {
        self.half_width * (1.0 - self.taper_fraction)
    }

    /// Smallest half width keeping every stationary point `j +- 4 pi t xi` in the core.
    pub fn required_half_width(&self, t: f64, max_corner: f64, xi_max: f64) -> f64 {
        (max_corner + 4.0 * PI * t * xi_max + self.margin) / (1.0 - self.taper_fraction)
    }

    pub fn check(&self, t: f64, max_corner: f64, xi_max: f64) -> Result<()> {
        let need = self.required_half_width(t, max_corner, xi_max);
        if self.half_width < need {
            return Err(argument(format!(
                "half width L = {} clips stationary points for |xi| <= {xi_max} at t = {t}; need L >= {need:.6}",
                self.half_width
            )));
        }
        Ok(())
    }

    pub fn weight(&self, x: f64) -> f64 {
        let core = self.core();
        let a = x.abs();
        if a <= core {
            1.0
        } else if a >= self.half_width {
            0.0
        } else {
            0.5 * (1.0 + (PI * (a - core) / (self.half_width - core)).cos())
        }
    }
}

/// Trapezoid sums `h sum_i w(x_i) f_i e^{2 pi i x_i xi}` for every `xi`.
///
/// Phases advance by complex multiplication and are resynchronized from the
/// exact value every 256 nodes.
pub fn tapered_transform(grid: &Grid, integrand: &[CVec3], xis: &[f64], taper: &TaperConfig) -> Result<Vec<CVec3>> {
    if integrand.len() != grid.len {
        return Err(argument(format!(
            "integrand has {} samples for a grid of {} nodes",
            integrand.len(),
            grid.len
        )));
    }
    let lo = grid.start.max(-taper.half_width);
    let hi = grid.end().min(taper.half_width);
    if grid.start > -taper.half_width + grid.step || grid.end() < taper.half_width - grid.step {
        return Err(argument(format!(
            "grid [{}, {}] does not cover the taper support [-{}, {}]",
            grid.start,
            grid.end(),
            taper.half_width,
            taper.half_width
        )));
    }
    let first = ((lo - grid.start) / grid.step).ceil() as usize;
    let last = (((hi - grid.start) / grid.step).floor() as usize).min(grid.len - 1);
    let weighted: Vec<(f64, CVec3)> = (first..=last)
        .map(|i| {
            let x = grid.x(i);
            let w = taper.weight(x) * grid.step;
            (x, CVec3::new(integrand[i].re * w, integrand[i].im * w))
        })
        .collect();
    Ok(xis
        .iter()
        .map(|&xi| {
            let k = 2.0 * PI * xi;
            let step = Complex64::from_polar(1.0, k * grid.step);
            let mut acc = CVec3::zero();
            let mut phase = Complex64::new(1.0, 0.0);
            for (n, (x, f)) in weighted.iter().enumerate() {
                if n % 256 == 0 {
                    phase = Complex64::from_polar(1.0, k * x);
                }
                acc = acc.add(&f.scale(phase));
                phase *= step;
            }
            acc
        })
        .collect())
}

fn max_abs_corner(field: &FrameField) -> f64 {
    field
        .corner_range
        .map(|(a, b)| a.abs().max(b.abs()) as f64)
        .unwrap_or(0.0)
}

fn check_transform(field: &FrameField, xis: &[f64], taper: &TaperConfig) -> Result<()> {
    let xi_max = xis.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    taper.check(field.t, max_abs_corner(field), xi_max)
}

/// `T_x^(t, xi)` with `T_x = Re(conj(u) N)` from the coefficients.
pub fn fourier_transform_tx(field: &FrameField, modes: &Modes, xis: &[f64], taper: &TaperConfig) -> Result<Vec<CVec3>> {
    check_transform(field, xis, taper)?;
    let integrand: Vec<CVec3> = field
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (u, _) = sample_unchecked(field.t, field.x(i), modes);
            CVec3::new(f.e1 * u.re + f.e2 * u.im, Vec3::zeros())
        })
        .collect();
    tapered_transform(&field.grid, &integrand, xis, taper)
}

/// `N_x^(t, xi)` with `N_x = -u T`.
pub fn fourier_transform_nx(field: &FrameField, modes: &Modes, xis: &[f64], taper: &TaperConfig) -> Result<Vec<CVec3>> {
    check_transform(field, xis, taper)?;
    let integrand: Vec<CVec3> = field
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (u, _) = sample_unchecked(field.t, field.x(i), modes);
            CVec3::new(-f.tangent * u.re, -f.tangent * u.im)
        })
        .collect();
    tapered_transform(&field.grid, &integrand, xis, taper)
}

/// Fewest samples allowed in a window.
pub const MIN_WINDOW_SAMPLES: usize = 33;

/// Transform values on the unit window starting at `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    pub k: i64,
    pub xi_samples: Vec<f64>,
    pub values: Vec<CVec3>,
    pub energy: f64,
}

/// Which derivative a window transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Tangent,
    Normal,
}

/// `n` equally spaced nodes spanning `[k, k + 1]`; when a node falls on the
/// lattice `4 pi t xi in Z` the whole set is shifted by half a spacing.
pub fn window_samples(k: i64, n: usize, t: f64) -> Result<Vec<f64>> {
    if n < MIN_WINDOW_SAMPLES || n.is_multiple_of(2) {
        return Err(argument(format!(
            "a window needs an odd number of at least {MIN_WINDOW_SAMPLES} samples, got {n}"
        )));
    }
    let d = 1.0 / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| k as f64 + i as f64 * d).collect();
    let on_lattice = nodes.iter().any(|&xi| {
        let z = 4.0 * PI * t * xi;
        (z - z.round()).abs() < 1e-9 * z.abs().max(1.0)
    });
    Ok(if on_lattice { nodes.iter().map(|xi| xi + 0.5 * d).collect() } else { nodes })
}

impl SpectralWindow {
    pub fn new(k: i64, xi_samples: Vec<f64>, values: Vec<CVec3>) -> Result<Self> {
        let mut w = Self { k, xi_samples, values, energy: 0.0 };
        w.energy = windowed_energy(&w)?;
        Ok(w)
    }

    pub fn compute(
        field: &FrameField,
        modes: &Modes,
        k: i64,
        samples: usize,
        taper: &TaperConfig,
        component: Component,
    ) -> Result<Self> {
        let xis = window_samples(k, samples, field.t)?;
        let values = match component {
            Component::Tangent => fourier_transform_tx(field, modes, &xis, taper)?,
            Component::Normal => fourier_transform_nx(field, modes, &xis, taper)?,
        };
        Self::new(k, xis, values)
    }
}

/// Composite Simpson integral of `|values|^2` over the window nodes.
pub fn windowed_energy(window: &SpectralWindow) -> Result<f64> {
    let n = window.xi_samples.len();
    if n < MIN_WINDOW_SAMPLES || n.is_multiple_of(2) || window.values.len() != n {
        return Err(argument(format!(
            "window {} needs an odd number of at least {MIN_WINDOW_SAMPLES} samples with matching values (got {n} nodes, {} values)",
            window.k,
            window.values.len()
        )));
    }
    let d = (window.xi_samples[n - 1] - window.xi_samples[0]) / (n - 1) as f64;
    let uniform = window
        .xi_samples
        .windows(2)
        .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d);
    if !(d > 0.0) || !uniform {
        return Err(argument(format!("window {} samples must be increasing and uniform", window.k)));
    }
    let sum: f64 = window
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * v.norm_squared()
        })
        .sum();
    Ok(sum * d / 3.0)
}

/// Median over the upper half of the windows (by `k`) and the largest
/// deviation from it there.
pub fn plateau_estimate(energies: &[(i64, f64)]) -> Result<(f64, f64)> {
    let mut sorted = energies.to_vec();
    sorted.sort_by_key(|e| e.0);
    let consecutive = sorted.windows(2).all(|w| w[1].0 == w[0].0 + 1);
    if sorted.len() < 4 || !consecutive {
        return Err(argument(format!(
            "a plateau needs at least 4 consecutive windows, got {:?}",
            sorted.iter().map(|e| e.0).collect::<Vec<_>>()
        )));
    }
    let mut upper: Vec<f64> = sorted[sorted.len() / 2..].iter().map(|e| e.1).collect();
    upper.sort_by(f64::total_cmp);
    let m = upper.len();
    let median = if m % 2 == 1 { upper[m / 2] } else { 0.5 * (upper[m / 2 - 1] + upper[m / 2]) };
    let spread = upper.iter().map(|e| (e - median).abs()).fold(0.0, f64::max);
    Ok((median, spread))
}

/// Frequencies `n / (4 pi t)` in `[lo, hi]`, where `d(4 pi xi, Z/t) = 0`.
pub fn spike_locations(t: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(domain(format!("spike locations need t > 0, got {t}")));
    }
    let spacing = 1.0 / (4.0 * PI * t);
    let first = (lo / spacing).ceil() as i64;
    let last = (hi / spacing).floor() as i64;
    Ok((first..=last).map(|n| n as f64 * spacing).collect())
}

/// Leading two-corner behaviour of `T_x^` at `xi = (n/t + d) / (4 pi)`:
/// `i conj(A_0) A_n e^{i n^2/4t} (T^+ - T^-) (e^{i n d/2} - 1) e^{i d/2} log(d/2)`.
pub fn two_corner_spike_model(
    t: f64,
    n: i64,
    d: f64,
    a0: Complex64,
    an: Complex64,
    t_plus: &Vec3,
    t_minus: &Vec3,
) -> Result<CVec3> {
    if !(t > 0.0) {
        return Err(domain(format!("spike model needs t > 0, got {t}")));
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(domain(format!("spike offset d must lie in (0, 1), got {d}")));
    }
    let nf = n as f64;
    let i = Complex64::i();
    let coef = i
        * a0.conj()
        * an
        * Complex64::from_polar(1.0, nf * nf / (4.0 * t))
        * (Complex64::from_polar(1.0, 0.5 * nf * d) - 1.0)
        * Complex64::from_polar(1.0, 0.5 * d)
        * (0.5 * d).ln();
    Ok(CVec3::new(t_plus - t_minus, Vec3::zeros()).scale(coef))
}

/// Frequency of the spike diagnostic for lattice index `n` and offset `d`.
pub fn spike_frequency(t: f64, n: i64, d: f64) -> f64 {
    (n as f64 / t + d) / (4.0 * PI)
}
