//! End-to-end runs: coefficients, frames and curves at a list of times, and
//! energy tables from a single slice.

use std::f64::consts::PI;

use crate::alpha::{energy_at_zero, AlphaSequence};
use crate::coefficients::{CoefficientState, Propagator};
use crate::curve::{reconstruct_curve, time_leg, Curve};
use crate::error::{argument, Result};
use crate::field::Modes;
use crate::frame::{max_grid_step, time_steps_for, transport_x, Frame, FrameField, Grid, Vec3};
use crate::spectral::{window_samples, Component, SpectralWindow, TaperConfig};

/// Coefficients, frames and curve at one time.
#[derive(Debug, Clone)]
pub struct Slice {
    pub state: CoefficientState,
    pub modes: Modes,
    pub frames: FrameField,
    pub curve: Curve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    /// Time at which `A~ = alpha` is imposed.
    pub t_start: f64,
    /// Output times, increasing, each `>= t_start`.
    pub times: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub half_width: f64,
    /// Requested grid spacing; refined further when the resolution rule needs it.
    pub grid_h: f64,
    /// Frame at `(t_start, 0)`.
    pub seed: Frame,
}

/// Grid on `[-L, L]` with spacing `min(h, max_grid_step)`.
pub fn grid_for(t: f64, half_width: f64, h: f64, modes: &Modes) -> Result<Grid> {
    Grid::symmetric(half_width, h.min(max_grid_step(t, half_width, modes)))
}

/// Frame transport in time at `x0` with the binormal displacement, split into
/// dyadic pieces so the step count follows the local phase speed.
fn leg_between(
    x0: f64,
    seed: &Frame,
    t0: f64,
    t1: f64,
    propagator: &mut Propagator<'_>,
) -> Result<(Frame, Vec3)> {
    let alphas = propagator.alphas().clone();
    let m = alphas.mass();
    let mut frame = *seed;
    let mut leg = Vec3::zeros();
    let mut a = t0;
    while a < t1 {
        let b = (2.0 * a).min(t1);
        let modes = Modes::from_state(propagator.advance_to(a)?, &alphas)?;
        let steps = time_steps_for(x0, a, b, &modes, m);
        let (f, d) = time_leg(x0, &frame, a, b, steps, m, |t| {
            Modes::from_state(propagator.advance_to(t)?, &alphas)
        })?;
        frame = f;
        leg += d;
        a = b;
    }
    Ok((frame, leg))
}

/// Runs the coefficient dynamics from `t_start`, carries the seed frame and
/// the curve point at `x = 0` along in time, and builds frames and curves at
/// every requested time.
pub fn simulate(alphas: &AlphaSequence, settings: &SimulationSettings) -> Result<Vec<Slice>> {
    if !(settings.t_start > 0.0) {
        return Err(argument(format!("t_start must be > 0, got {}", settings.t_start)));
    }
    if settings.times.iter().any(|&t| t < settings.t_start) || settings.times.windows(2).any(|w| w[1] < w[0]) {
        return Err(argument("output times must be increasing and not before t_start"));
    }
    settings.seed.validate(1e-12)?;
    let initial = CoefficientState::initial(alphas, settings.t_start)?;
    let mut prop = Propagator::new(initial, alphas, settings.rel_tol, settings.abs_tol, settings.max_steps)?;
    let mut frame = settings.seed;
    let mut point = Vec3::zeros();
    let mut t_prev = settings.t_start;
    let mut out = Vec::with_capacity(settings.times.len());
    for &t in &settings.times {
        let (f, d) = leg_between(0.0, &frame, t_prev, t, &mut prop)?;
        frame = f;
        point += d;
        t_prev = t;
        let state = prop.advance_to(t)?.clone();
        let modes = Modes::from_state(&state, alphas)?;
        let grid = grid_for(t, settings.half_width, settings.grid_h, &modes)?;
        let frames = transport_x(t, &frame, 0.0, &grid, &modes)?;
        let curve = reconstruct_curve(&frames, point, Vec3::zeros());
        out.push(Slice { state, modes, frames, curve });
    }
    Ok(out)
}

/// The one-corner solution with `A_0 = alpha` at time `t`, with the corner of
/// the initial line at the origin: the point `x = 0` has moved to
/// `2 alpha sqrt(t) e2`.
pub fn self_similar_slice(alpha: f64, t: f64, half_width: f64, h: f64) -> Result<(FrameField, Curve)> {
    let modes = Modes::new(0, vec![num_complex::Complex64::new(alpha, 0.0)]);
    let grid = grid_for(t, half_width, h, &modes)?;
    let seed = Frame::canonical();
    let frames = transport_x(t, &seed, 0.0, &grid, &modes)?;
    let curve = reconstruct_curve(&frames, Vec3::zeros(), seed.e2 * (2.0 * alpha * t.sqrt()));
    Ok((frames, curve))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub k: i64,
    pub xi_t: f64,
    pub xi_n: f64,
    pub target: f64,
    pub at_zero: f64,
}

impl EnergyRow {
    pub fn rel_err_t(&self) -> f64 {
        rel(self.xi_t, self.target)
    }

    pub fn rel_err_n(&self) -> f64 {
        rel(self.xi_n, self.target)
    }
}

fn rel(x: f64, target: f64) -> f64 {
    if target == 0.0 {
        x.abs()
    } else {
        (x - target) / target
    }
}

/// Checks every window `k_min..=k_max` against the taper and reports all
/// failing windows with the half width each would need.
pub fn check_windows(field: &FrameField, k_min: i64, k_max: i64, samples: usize, taper: &TaperConfig) -> Result<()> {
    let max_corner = field
        .corner_range
        .map(|(a, b)| a.abs().max(b.abs()) as f64)
        .unwrap_or(0.0);
    let mut bad = Vec::new();
    for k in k_min..=k_max {
        let xi_max = window_samples(k, samples, field.t)?
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let need = taper.required_half_width(field.t, max_corner, xi_max);
        if taper.half_width < need {
            bad.push(format!("window {k} needs L >= {need:.6}"));
        }
    }
    if !bad.is_empty() {
        return Err(argument(format!(
            "half width L = {} is too small: {}",
            taper.half_width,
            bad.join("; ")
        )));
    }
    Ok(())
}

/// Windowed energies of `T_x` and `N_x` for `k_min..=k_max`.
pub fn energy_table(
    field: &FrameField,
    modes: &Modes,
    alphas: &AlphaSequence,
    k_min: i64,
    k_max: i64,
    samples: usize,
    taper: &TaperConfig,
) -> Result<Vec<EnergyRow>> {
    if k_max < k_min {
        return Err(argument(format!("k_max {k_max} is below k_min {k_min}")));
    }
    check_windows(field, k_min, k_max, samples, taper)?;
    let target = 4.0 * PI * alphas.mass();
    let at_zero = energy_at_zero(alphas);
    (k_min..=k_max)
        .map(|k| {
            let t = SpectralWindow::compute(field, modes, k, samples, taper, Component::Tangent)?;
            let n = SpectralWindow::compute(field, modes, k, samples, taper, Component::Normal)?;
            Ok(EnergyRow { k, xi_t: t.energy, xi_n: n.energy, target, at_zero })
        })
        .collect()
}
