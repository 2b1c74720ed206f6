//! Parallel frames `(T, e1, e2)` driven by the field, with `N = e1 + i e2`:
//!
//! ```text
//! T_x = Re(conj(u) N)        N_x = -u T
//! T_t = Im(conj(u_x) N)      N_t = -i u_x T + (i/2)(|u|^2 - M/t) N
//! ```
//!
//! Both systems are `F' = F K` for the matrix `F = [T e1 e2]` and a
//! skew-symmetric `K`, so every step multiplies by an exact rotation built from
//! the generator at the step midpoint. A Björck sweep then removes rounding.

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSequence;
use crate::coefficients::Propagator;
use crate::error::{argument, domain, Result};
use crate::field::{sample_unchecked, Modes};

pub type Vec3 = Vector3<f64>;

/// Complex 3-vector `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVec3 {
    pub re: Vec3,
    pub im: Vec3,
}

impl CVec3 {
    pub fn new(re: Vec3, im: Vec3) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::new(self.re * z.re - self.im * z.im, self.re * z.im + self.im * z.re)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.re + other.re, self.im + other.im)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.re - other.re, self.im - other.im)
    }

    /// Euclidean norm in `C^3`.
    pub fn norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.re.norm_squared() + self.im.norm_squared()
    }

    pub fn component(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }
}

/// Right-handed orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub tangent: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl Frame {
    pub fn canonical() -> Self {
        Self { tangent: Vec3::x(), e1: Vec3::y(), e2: Vec3::z() }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self {
            tangent: m.column(0).into_owned(),
            e1: m.column(1).into_owned(),
            e2: m.column(2).into_owned(),
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.tangent, self.e1, self.e2])
    }

    /// `N = e1 + i e2`.
    pub fn normal(&self) -> CVec3 {
        CVec3::new(self.e1, self.e2)
    }

    /// Largest violation of orthonormality and handedness.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.matrix();
        let gram = m.transpose() * m - Matrix3::identity();
        let det = self.tangent.dot(&self.e1.cross(&self.e2)) - 1.0;
        gram.abs().max().max(det.abs())
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.orthonormality_defect();
        if !(d <= tol) {
            return Err(argument(format!("frame is not right-handed orthonormal (defect {d:e})")));
        }
        Ok(())
    }
}

/// Uniform grid `start + i step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || len < 2 || !start.is_finite() {
            return Err(argument(format!(
                "grid needs step > 0 and >= 2 points (start {start}, step {step}, len {len})"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// Symmetric grid on `[-half_width, half_width]` with spacing at most `max_step`,
    /// containing `x = 0`.
    pub fn symmetric(half_width: f64, max_step: f64) -> Result<Self> {
        if !(half_width > 0.0 && max_step > 0.0) {
            return Err(argument("grid half width and step must be > 0"));
        }
        let per_side = (half_width / max_step).ceil() as usize;
        let step = half_width / per_side as f64;
        Self::new(-half_width, step, 2 * per_side + 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }

    /// Index of the node at `x`, if `x` is a node up to rounding.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = (x - self.start) / self.step;
        let i = r.round();
        if i < 0.0 || i >= self.len as f64 || (r - i).abs() > 1e-6 {
            return None;
        }
        Some(i as usize)
    }
}

/// Largest admissible `x` spacing at time `t` for a grid reaching `|x| = x_max`:
/// `min(0.1 / max|u|, 2 pi t / (5 x_max))`.
pub fn max_grid_step(t: f64, x_max: f64, modes: &Modes) -> f64 {
    let u_max = modes.l1() / t.sqrt();
    let by_amplitude = if u_max > 0.0 { 0.1 / u_max } else { f64::INFINITY };
    let by_phase = 2.0 * std::f64::consts::PI * t / (5.0 * x_max.abs().max(1.0));
    by_amplitude.min(by_phase)
}

/// Frames on a uniform grid at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub t: f64,
    pub grid: Grid,
    pub frames: Vec<Frame>,
    /// Node where the seed frame was imposed.
    pub seed_index: usize,
    /// Extreme positions of the nonzero modes that generated the field.
    pub corner_range: Option<(i64, i64)>,
}

impl FrameField {
    pub fn x(&self, i: usize) -> f64 {
        self.grid.x(i)
    }

    pub fn tangents(&self) -> impl Iterator<Item = &Vec3> {
        self.frames.iter().map(|f| &f.tangent)
    }

    pub fn max_orthonormality_defect(&self) -> f64 {
        self.frames.iter().map(Frame::orthonormality_defect).fold(0.0, f64::max)
    }
}

/// Body-frame rotation `exp(step * hat(omega))`.
fn body_rotation(omega: Vec3, step: f64) -> Matrix3<f64> {
    Rotation3::new(omega * step).into_inner()
}

/// One Björck iteration towards the nearest orthogonal matrix; returns the
/// size of the correction.
fn reorthonormalize(m: &mut Matrix3<f64>) -> f64 {
    let gram = m.transpose() * *m;
    let corrected = *m * (Matrix3::identity() * 3.0 - gram) * 0.5;
    let change = (corrected - *m).abs().max();
    *m = corrected;
    change
}

/// Spatial generator for `u = a + i b`: `T_x = a e1 + b e2`, `e1_x = -a T`, `e2_x = -b T`.
#[inline]
fn space_generator(u: Complex64) -> Vec3 {
    Vec3::new(0.0, -u.im, u.re)
}

/// Temporal generator for `u_x = c + i d` and `q = |u|^2 - M/t`:
/// `T_t = -d e1 + c e2`, `e1_t = d T - (q/2) e2`, `e2_t = -c T + (q/2) e1`.
#[inline]
fn time_generator(u_x: Complex64, q: f64) -> Vec3 {
    Vec3::new(-0.5 * q, -u_x.re, -u_x.im)
}

/// Statistics of the projection safety net over a transport.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProjectionStats {
    pub max_correction: f64,
}

/// Transports `seed`, imposed at `seed_x`, across `grid` at time `t`.
pub fn transport_x(t: f64, seed: &Frame, seed_x: f64, grid: &Grid, modes: &Modes) -> Result<FrameField> {
    transport_x_with_stats(t, seed, seed_x, grid, modes).map(|(f, _)| f)
}

pub fn transport_x_with_stats(
    t: f64,
    seed: &Frame,
    seed_x: f64,
    grid: &Grid,
    modes: &Modes,
) -> Result<(FrameField, ProjectionStats)> {
    if !(t > 0.0) {
        return Err(domain(format!("frame transport needs t > 0, got {t}")));
    }
    let seed_index = grid
        .index_of(seed_x)
        .ok_or_else(|| argument(format!("seed position {seed_x} is not a grid node")))?;
    seed.validate(1e-12)?;

    let mut stats = ProjectionStats::default();
    let mut mats = vec![Matrix3::zeros(); grid.len];
    mats[seed_index] = seed.matrix();
    let h = grid.step;
    for i in seed_index + 1..grid.len {
        let mid = grid.x(i) - 0.5 * h;
        let (u, _) = sample_unchecked(t, mid, modes);
        let mut m = mats[i - 1] * body_rotation(space_generator(u), h);
        stats.max_correction = stats.max_correction.max(reorthonormalize(&mut m));
        mats[i] = m;
    }
    for i in (0..seed_index).rev() {
        let mid = grid.x(i) + 0.5 * h;
        let (u, _) = sample_unchecked(t, mid, modes);
        let mut m = mats[i + 1] * body_rotation(space_generator(u), -h);
        stats.max_correction = stats.max_correction.max(reorthonormalize(&mut m));
        mats[i] = m;
    }
    let corners = corner_range(modes);
    Ok((
        FrameField {
            t,
            grid: *grid,
            frames: mats.iter().map(Frame::from_matrix).collect(),
            seed_index,
            corner_range: corners,
        },
        stats,
    ))
}

fn corner_range(modes: &Modes) -> Option<(i64, i64)> {
    let idx: Vec<i64> = modes
        .amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, _)| modes.j_min + i as i64)
        .collect();
    Some((*idx.iter().min()?, *idx.iter().max()?))
}

/// Transports a frame in time at fixed `x0` from `t0` to `t1` in `steps` equal
/// steps. `modes_at(t)` must return the ungauged coefficients at `t`; it is
/// called at every step midpoint, in monotone order.
pub fn transport_t<F>(
    x0: f64,
    seed: &Frame,
    t0: f64,
    t1: f64,
    steps: usize,
    m: f64,
    mut modes_at: F,
) -> Result<Frame>
where
    F: FnMut(f64) -> Result<Modes>,
{
    if !(t0 > 0.0 && t1 > 0.0) {
        return Err(domain(format!("time transport interval {t0} -> {t1} must stay in t > 0")));
    }
    if steps == 0 {
        return Err(argument("time transport needs at least one step"));
    }
    seed.validate(1e-12)?;
    let dt = (t1 - t0) / steps as f64;
    let mut mat = seed.matrix();
    for s in 0..steps {
        let mid = t0 + (s as f64 + 0.5) * dt;
        let modes = modes_at(mid)?;
        let (u, u_x) = sample_unchecked(mid, x0, &modes);
        let q = u.norm_sqr() - m / mid;
        mat *= body_rotation(time_generator(u_x, q), dt);
        reorthonormalize(&mut mat);
    }
    Ok(Frame::from_matrix(&mat))
}

/// Number of time steps resolving the generator at `x0` between `t0` and `t1`:
/// the phases `(x0 - j)^2 / 4t` must advance by less than `pi/16` per step and
/// the generator must stay below `0.05` rad per step.
pub fn time_steps_for(x0: f64, t0: f64, t1: f64, modes: &Modes, m: f64) -> usize {
    let t_lo = t0.min(t1);
    let span = (t1 - t0).abs();
    let d_max = modes
        .amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, _)| (x0 - (modes.j_min + i as i64) as f64).abs())
        .fold(0.0, f64::max);
    let phase_rate = d_max * d_max / (4.0 * t_lo * t_lo);
    let l1 = modes.l1();
    let gen = l1 * d_max / (2.0 * t_lo * t_lo.sqrt()) + 0.5 * (l1 * l1 + m) / t_lo;
    let by_phase = phase_rate * span / (std::f64::consts::PI / 16.0);
    let by_gen = gen * span / 0.05;
    (by_phase.max(by_gen).ceil() as usize).max(16)
}

/// [`transport_t`] driven by a coefficient [`Propagator`]; the propagator ends at `t1`.
pub fn transport_t_with(
    x0: f64,
    seed: &Frame,
    t1: f64,
    steps: usize,
    propagator: &mut Propagator<'_>,
) -> Result<Frame> {
    let t0 = propagator.state().t;
    let alphas: AlphaSequence = propagator.alphas().clone();
    let m = alphas.mass();
    let frame = transport_t(x0, seed, t0, t1, steps, m, |t| {
        let state = propagator.advance_to(t)?;
        Modes::from_state(state, &alphas)
    })?;
    propagator.advance_to(t1)?;
    Ok(frame)
}

/// `e^{i M log(<x>/sqrt(t))} N(t,x)` with `<x> = 1 + |x|`.
pub fn modulated_normal(field: &FrameField, m: f64) -> Vec<CVec3> {
    let sqrt_t = field.t.sqrt();
    field
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let bracket = 1.0 + field.x(i).abs();
            f.normal().scale(Complex64::from_polar(1.0, m * (bracket / sqrt_t).ln()))
        })
        .collect()
}

/// `e^{i sum_{r != x} |alpha_r|^2 log(|x - r| / sqrt(t))} N(t,x)`; `None` at nodes
/// within `1e-9` of a corner, where the phase is singular.
pub fn modulated_normal_tilde(field: &FrameField, alphas: &AlphaSequence) -> Vec<Option<CVec3>> {
    let sqrt_t = field.t.sqrt();
    let corners: Vec<(f64, f64)> = alphas
        .indices()
        .zip(alphas.values())
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(r, a)| (r as f64, a.norm_sqr()))
        .collect();
    field
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let x = field.x(i);
            if corners.iter().any(|&(r, _)| (x - r).abs() < 1e-9) {
                return None;
            }
            let phase: f64 = corners
                .iter()
                .map(|&(r, w)| w * ((x - r).abs() / sqrt_t).ln())
                .sum();
            Some(f.normal().scale(Complex64::from_polar(1.0, phase)))
        })
        .collect()
}

/// Limits at `x -> +inf` and `x -> -inf` with per-side error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLimits<V> {
    pub plus: V,
    pub minus: V,
    pub error_plus: f64,
    pub error_minus: f64,
}

impl<V> SideLimits<V> {
    pub fn error_estimate(&self) -> f64 {
        self.error_plus.max(self.error_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticLimits {
    pub t_plus: Vec3,
    pub t_minus: Vec3,
    pub n_plus: CVec3,
    pub n_minus: CVec3,
    pub error_estimate: f64,
}

/// Required clearance between the last corner and each end of the grid.
pub const LIMIT_MARGIN: f64 = 10.0;

fn check_margin(field: &FrameField) -> Result<()> {
    let (lo, hi) = field.corner_range.unwrap_or((0, 0));
    let left = lo as f64 - field.grid.start;
    let right = field.grid.end() - hi as f64;
    if left < LIMIT_MARGIN || right < LIMIT_MARGIN {
        return Err(argument(format!(
            "grid [{}, {}] leaves margins ({left}, {right}) beyond the corners; at least {LIMIT_MARGIN} needed",
            field.grid.start,
            field.grid.end()
        )));
    }
    Ok(())
}

/// Octant index ranges `(outer, inner)` on one side of the grid.
fn octants(grid: &Grid, plus: bool) -> [(usize, usize); 2] {
    let n = grid.len - 1;
    let b = |k: usize| (k * n + 4) / 8;
    if plus {
        [(b(7), n), (b(6), b(7))]
    } else {
        [(0, b(1)), (b(1), b(2))]
    }
}

/// Trapezoid means of `value` and of `1/<x>` over nodes `lo..=hi`.
fn octant_mean<V, F>(field: &FrameField, lo: usize, hi: usize, value: F, zero: V) -> (V, f64)
where
    V: Copy + std::ops::Add<Output = V> + std::ops::Mul<f64, Output = V>,
    F: Fn(usize) -> V,
{
    let mut acc = zero;
    let mut s_acc = 0.0;
    for i in lo..=hi {
        let w = if i == lo || i == hi { 0.5 } else { 1.0 };
        acc = acc + value(i) * w;
        s_acc += w / (1.0 + field.x(i).abs());
    }
    let norm = (hi - lo) as f64;
    (acc * (1.0 / norm), s_acc / norm)
}

/// Richardson step in `s = 1/<x>`: linear extrapolation of the two octant means
/// to `s = 0`, with its distance to the outermost mean as the error estimate.
fn extrapolate<V>(outer: (V, f64), inner: (V, f64)) -> (V, V)
where
    V: Copy + std::ops::Add<Output = V> + std::ops::Sub<Output = V> + std::ops::Mul<f64, Output = V>,
{
    let (v_out, s_out) = outer;
    let (v_in, s_in) = inner;
    let slope = (v_in - v_out) * (1.0 / (s_in - s_out));
    (v_out - slope * s_out, v_out)
}

pub fn tangent_limits(field: &FrameField) -> Result<SideLimits<Vec3>> {
    check_margin(field)?;
    let side = |plus: bool| {
        let [o, i] = octants(&field.grid, plus);
        let tangent = |k: usize| field.frames[k].tangent;
        let outer = octant_mean(field, o.0, o.1, tangent, Vec3::zeros());
        let inner = octant_mean(field, i.0, i.1, tangent, Vec3::zeros());
        let (lin, constant) = extrapolate(outer, inner);
        let limit = lin.normalize();
        (limit, (lin - constant).norm())
    };
    let (plus, error_plus) = side(true);
    let (minus, error_minus) = side(false);
    Ok(SideLimits { plus, minus, error_plus, error_minus })
}

/// Wrapper so complex vectors can go through the generic octant helpers.
#[derive(Clone, Copy)]
struct C6(CVec3);

impl std::ops::Add for C6 {
    type Output = C6;
    fn add(self, o: C6) -> C6 {
        C6(self.0.add(&o.0))
    }
}
impl std::ops::Sub for C6 {
    type Output = C6;
    fn sub(self, o: C6) -> C6 {
        C6(self.0.sub(&o.0))
    }
}
impl std::ops::Mul<f64> for C6 {
    type Output = C6;
    fn mul(self, s: f64) -> C6 {
        C6(CVec3::new(self.0.re * s, self.0.im * s))
    }
}

/// Gram-Schmidt on (Re, Im) so the limit lies in `S^2 + i S^2` with orthogonal parts.
fn orthonormalize_normal(n: &CVec3) -> CVec3 {
    let re = n.re.normalize();
    let im = (n.im - re * re.dot(&n.im)).normalize();
    CVec3::new(re, im)
}

pub fn normal_limits(field: &FrameField, m: f64) -> Result<SideLimits<CVec3>> {
    check_margin(field)?;
    let modulated = modulated_normal(field, m);
    let side = |plus: bool| {
        let [o, i] = octants(&field.grid, plus);
        let value = |k: usize| C6(modulated[k]);
        let outer = octant_mean(field, o.0, o.1, value, C6(CVec3::zero()));
        let inner = octant_mean(field, i.0, i.1, value, C6(CVec3::zero()));
        let (lin, constant) = extrapolate(outer, inner);
        (orthonormalize_normal(&lin.0), lin.0.sub(&constant.0).norm())
    };
    let (plus, error_plus) = side(true);
    let (minus, error_minus) = side(false);
    Ok(SideLimits { plus, minus, error_plus, error_minus })
}

pub fn asymptotic_limits(field: &FrameField, m: f64) -> Result<AsymptoticLimits> {
    let t = tangent_limits(field)?;
    let n = normal_limits(field, m)?;
    Ok(AsymptoticLimits {
        t_plus: t.plus,
        t_minus: t.minus,
        n_plus: n.plus,
        n_minus: n.minus,
        error_estimate: t.error_estimate().max(n.error_estimate()),
    })
}

/// Curvature `|dT/dx|` by centred differences at interior nodes (`NaN` at the ends).
pub fn curvature_fd(field: &FrameField) -> Vec<f64> {
    let h = field.grid.step;
    let n = field.frames.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return f64::NAN;
            }
            ((field.frames[i + 1].tangent - field.frames[i - 1].tangent) / (2.0 * h)).norm()
        })
        .collect()
}

/// Torsion `(T x T') . T'' / |T'|^2` from centred differences of the tangent
/// (`NaN` at the ends).
pub fn torsion_fd(field: &FrameField) -> Vec<f64> {
    let h = field.grid.step;
    let n = field.frames.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return f64::NAN;
            }
            let (a, b, c) = (
                field.frames[i - 1].tangent,
                field.frames[i].tangent,
                field.frames[i + 1].tangent,
            );
            let d1 = (c - a) / (2.0 * h);
            let d2 = (c - b * 2.0 + a) / (h * h);
            b.cross(&d1).dot(&d2) / d1.norm_squared()
        })
        .collect()
}

/// `T_x = Re(conj(u) N)` at every node, evaluated from the coefficients.
pub fn tangent_derivative(field: &FrameField, modes: &Modes) -> Vec<Vec3> {
    field
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (u, _) = sample_unchecked(field.t, field.x(i), modes);
            f.e1 * u.re + f.e2 * u.im
        })
        .collect()
}
