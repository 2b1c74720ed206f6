//! Filament reconstruction
//!
//! ```text
//! chi(t, x) = P + int_{t0}^{t} (T ^ T_x)(tau, x0) dtau + int_{x0}^{x} T(t, s) ds
//! ```
//!
//! and geometric diagnostics on the result.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{argument, Result};
use crate::field::{sample_unchecked, Modes};
use crate::frame::{transport_t, Frame, FrameField, Grid, Vec3};

/// Points `chi(t, x)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub t: f64,
    pub grid: Grid,
    pub points: Vec<Vec3>,
}

impl Curve {
    /// Largest deviation of `|chi(x_{i+1}) - chi(x_i)| / h` from 1.
    pub fn arclength_defect(&self) -> f64 {
        let h = self.grid.step;
        self.points
            .windows(2)
            .map(|w| ((w[1] - w[0]).norm() / h - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn translate(&mut self, by: Vec3) {
        self.points.iter_mut().for_each(|p| *p += by);
    }

    /// Linear interpolation of the curve at `x`.
    pub fn at(&self, x: f64) -> Option<Vec3> {
        let r = (x - self.grid.start) / self.grid.step;
        if r < 0.0 || r > (self.grid.len - 1) as f64 {
            return None;
        }
        let i = (r.floor() as usize).min(self.grid.len - 2);
        let s = r - i as f64;
        Some(self.points[i] * (1.0 - s) + self.points[i + 1] * s)
    }
}

#[inline]
fn velocity(frame: &Frame, u: Complex64) -> Vec3 {
    frame.tangent.cross(&(frame.e1 * u.re + frame.e2 * u.im))
}

/// `(T ^ T_x)(tau, x0)` for each time, with `T_x = Re(conj(u) N)` evaluated from
/// the coefficients.
pub fn binormal_velocity(x0: f64, times: &[f64], frames: &[Frame], modes: &[Modes]) -> Result<Vec<Vec3>> {
    if times.len() != frames.len() || times.len() != modes.len() {
        return Err(argument(format!(
            "binormal velocity needs matching lengths (times {}, frames {}, modes {})",
            times.len(),
            frames.len(),
            modes.len()
        )));
    }
    Ok(times
        .iter()
        .zip(frames)
        .zip(modes)
        .map(|((&t, f), m)| velocity(f, sample_unchecked(t, x0, m).0))
        .collect())
}

/// Frame transport in time at `x0` together with the displacement
/// `int (T ^ T_x)(tau, x0) dtau` (trapezoid on the step nodes).
///
/// `modes_at` is called at nodes and midpoints in monotone order.
pub fn time_leg<F>(
    x0: f64,
    seed: &Frame,
    t0: f64,
    t1: f64,
    steps: usize,
    m: f64,
    mut modes_at: F,
) -> Result<(Frame, Vec3)>
where
    F: FnMut(f64) -> Result<Modes>,
{
    let dt = (t1 - t0) / steps.max(1) as f64;
    let first = modes_at(t0)?;
    let mut v_prev = velocity(seed, sample_unchecked(t0, x0, &first).0);
    let mut frame = *seed;
    let mut leg = Vec3::zeros();
    for s in 0..steps {
        let ta = t0 + s as f64 * dt;
        let tb = if s + 1 == steps { t1 } else { ta + dt };
        frame = transport_t(x0, &frame, ta, tb, 1, m, &mut modes_at)?;
        let end = modes_at(tb)?;
        let v = velocity(&frame, sample_unchecked(tb, x0, &end).0);
        leg += (v_prev + v) * (0.5 * (tb - ta));
        v_prev = v;
    }
    Ok((frame, leg))
}

/// Cumulative trapezoid integral of the tangent from the seed node, placed so
/// that `chi(x0) = p + time_leg`.
pub fn reconstruct_curve(field: &FrameField, p: Vec3, time_leg: Vec3) -> Curve {
    let h = field.grid.step;
    let n = field.frames.len();
    let s = field.seed_index;
    let mut points = vec![Vec3::zeros(); n];
    points[s] = p + time_leg;
    for i in s + 1..n {
        points[i] = points[i - 1] + (field.frames[i - 1].tangent + field.frames[i].tangent) * (0.5 * h);
    }
    for i in (0..s).rev() {
        points[i] = points[i + 1] - (field.frames[i].tangent + field.frames[i + 1].tangent) * (0.5 * h);
    }
    Curve { t: field.t, grid: field.grid, points }
}

/// Direction of a side over `[a, b]` from a least-squares fit of the tangent.
///
/// Near a corner `c` the tangent approaches its side limit `A` by a rotating
/// term of size `1/s`, `s = |x - c| / sqrt(t)`, whose phase is `s^2 / 4` plus a
/// slow log drift, and by a term along `A` of order `1/s^2` that normalization
/// removes. For each corner among `ends` the fit carries the rotating term,
/// its log-drift linearization and a `1/s^3` correction; the normalized
/// constant is the side direction. Tangents are centred differences of the points.
fn side_direction(curve: &Curve, a: f64, b: f64, ends: &[f64]) -> Result<Vec3> {
    let g = &curve.grid;
    let lo = ((a - g.start) / g.step).ceil().max(1.0) as usize;
    let hi = (((b - g.start) / g.step).floor().max(0.0) as usize).min(g.len.saturating_sub(2));
    if hi < lo + 64 || a < g.start || b > g.end() {
        return Err(argument(format!(
            "side window [{a}, {b}] is not resolved by the curve grid [{}, {}]",
            g.start,
            g.end()
        )));
    }
    let sqrt_t = curve.t.sqrt();
    let cols = 1 + 6 * ends.len();
    let rows = hi - lo + 1;
    let mut design = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let x = g.x(lo + r);
        design[(r, 0)] = 1.0;
        for (e, &c) in ends.iter().enumerate() {
            let s = (x - c).abs() / sqrt_t;
            let (sin, cos) = (0.25 * s * s).sin_cos();
            let k = 1 + 6 * e;
            design[(r, k)] = cos / s;
            design[(r, k + 1)] = sin / s;
            design[(r, k + 2)] = s.ln() * cos / s;
            design[(r, k + 3)] = s.ln() * sin / s;
            design[(r, k + 4)] = cos / (s * s * s);
            design[(r, k + 5)] = sin / (s * s * s);
        }
    }
    let rhs = DMatrix::from_fn(rows, 3, |r, c| {
        let i = lo + r;
        (curve.points[i + 1][c] - curve.points[i - 1][c]) / (2.0 * g.step)
    });
    let coeffs = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| argument(format!("side fit failed: {e}")))?;
    Ok(Vec3::new(coeffs[(0, 0)], coeffs[(0, 1)], coeffs[(0, 2)]).normalize())
}

/// Turning angle at each corner between the directions of the sides
/// `(j-1, j)` and `(j, j+1)`, ignoring a core of half width `2 sqrt(t)` at
/// both ends of every side.
pub fn corner_angles_from_curve(curve: &Curve, corners: &[i64]) -> Result<Vec<f64>> {
    let core = 2.0 * curve.t.sqrt();
    if 2.0 * core >= 1.0 {
        return Err(argument(format!(
            "corner cores of width {} overlap on unit sides (t = {} too large)",
            2.0 * core,
            curve.t
        )));
    }
    let ends = |a: i64, b: i64| -> Vec<f64> {
        [a, b].iter().filter(|j| corners.contains(j)).map(|&j| j as f64).collect()
    };
    corners
        .iter()
        .map(|&j| {
            let left = side_direction(curve, (j - 1) as f64 + core, j as f64 - core, &ends(j - 1, j))?;
            let right = side_direction(curve, j as f64 + core, (j + 1) as f64 - core, &ends(j, j + 1))?;
            Ok(left.dot(&right).clamp(-1.0, 1.0).acos())
        })
        .collect()
}
