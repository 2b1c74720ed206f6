//! The field `u(t,x) = sum_j A_j e^{i(x-j)^2/4t} / sqrt(t)` and its derivative,
//! always evaluated analytically from coefficients.

use num_complex::Complex64;

use crate::alpha::AlphaSequence;
use crate::coefficients::{ungauge, CoefficientState};
use crate::error::{argument, domain, Result};

/// Ungauged amplitudes `A_j` on the window starting at `j_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modes {
    pub j_min: i64,
    pub amps: Vec<Complex64>,
}

impl Modes {
    pub fn new(j_min: i64, amps: Vec<Complex64>) -> Self {
        Self { j_min, amps }
    }

    pub fn zero() -> Self {
        Self { j_min: 0, amps: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn from_state(state: &CoefficientState, alphas: &AlphaSequence) -> Result<Self> {
        Ok(Self::new(state.j_min, ungauge(state, alphas)?))
    }

    /// `sum_j |A_j|`, which bounds `sqrt(t) |u|`.
    pub fn l1(&self) -> f64 {
        self.amps.iter().map(|z| z.norm()).sum()
    }

    pub fn get(&self, j: i64) -> Complex64 {
        usize::try_from(j - self.j_min)
            .ok()
            .and_then(|i| self.amps.get(i).copied())
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.iter().all(|z| z.norm_sqr() == 0.0)
    }

    fn nonzero(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() != 0.0)
            .map(move |(i, &a)| ((self.j_min + i as i64) as f64, a))
    }
}

/// Field value and its analytic x-derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub u: Complex64,
    pub u_x: Complex64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(domain(format!("the field is only defined for t > 0, got {t}")));
    }
    Ok(())
}

/// `u` and `u_x` in one pass. Caller guarantees `t > 0`.
#[inline]
pub(crate) fn sample_unchecked(t: f64, x: f64, modes: &Modes) -> (Complex64, Complex64) {
    let inv_sqrt_t = 1.0 / t.sqrt();
    let inv_4t = 0.25 / t;
    let mut u = Complex64::new(0.0, 0.0);
    let mut ux = Complex64::new(0.0, 0.0);
    for (j, a) in modes.nonzero() {
        let d = x - j;
        let term = a * Complex64::from_polar(inv_sqrt_t, d * d * inv_4t);
        u += term;
        ux += term * Complex64::new(0.0, 2.0 * d * inv_4t);
    }
    (u, ux)
}

pub fn evaluate_u(t: f64, x: f64, modes: &Modes) -> Result<Complex64> {
    check_time(t)?;
    Ok(sample_unchecked(t, x, modes).0)
}

/// `sum_j A_j (i(x-j)/2t) e^{i(x-j)^2/4t} / sqrt(t)`.
pub fn evaluate_ux(t: f64, x: f64, modes: &Modes) -> Result<Complex64> {
    check_time(t)?;
    Ok(sample_unchecked(t, x, modes).1)
}

pub fn sample(t: f64, x: f64, modes: &Modes) -> Result<FieldSample> {
    check_time(t)?;
    let (u, u_x) = sample_unchecked(t, x, modes);
    Ok(FieldSample { x, u, u_x })
}

/// One-corner field `alpha e^{ix^2/4t} / sqrt(t)`.
pub fn self_similar_u(alpha: f64, t: f64, x: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok(Complex64::from_polar(alpha / t.sqrt(), x * x / (4.0 * t)))
}

/// `u_eta(t,x) = e^{-i eta^2 t + i eta x} u(t, x - 2 eta t)` sampled on `times x xs`,
/// with `u` evaluated analytically by `field`.
pub fn galilean_transform<F>(times: &[f64], xs: &[f64], eta: f64, field: F) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    times
        .iter()
        .map(|&t| {
            xs.iter()
                .map(|&x| {
                    let shifted = field(t, x - 2.0 * eta * t).map_err(|e| {
                        argument(format!("cannot evaluate the field at ({t}, {}): {e}", x - 2.0 * eta * t))
                    })?;
                    Ok(Complex64::from_polar(1.0, -eta * eta * t + eta * x) * shifted)
                })
                .collect()
        })
        .collect()
}

fn uniform_step(name: &str, grid: &[f64]) -> Result<f64> {
    if grid.len() < 3 {
        return Err(argument(format!("{name} grid needs at least 3 points, got {}", grid.len())));
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) {
        return Err(argument(format!("{name} grid must be strictly increasing")));
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(w[1].abs()) {
            return Err(argument(format!("{name} grid must be uniform")));
        }
    }
    Ok(h)
}

/// Sup norm of `i D_t u + D_xx u + (|u|^2 - M/t) u / 2` with centred second-order
/// differences, over interior nodes of the `(times, xs)` grid. `field(i, x)`
/// evaluates `u(times[i], x)`.
pub fn nls_residual_with<F>(times: &[f64], xs: &[f64], m: f64, field: F) -> Result<f64>
where
    F: Fn(usize, f64) -> Complex64,
{
    let dt = uniform_step("time", times)?;
    let h = uniform_step("space", xs)?;
    if times[0] <= 0.0 {
        return Err(domain("residual times must be > 0"));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for ti in 1..times.len() - 1 {
        let t = times[ti];
        let prev: Vec<Complex64> = xs.iter().map(|&x| field(ti - 1, x)).collect();
        let cur: Vec<Complex64> = xs.iter().map(|&x| field(ti, x)).collect();
        let next: Vec<Complex64> = xs.iter().map(|&x| field(ti + 1, x)).collect();
        for xi in 1..xs.len() - 1 {
            let u = cur[xi];
            let u_t = (next[xi] - prev[xi]) / (2.0 * dt);
            let u_xx = (cur[xi + 1] - 2.0 * u + cur[xi - 1]) / (h * h);
            let r = i * u_t + u_xx + 0.5 * (u.norm_sqr() - m / t) * u;
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// [`nls_residual_with`] for coefficient snapshots, one per entry of `times`.
pub fn nls_residual(times: &[f64], xs: &[f64], snapshots: &[Modes], m: f64) -> Result<f64> {
    if snapshots.len() != times.len() {
        return Err(argument(format!(
            "{} snapshots for {} times",
            snapshots.len(),
            times.len()
        )));
    }
    nls_residual_with(times, xs, m, |ti, x| sample_unchecked(times[ti], x, &snapshots[ti]).0)
}
