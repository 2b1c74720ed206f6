//! Regular polygons at rational times.
//!
//! A regular `N`-gon with corner strength `alpha` has `psi^(t, 0) = alpha N`
//! for all `t`. At `t_{p,q}` the Dirac comb of corners splits into `q` copies
//! weighted by the Gauss sums `G(p, q, m)`, so each new corner has strength
//! `alpha / sqrt(q)` and angle `sin(theta/2) = sin(pi/N)^{1/q}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::alphas_for_regular_polygon;
use crate::error::{domain, Result};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `p/q` in lowest terms with odd `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalTime {
    pub p: u64,
    pub q: u64,
}

impl RationalTime {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(domain(format!("rational time needs p, q >= 1, got {p}/{q}")));
        }
        if gcd(p, q) != 1 {
            return Err(domain(format!("{p}/{q} is not in lowest terms")));
        }
        if q.is_multiple_of(2) {
            return Err(domain(format!("only odd q is supported, got q = {q}")));
        }
        Ok(Self { p, q })
    }

    /// `t_{p,q} = p / (2 pi N^2 q)`, at which the `j` phases `t (2 pi N j)^2` are `q`-periodic.
    pub fn time(&self, sides: u32) -> f64 {
        let n = sides as f64;
        self.p as f64 / (self.q as f64 * 2.0 * PI * n * n)
    }
}

/// `sum_{l=0}^{q-1} e^{2 pi i (p l^2 + m l) / q}`, with exponents reduced mod `q`.
pub fn gauss_sum(p: i64, q: i64, m: i64) -> Result<Complex64> {
    if q < 1 {
        return Err(domain(format!("Gauss sum needs q >= 1, got {q}")));
    }
    let q128 = q as i128;
    let (p, m) = ((p as i128).rem_euclid(q128), (m as i128).rem_euclid(q128));
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..q128 {
        let r = (p * l % q128 * l + m * l).rem_euclid(q128);
        acc += Complex64::from_polar(1.0, 2.0 * PI * r as f64 / q as f64);
    }
    Ok(acc)
}

/// `psi^(t, 0) = alpha N`.
pub fn psi_hat_zero(sides: u32, alpha: f64) -> Result<f64> {
    if sides < 3 {
        return Err(domain(format!("a regular polygon needs >= 3 sides, got {sides}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(format!("corner strength {alpha} must be finite and >= 0")));
    }
    Ok(alpha * sides as f64)
}

/// `theta_{p,q} = 2 arcsin(sin(pi/N)^{1/q})`.
pub fn predicted_angle(sides: u32, q: u64) -> Result<f64> {
    if sides < 3 || q < 1 {
        return Err(domain(format!("predicted angle needs N >= 3 and q >= 1, got N = {sides}, q = {q}")));
    }
    Ok(2.0 * (PI / sides as f64).sin().powf(1.0 / q as f64).asin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalbotResult {
    pub sides: u32,
    pub time: RationalTime,
    pub alpha: f64,
    /// `G(p, q, m)` for `m = 0..q`.
    pub gauss: BTreeMap<u64, Complex64>,
    /// `|alpha_{l,m}| = |psi^(t_{p,q}, 0)| / (N sqrt(q))`.
    pub coeff_magnitude: f64,
    pub theta_pq: f64,
}

pub fn talbot_coefficients(sides: u32, time: RationalTime) -> Result<TalbotResult> {
    let rt = RationalTime::new(time.p, time.q)?;
    let alpha = alphas_for_regular_polygon(sides)?;
    let psi0 = psi_hat_zero(sides, alpha)?;
    let gauss = (0..rt.q)
        .map(|m| Ok((m, gauss_sum(rt.p as i64, rt.q as i64, m as i64)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(TalbotResult {
        sides,
        time: rt,
        alpha,
        gauss,
        coeff_magnitude: psi0 / (sides as f64 * (rt.q as f64).sqrt()),
        theta_pq: predicted_angle(sides, rt.q)?,
    })
}

/// `alpha N sum_{|j| <= J} e^{-(2 pi N j sigma)^2 / 2} e^{i t (2 pi N j)^2 + i (2 pi N j) x}`,
/// a Gaussian-smoothed version of the comb `psi(t, x)`; `J` makes the dropped
/// tail smaller than `1e-12` relative to `alpha N`.
pub fn regularized_psi(sides: u32, alpha: f64, t: f64, xs: &[f64], sigma: f64) -> Result<Vec<Complex64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(domain(format!("smoothing width sigma must be > 0, got {sigma}")));
    }
    let amp = psi_hat_zero(sides, alpha)?;
    let k = 2.0 * PI * sides as f64;
    // e^{-(k j sigma)^2/2} < 1e-12 / 4 beyond J; the tail then sums below 1e-12.
    let cut = (2.0 * (4e12f64).ln()).sqrt() / (k * sigma);
    let jmax = cut.ceil() as i64;
    let terms: Vec<(f64, f64)> = (-jmax..=jmax)
        .map(|j| {
            let kj = k * j as f64;
            ((-0.5 * (kj * sigma).powi(2)).exp(), kj)
        })
        .collect();
    Ok(xs
        .iter()
        .map(|&x| {
            terms
                .iter()
                .map(|&(w, kj)| Complex64::from_polar(w, t * kj * kj + kj * x))
                .sum::<Complex64>()
                * amp
        })
        .collect())
}
