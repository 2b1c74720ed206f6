//! Corner strengths of the initial polygonal line.
//!
//! A corner of angle `theta` at the integer position `j` is encoded by a
//! complex strength `alpha_j` with `sin(theta/2) = exp(-pi |alpha_j|^2 / 2)`.
//! Here `theta` is only ever the quantity defined by that relation; the
//! geometric tangent-turning angle `phi` measured on reconstructed curves
//! satisfies `cos(phi) = 2 exp(-pi alpha^2) - 1` (see [`turning_angle_cos`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Result};

/// Complex corner strengths on the integer window `j_min..=j_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaSequenceRepr", into = "AlphaSequenceRepr")]
pub struct AlphaSequence {
    j_min: i64,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct AlphaSequenceRepr {
    j_min: i64,
    j_max: i64,
    alpha: Vec<[f64; 2]>,
}

impl TryFrom<AlphaSequenceRepr> for AlphaSequence {
    type Error = crate::Error;

    fn try_from(repr: AlphaSequenceRepr) -> Result<Self> {
        if repr.j_max < repr.j_min {
            return Err(argument(format!(
                "alphas: j_max ({}) < j_min ({})",
                repr.j_max, repr.j_min
            )));
        }
        let expected = (repr.j_max - repr.j_min + 1) as usize;
        if repr.alpha.len() != expected {
            return Err(argument(format!(
                "alphas: window {}..={} needs {} entries, got {}",
                repr.j_min,
                repr.j_max,
                expected,
                repr.alpha.len()
            )));
        }
        let values = repr
            .alpha
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        AlphaSequence::new(repr.j_min, values)
    }
}

impl From<AlphaSequence> for AlphaSequenceRepr {
    fn from(seq: AlphaSequence) -> Self {
        AlphaSequenceRepr {
            j_min: seq.j_min,
            j_max: seq.j_max(),
            alpha: seq.values.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl AlphaSequence {
    /// Strengths `values[i]` sit at index `j_min + i`.
    pub fn new(j_min: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(argument("alphas: the index window must not be empty"));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(argument("alphas: non-finite strength"));
        }
        Ok(Self { j_min, values })
    }

    /// Real strengths, e.g. for planar polygons.
    pub fn from_real(j_min: i64, values: &[f64]) -> Result<Self> {
        Self::new(j_min, values.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Zero strengths on `j_min..=j_max`.
    pub fn zeros(j_min: i64, j_max: i64) -> Result<Self> {
        if j_max < j_min {
            return Err(argument("alphas: j_max < j_min"));
        }
        Self::new(j_min, vec![Complex64::new(0.0, 0.0); (j_max - j_min + 1) as usize])
    }

    /// Builds the window spanning all corners (padded by `pad` on each side),
    /// with real strengths from the corner angles and zeros elsewhere.
    pub fn from_corners(corners: &[CornerSpec], pad: i64) -> Result<Self> {
        if corners.is_empty() {
            return Err(argument("at least one corner is required"));
        }
        if pad < 0 {
            return Err(argument("padding must be non-negative"));
        }
        let lo = corners.iter().map(|c| c.position).min().unwrap() - pad;
        let hi = corners.iter().map(|c| c.position).max().unwrap() + pad;
        let mut seq = Self::zeros(lo, hi)?;
        for c in corners {
            let a = alpha_from_angle(c.theta)?;
            seq.set(c.position, Complex64::new(a, 0.0))?;
        }
        Ok(seq)
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_min + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Indices of the window in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len()).map(move |i| self.j_min + i as i64)
    }

    pub fn get(&self, j: i64) -> Option<Complex64> {
        let i = j.checked_sub(self.j_min)?;
        usize::try_from(i).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn set(&mut self, j: i64, value: Complex64) -> Result<()> {
        let j_max = self.j_max();
        match usize::try_from(j - self.j_min).ok().and_then(|i| self.values.get_mut(i)) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(argument(format!(
                "index {j} outside window {}..={j_max}",
                self.j_min
            ))),
        }
    }

    /// `M = sum_j |alpha_j|^2`, accumulated left to right in `j`.
    pub fn mass(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, z| acc + z.norm_sqr())
    }

    /// Largest `|j|` carrying a nonzero strength, or `None` for the zero sequence.
    pub fn max_corner_abs(&self) -> Option<i64> {
        self.indices()
            .zip(&self.values)
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(j, _)| j.abs())
            .max()
    }

    /// Positions of the nonzero strengths.
    pub fn corner_positions(&self) -> Vec<i64> {
        self.indices()
            .zip(&self.values)
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn same_window(&self, other_j_min: i64, other_len: usize) -> bool {
        self.j_min == other_j_min && self.values.len() == other_len
    }
}

/// A corner of the initial polygonal line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    /// Angle in `(0, pi]`; `pi` means no corner.
    pub theta: f64,
    pub position: i64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(domain(format!("corner angle {theta} outside (0, pi]")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(format!("corner strength {alpha} must be finite and >= 0")));
    }
    Ok(())
}

/// `alpha = sqrt(-(2/pi) ln sin(theta/2))`.
pub fn alpha_from_angle(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let s = (0.5 * theta).sin();
    // sin(pi/2) may round to just below 1 and give a tiny negative log.
    let a2 = (-(2.0 / PI) * s.ln()).max(0.0);
    Ok(a2.sqrt())
}

/// `theta = 2 arcsin(exp(-pi alpha^2 / 2))`.
pub fn angle_from_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * (-0.5 * PI * alpha * alpha).exp().asin())
}

/// Squared jump `|A+ - A-|^2 = 4 (1 - exp(-pi alpha^2))` of the tangent across a
/// corner of strength `alpha`.
pub fn jump_energy(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-4.0 * (-PI * alpha * alpha).exp_m1())
}

/// `cos(phi)` of the tangent-turning angle across a corner of strength `alpha`.
pub fn turning_angle_cos(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * (-PI * alpha * alpha).exp() - 1.0)
}

/// Spectral energy of the polygonal line at the singular time:
/// `sum_j 4 (1 - exp(-pi |alpha_j|^2))`.
pub fn energy_at_zero(alphas: &AlphaSequence) -> f64 {
    alphas
        .values()
        .iter()
        .fold(0.0, |acc, z| acc - 4.0 * (-PI * z.norm_sqr()).exp_m1())
}

/// Corner strength of a planar regular polygon with `sides` sides:
/// `sin(pi/N) = exp(-pi alpha^2 / 2)`.
pub fn alphas_for_regular_polygon(sides: u32) -> Result<f64> {
    if sides < 3 {
        return Err(domain(format!("a regular polygon needs >= 3 sides, got {sides}")));
    }
    alpha_from_angle(2.0 * PI / sides as f64)
}
