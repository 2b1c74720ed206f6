//! Browser bindings for `www/index.html`.
//!
//! Every export is a thin wrapper over a plain function returning
//! `Result<_, String>`, so the numerics can be tested natively.

use binormal_core::alpha::{angle_from_alpha, jump_energy, turning_angle_cos};
use binormal_core::curve::corner_angles_from_curve;
use binormal_core::pipeline::self_similar_slice;
use binormal_core::talbot::{predicted_angle, regularized_psi, talbot_coefficients, RationalTime};
use wasm_bindgen::prelude::*;

/// Self-similar curve at time `t`, flattened as `x, y, z` triples, followed by
/// the measured and predicted `cos(phi)` of the corner. The measured value is
/// NaN when `t` is too large for the corner fit.
pub fn self_similar(alpha: f64, t: f64, half_width: f64) -> Result<Vec<f64>, String> {
    if !(1.0..=10.0).contains(&half_width) {
        return Err(format!("half width must lie in [1, 10], got {half_width}"));
    }
    let (_, curve) = self_similar_slice(alpha, t, half_width, 5e-4).map_err(|e| e.to_string())?;
    let stride = (curve.points.len() / 2000).max(1);
    let mut out: Vec<f64> = curve
        .points
        .iter()
        .step_by(stride)
        .flat_map(|p| [p[0], p[1], p[2]])
        .collect();
    let measured = corner_angles_from_curve(&curve, &[0])
        .map(|a| a[0].cos())
        .unwrap_or(f64::NAN);
    out.push(measured);
    out.push(turning_angle_cos(alpha).map_err(|e| e.to_string())?);
    Ok(out)
}

/// `|psi(t_{p,q}, x)|` on `samples` points of one period `[0, 1/N]`.
pub fn talbot_profile(sides: u32, p: u32, q: u32, samples: usize) -> Result<Vec<f64>, String> {
    let rt = RationalTime::new(p as u64, q as u64).map_err(|e| e.to_string())?;
    let res = talbot_coefficients(sides, rt).map_err(|e| e.to_string())?;
    let n = samples.clamp(2, 20_000);
    let period = 1.0 / sides as f64;
    let xs: Vec<f64> = (0..n).map(|i| period * i as f64 / (n - 1) as f64).collect();
    let sigma = 0.1 / (sides as f64 * q as f64);
    let psi = regularized_psi(sides, res.alpha, rt.time(sides), &xs, sigma).map_err(|e| e.to_string())?;
    Ok(psi.iter().map(|z| z.norm()).collect())
}

/// Rows of `q, alpha / sqrt(q), theta_{p,q}` for odd `q <= q_max`, flattened.
pub fn angle_table(sides: u32, q_max: u32) -> Result<Vec<f64>, String> {
    let res = talbot_coefficients(sides, RationalTime::new(1, 1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for q in (1..=q_max.max(1)).step_by(2) {
        out.push(q as f64);
        out.push(res.alpha / (q as f64).sqrt());
        out.push(predicted_angle(sides, q as u64).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// `theta`, `cos(phi)` and the squared tangent jump for a corner strength.
pub fn corner_quantities(alpha: f64) -> Result<Vec<f64>, String> {
    let f = |e: binormal_core::Error| e.to_string();
    Ok(vec![angle_from_alpha(alpha).map_err(f)?, turning_angle_cos(alpha).map_err(f)?, jump_energy(alpha).map_err(f)?])
}

#[wasm_bindgen(js_name = selfSimilar)]
pub fn self_similar_js(alpha: f64, t: f64, half_width: f64) -> Result<Vec<f64>, JsError> {
    self_similar(alpha, t, half_width).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = talbotProfile)]
pub fn talbot_profile_js(sides: u32, p: u32, q: u32, samples: usize) -> Result<Vec<f64>, JsError> {
    talbot_profile(sides, p, q, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = angleTable)]
pub fn angle_table_js(sides: u32, q_max: u32) -> Result<Vec<f64>, JsError> {
    angle_table(sides, q_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cornerQuantities)]
pub fn corner_quantities_js(alpha: f64) -> Result<Vec<f64>, JsError> {
    corner_quantities(alpha).map_err(|e| JsError::new(&e))
}
