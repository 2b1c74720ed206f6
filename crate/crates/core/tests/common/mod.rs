//! Test-only oracles, independent of the library's evaluation paths.
#![allow(dead_code)]

use binormal_core::alpha::AlphaSequence;
use binormal_core::coefficients::CoefficientState;
use num_complex::Complex64;

/// `dA~/dt` from the ungauged cubic system: enumerate every quadruple of the
/// window (resonant ones included), evaluate each phase with its own `exp`,
/// then apply the time-dependent gauge explicitly.
///
/// `i A_k' = -(1/2t) sum_{j1-j2+j3=k} e^{-i(k^2-j1^2+j2^2-j3^2)/4t} A_j1 conj(A_j2) A_j3 + (M/2t) A_k`
/// with `A_k = e^{-i phi_k} A~_k`, `phi_k = (|alpha_k|^2 - M) log sqrt(t)`.
/// Valid when `sum |A~|^2 = M`.
pub fn brute_force_gauged_rhs(state: &CoefficientState, alphas: &AlphaSequence) -> Vec<Complex64> {
    let t = state.t;
    let m: f64 = alphas.values().iter().map(|z| z.norm_sqr()).sum();
    let n = state.a_tilde.len() as i64;
    let j0 = state.j_min;
    let phi = |idx: i64| (alphas.values()[idx as usize].norm_sqr() - m) * 0.5 * t.ln();
    let a: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, -phi(i)) * state.a_tilde[i as usize])
        .collect();
    let mut out = Vec::with_capacity(n as usize);
    for ki in 0..n {
        let k = j0 + ki;
        let mut sum = Complex64::new(0.0, 0.0);
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let (j1, j2, j3) = (j0 + i1, j0 + i2, j0 + i3);
                    if k - j1 + j2 - j3 != 0 {
                        continue;
                    }
                    let w = (k * k - j1 * j1 + j2 * j2 - j3 * j3) as f64;
                    let phase = Complex64::new(0.0, -w / (4.0 * t)).exp();
                    sum += phase * a[i1 as usize] * a[i2 as usize].conj() * a[i3 as usize];
                }
            }
        }
        let i = Complex64::new(0.0, 1.0);
        // A_k' = -i * (i A_k')
        let da = -i * (-sum / (2.0 * t) + a[ki as usize] * (m / (2.0 * t)));
        let dphi = (alphas.values()[ki as usize].norm_sqr() - m) / (2.0 * t);
        // A~_k = e^{i phi_k} A_k
        let dat = Complex64::from_polar(1.0, phi(ki)) * (da + i * dphi * a[ki as usize]);
        out.push(dat);
    }
    out
}
