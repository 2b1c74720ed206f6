//! Gauged coefficient dynamics.
//!
//! The field is the superposition `u(t,x) = sum_j A_j(t) e^{i(x-j)^2/4t} / sqrt(t)`
//! with `A_j = e^{-i(|alpha_j|^2 - M) log sqrt(t)} A~_j`. Substituting into the
//! cubic equation with `a(t) = M/t` and projecting onto each free wave gives
//!
//! ```text
//! i dA~_k/dt = -(1/2t) sum_{NR_k} e^{-i w/4t} e^{-i b log sqrt(t)} A~_j1 conj(A~_j2) A~_j3
//!              + (1/2t) (|A~_k|^2 - |alpha_k|^2) A~_k
//! ```
//!
//! with `w = k^2 - j1^2 + j2^2 - j3^2 = 2 (k - j1)(k - j3)`,
//! `b = |alpha_j1|^2 - |alpha_j2|^2 + |alpha_j3|^2 - |alpha_k|^2`, and `NR_k` the
//! triples of the window with `j1 - j2 + j3 = k`, `j1 != k`, `j3 != k`. The
//! resonant triples have been summed in closed form using `sum |A~|^2 = M`.
//! Triples leaving the index window are dropped; the truncated system still
//! conserves `sum |A~_j|^2` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSequence;
use crate::error::{argument, domain, Error, Result};

/// `k^2 - j1^2 + j2^2 - j3^2` on the constraint `k - j1 + j2 - j3 = 0`.
pub fn resonance_frequency(k: i64, j1: i64, j2: i64, j3: i64) -> Result<i64> {
    if k - j1 + j2 - j3 != 0 {
        return Err(domain(format!(
            "({k}, {j1}, {j2}, {j3}) violates k - j1 + j2 - j3 = 0"
        )));
    }
    Ok(k * k - j1 * j1 + j2 * j2 - j3 * j3)
}

/// Time and gauged coefficients on the window of the originating [`AlphaSequence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientState {
    pub t: f64,
    pub j_min: i64,
    pub a_tilde: Vec<Complex64>,
}

impl CoefficientState {
    /// `A~_j(t) = alpha_j`, the data the system is started from near the singular time.
    pub fn initial(alphas: &AlphaSequence, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(domain(format!("coefficient time must be > 0, got {t}")));
        }
        Ok(Self {
            t,
            j_min: alphas.j_min(),
            a_tilde: alphas.values().to_vec(),
        })
    }

    pub fn get(&self, j: i64) -> Option<Complex64> {
        usize::try_from(j - self.j_min)
            .ok()
            .and_then(|i| self.a_tilde.get(i).copied())
    }
}

/// `sum_j |A~_j|^2`, left to right in `j`.
pub fn mass(state: &CoefficientState) -> f64 {
    state.a_tilde.iter().fold(0.0, |acc, z| acc + z.norm_sqr())
}

fn check_window(state: &CoefficientState, alphas: &AlphaSequence) -> Result<()> {
    if !alphas.same_window(state.j_min, state.a_tilde.len()) {
        return Err(argument(format!(
            "coefficient window {}..={} does not match alpha window {}..={}",
            state.j_min,
            state.j_min + state.a_tilde.len() as i64 - 1,
            alphas.j_min(),
            alphas.j_max()
        )));
    }
    Ok(())
}

/// `A_j(t) = e^{-i(|alpha_j|^2 - M) log sqrt(t)} A~_j(t)`.
pub fn ungauge(state: &CoefficientState, alphas: &AlphaSequence) -> Result<Vec<Complex64>> {
    check_window(state, alphas)?;
    if !(state.t > 0.0) {
        return Err(domain(format!("ungauge needs t > 0, got {}", state.t)));
    }
    let m = alphas.mass();
    let log_sqrt_t = 0.5 * state.t.ln();
    Ok(state
        .a_tilde
        .iter()
        .zip(alphas.values())
        .map(|(a, al)| Complex64::from_polar(1.0, -(al.norm_sqr() - m) * log_sqrt_t) * a)
        .collect())
}

/// Right-hand side `dA~/dt` of the gauged system.
pub fn gauged_rhs(t: f64, state: &CoefficientState, alphas: &AlphaSequence) -> Result<Vec<Complex64>> {
    if !(t > 0.0) {
        return Err(domain(format!("the coefficient system is singular at t <= 0 (t = {t})")));
    }
    check_window(state, alphas)?;
    let mut out = vec![Complex64::new(0.0, 0.0); state.a_tilde.len()];
    let weights = AlphaWeights::new(alphas);
    rhs_into(t, &state.a_tilde, &weights, state.j_min, &mut out, &mut Vec::new());
    Ok(out)
}

struct AlphaWeights {
    abs2: Vec<f64>,
}

impl AlphaWeights {
    fn new(alphas: &AlphaSequence) -> Self {
        Self {
            abs2: alphas.values().iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

/// Evaluates the gauged RHS into `out`. With the rotated amplitudes
/// `W_j = e^{i j^2/4t} e^{-i |alpha_j|^2 log sqrt(t)} A~_j` every phase factor of a
/// triple term factorises as `conj(P_k) W_j1 conj(W_j2) W_j3`, where
/// `P_k = W_k / A~_k`.
fn rhs_into(
    t: f64,
    a: &[Complex64],
    weights: &AlphaWeights,
    j_min: i64,
    out: &mut [Complex64],
    scratch: &mut Vec<(Complex64, Complex64)>,
) {
    let n = a.len();
    let log_sqrt_t = 0.5 * t.ln();
    let inv_4t = 0.25 / t;
    scratch.clear();
    scratch.extend((0..n).map(|i| {
        let j = (j_min + i as i64) as f64;
        let p = Complex64::from_polar(1.0, j * j * inv_4t - weights.abs2[i] * log_sqrt_t);
        (p, p * a[i])
    }));
    let half_inv_t = 0.5 / t;
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        // j2 = j1 + j3 - k; index arithmetic is shift-invariant.
        for j1 in 0..n {
            if j1 == k {
                continue;
            }
            let w1 = scratch[j1].1;
            for j2 in 0..n {
                let j3 = (k + j2) as isize - j1 as isize;
                if j3 < 0 || j3 as usize >= n || j3 as usize == k {
                    continue;
                }
                acc += w1 * scratch[j2].1.conj() * scratch[j3 as usize].1;
            }
        }
        let nonres = scratch[k].0.conj() * acc;
        let diag = (a[k].norm_sqr() - weights.abs2[k]) * a[k];
        // i dA/dt = -(1/2t) nonres + (1/2t) diag  =>  dA/dt = (i/2t) (nonres - diag)
        out[k] = Complex64::new(0.0, half_inv_t) * (nonres - diag);
    }
}

/// Largest `|k^2 - j1^2 + j2^2 - j3^2|` over the window: `2 (n - 1)^2` for `n` modes.
pub fn max_resonance_frequency(window_len: usize) -> f64 {
    let d = window_len.saturating_sub(1) as f64;
    2.0 * d * d
}

/// Adaptive stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl EvolutionConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_STEPS: usize = 5_000_000;

    pub fn new(t_start: f64, t_end: f64) -> Self {
        Self {
            t_start,
            t_end,
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_steps: Self::DEFAULT_MAX_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0 && self.t_end > 0.0) {
            return Err(domain(format!(
                "evolution times must be > 0 (the system is singular at t = 0): {} -> {}",
                self.t_start, self.t_end
            )));
        }
        if self.t_start == self.t_end {
            return Err(argument("t_start and t_end must differ"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(argument("tolerances must be > 0"));
        }
        if self.max_steps == 0 {
            return Err(argument("max_steps must be > 0"));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Marches a [`CoefficientState`] through time, keeping the step size between
/// calls so that dense sequences of nearby targets stay cheap.
pub struct Propagator<'a> {
    alphas: &'a AlphaSequence,
    weights: AlphaWeights,
    state: CoefficientState,
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
    steps: usize,
    h: Option<f64>,
    omega_max: f64,
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    scratch: Vec<(Complex64, Complex64)>,
}

impl<'a> Propagator<'a> {
    pub fn new(
        state: CoefficientState,
        alphas: &'a AlphaSequence,
        rel_tol: f64,
        abs_tol: f64,
        max_steps: usize,
    ) -> Result<Self> {
        check_window(&state, alphas)?;
        if !(state.t > 0.0) {
            return Err(domain(format!("start time must be > 0, got {}", state.t)));
        }
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(argument("tolerances must be > 0"));
        }
        let n = state.a_tilde.len();
        let zeros = || vec![Complex64::new(0.0, 0.0); n];
        Ok(Self {
            alphas,
            weights: AlphaWeights::new(alphas),
            omega_max: max_resonance_frequency(n),
            state,
            rel_tol,
            abs_tol,
            max_steps,
            steps: 0,
            h: None,
            k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
            tmp: zeros(),
            scratch: Vec::with_capacity(n),
        })
    }

    pub fn state(&self) -> &CoefficientState {
        &self.state
    }

    pub fn into_state(self) -> CoefficientState {
        self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn alphas(&self) -> &AlphaSequence {
        self.alphas
    }

    fn eval(&mut self, stage: usize, t: f64) {
        let (k, tmp, scratch) = (&mut self.k, &self.tmp, &mut self.scratch);
        rhs_into(t, tmp, &self.weights, self.state.j_min, &mut k[stage], scratch);
    }

    /// Largest step keeping the fastest phase `w_max / 4t` within `pi/4`.
    fn phase_cap(&self, t: f64, toward_zero: bool) -> f64 {
        if self.omega_max == 0.0 {
            return f64::INFINITY;
        }
        let cap = PI * t * t / self.omega_max;
        if toward_zero {
            let lo = (t - cap).max(0.5 * t);
            PI * lo * lo / self.omega_max
        } else {
            cap
        }
    }

    /// Advances the state to `t_target` (either direction, never through 0).
    pub fn advance_to(&mut self, t_target: f64) -> Result<&CoefficientState> {
        if !(t_target > 0.0) {
            return Err(domain(format!("cannot integrate to t = {t_target} <= 0")));
        }
        let n = self.state.a_tilde.len();
        let dir = if t_target >= self.state.t { 1.0 } else { -1.0 };
        let span = (t_target - self.state.t).abs();
        if span == 0.0 {
            return Ok(&self.state);
        }
        let mut h = self.h.map(f64::abs).unwrap_or(1e-3 * span.max(1e-12)).min(span);

        self.tmp.copy_from_slice(&self.state.a_tilde);
        self.eval(0, self.state.t);

        loop {
            let t = self.state.t;
            let remaining = (t_target - t).abs();
            if remaining <= 1e-14 * t_target.abs() {
                self.state.t = t_target;
                return Ok(&self.state);
            }
            if self.steps >= self.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded max_steps = {}", self.max_steps),
                    last_good: Box::new(self.state.clone()),
                });
            }
            h = h.min(self.phase_cap(t, dir < 0.0));
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let y = &self.state.a_tilde;

            macro_rules! stage {
                ($idx:expr, $c:expr, [$(($a:expr, $s:expr)),*]) => {{
                    for i in 0..n {
                        let mut acc = y[i];
                        $( acc += self.k[$s][i] * ($a * hs); )*
                        self.tmp[i] = acc;
                    }
                    let (k, tmp, scratch) = (&mut self.k, &self.tmp, &mut self.scratch);
                    rhs_into(t + $c * hs, tmp, &self.weights, self.state.j_min, &mut k[$idx], scratch);
                }};
            }
            stage!(1, C2, [(A21, 0)]);
            stage!(2, C3, [(A31, 0), (A32, 1)]);
            stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
            stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
            stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
            // 5th-order solution, FSAL stage.
            for i in 0..n {
                self.tmp[i] = y[i]
                    + (self.k[0][i] * B1
                        + self.k[2][i] * B3
                        + self.k[3][i] * B4
                        + self.k[4][i] * B5
                        + self.k[5][i] * B6)
                        * hs;
            }
            let t_new = if last { t_target } else { t + hs };
            {
                let (k, tmp, scratch) = (&mut self.k, &self.tmp, &mut self.scratch);
                rhs_into(t_new, tmp, &self.weights, self.state.j_min, &mut k[6], scratch);
            }

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * hs;
                let scale = self.abs_tol + self.rel_tol * y[i].norm().max(self.tmp[i].norm());
                err_sq += (e.norm() / scale).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                    last_good: Box::new(self.state.clone()),
                });
            }
            self.steps += 1;
            if err <= 1.0 {
                self.state.a_tilde.copy_from_slice(&self.tmp);
                self.state.t = t_new;
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if !last {
                    h *= factor;
                }
                self.h = Some(h);
                if last {
                    return Ok(&self.state);
                }
            } else {
                h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if h < 1e-15 * t.abs() {
                    return Err(Error::Integration {
                        t,
                        reason: "step size underflow".into(),
                        last_good: Box::new(self.state.clone()),
                    });
                }
                // restore stage-0 input for the retry
                self.tmp.copy_from_slice(&self.state.a_tilde);
            }
        }
    }
}

/// Integrates the gauged system from `config.t_start` to `config.t_end`.
pub fn evolve(
    state: &CoefficientState,
    alphas: &AlphaSequence,
    config: &EvolutionConfig,
) -> Result<CoefficientState> {
    config.validate()?;
    if state.t != config.t_start {
        return Err(argument(format!(
            "state time {} differs from t_start {}",
            state.t, config.t_start
        )));
    }
    let mut prop = Propagator::new(
        state.clone(),
        alphas,
        config.rel_tol,
        config.abs_tol,
        config.max_steps,
    )?;
    prop.advance_to(config.t_end)?;
    Ok(prop.into_state())
}

/// States at each of `times` (visited in the given order) starting from `state`.
pub fn evolve_through(
    state: &CoefficientState,
    alphas: &AlphaSequence,
    times: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
) -> Result<Vec<CoefficientState>> {
    let mut prop = Propagator::new(state.clone(), alphas, rel_tol, abs_tol, max_steps)?;
    times
        .iter()
        .map(|&t| prop.advance_to(t).cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resonance_examples() {
        assert_eq!(resonance_frequency(0, 1, 2, 1).unwrap(), 2);
        assert_eq!(resonance_frequency(1, 1, 2, 2).unwrap(), 0);
        assert!(resonance_frequency(0, 1, 1, 1).is_err());
    }

    #[test]
    fn resonance_factorisation_exhaustive() {
        for k in -10i64..=10 {
            for j1 in -10i64..=10 {
                for j3 in -10i64..=10 {
                    let j2 = j1 + j3 - k;
                    if j2.abs() > 10 {
                        continue;
                    }
                    let w = resonance_frequency(k, j1, j2, j3).unwrap();
                    assert_eq!(w, 2 * (k - j1) * (k - j3));
                    assert_eq!(w == 0, j1 == k || j3 == k);
                }
            }
        }
    }

    #[test]
    fn single_mode_is_a_fixed_point() {
        let alphas = AlphaSequence::from_real(0, &[0.7]).unwrap();
        let s = CoefficientState::initial(&alphas, 0.3).unwrap();
        let d = gauged_rhs(0.3, &s, &alphas).unwrap();
        assert_eq!(d[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_rejects_bad_input() {
        let alphas = AlphaSequence::from_real(0, &[0.1, 0.2]).unwrap();
        let s = CoefficientState::initial(&alphas, 1.0).unwrap();
        assert!(matches!(gauged_rhs(0.0, &s, &alphas), Err(Error::Domain(_))));
        let other = AlphaSequence::from_real(1, &[0.1, 0.2]).unwrap();
        assert!(matches!(gauged_rhs(1.0, &s, &other), Err(Error::Argument(_))));
    }

    #[test]
    fn ungauge_properties() {
        let alphas = AlphaSequence::new(
            -1,
            vec![Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4), Complex64::new(0.0, 0.5)],
        )
        .unwrap();
        let mut s = CoefficientState::initial(&alphas, 1.0).unwrap();
        assert_eq!(ungauge(&s, &alphas).unwrap(), s.a_tilde);
        s.t = 0.137;
        for (a, b) in ungauge(&s, &alphas).unwrap().iter().zip(&s.a_tilde) {
            assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-15);
        }
        s.t = -1.0;
        assert!(ungauge(&s, &alphas).is_err());

        let single = AlphaSequence::from_real(0, &[0.4]).unwrap();
        let s1 = CoefficientState::initial(&single, 0.01).unwrap();
        assert_eq!(ungauge(&s1, &single).unwrap(), s1.a_tilde);
    }

    #[test]
    fn mass_examples() {
        let alphas = AlphaSequence::from_real(0, &[0.3, 0.4]).unwrap();
        let s = CoefficientState::initial(&alphas, 1.0).unwrap();
        assert_eq!(mass(&s), alphas.mass());
        let z = CoefficientState { t: 1.0, j_min: 0, a_tilde: vec![] };
        assert_eq!(mass(&z), 0.0);
    }

    #[test]
    fn evolve_validates_config() {
        let alphas = AlphaSequence::from_real(0, &[0.3, 0.3]).unwrap();
        let s = CoefficientState::initial(&alphas, 1.0).unwrap();
        assert!(matches!(
            evolve(&s, &alphas, &EvolutionConfig::new(1.0, -0.5)),
            Err(Error::Domain(_))
        ));
        assert!(evolve(&s, &alphas, &EvolutionConfig::new(1.0, 1.0)).is_err());
        assert!(evolve(&s, &alphas, &EvolutionConfig::new(0.5, 0.1)).is_err());
    }

    #[test]
    fn max_steps_failure_keeps_last_state() {
        let alphas = AlphaSequence::from_real(-2, &[0.3, 0.3, 0.3, 0.3, 0.3]).unwrap();
        let s = CoefficientState::initial(&alphas, 1.0).unwrap();
        let mut cfg = EvolutionConfig::new(1.0, 0.05);
        cfg.max_steps = 10;
        match evolve(&s, &alphas, &cfg) {
            Err(Error::Integration { last_good, t, .. }) => {
                assert_eq!(last_good.t, t);
                assert!(t < 1.0 && t > 0.05);
                assert_relative_eq!(mass(&last_good), alphas.mass(), max_relative = 1e-8);
            }
            other => panic!("expected integration failure, got {other:?}"),
        }
    }
}
