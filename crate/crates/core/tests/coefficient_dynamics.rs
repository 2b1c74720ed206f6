//! Coefficient dynamics checked against an independent evaluator of the
//! ungauged quadruple sum, plus conservation and reversibility runs.

use binormal_core::alpha::AlphaSequence;
use binormal_core::coefficients::{
    evolve, evolve_through, gauged_rhs, mass, ungauge, CoefficientState, EvolutionConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::brute_force_gauged_rhs;

fn random_alphas(rng: &mut ChaCha8Rng, j_min: i64, n: usize, amp: f64) -> AlphaSequence {
    let vals = (0..n)
        .map(|_| Complex64::from_polar(amp * rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    AlphaSequence::new(j_min, vals).unwrap()
}

/// A random state rescaled to carry the mass of `alphas`.
fn random_state(rng: &mut ChaCha8Rng, alphas: &AlphaSequence, t: f64) -> CoefficientState {
    let mut a: Vec<Complex64> = (0..alphas.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let m: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let scale = (alphas.mass() / m).sqrt();
    a.iter_mut().for_each(|z| *z *= scale);
    CoefficientState { t, j_min: alphas.j_min(), a_tilde: a }
}

#[test]
fn two_corner_rhs_matches_brute_force() {
    let alphas = AlphaSequence::from_real(0, &[0.5, 0.5]).unwrap();
    let state = CoefficientState::initial(&alphas, 1.0).unwrap();
    let fast = gauged_rhs(1.0, &state, &alphas).unwrap();
    let slow = brute_force_gauged_rhs(&state, &alphas);
    for (f, s) in fast.iter().zip(&slow) {
        assert!((f - s).norm() < 1e-12, "{f} vs {s}");
    }
    // Two adjacent modes have no nonresonant triple inside the window.
    assert!(fast.iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn rhs_matches_brute_force_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let alphas = random_alphas(&mut rng, -5, 11, 0.4);
        let t = [1.0, 0.3, 0.05, 2.5][trial % 4];
        let state = random_state(&mut rng, &alphas, t);
        let fast = gauged_rhs(t, &state, &alphas).unwrap();
        let slow = brute_force_gauged_rhs(&state, &alphas);
        for (f, s) in fast.iter().zip(&slow) {
            worst = worst.max((f - s).norm());
        }
    }
    assert!(worst < 1e-12, "max deviation {worst:e}");
}

#[test]
fn rhs_conserves_mass_differentially() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let alphas = random_alphas(&mut rng, -4, 9, 0.5);
        // mass conservation of the truncated system does not need sum|A~|^2 = M
        let mut state = random_state(&mut rng, &alphas, 0.2);
        state.a_tilde.iter_mut().for_each(|z| *z *= 1.3);
        let d = gauged_rhs(0.2, &state, &alphas).unwrap();
        let dm: f64 = state
            .a_tilde
            .iter()
            .zip(&d)
            .map(|(a, da)| 2.0 * (a.conj() * da).re)
            .sum();
        let scale: f64 = d.iter().map(|z| z.norm()).sum::<f64>() * mass(&state).sqrt();
        assert!(dm.abs() < 1e-13 * scale.max(1.0), "dM/dt = {dm:e}");
    }
}

#[test]
fn single_mode_is_preserved_by_evolution() {
    let alphas = AlphaSequence::from_real(-2, &[0.0, 0.0, 0.6, 0.0, 0.0]).unwrap();
    let s = CoefficientState::initial(&alphas, 1.0).unwrap();
    let out = evolve(&s, &alphas, &EvolutionConfig::new(1.0, 0.05)).unwrap();
    for (a, b) in out.a_tilde.iter().zip(alphas.values()) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn two_adjacent_corners_conserve_mass() {
    let alphas = AlphaSequence::from_real(-3, &[0.0, 0.0, 0.0, 0.3, 0.3, 0.0, 0.0, 0.0]).unwrap();
    let s = CoefficientState::initial(&alphas, 1.0).unwrap();
    let out = evolve(&s, &alphas, &EvolutionConfig::new(1.0, 0.1)).unwrap();
    let drift = (mass(&out) - alphas.mass()).abs() / alphas.mass();
    assert!(drift < 1e-8, "drift {drift:e}");
    // the dynamics is not trivial
    let moved: f64 = out.a_tilde.iter().zip(alphas.values()).map(|(a, b)| (a - b).norm()).sum();
    assert!(moved > 1e-3);
}

#[test]
fn forward_backward_returns_to_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alphas = random_alphas(&mut rng, -3, 7, 0.4);
    let s = CoefficientState::initial(&alphas, 0.2).unwrap();
    let cfg = EvolutionConfig::new(0.2, 1.0);
    let fwd = evolve(&s, &alphas, &cfg).unwrap();
    let back = evolve(&fwd, &alphas, &EvolutionConfig::new(1.0, 0.2)).unwrap();
    let err: f64 = back
        .a_tilde
        .iter()
        .zip(&s.a_tilde)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let tol = 10.0 * (cfg.rel_tol * alphas.values().iter().map(|z| z.norm()).fold(0.0, f64::max) + cfg.abs_tol);
    assert!(err < tol, "round trip error {err:e} (tol {tol:e})");
}

#[test]
fn coefficients_flatten_towards_the_singular_time() {
    // Started very close to t = 0; the increments |A~(t) - A~(t/2)| shrink with t.
    let alphas = AlphaSequence::from_real(-2, &[0.0, 0.0, 0.4, 0.4, 0.0, 0.0]).unwrap();
    let t0 = 1e-4;
    let s = CoefficientState::initial(&alphas, t0).unwrap();
    let times: Vec<f64> = (0..8).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let states = evolve_through(&s, &alphas, &times, 1e-11, 1e-13, 50_000_000).unwrap();
    let incr: Vec<f64> = states
        .windows(2)
        .map(|w| {
            w[0].a_tilde
                .iter()
                .zip(&w[1].a_tilde)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    for w in incr.windows(2) {
        assert!(w[0] < w[1], "increments not decreasing towards t = 0: {incr:?}");
    }
}

#[test]
fn ungauged_amplitudes_keep_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphas = random_alphas(&mut rng, -2, 5, 0.5);
    let s = random_state(&mut rng, &alphas, 0.37);
    for (a, b) in ungauge(&s, &alphas).unwrap().iter().zip(&s.a_tilde) {
        assert!((a.norm() - b.norm()).abs() < 1e-15);
    }
}
