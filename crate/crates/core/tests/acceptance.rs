//! End-to-end acceptance runs. Each test prints one `[ACn] PASS|FAIL` line
//! with the measured numbers before asserting.
//!
//! Run with `cargo test -p binormal-core --test acceptance -- --nocapture` to
//! see the report.

use std::f64::consts::PI;
use std::sync::OnceLock;

use binormal_core::alpha::{alphas_for_regular_polygon, angle_from_alpha, energy_at_zero, AlphaSequence};
use binormal_core::coefficients::{evolve, evolve_through, gauged_rhs, mass, CoefficientState, EvolutionConfig};
use binormal_core::curve::corner_angles_from_curve;
use binormal_core::field::{nls_residual, Modes};
use binormal_core::frame::{
    asymptotic_limits, curvature_fd, max_grid_step, tangent_limits, torsion_fd, transport_x, Frame, Grid,
};
use binormal_core::pipeline::{energy_table, self_similar_slice, simulate, EnergyRow, SimulationSettings, Slice};
use binormal_core::spectral::{fourier_transform_tx, plateau_estimate, spike_frequency, two_corner_spike_model, TaperConfig};
use binormal_core::talbot::{gauss_sum, predicted_angle};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::brute_force_gauged_rhs;

fn sci(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", cells.join(", "))
}

fn report(id: u32, pass: bool, detail: String) {
    println!("[AC{id}] {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "AC{id}: {detail}");
}

fn random_phase_alphas(rng: &mut ChaCha8Rng, j: i64, amp: f64) -> AlphaSequence {
    let vals = (-j..=j)
        .map(|_| Complex64::from_polar(amp, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    AlphaSequence::new(-j, vals).unwrap()
}

/// Corners of strength `values` at `0, 1, ...` inside `[-pad, len - 1 + pad]`.
fn padded(values: &[f64], pad: i64) -> AlphaSequence {
    let mut v = vec![0.0; pad as usize];
    v.extend_from_slice(values);
    v.extend(std::iter::repeat_n(0.0, pad as usize));
    AlphaSequence::from_real(-pad, &v).unwrap()
}

const K_MIN: i64 = 8;
const K_MAX: i64 = 14;
const SAMPLES: usize = 65;

fn plateau(rows: &[EnergyRow], pick: fn(&EnergyRow) -> f64) -> (f64, f64) {
    let e: Vec<(i64, f64)> = rows.iter().map(|r| (r.k, pick(r))).collect();
    plateau_estimate(&e).unwrap()
}

struct EnergyRun {
    alphas: AlphaSequence,
    rows: Vec<EnergyRow>,
}

fn single_corner_energy() -> &'static EnergyRun {
    static RUN: OnceLock<EnergyRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let alphas = AlphaSequence::from_real(0, &[0.5]).unwrap();
        let t = 0.05;
        let (frames, _) = self_similar_slice(0.5, t, 30.0, 0.002).unwrap();
        let modes = Modes::new(0, vec![Complex64::new(0.5, 0.0)]);
        let taper = TaperConfig::new(30.0, 0.25, 2.0).unwrap();
        let rows = energy_table(&frames, &modes, &alphas, K_MIN, K_MAX, SAMPLES, &taper).unwrap();
        EnergyRun { alphas, rows }
    })
}

const TWO_CORNER_L: f64 = 40.0;

/// Two corners of strength 0.3 at `j = 0, 1`, evolved from `t = 1e-3`, at `t = 0.05` and `0.1`.
fn two_corner_run() -> &'static (AlphaSequence, Vec<Slice>) {
    static RUN: OnceLock<(AlphaSequence, Vec<Slice>)> = OnceLock::new();
    RUN.get_or_init(|| {
        let alphas = padded(&[0.3, 0.3], 6);
        let settings = SimulationSettings {
            t_start: 1e-3,
            times: vec![0.05, 0.1],
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 5_000_000,
            half_width: TWO_CORNER_L,
            grid_h: 0.002,
            seed: Frame::canonical(),
        };
        let slices = simulate(&alphas, &settings).unwrap();
        (alphas, slices)
    })
}

fn two_corner_energy() -> &'static EnergyRun {
    static RUN: OnceLock<EnergyRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let (alphas, slices) = two_corner_run();
        let s = &slices[0];
        let taper = TaperConfig::new(TWO_CORNER_L, 0.25, 2.0).unwrap();
        let rows = energy_table(&s.frames, &s.modes, alphas, K_MIN, K_MAX, SAMPLES, &taper).unwrap();
        EnergyRun { alphas: alphas.clone(), rows }
    })
}

#[test]
fn ac01_mass_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alphas = random_phase_alphas(&mut rng, 8, 0.3);
    let s = CoefficientState::initial(&alphas, 1.0).unwrap();
    let out = evolve(&s, &alphas, &EvolutionConfig::new(1.0, 0.05)).unwrap();
    let drift = (mass(&out) - alphas.mass()).abs() / alphas.mass();
    let moved = out
        .a_tilde
        .iter()
        .zip(alphas.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    report(
        1,
        drift < 1e-8 && moved > 1e-3,
        format!("17 modes, t 1 -> 0.05: relative mass drift {drift:.2e} (< 1e-8), max |A~ - alpha| {moved:.3}"),
    );
}

#[test]
fn ac02_single_mode_is_a_fixed_point() {
    let mut v = vec![0.0; 17];
    v[8] = 0.5;
    let alphas = AlphaSequence::from_real(-8, &v).unwrap();
    let s = CoefficientState::initial(&alphas, 1.0).unwrap();
    let times: Vec<f64> = (0..=19).map(|i| 1.0 - 0.05 * i as f64).collect();
    let states = evolve_through(&s, &alphas, &times, 1e-10, 1e-12, 5_000_000).unwrap();
    let worst = states
        .iter()
        .flat_map(|st| st.a_tilde.iter().zip(alphas.values()).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    report(2, worst < 1e-10, format!("max |A~_j(t) - alpha_j| over t in [0.05, 1]: {worst:.2e} (< 1e-10)"));
}

#[test]
fn ac03_rhs_matches_brute_force_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let alphas = AlphaSequence::new(
            -5,
            (0..11)
                .map(|_| Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..2.0 * PI)))
                .collect(),
        )
        .unwrap();
        let t = [0.05, 0.2, 1.0, 3.0][trial % 4];
        let mut a: Vec<Complex64> = (0..11)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let scale = (alphas.mass() / a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        a.iter_mut().for_each(|z| *z *= scale);
        let state = CoefficientState { t, j_min: -5, a_tilde: a };
        let fast = gauged_rhs(t, &state, &alphas).unwrap();
        let slow = brute_force_gauged_rhs(&state, &alphas);
        for (f, s) in fast.iter().zip(&slow) {
            worst = worst.max((f - s).norm());
        }
    }
    report(3, worst < 1e-12, format!("100 random states on |j| <= 5: max deviation {worst:.2e} (< 1e-12)"));
}

#[test]
fn ac04_frames_stay_orthonormal_over_long_marches() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alphas = random_phase_alphas(&mut rng, 8, 0.3);
    let t = 0.05;
    let modes = Modes::new(-8, alphas.values().to_vec());
    let h = max_grid_step(t, 200.0, &modes);
    let n = (200.0 / h).ceil() as usize + 1;
    let grid = Grid::new(0.0, 200.0 / (n - 1) as f64, n).unwrap();
    let field = transport_x(t, &Frame::canonical(), 0.0, &grid, &modes).unwrap();
    let defect = field.max_orthonormality_defect();
    report(
        4,
        defect < 1e-9,
        format!("{n} steps over [0, 200] at t = 0.05: max |F^T F - I| = {defect:.2e} (< 1e-9)"),
    );
}

#[test]
fn ac05_self_similar_geometry() {
    let alpha = 0.5;
    let t = 1.0;
    let (field, _) = self_similar_slice(alpha, t, 22.0, 0.002).unwrap();
    let kappa = curvature_fd(&field);
    let tau = torsion_fd(&field);
    let (mut k_err, mut t_err) = (0.0f64, 0.0f64);
    for i in 0..field.frames.len() {
        let x = field.x(i);
        if !(2.0..=20.0).contains(&x) {
            continue;
        }
        k_err = k_err.max((kappa[i] - alpha / t.sqrt()).abs() / (alpha / t.sqrt()));
        t_err = t_err.max((tau[i] - x / (2.0 * t)).abs() / (x / (2.0 * t)));
    }
    let (_, curve) = self_similar_slice(alpha, 0.01, 2.0, 5e-4).unwrap();
    let phi = corner_angles_from_curve(&curve, &[0]).unwrap()[0];
    let target = 2.0 * (-PI * alpha * alpha).exp() - 1.0;
    let a_err = (phi.cos() - target).abs() / target.abs();
    report(
        5,
        k_err < 1e-3 && t_err < 2e-2 && a_err < 2e-2,
        format!(
            "curvature rel err {k_err:.2e} (< 1e-3), torsion rel err {t_err:.2e} (< 2e-2) on [2, 20]; \
             cos(phi) at t = 0.01: {:.6} vs {target:.6}, rel err {a_err:.2e} (< 2e-2)",
            phi.cos()
        ),
    );
}

#[test]
fn ac06_energy_plateau() {
    let one = single_corner_energy();
    let two = two_corner_energy();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, run, tol) in [("single alpha = 0.5", one, 0.05), ("two alpha = 0.3", two, 0.10)] {
        let target = 4.0 * PI * run.alphas.mass();
        let worst = run.rows.iter().map(|r| r.rel_err_t().abs()).fold(0.0, f64::max);
        let (p, spread) = plateau(&run.rows, |r| r.xi_t);
        pass &= worst < tol;
        lines.push(format!(
            "{name}: plateau {p:.5} (spread {spread:.1e}) vs 4 pi M = {target:.5}, worst window rel err {worst:.2e} (< {tol})"
        ));
    }
    report(6, pass, lines.join("; "));
}

#[test]
fn ac07_energy_jumps_at_the_singular_time() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, run) in [("single", single_corner_energy()), ("two", two_corner_energy())] {
        let analytic: f64 = run.alphas.values().iter().map(|a| 4.0 * (1.0 - (-PI * a.norm_sqr()).exp())).sum();
        let at_zero = energy_at_zero(&run.alphas);
        let exact = (at_zero - analytic).abs() <= 4.0 * f64::EPSILON * analytic;
        let (p, spread) = plateau(&run.rows, |r| r.xi_t);
        let below = at_zero < p - spread;
        pass &= exact && below && run.rows.iter().all(|r| r.at_zero == at_zero);
        lines.push(format!("{name}: Xi(0) = {at_zero:.6} (closed form {analytic:.6}) < plateau {p:.5} - {spread:.1e}"));
    }
    report(7, pass, lines.join("; "));
}

#[test]
fn ac08_normal_energy_matches_tangent_energy() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, run, tol) in [("single", single_corner_energy(), 0.05), ("two", two_corner_energy(), 0.10)] {
        let target = 4.0 * PI * run.alphas.mass();
        let (pt, _) = plateau(&run.rows, |r| r.xi_t);
        let (pn, _) = plateau(&run.rows, |r| r.xi_n);
        let worst_n = run.rows.iter().map(|r| r.rel_err_n().abs()).fold(0.0, f64::max);
        let gap = (pt - pn).abs() / target;
        pass &= worst_n < tol && gap < tol;
        lines.push(format!("{name}: N plateau {pn:.5}, T plateau {pt:.5}, |gap|/4piM {gap:.2e}, worst N window {worst_n:.2e} (< {tol})"));
    }
    report(8, pass, lines.join("; "));
}

#[test]
fn ac09_limits_do_not_depend_on_time() {
    let (alphas, slices) = two_corner_run();
    let m = alphas.mass();
    let a = asymptotic_limits(&slices[0].frames, m).unwrap();
    let b = asymptotic_limits(&slices[1].frames, m).unwrap();
    let tol = 2.0 * a.error_estimate.max(b.error_estimate);
    let diffs = [
        (a.t_plus - b.t_plus).norm(),
        (a.t_minus - b.t_minus).norm(),
        a.n_plus.sub(&b.n_plus).norm(),
        a.n_minus.sub(&b.n_minus).norm(),
    ];
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    report(
        9,
        worst <= tol,
        format!("t = 0.05 vs 0.1: max limit difference {worst:.2e} <= 2 x error estimate {tol:.2e} (T+-, N+-)"),
    );
}

#[test]
fn ac10_nls_residual_converges() {
    let single = Modes::new(0, vec![Complex64::new(0.5, 0.0)]);
    let mut res = Vec::new();
    for lvl in 0..4 {
        let h = 0.01 / 2f64.powi(lvl);
        let dt = 0.002 / 2f64.powi(lvl);
        let ts: Vec<f64> = (0..3).map(|i| 0.5 + i as f64 * dt).collect();
        let xs: Vec<f64> = (0..=(4.0 / h).round() as usize).map(|i| -2.0 + i as f64 * h).collect();
        res.push(nls_residual(&ts, &xs, &vec![single.clone(); 3], 0.25).unwrap());
    }
    let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    let order_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.4);

    let alphas = padded(&[0.3, 0.3], 6);
    let s0 = CoefficientState::initial(&alphas, 1e-3).unwrap();
    let mut two = Vec::new();
    for lvl in 0..3 {
        let h = 0.02 / 2f64.powi(lvl);
        let dt = 2e-4 / 2f64.powi(lvl);
        let times: Vec<f64> = (0..3).map(|i| 0.1 + i as f64 * dt).collect();
        let xs: Vec<f64> = (0..=(1.0 / h).round() as usize).map(|i| i as f64 * h).collect();
        let states = evolve_through(&s0, &alphas, &times, 1e-12, 1e-14, 50_000_000).unwrap();
        let snaps: Vec<Modes> = states.iter().map(|s| Modes::from_state(s, &alphas).unwrap()).collect();
        two.push(nls_residual(&times, &xs, &snaps, alphas.mass()).unwrap());
    }
    let decreasing = two.windows(2).all(|w| w[1] < w[0]);
    report(
        10,
        order_ok && decreasing,
        format!(
            "single mode residuals {}, ratios {ratios:.3?} (4 +- 0.4); two corners at t = 0.1: {} (decreasing)",
            sci(&res),
            sci(&two)
        ),
    );
}

#[test]
fn ac11_gauss_sums_have_modulus_sqrt_q() {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for q in (1..=199i64).step_by(2) {
        for p in (1..=q).filter(|&p| gcd(p, q) == 1) {
            for m in 0..q {
                let g = gauss_sum(p, q, m).unwrap();
                worst = worst.max((g.norm() - (q as f64).sqrt()).abs());
                count += 1;
            }
        }
    }
    report(11, worst < 1e-12, format!("{count} sums, odd q <= 199: max ||G| - sqrt q| = {worst:.2e} (< 1e-12)"));
}

#[test]
fn ac12_talbot_angle_chain() {
    let mut worst: f64 = 0.0;
    for n in 3..=12u32 {
        let alpha = alphas_for_regular_polygon(n).unwrap();
        for q in (1..=19u64).step_by(2) {
            let lhs = angle_from_alpha(alpha / (q as f64).sqrt()).unwrap();
            let rhs = predicted_angle(n, q).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    report(12, worst < 1e-12, format!("N = 3..12, odd q <= 19: max angle mismatch {worst:.2e} (< 1e-12)"));
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn ac13_two_corner_spike_diagnostic() {
    let alphas = padded(&[0.4, 0.0, 0.4], 6);
    let t = 0.1;
    let l = 40.0;
    let settings = SimulationSettings {
        t_start: 1e-3,
        times: vec![t],
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_steps: 5_000_000,
        half_width: l,
        grid_h: 0.005,
        seed: Frame::canonical(),
    };
    let slice = &simulate(&alphas, &settings).unwrap()[0];
    let lim = tangent_limits(&slice.frames).unwrap();
    let taper = TaperConfig::new(l, 0.25, 2.0).unwrap();
    let (a0, a2) = (slice.modes.get(0), slice.modes.get(2));
    let ds = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1];
    let (mut resid, mut model, mut env) = (Vec::new(), Vec::new(), Vec::new());
    for &d in &ds {
        let xi = spike_frequency(t, 2, d);
        let that = fourier_transform_tx(&slice.frames, &slice.modes, &[xi], &taper).unwrap()[0];
        let m = two_corner_spike_model(t, 2, d, a0, a2, &lim.plus, &lim.minus).unwrap();
        resid.push(that.sub(&m).norm());
        model.push(m.norm());
        // the model without its vanishing factor e^{i n d / 2} - 1
        env.push(m.norm() / (Complex64::from_polar(1.0, d) - 1.0).norm());
    }
    let log_inv: Vec<f64> = ds.iter().map(|d| (2.0 / d).ln()).collect();
    let mean_res = resid.iter().sum::<f64>() / resid.len() as f64;
    let res_trend = slope(&log_inv, &resid) * (log_inv[0] - log_inv[ds.len() - 1]) / mean_res;
    let bounded = resid.iter().all(|r| r.is_finite()) && res_trend.abs() < 0.25;
    let env_per_log: Vec<f64> = env.iter().zip(&log_inv).map(|(e, g)| e / g).collect();
    let lo = env_per_log.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = env_per_log.iter().cloned().fold(0.0, f64::max);
    let log_like = hi / lo < 1.15;
    report(
        13,
        bounded && log_like,
        format!(
            "d = {}: |T^ - model| {resid:.3?} (relative trend over the range {res_trend:+.3}, |.| < 0.25); \
             envelope / |log(d/2)| in [{lo:.4}, {hi:.4}] (ratio < 1.15); \
             |model| {} carries the factor |e^(i d) - 1| and shrinks with d",
            sci(&ds),
            sci(&model)
        ),
    );
}
