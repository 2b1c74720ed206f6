//! Curves built from frames: unit speed, corner angles of the one-corner
//! solution, and agreement between spatial integration and the binormal
//! velocity in time.

use binormal_core::alpha::turning_angle_cos;
use binormal_core::curve::{corner_angles_from_curve, time_leg};
use binormal_core::field::Modes;
use binormal_core::pipeline::self_similar_slice;
use num_complex::Complex64;

#[test]
fn curves_have_unit_speed() {
    // trapezoid chords of a curve with curvature k are short by k^2 h^2 / 8
    let (alpha, t) = (0.7, 0.05);
    let kappa2 = alpha * alpha / t;
    for h in [0.002, 0.001] {
        let (_, curve) = self_similar_slice(alpha, t, 4.0, h).unwrap();
        let chord = kappa2 * h * h / 8.0;
        assert!((curve.arclength_defect() - chord).abs() < 1e-3 * chord, "h {h}: {}", curve.arclength_defect());
    }
}

#[test]
fn corner_angles_across_strengths() {
    for alpha in [0.3, 0.8, 1.2] {
        let (_, curve) = self_similar_slice(alpha, 0.01, 2.0, 5e-4).unwrap();
        let phi = corner_angles_from_curve(&curve, &[0]).unwrap()[0];
        let target = turning_angle_cos(alpha).unwrap();
        assert!((phi.cos() - target).abs() < 0.01 * target.abs().max(0.1), "alpha {alpha}: {} vs {target}", phi.cos());
    }
}

#[test]
fn angle_fit_needs_a_small_core() {
    let (_, curve) = self_similar_slice(0.5, 0.2, 2.0, 0.005).unwrap();
    assert!(corner_angles_from_curve(&curve, &[0]).is_err());
}

#[test]
fn points_move_with_the_binormal_velocity() {
    let alpha = 0.5;
    let (t0, t1, x0) = (0.04, 0.06, 0.75);
    let (f0, c0) = self_similar_slice(alpha, t0, 3.0, 0.0005).unwrap();
    let (_, c1) = self_similar_slice(alpha, t1, 3.0, 0.0005).unwrap();
    let i = f0.grid.index_of(x0).unwrap();
    let modes = Modes::new(0, vec![Complex64::new(alpha, 0.0)]);
    let (_, leg) = time_leg(x0, &f0.frames[i], t0, t1, 2000, alpha * alpha, |_| Ok(modes.clone())).unwrap();
    let moved = c1.at(x0).unwrap() - c0.at(x0).unwrap();
    assert!((moved - leg).norm() < 1e-5, "{}", (moved - leg).norm());
}
