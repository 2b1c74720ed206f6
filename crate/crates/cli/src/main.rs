//! Batch front end for the polygonal binormal-flow toolkit.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 when the
//! numerics fail (the integrator gives up or produces non-finite values).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use binormal_core::alpha::{angle_from_alpha, turning_angle_cos};
use binormal_core::curve::{corner_angles_from_curve, reconstruct_curve};
use binormal_core::field::sample;
use binormal_core::frame::{transport_x, Vec3};
use binormal_core::io::{
    curve_file_name, curve_rows, frame_rows, frames_file_name, snapshot_file_name, write_table_file, Snapshot,
    CURVE_HEADER, FRAME_HEADER,
};
use binormal_core::pipeline::{energy_table, grid_for, self_similar_slice, simulate, SimulationSettings};
use binormal_core::talbot::{predicted_angle, regularized_psi, talbot_coefficients, RationalTime};
use binormal_core::{Error, Modes};
use clap::{Parser, Subcommand};

use crate::config::{RunConfig, SliceSettings};

#[derive(Parser)]
#[command(name = "binormal", version, about = "Binormal flow of polygonal lines: coefficients, frames, curves, spectral energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the coefficients and write snapshots, frames and curves.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Windowed spectral energies of T_x and N_x for a snapshot.
    Energy {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        k_min: Option<i64>,
        #[arg(long)]
        k_max: Option<i64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Frames, curve and measured corner angle of the one-corner solution.
    SelfSimilar {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value_t = 5e-4)]
        h: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Gauss sums, corner strengths and angles of a regular polygon at t_{p,q}.
    Talbot {
        #[arg(long)]
        sides: u32,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Frames and curve at the time of a snapshot.
    Reconstruct {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Integration { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Energy { state, config, k_min, k_max, out } => cmd_energy(&state, config.as_deref(), k_min, k_max, &out),
        Command::SelfSimilar { alpha, t, half_width, h, out } => cmd_self_similar(alpha, t, half_width, h, &out),
        Command::Talbot { sides, p, q, out } => cmd_talbot(sides, p, q, &out),
        Command::Reconstruct { state, config, out } => cmd_reconstruct(&state, config.as_deref(), &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn prepare_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn load_config(path: Option<&Path>) -> Result<SliceSettings, Failure> {
    match path {
        Some(p) => Ok(RunConfig::load(p).map_err(Failure::Config)?.slice_settings()),
        None => Ok(SliceSettings::default()),
    }
}

fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Outcome {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("non-finite values in {what}")))
    }
}

fn cmd_simulate(config_path: &Path, out: Option<PathBuf>) -> Outcome {
    let mut cfg = RunConfig::load(config_path).map_err(Failure::Config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let dir = cfg.output_dir.clone();
    prepare_dir(&dir)?;
    let echo = serde_json::to_string_pretty(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
    std::fs::write(dir.join("config.json"), echo + "\n").map_err(|e| Failure::Config(e.to_string()))?;

    let settings = SimulationSettings {
        t_start: cfg.t_start,
        times: cfg.times(),
        rel_tol: cfg.ode_rel_tol,
        abs_tol: cfg.ode_abs_tol,
        max_steps: cfg.ode_max_steps,
        half_width: cfg.x_half_domain,
        grid_h: cfg.grid_h,
        seed: cfg.seed(),
    };
    let slices = match simulate(&cfg.alphas, &settings) {
        Ok(s) => s,
        Err(Error::Integration { t, reason, last_good }) => {
            if let Ok(snap) = Snapshot::new(&last_good, &cfg.alphas) {
                let _ = snap.write(&dir.join("snapshot_last_good.json"));
            }
            return Err(Failure::Numeric(format!("integration failed at t = {t}: {reason}")));
        }
        Err(e) => return Err(e.into()),
    };
    for s in &slices {
        let t = s.state.t;
        check_finite("coefficients", s.state.a_tilde.iter().flat_map(|z| [z.re, z.im]))?;
        check_finite("curve", s.curve.points.iter().flat_map(|p| p.iter().copied().collect::<Vec<_>>()))?;
        Snapshot::new(&s.state, &cfg.alphas)?.write(&dir.join(snapshot_file_name(t)))?;
        write_table_file(&dir.join(frames_file_name(t)), &FRAME_HEADER, frame_rows(&s.frames))?;
        write_table_file(&dir.join(curve_file_name(t)), &CURVE_HEADER, curve_rows(&s.curve))?;
        let samples = s
            .frames
            .grid
            .points()
            .map(|x| sample(t, x, &s.modes).map(|f| vec![x, f.u.re, f.u.im, f.u_x.re, f.u_x.im]))
            .collect::<Result<Vec<_>, Error>>()?;
        write_table_file(&dir.join(format!("field_t{t}.csv")), &["x", "re_u", "im_u", "re_ux", "im_ux"], samples)?;
        let m: f64 = s.state.a_tilde.iter().map(|z| z.norm_sqr()).sum();
        println!("t = {t}: mass {m:.15e} (initial {:.15e})", cfg.alphas.mass());
    }
    Ok(())
}

fn cmd_energy(state: &Path, config: Option<&Path>, k_min: Option<i64>, k_max: Option<i64>, out: &Path) -> Outcome {
    let snap = Snapshot::read(state)?;
    let mut s = load_config(config)?;
    s.k_min = k_min.unwrap_or(s.k_min);
    s.k_max = k_max.unwrap_or(s.k_max);
    if s.k_max < s.k_min {
        return Err(Failure::Config(format!("k_max {} is below k_min {}", s.k_max, s.k_min)));
    }
    prepare_dir(out)?;
    let modes = Modes::from_state(&snap.state(), &snap.alphas)?;
    let grid = grid_for(snap.t, s.x_half_domain, s.grid_h, &modes)?;
    let field = transport_x(snap.t, &s.seed, 0.0, &grid, &modes)?;
    let rows = energy_table(&field, &modes, &snap.alphas, s.k_min, s.k_max, s.samples, &s.taper)?;
    check_finite("energies", rows.iter().flat_map(|r| [r.xi_t, r.xi_n]))?;
    write_table_file(
        &out.join("energy.csv"),
        &["k", "Xi_T", "Xi_N", "target_4piM", "Xi_t0", "rel_err_T", "rel_err_N"],
        rows.iter()
            .map(|r| vec![r.k as f64, r.xi_t, r.xi_n, r.target, r.at_zero, r.rel_err_t(), r.rel_err_n()]),
    )?;
    for r in &rows {
        println!("k = {:3}  Xi_T = {:.6}  Xi_N = {:.6}  4piM = {:.6}", r.k, r.xi_t, r.xi_n, r.target);
    }
    Ok(())
}

fn cmd_self_similar(alpha: f64, t: f64, half_width: f64, h: f64, out: &Path) -> Outcome {
    if !(t > 0.0) {
        return Err(Failure::Config(format!("--t must be > 0, got {t}")));
    }
    let target_cos = turning_angle_cos(alpha)?;
    prepare_dir(out)?;
    let (frames, curve) = self_similar_slice(alpha, t, half_width, h)?;
    write_table_file(&out.join(frames_file_name(t)), &FRAME_HEADER, frame_rows(&frames))?;
    write_table_file(&out.join(curve_file_name(t)), &CURVE_HEADER, curve_rows(&curve))?;
    let phi = corner_angles_from_curve(&curve, &[0])?[0];
    let measured = phi.cos();
    check_finite("corner angle", [measured])?;
    let rel = (measured - target_cos) / target_cos.abs();
    write_table_file(
        &out.join("corner_angle.csv"),
        &["alpha", "t", "cos_phi_measured", "cos_phi_target", "rel_err", "phi_measured", "phi_target"],
        [vec![alpha, t, measured, target_cos, rel, phi, target_cos.acos()]],
    )?;
    println!("alpha = {alpha}, t = {t}: cos(phi) = {measured:.6} (target {target_cos:.6}, rel. error {rel:.2e})");
    Ok(())
}

fn cmd_talbot(sides: u32, p: u64, q: u64, out: &Path) -> Outcome {
    let rt = RationalTime::new(p, q)?;
    let res = talbot_coefficients(sides, rt)?;
    prepare_dir(out)?;
    write_table_file(
        &out.join("talbot_gauss.csv"),
        &["m", "re_G", "im_G", "abs_G"],
        res.gauss.iter().map(|(&m, g)| vec![m as f64, g.re, g.im, g.norm()]),
    )?;
    let scan = (1..=q)
        .step_by(2)
        .map(|qq| Ok(vec![sides as f64, qq as f64, res.alpha / (qq as f64).sqrt(), predicted_angle(sides, qq)?]))
        .collect::<Result<Vec<_>, Error>>()?;
    write_table_file(&out.join("talbot_angles.csv"), &["N", "q", "alpha_lm", "theta_pq"], scan)?;

    let t = rt.time(sides);
    let n = 2001;
    let period = 1.0 / sides as f64;
    let xs: Vec<f64> = (0..n).map(|i| period * i as f64 / (n - 1) as f64).collect();
    let sigma = 0.1 / (sides as f64 * q as f64);
    let psi = regularized_psi(sides, res.alpha, t, &xs, sigma)?;
    write_table_file(
        &out.join("talbot_psi.csv"),
        &["x", "re_psi", "im_psi", "abs_psi"],
        xs.iter().zip(&psi).map(|(&x, z)| vec![x, z.re, z.im, z.norm()]),
    )?;
    println!(
        "N = {sides}, t = {p}/{q}: alpha = {:.12}, |alpha_lm| = {:.12}, theta_pq = {:.12} ({:.12} from alpha_lm)",
        res.alpha,
        res.coeff_magnitude,
        res.theta_pq,
        angle_from_alpha(res.coeff_magnitude)?
    );
    Ok(())
}

fn cmd_reconstruct(state: &Path, config: Option<&Path>, out: &Path) -> Outcome {
    let snap = Snapshot::read(state)?;
    let s = load_config(config)?;
    prepare_dir(out)?;
    let modes = Modes::from_state(&snap.state(), &snap.alphas)?;
    let grid = grid_for(snap.t, s.x_half_domain, s.grid_h, &modes)?;
    let frames = transport_x(snap.t, &s.seed, 0.0, &grid, &modes)?;
    let curve = reconstruct_curve(&frames, Vec3::zeros(), Vec3::zeros());
    check_finite("curve", curve.points.iter().flat_map(|p| [p[0], p[1], p[2]]))?;
    write_table_file(&out.join(frames_file_name(snap.t)), &FRAME_HEADER, frame_rows(&frames))?;
    write_table_file(&out.join(curve_file_name(snap.t)), &CURVE_HEADER, curve_rows(&curve))?;
    println!("t = {}: {} points, arclength defect {:.2e}", snap.t, curve.points.len(), curve.arclength_defect());
    Ok(())
}
