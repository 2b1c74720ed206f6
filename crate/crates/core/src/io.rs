//! Snapshot JSON and CSV tables.
//!
//! Every CSV is comma separated with a header row; numbers are written with 17
//! significant digits so they round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSequence;
use crate::coefficients::CoefficientState;
use crate::curve::Curve;
use crate::error::{argument, Result};
use crate::frame::FrameField;

pub const FORMAT_VERSION: u32 = 1;

/// Coefficient state together with the corner strengths it evolved from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub t: f64,
    pub alphas: AlphaSequence,
    pub j_min: i64,
    pub a_tilde: Vec<Complex64>,
}

impl Snapshot {
    pub fn new(state: &CoefficientState, alphas: &AlphaSequence) -> Result<Self> {
        if !alphas.same_window(state.j_min, state.a_tilde.len()) {
            return Err(argument("snapshot state and corner strengths use different windows"));
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            t: state.t,
            alphas: alphas.clone(),
            j_min: state.j_min,
            a_tilde: state.a_tilde.clone(),
        })
    }

    pub fn state(&self) -> CoefficientState {
        CoefficientState { t: self.t, j_min: self.j_min, a_tilde: self.a_tilde.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(argument(format!(
                "snapshot format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if !(self.t > 0.0) {
            return Err(argument(format!("snapshot time must be > 0, got {}", self.t)));
        }
        if !self.alphas.same_window(self.j_min, self.a_tilde.len()) {
            return Err(argument("snapshot a_tilde window does not match alphas"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and numeric rows.
pub fn write_table<W, I>(out: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(argument(format!("row has {} values for {} columns", row.len(), header.len())));
        }
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    write_table(File::create(path)?, header, rows)
}

pub const FRAME_HEADER: [&str; 10] = ["x", "T1", "T2", "T3", "e1_1", "e1_2", "e1_3", "e2_1", "e2_2", "e2_3"];
pub const CURVE_HEADER: [&str; 4] = ["x", "chi1", "chi2", "chi3"];

pub fn frame_rows(field: &FrameField) -> impl Iterator<Item = Vec<f64>> + '_ {
    field.frames.iter().enumerate().map(move |(i, f)| {
        let mut row = vec![field.x(i)];
        for v in [&f.tangent, &f.e1, &f.e2] {
            row.extend(v.iter());
        }
        row
    })
}

pub fn curve_rows(curve: &Curve) -> impl Iterator<Item = Vec<f64>> + '_ {
    curve
        .points
        .iter()
        .enumerate()
        .map(move |(i, p)| vec![curve.grid.x(i), p[0], p[1], p[2]])
}

/// `frames_t{t}.csv`
pub fn frames_file_name(t: f64) -> String {
    format!("frames_t{t}.csv")
}

/// `curve_t{t}.csv`
pub fn curve_file_name(t: f64) -> String {
    format!("curve_t{t}.csv")
}

/// `snapshot_t{t}.json`
pub fn snapshot_file_name(t: f64) -> String {
    format!("snapshot_t{t}.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let alphas = AlphaSequence::from_real(-1, &[0.1, 0.0, 0.3]).unwrap();
        let mut state = CoefficientState::initial(&alphas, 0.25).unwrap();
        state.a_tilde[1] = Complex64::new(1.0 / 3.0, -std::f64::consts::E);
        let s = Snapshot::new(&state, &alphas).unwrap();
        let text = s.to_json().unwrap();
        assert!(text.contains("\"format_version\": 1"));
        let back = Snapshot::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.state(), state);
    }

    #[test]
    fn snapshot_rejects_bad_input() {
        let alphas = AlphaSequence::from_real(0, &[0.1, 0.2]).unwrap();
        let state = CoefficientState::initial(&alphas, 1.0).unwrap();
        let mut s = Snapshot::new(&state, &alphas).unwrap();
        s.format_version = 7;
        assert!(Snapshot::from_json(&s.to_json().unwrap()).is_err());
        s.format_version = FORMAT_VERSION;
        s.a_tilde.pop();
        assert!(Snapshot::from_json(&s.to_json().unwrap()).is_err());
        assert!(Snapshot::from_json("{").is_err());
        let other = AlphaSequence::from_real(0, &[0.1]).unwrap();
        assert!(Snapshot::new(&state, &other).is_err());
    }

    #[test]
    fn table_format() {
        let mut buf = Vec::new();
        write_table(&mut buf, &["a", "b"], vec![vec![0.1, -2.0], vec![1e-300, 3.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "1.0000000000000001e-1,-2.0000000000000000e0");
        let back: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 1e-300);
        assert!(write_table(Vec::new(), &["a"], vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(curve_file_name(0.05), "curve_t0.05.csv");
        assert_eq!(frames_file_name(1.0), "frames_t1.csv");
    }
}
