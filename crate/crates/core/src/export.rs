//! Output formats: colored PLY, raw field text, energy-trace CSV, sweep
//! table and 1D profile CSV.
//!
//! Text outputs other than the raw field start with `#` comment lines (PLY:
//! `comment` lines) carrying the settings that produced them. Floats are
//! printed with Rust's shortest round-trip formatting, so writing is
//! deterministic and reading a value back returns the same bits.

use std::io::{self, BufRead, Write};

use crate::mesh::TriangleMesh;
use crate::one_dim::{self, Profile1D};
use crate::patterns::PatternClass;
use crate::solver::EnergyTrace;

/// Diverging map: `−1` blue, `0` white, `+1` red, clamped outside.
pub fn diverging_color(u: f64) -> [u8; 3] {
    let t = if u.is_nan() { 0.0 } else { u.clamp(-1.0, 1.0) };
    let fade = ((1.0 - t.abs()) * 255.0).round() as u8;
    if t >= 0.0 {
        [255, fade, fade]
    } else {
        [fade, fade, 255]
    }
}

fn write_comments(w: &mut impl Write, prefix: &str, header: &[(String, String)]) -> io::Result<()> {
    for (k, v) in header {
        writeln!(w, "{prefix}{k} = {v}")?;
    }
    Ok(())
}

/// ASCII PLY with per-vertex position, scalar `u` and color.
pub fn write_ply(
    w: &mut impl Write,
    mesh: &TriangleMesh,
    values: &[f64],
    header: &[(String, String)],
) -> io::Result<()> {
    if values.len() != mesh.vertex_count() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} values for {} vertices", values.len(), mesh.vertex_count()),
        ));
    }
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment colors: u = -1 blue, u = 0 white, u = +1 red")?;
    write_comments(w, "comment ", header)?;
    writeln!(w, "element vertex {}", mesh.vertex_count())?;
    for p in ["x", "y", "z"] {
        writeln!(w, "property double {p}")?;
    }
    writeln!(w, "property double u")?;
    for c in ["red", "green", "blue"] {
        writeln!(w, "property uchar {c}")?;
    }
    writeln!(w, "element face {}", mesh.face_count())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for (p, &u) in mesh.vertices().iter().zip(values) {
        let [r, g, b] = diverging_color(u);
        writeln!(w, "{} {} {} {} {r} {g} {b}", p[0], p[1], p[2], u)?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// One value per line.
pub fn write_field(w: &mut impl Write, values: &[f64]) -> io::Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Reads a field written by [`write_field`]; blank and `#` lines are skipped.
pub fn read_field(r: impl BufRead) -> io::Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: `{t}`: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_trace_csv(w: &mut impl Write, trace: &EnergyTrace, header: &[(String, String)]) -> io::Result<()> {
    write_comments(w, "# ", header)?;
    writeln!(w, "step,energy,max_abs_u,mean_u")?;
    for s in &trace.samples {
        writeln!(w, "{},{},{},{}", s.step, s.energy, s.max_abs_u, s.mean_u)?;
    }
    Ok(())
}

/// Text block with header comments followed by `report`'s `Display`.
pub fn write_report(
    w: &mut impl Write,
    report: &impl std::fmt::Display,
    header: &[(String, String)],
) -> io::Result<()> {
    write_comments(w, "# ", header)?;
    write!(w, "{report}")
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: f64,
    pub outcome: Result<SweepResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub class: PatternClass,
    pub minority_fraction: f64,
    pub component_count: usize,
    pub final_energy: f64,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows in the given order. Failed rows have `class = error`, empty numeric
/// fields and the message in the trailing `error` column.
pub fn write_sweep_csv(w: &mut impl Write, rows: &[SweepRow], header: &[(String, String)]) -> io::Result<()> {
    write_comments(w, "# ", header)?;
    writeln!(w, "b,class,minority_fraction,component_count,final_energy,error")?;
    for row in rows {
        match &row.outcome {
            Ok(r) => writeln!(
                w,
                "{},{},{},{},{},",
                row.b, r.class, r.minority_fraction, r.component_count, r.final_energy
            )?,
            Err(e) => writeln!(w, "{},error,,,,{}", row.b, csv_field(e))?,
        }
    }
    Ok(())
}

/// `x,u,du,first_integral_residual`, the last column measured against the
/// value at the first sample.
pub fn write_profile_csv(w: &mut impl Write, profile: &Profile1D, header: &[(String, String)]) -> io::Result<()> {
    write_comments(w, "# ", header)?;
    writeln!(w, "x,u,du,first_integral_residual")?;
    let c = one_dim::first_integral(profile).c;
    for i in 0..profile.len() {
        let (u, du) = (profile.u[i], profile.du[i]);
        let r = 0.5 * du * du + one_dim::potential(u, profile.b) - c;
        writeln!(w, "{},{},{},{}", profile.x[i], u, du, r)?;
    }
    Ok(())
}
