//! CSV dumps of grid arrays.
//!
//! One row per grid point, row-major, with headers `t,x,re,im` (fields),
//! `t,xi,re,im` (partial spectra) and `k,xi,re,im` (mixed spectra). Floats
//! are written with 17 significant digits in lowercase scientific notation.

use std::io::{Read, Write};

use crate::mixedfft::{Field, HalfSpectrum, MixedSpectrum};
use crate::{CylinderGrid, Error, Result, C64};

/// Fixed float format used for every CSV and text output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<W: Write>(
    out: W,
    header: [&str; 4],
    grid: CylinderGrid,
    first: impl Fn(usize) -> String,
    second: impl Fn(usize) -> f64,
    values: &[C64],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for i in 0..grid.n_t {
        let lead = first(i);
        for j in 0..grid.n_x {
            let z = values[i * grid.n_x + j];
            w.write_record([
                lead.as_str(),
                &fmt_f64(second(j)),
                &fmt_f64(z.re),
                &fmt_f64(z.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field<W: Write>(out: W, f: &Field) -> Result<()> {
    let g = f.grid;
    write_rows(out, ["t", "x", "re", "im"], g, |i| fmt_f64(g.t(i)), |j| g.x(j), &f.values)
}

pub fn write_half<W: Write>(out: W, u: &HalfSpectrum) -> Result<()> {
    let g = u.grid;
    write_rows(out, ["t", "xi", "re", "im"], g, |i| fmt_f64(g.t(i)), |j| g.xi(j), &u.values)
}

pub fn write_mixed<W: Write>(out: W, u: &MixedSpectrum) -> Result<()> {
    let g = u.grid;
    write_rows(out, ["k", "xi", "re", "im"], g, |i| g.k(i).to_string(), |j| g.xi(j), &u.values)
}

/// Writes `(x, y)` pairs under a two-column header.
pub fn write_curve<W: Write>(out: W, header: [&str; 2], pts: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for &(x, y) in pts {
        w.write_record([fmt_f64(x), fmt_f64(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,x,re,im` dump, inferring the grid from the coordinates.
pub fn read_field<R: Read>(input: R) -> Result<Field> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["t", "x", "re", "im"] {
        return Err(Error::Parse(format!("expected header t,x,re,im, got {}", names.join(","))));
    }
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!("row {}: expected 4 columns", line + 2)));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))
        };
        ts.push(num(0)?);
        xs.push(num(1)?);
        values.push(C64::new(num(2)?, num(3)?));
    }
    if values.is_empty() {
        return Err(Error::Parse("empty field".into()));
    }
    let n_x = ts.iter().take_while(|&&t| t == ts[0]).count();
    if values.len() % n_x != 0 {
        return Err(Error::Parse(format!(
            "{} rows is not a multiple of the row length {n_x}",
            values.len()
        )));
    }
    let n_t = values.len() / n_x;
    let half_width = -xs[0];
    let grid = CylinderGrid::new(n_t, n_x, half_width)?;
    for (idx, (&t, &x)) in ts.iter().zip(&xs).enumerate() {
        let (i, j) = (idx / n_x, idx % n_x);
        let tol = 1e-9 * (1.0 + half_width);
        if (t - grid.t(i)).abs() > tol || (x - grid.x(j)).abs() > tol {
            return Err(Error::Parse(format!(
                "row {}: coordinates ({t}, {x}) are off the uniform grid",
                idx + 2
            )));
        }
    }
    Field::new(grid, values)
}
