//! Plot-ready output: CSV with one header row and JSON sidecars.
//!
//! Numbers are written in Rust's `{:e}` form, which is locale-independent and
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::counting::DetectorScan;
use crate::error::Result;
use crate::field::SampledField;
use crate::frft::ReducedSignal;

/// Output encoding of field and scan tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn sci(v: f64) -> String {
    format!("{v:e}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(sci))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x_m, re, im, intensity`.
pub fn write_field_csv<W: Write>(out: W, field: &SampledField) -> Result<()> {
    write_rows(
        out,
        &["x_m", "re", "im", "intensity"],
        field
            .coords()
            .zip(field.samples())
            .map(|(x, u)| vec![x, u.re, u.im, u.norm_sqr()]),
    )
}

/// Columns `rho, re, im, intensity` for dimensionless signals.
pub fn write_reduced_csv<W: Write>(out: W, signal: &ReducedSignal) -> Result<()> {
    write_rows(
        out,
        &["rho", "re", "im", "intensity"],
        signal
            .samples()
            .iter()
            .enumerate()
            .map(|(j, u)| vec![signal.coord(j), u.re, u.im, u.norm_sqr()]),
    )
}

/// Columns `position_m, expected, counts`.
pub fn write_scan_csv<W: Write>(out: W, scan: &DetectorScan) -> Result<()> {
    write_rows(
        out,
        &["position_m", "expected", "counts"],
        scan.positions
            .iter()
            .zip(&scan.expected)
            .zip(&scan.counts)
            .map(|((p, e), c)| vec![*p, *e, *c as f64]),
    )
}

/// Field as a JSON object of parallel arrays plus its grid metadata.
pub fn field_json(field: &SampledField) -> Value {
    let s = field.samples();
    json!({
        "n": field.n(),
        "dx_m": field.dx(),
        "x0_m": field.x0(),
        "wavelength_m": field.wavelength(),
        "curvature_radius_m": field.curvature(),
        "x_m": field.coords().collect::<Vec<_>>(),
        "re": s.iter().map(|u| u.re).collect::<Vec<_>>(),
        "im": s.iter().map(|u| u.im).collect::<Vec<_>>(),
        "intensity": field.intensity(),
    })
}

pub fn reduced_json(signal: &ReducedSignal) -> Value {
    let s = signal.samples();
    json!({
        "rho": (0..signal.len()).map(|j| signal.coord(j)).collect::<Vec<_>>(),
        "re": s.iter().map(|u| u.re).collect::<Vec<_>>(),
        "im": s.iter().map(|u| u.im).collect::<Vec<_>>(),
        "intensity": s.iter().map(|u| u.norm_sqr()).collect::<Vec<_>>(),
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| crate::Error::Io(e.to_string()))?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Writes `field` to `path` in the given format.
pub fn save_field(path: &Path, field: &SampledField, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_field_csv(File::create(path)?, field),
        Format::Json => write_json(path, &field_json(field)),
    }
}

pub fn save_reduced(path: &Path, signal: &ReducedSignal, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_reduced_csv(File::create(path)?, signal),
        Format::Json => write_json(path, &reduced_json(signal)),
    }
}

pub fn save_scan(path: &Path, scan: &DetectorScan, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_scan_csv(File::create(path)?, scan),
        Format::Json => write_json(path, scan),
    }
}

/// Reads a CSV written by this module into its header and numeric columns.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, v) in cols.iter_mut().zip(rec.iter()) {
            c.push(
                v.parse::<f64>()
                    .map_err(|e| crate::Error::Io(format!("bad number {v:?}: {e}")))?,
            );
        }
    }
    Ok((header, cols))
}
