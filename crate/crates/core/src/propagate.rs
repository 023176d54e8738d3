//! Physical-space propagators and field comparison.
//!
//! * [`fresnel_direct`]: one-step Fresnel integral, chirp · DFT · chirp on
//!   the native grid.
//! * [`fresnel_via_frft`]: reduce to `(ρ, σ)`, fractional Fourier transform,
//!   map back.
//! * [`fraunhofer`]: far-field special case (input chirp dropped).
//! * [`rayleigh_sommerfeld_oracle`]: direct O(N²) integration of the
//!   line-source Rayleigh-Sommerfeld kernel.
//!
//! All of them drop the global `exp(ikz)`. Only intensities are compared
//! across methods: the outputs differ by quadratic phases (reference
//! spheres) and constant phases.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{resample_onto, Curvature, Grid, SampledField};
use crate::frft::{frft_composed, FractionalOrder};
use crate::geometry::{geometry_from_z, reduce_field, unreduce_output, PropagationGeometry};

/// Fresnel number `a² / (λ z)` of an aperture with half-width `a`.
pub fn fresnel_number(half_width: f64, wavelength: f64, z: f64) -> f64 {
    half_width * half_width / (wavelength * z)
}

/// Output grid of the one-step transforms: `n` points, pitch `λ z / (n dx)`,
/// centred as a shifted DFT.
pub fn fresnel_output_grid(field: &SampledField, z: f64) -> Result<Grid> {
    let n = field.n();
    let dxo = field.wavelength() * z / (n as f64 * field.dx());
    Grid::centered(n, dxo)
}

fn check_distance(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveDistance(z))
    }
}

/// One-step Fresnel propagation over `z`.
///
/// The input's reference curvature is honoured (its quadratic phase joins the
/// input chirp). The output is the physical field on [`fresnel_output_grid`],
/// labelled flat; energy is conserved exactly by Parseval.
pub fn fresnel_direct(field: &SampledField, z: f64) -> Result<SampledField> {
    check_distance(z)?;
    let chirp = 1.0 / z - field.curvature().inverse_radius();
    let n = field.n();
    let dx = field.dx();
    let lambda = field.wavelength();
    if n as f64 * dx * dx * chirp.abs() > lambda * (1.0 + 1e-9) {
        return Err(Error::AliasedInput(format!(
            "n dx^2 |1/z - 1/R| = {:.4e} exceeds lambda = {:.4e}",
            n as f64 * dx * dx * chirp.abs(),
            lambda
        )));
    }
    one_step(field, z, chirp)
}

/// Far-field pattern at `z`: [`fresnel_direct`] without the `1/z` input chirp.
pub fn fraunhofer(field: &SampledField, z: f64) -> Result<SampledField> {
    check_distance(z)?;
    one_step(field, z, -field.curvature().inverse_radius())
}

/// `(1/(iλz))^{1/2} e^{ikx²/2z} Σ_j u_j e^{iπ c x_j²/λ} e^{-ik x x_j / z} dx`.
fn one_step(field: &SampledField, z: f64, chirp: f64) -> Result<SampledField> {
    let n = field.n();
    let lambda = field.wavelength();
    let k = field.wavenumber();
    let gin = field.grid();
    let gout = fresnel_output_grid(field, z)?;
    let (x0, dx) = (gin.x0, gin.dx);
    let (xo0, dxo) = (gout.x0, gout.dx);

    let mut buf: Vec<Complex64> = field
        .samples()
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let x = gin.coord(j);
            let phase = 0.5 * k * chirp * x * x - k * xo0 * (j as f64 * dx) / z;
            u * Complex64::from_polar(1.0, phase)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);

    let pre = Complex64::new(0.0, -1.0 / (lambda * z)).sqrt()
        * dx
        * Complex64::from_polar(1.0, -k * xo0 * x0 / z);
    let samples = buf
        .into_iter()
        .enumerate()
        .map(|(m, v)| {
            let x = gout.coord(m);
            let phase = 0.5 * k * x * x / z - k * (m as f64 * dxo) * x0 / z;
            pre * v * Complex64::from_polar(1.0, phase)
        })
        .collect();
    SampledField::on_grid(samples, gout, lambda, Curvature::Flat)
}

/// Reference radius used by [`fresnel_via_frft`] when the caller has no
/// preference: the field's own radius if it lies on the photon branch,
/// otherwise `z` (the Fourier plane, `α = π/2`).
pub fn default_reference_radius(field: &SampledField, z: f64) -> f64 {
    match field.curvature() {
        Curvature::Radius(r) if z / r > 0.0 && z / r < 2.0 => r,
        _ => z,
    }
}

/// Fresnel propagation as a fractional Fourier transform.
///
/// The field is referred to the sphere `r_a` (an exact re-phasing), reduced,
/// transformed at the order given by `geometry_from_z(z, r_a)`, multiplied by
/// the zero-point phase `exp(-iα/2)` and mapped back. The result lives on the
/// input pitch (since `cos α + ε sin α = 1`) and is referred to `R_B = -r_a`.
/// The alias guard of the transform is `n dx² <= λ z`.
pub fn fresnel_via_frft(field: &SampledField, z: f64, r_a: f64) -> Result<SampledField> {
    check_distance(z)?;
    let geometry = geometry_from_z(z, r_a, field.wavelength())?;
    fresnel_with_geometry(field, &geometry)
}

pub fn fresnel_with_geometry(
    field: &SampledField,
    geometry: &PropagationGeometry,
) -> Result<SampledField> {
    let reduced = reduce_field(field, geometry)?;
    let alpha = FractionalOrder::new(geometry.alpha_rad);
    let out = frft_composed(&reduced, alpha)
        .map_err(|e| match e {
            Error::AliasedInput(msg) => Error::AliasedInput(format!(
                "{msg} (equivalently n dx^2 > lambda z)"
            )),
            other => other,
        })?
        .scaled(Complex64::from_polar(1.0, -0.5 * geometry.alpha_rad));
    unreduce_output(&out, geometry)
}

/// Rayleigh-Sommerfeld oracle on the [`fresnel_output_grid`].
pub fn rayleigh_sommerfeld_oracle(field: &SampledField, z: f64) -> Result<SampledField> {
    let grid = fresnel_output_grid(field, z)?;
    rayleigh_sommerfeld_on(field, z, grid)
}

/// Largest input pitch for which the oracle's quadrature samples the kernel
/// chirp at four times its Nyquist rate: `λ z / (8 D)`, `D` the largest
/// `|x - x'|` between the input support and the output grid.
pub fn rs_max_pitch(field: &SampledField, z: f64, out: Grid) -> Option<f64> {
    let (lo, hi) = support_of(field)?;
    let reach = (out.last() - lo).abs().max((hi - out.x0).abs()).max(hi - lo);
    Some(field.wavelength() * z / (8.0 * reach))
}

/// Direct integration of the first-kind line-source kernel,
///
/// `U(x, z) = (1/(iλ))^{1/2} ∫ U(x', 0) (z/r) exp(ik(r - z)) / sqrt(r) dx'`,
/// `r = sqrt(z² + (x - x')²)`, by the trapezoidal rule over the given samples.
///
/// Quadrature accuracy is the caller's responsibility: compare the input
/// pitch with [`rs_max_pitch`]. Each output sample is an independent sum, so
/// the parallel evaluation is deterministic.
pub fn rayleigh_sommerfeld_on(field: &SampledField, z: f64, out: Grid) -> Result<SampledField> {
    check_distance(z)?;
    let k = field.wavenumber();
    let lambda = field.wavelength();
    if k * z < 100.0 {
        return Err(Error::KrTooSmall(k * z));
    }
    let src = field.to_flat();
    let sg = src.grid();
    let n_src = sg.n;
    let taps: Vec<(f64, Complex64)> = src
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, u)| u.re != 0.0 || u.im != 0.0)
        .map(|(j, u)| {
            let w = if j == 0 || j == n_src - 1 { 0.5 } else { 1.0 };
            (sg.coord(j), u * (w * sg.dx))
        })
        .collect();

    let pre = Complex64::new(0.0, -1.0 / lambda).sqrt();
    let samples: Vec<Complex64> = (0..out.n)
        .into_par_iter()
        .map(|m| {
            let x = out.coord(m);
            let acc: Complex64 = taps
                .iter()
                .map(|&(xp, u)| {
                    let d = x - xp;
                    let r = (z * z + d * d).sqrt();
                    let r_minus_z = d * d / (r + z);
                    u * Complex64::from_polar(z / (r * r.sqrt()), k * r_minus_z)
                })
                .sum();
            pre * acc
        })
        .collect();
    SampledField::on_grid(samples, out, lambda, Curvature::Flat)
}

fn support_of(field: &SampledField) -> Option<(f64, f64)> {
    let nz = |u: &Complex64| u.re != 0.0 || u.im != 0.0;
    let first = field.samples().iter().position(nz)?;
    let last = field.samples().iter().rposition(nz)?;
    Some((field.coord(first), field.coord(last)))
}

/// Intensity-based agreement between two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetrics {
    /// `‖|a|² - |b|²‖₂ / ‖|b|²‖₂` on the common grid.
    pub rel_l2_intensity: f64,
    pub max_abs_intensity_diff: f64,
    /// For every prominent local maximum of `b`, position of the nearest
    /// maximum of `a` minus its own (metres).
    pub extrema_position_offsets: Vec<f64>,
    /// Largest `|offset|` in units of the common grid pitch.
    pub max_extremum_offset_samples: f64,
    pub common_pitch_m: f64,
    pub common_points: usize,
}

/// Maxima below this fraction of the peak intensity are ignored when pairing.
pub const EXTREMUM_PROMINENCE: f64 = 1e-3;

/// Compares `a` against the reference `b`, optionally over `[lo, hi]` only.
///
/// When the grids differ, `a` is linearly interpolated onto the points of `b`
/// that lie inside `a`'s window.
pub fn compare_fields(a: &SampledField, b: &SampledField, window: Option<(f64, f64)>) -> Result<FieldMetrics> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let tol = 1e-9 * b.dx();
    let a_lo = a.x0();
    let a_hi = a.grid().last();
    let idx: Vec<usize> = (0..b.n())
        .filter(|&j| {
            let x = b.coord(j);
            x >= lo - tol && x <= hi + tol && x >= a_lo - tol && x <= a_hi + tol
        })
        .collect();
    if idx.len() < 2 {
        return Err(Error::GridMismatch);
    }
    let target = Grid::new(idx.len(), b.dx(), b.coord(idx[0]))?;
    let ib: Vec<f64> = idx.iter().map(|&j| b.samples()[j].norm_sqr()).collect();
    let a_on = resample_onto(a, target)?;
    let ia = a_on.intensity();

    let num: f64 = ia.iter().zip(&ib).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = ib.iter().map(|y| y * y).sum();
    let rel = if den > 0.0 {
        (num / den).sqrt()
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let max_abs = ia
        .iter()
        .zip(&ib)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let ma = local_maxima(&ia);
    let mb = local_maxima(&ib);
    let offsets: Vec<f64> = mb
        .iter()
        .filter_map(|&jb| {
            ma.iter()
                .min_by_key(|&&ja| ja.abs_diff(jb))
                .map(|&ja| (ja as f64 - jb as f64) * target.dx)
        })
        .collect();
    let max_off = offsets
        .iter()
        .map(|o| (o / target.dx).abs())
        .fold(0.0, f64::max);
    Ok(FieldMetrics {
        rel_l2_intensity: rel,
        max_abs_intensity_diff: max_abs,
        extrema_position_offsets: offsets,
        max_extremum_offset_samples: max_off,
        common_pitch_m: target.dx,
        common_points: target.n,
    })
}

/// Indices of interior local maxima above [`EXTREMUM_PROMINENCE`] of the peak.
pub fn local_maxima(intensity: &[f64]) -> Vec<usize> {
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let floor = EXTREMUM_PROMINENCE * peak;
    (1..intensity.len().saturating_sub(1))
        .filter(|&j| {
            let v = intensity[j];
            v >= floor && v > intensity[j - 1] && v >= intensity[j + 1]
        })
        .collect()
}

/// Indices of interior local minima.
pub fn local_minima(intensity: &[f64]) -> Vec<usize> {
    (1..intensity.len().saturating_sub(1))
        .filter(|&j| {
            let v = intensity[j];
            v < intensity[j - 1] && v <= intensity[j + 1]
        })
        .collect()
}

/// Analytic 1/e² radius of a Gaussian beam of waist `w0` after distance `z`.
pub fn gaussian_beam_radius(w0: f64, wavelength: f64, z: f64) -> f64 {
    let zr = PI * w0 * w0 / wavelength;
    w0 * (1.0 + (z / zr).powi(2)).sqrt()
}
