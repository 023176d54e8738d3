//! Photon-counting simulation: a finite detector scanned across `|Ψ|²`,
//! Poisson counts per dwell, and goodness-of-fit statistics.
//!
//! Counts at position `i` are drawn from `ChaCha20Rng` seeded with the scan
//! seed and switched to stream `i`, so every position has its own
//! reproducible sequence regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SampledField};

/// Generator name recorded in scan metadata.
pub const RNG_NAME: &str = "ChaCha20Rng/stream=position-index";

/// Expected counts below which neighbouring bins are merged for χ².
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

/// Result of a detector scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorScan {
    pub positions: Vec<f64>,
    pub detector_width: f64,
    pub dwell_time: f64,
    pub mean_rate_scale: f64,
    /// Poisson means `rate_scale * dwell * window integral`.
    pub expected: Vec<f64>,
    pub counts: Vec<u64>,
    pub seed: u64,
    pub rng: String,
}

impl DetectorScan {
    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Positions `-span, -span + step, ..., span` (the last one included when it
/// falls on the lattice).
pub fn scan_positions(span: f64, step: f64) -> Result<Vec<f64>> {
    if !(span >= 0.0 && step > 0.0 && span.is_finite() && step.is_finite()) {
        return Err(Error::InvalidSpec(format!("scan span {span}, step {step}")));
    }
    let m = (span / step + 1e-9).floor() as i64;
    Ok((-m..=m).map(|i| i as f64 * step).collect())
}

/// Exact integral of the piecewise-linear interpolant of `intensity` over
/// `[center - width/2, center + width/2]`.
pub fn integrate_detector(intensity: &[f64], grid: Grid, center: f64, width: f64) -> Result<f64> {
    if intensity.len() != grid.n {
        return Err(Error::InvalidGrid(format!(
            "{} intensities for a grid of {}",
            intensity.len(),
            grid.n
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidSpec(format!("detector width {width}")));
    }
    let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
    let tol = 1e-9 * grid.dx;
    if lo < grid.x0 - tol || hi > grid.last() + tol {
        return Err(Error::OutOfWindow { lo, hi });
    }
    let lo = lo.max(grid.x0);
    let hi = hi.min(grid.last());
    let at = |x: f64| -> f64 {
        let t = ((x - grid.x0) / grid.dx).clamp(0.0, (grid.n - 1) as f64);
        let j = (t.floor() as usize).min(grid.n - 2);
        let f = t - j as f64;
        intensity[j] * (1.0 - f) + intensity[j + 1] * f
    };
    let first = (((lo - grid.x0) / grid.dx).floor().max(0.0) as usize).min(grid.n - 2);
    let mut sum = 0.0;
    for j in first..grid.n - 1 {
        let (a, b) = (grid.coord(j), grid.coord(j + 1));
        if a >= hi {
            break;
        }
        let (p, q) = (a.max(lo), b.min(hi));
        if q > p {
            sum += 0.5 * (q - p) * (at(p) + at(q));
        }
    }
    Ok(sum)
}

/// Window integrals of `|field|²` at each position.
pub fn window_integrals(field: &SampledField, positions: &[f64], width: f64) -> Result<Vec<f64>> {
    let intensity = field.intensity();
    let grid = field.grid();
    positions
        .iter()
        .map(|&c| integrate_detector(&intensity, grid, c, width))
        .collect()
}

/// Rate scale that makes the expected scan total equal `total`.
pub fn rate_scale_for_total(window_integrals: &[f64], dwell: f64, total: f64) -> Result<f64> {
    let s: f64 = window_integrals.iter().sum();
    if !(s > 0.0) || !(dwell > 0.0) {
        return Err(Error::DegenerateModel(
            "zero expected signal over the scan".into(),
        ));
    }
    Ok(total / (s * dwell))
}

fn draw(mean: f64, seed: u64, stream: u64) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean)
        .map_err(|e| Error::InvalidSpec(format!("Poisson mean {mean}: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok(poisson.sample(&mut rng) as u64)
}

/// Poisson counts for given window integrals.
pub fn sample_counts(
    window_integrals: &[f64],
    dwell: f64,
    rate_scale: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<u64>)> {
    if !(dwell > 0.0 && dwell.is_finite()) {
        return Err(Error::InvalidSpec(format!("dwell time {dwell}")));
    }
    if !(rate_scale >= 0.0 && rate_scale.is_finite()) {
        return Err(Error::InvalidSpec(format!("rate scale {rate_scale}")));
    }
    let expected: Vec<f64> = window_integrals.iter().map(|w| rate_scale * dwell * w).collect();
    let counts = expected
        .par_iter()
        .enumerate()
        .map(|(i, &m)| draw(m, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok((expected, counts))
}

/// Scans a detector of `detector_width` across `field` and draws counts.
pub fn simulate_scan(
    field: &SampledField,
    positions: &[f64],
    detector_width: f64,
    dwell: f64,
    rate_scale: f64,
    seed: u64,
) -> Result<DetectorScan> {
    let windows = window_integrals(field, positions, detector_width)?;
    let (expected, counts) = sample_counts(&windows, dwell, rate_scale, seed)?;
    Ok(DetectorScan {
        positions: positions.to_vec(),
        detector_width,
        dwell_time: dwell,
        mean_rate_scale: rate_scale,
        expected,
        counts,
        seed,
        rng: RNG_NAME.to_string(),
    })
}

/// Pearson statistic after merging bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    /// Bins left after merging.
    pub bins: usize,
    /// `bins - 1`: the model is normalized to the observed total.
    pub dof: usize,
}

impl ChiSquare {
    pub fn per_dof(&self) -> f64 {
        self.statistic / self.dof as f64
    }
}

/// Pearson χ² of `counts` against `model` scaled to the same total.
///
/// Bins are merged left to right until each holds at least
/// [`CHI_SQUARE_MIN_EXPECTED`] expected counts; a short tail joins the last
/// bin. An all-zero scan has nothing to test and scores 0.
pub fn chi_square_fit(counts: &[u64], model: &[f64]) -> Result<ChiSquare> {
    if counts.len() != model.len() {
        return Err(Error::GridMismatch);
    }
    if model.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(Error::DegenerateModel("model values must be finite and nonnegative".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Ok(ChiSquare {
            statistic: 0.0,
            bins: 0,
            dof: 0,
        });
    }
    let msum: f64 = model.iter().sum();
    if !(msum > 0.0) {
        return Err(Error::DegenerateModel("model is zero but counts are not".into()));
    }
    let scale = total as f64 / msum;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut e, mut o) = (0.0, 0.0);
    for (c, m) in counts.iter().zip(model) {
        e += m * scale;
        o += *c as f64;
        if e >= CHI_SQUARE_MIN_EXPECTED {
            bins.push((e, o));
            e = 0.0;
            o = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += e;
            last.1 += o;
        }
        None => {
            return Err(Error::DegenerateModel(format!(
                "total expectation {e:.3} is below {CHI_SQUARE_MIN_EXPECTED}"
            )))
        }
    }
    let statistic = bins.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    Ok(ChiSquare {
        statistic,
        bins: bins.len(),
        dof: bins.len() - 1,
    })
}

/// `x / Σx`; all zeros if the sum vanishes.
pub fn normalized(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.into_iter().collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter().map(|x| x / s).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `counts` over scan positions and the distribution `model`.
pub fn ks_distance(counts: &[u64], model: &[f64]) -> Result<f64> {
    if counts.len() != model.len() {
        return Err(Error::GridMismatch);
    }
    let p = normalized(counts.iter().map(|&c| c as f64));
    let q = normalized(model.iter().copied());
    let (mut cp, mut cq, mut d) = (0.0, 0.0, 0.0f64);
    for (a, b) in p.iter().zip(&q) {
        cp += a;
        cq += b;
        d = d.max((cp - cq).abs());
    }
    Ok(d)
}

/// `max_i |p_i - q_i|` between normalized counts and normalized model.
pub fn max_frequency_error(counts: &[u64], model: &[f64]) -> Result<f64> {
    if counts.len() != model.len() {
        return Err(Error::GridMismatch);
    }
    let p = normalized(counts.iter().map(|&c| c as f64));
    let q = normalized(model.iter().copied());
    Ok(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}
