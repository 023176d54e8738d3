//! Discrete fractional Fourier transform on uniformly sampled signals.
//!
//! The continuous transform of order `a` is
//!
//! ```text
//! F_a[f](s) = sqrt(1 - i cot a) * ∫ exp(iπ[(r² + s²) cot a - 2 r s / sin a]) f(r) dr
//! ```
//!
//! with the principal square root. This normalisation gives `F_0 = I`,
//! `F_{π/2}` = the unitary Fourier transform `∫ f(r) exp(-2πi r s) dr`,
//! `F_π` = parity, and `F_a ∘ F_b = F_{a+b}` with no stray phases. The
//! photon (harmonic-oscillator) propagator of the same order is
//! `exp(-i a / 2) F_a`; that zero-point phase is applied by the callers that
//! need it ([`crate::oscillator`], [`crate::propagate`]).
//!
//! Discretisation: input and output share one grid (`N` points, pitch `h`).
//! The quadrature sum is then a chirp-z transform, which is an exact DFT when
//! `h² = |sin a| / N`; coarser pitches alias the output and are rejected with
//! [`Error::AliasedInput`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::Grid;

/// Orders with `|sin a|` below this are near-singular; only
/// [`frft_composed`] accepts them.
pub const S_MIN: f64 = 0.05;

/// Orders this close to 0 or π are treated as exactly 0 or π by
/// [`frft_composed`].
pub const EXACT_ORDER_TOL: f64 = 1e-12;

/// Fractional order in radians, reduced to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Self {
        Self(reduce_angle(alpha))
    }

    /// Order given as a fraction of π/2 (`1.0` is the Fourier transform).
    pub fn from_half_pi_fraction(a: f64) -> Self {
        Self::new(a * FRAC_PI_2)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cot(self) -> f64 {
        self.0.cos() / self.0.sin()
    }

    pub fn is_near_singular(self) -> bool {
        self.sin().abs() < S_MIN
    }

    /// `sqrt(1 - i cot a)`, principal branch.
    pub fn prefactor(self) -> Complex64 {
        Complex64::new(1.0, -self.cot()).sqrt()
    }
}

impl From<f64> for FractionalOrder {
    fn from(alpha: f64) -> Self {
        Self::new(alpha)
    }
}

/// Reduces an angle to the principal interval `(-π, π]`.
pub fn reduce_angle(alpha: f64) -> f64 {
    let mut r = alpha - TAU * (alpha / TAU).round();
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Complex samples over a dimensionless coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSignal {
    samples: Vec<Complex64>,
    grid: Grid,
}

impl ReducedSignal {
    pub fn new(samples: Vec<Complex64>, d_rho: f64, rho0: f64) -> Result<Self> {
        let grid = Grid::new(samples.len(), d_rho, rho0)?;
        Ok(Self { samples, grid })
    }

    pub fn on_grid(samples: Vec<Complex64>, grid: Grid) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.n
            )));
        }
        Ok(Self { samples, grid })
    }

    /// Samples `f` at `rho_j = rho0 + j * d_rho`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            samples: grid.coords().map(f).collect(),
            grid,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pitch(&self) -> f64 {
        self.grid.dx
    }

    pub fn coord(&self, j: usize) -> f64 {
        self.grid.coord(j)
    }

    /// `Σ |f_j|² h`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|u| u.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for s in &mut self.samples {
            *s *= c;
        }
        self
    }
}

/// Continuous kernel of [`FractionalOrder`] `alpha` at `(rho, sigma)`.
///
/// Undefined (infinite cotangent) at `sin a = 0`.
pub fn frft_kernel(rho: f64, sigma: f64, alpha: FractionalOrder) -> Complex64 {
    let a = alpha.radians();
    let (s, c) = a.sin_cos();
    let phase = PI * ((rho * rho + sigma * sigma) * (c / s) - 2.0 * rho * sigma / s);
    alpha.prefactor() * Complex64::from_polar(1.0, phase)
}

/// Largest pitch (squared) that keeps the quadrature alias free:
/// `h² <= |sin a| / N`.
pub fn max_pitch_sq(alpha: FractionalOrder, n: usize) -> f64 {
    alpha.sin().abs() / n as f64
}

fn check_regular(signal: &ReducedSignal, alpha: FractionalOrder) -> Result<()> {
    if alpha.is_near_singular() {
        return Err(Error::NearSingularOrder {
            alpha: alpha.radians(),
            sin_abs: alpha.sin().abs(),
            s_min: S_MIN,
        });
    }
    let h = signal.pitch();
    let bound = max_pitch_sq(alpha, signal.len());
    if h * h > bound * (1.0 + 1e-9) {
        return Err(Error::AliasedInput(format!(
            "pitch^2 = {:.6e} exceeds |sin a|/N = {:.6e} at a = {}",
            h * h,
            bound,
            alpha.radians()
        )));
    }
    Ok(())
}

/// Direct O(N²) quadrature of the kernel against the samples.
pub fn frft_reference(signal: &ReducedSignal, alpha: FractionalOrder) -> Result<ReducedSignal> {
    check_regular(signal, alpha)?;
    let grid = signal.grid();
    let h = grid.dx;
    let input = signal.samples();
    let out: Vec<Complex64> = (0..grid.n)
        .into_par_iter()
        .map(|m| {
            let sigma = grid.coord(m);
            input
                .iter()
                .enumerate()
                .map(|(j, f)| frft_kernel(grid.coord(j), sigma, alpha) * f)
                .sum::<Complex64>()
                * h
        })
        .collect();
    ReducedSignal::on_grid(out, grid)
}

/// Same quadrature sum as [`frft_reference`], evaluated in O(N log N) as
/// chirp multiply, chirp-z transform (Bluestein convolution), chirp multiply.
pub fn frft_fast(signal: &ReducedSignal, alpha: FractionalOrder) -> Result<ReducedSignal> {
    check_regular(signal, alpha)?;
    chirp_z(signal, alpha)
}

fn within_guard(signal: &ReducedSignal, alpha: FractionalOrder) -> bool {
    let h = signal.pitch();
    h * h <= max_pitch_sq(alpha, signal.len()) * (1.0 + 1e-9)
}

/// The quadrature sum with no order checks; `sin a` must be nonzero.
fn chirp_z(signal: &ReducedSignal, alpha: FractionalOrder) -> Result<ReducedSignal> {
    let grid = signal.grid();
    let n = grid.n;
    let h = grid.dx;
    let rho0 = grid.x0;
    let s = alpha.sin();
    let cot = alpha.cot();
    let beta = h * h / s;

    // g_j = f_j exp(iπ cot ρ_j²) exp(-2πi ρ0 j h / s) exp(-iπ β j²)
    let mut a: Vec<Complex64> = signal
        .samples()
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let rho = grid.coord(j);
            let jf = j as f64;
            let phase = PI * cot * rho * rho - TAU * rho0 * jf * h / s - PI * beta * jf * jf;
            f * Complex64::from_polar(1.0, phase)
        })
        .collect();

    let conv = chirp_convolve(&mut a, beta, n);

    let pre = alpha.prefactor() * h * Complex64::from_polar(1.0, -TAU * rho0 * rho0 / s);
    let out = conv
        .into_iter()
        .enumerate()
        .map(|(m, v)| {
            let sigma = grid.coord(m);
            let mf = m as f64;
            let phase = PI * cot * sigma * sigma - TAU * rho0 * mf * h / s - PI * beta * mf * mf;
            pre * v * Complex64::from_polar(1.0, phase)
        })
        .collect();
    ReducedSignal::on_grid(out, grid)
}

/// `out_m = Σ_j a_j exp(iπ β (m - j)²)` for `m < n`, by FFT convolution.
fn chirp_convolve(a: &mut Vec<Complex64>, beta: f64, n: usize) -> Vec<Complex64> {
    let m_len = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(m_len);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(m_len);

    a.resize(m_len, Complex64::new(0.0, 0.0));
    let mut w = vec![Complex64::new(0.0, 0.0); m_len];
    for k in 0..n {
        let kf = k as f64;
        let v = Complex64::from_polar(1.0, PI * beta * kf * kf);
        w[k] = v;
        if k > 0 {
            w[m_len - k] = v;
        }
    }
    fwd.process(a);
    fwd.process(&mut w);
    for (x, y) in a.iter_mut().zip(&w) {
        *x *= y;
    }
    inv.process(a);
    let scale = 1.0 / m_len as f64;
    a.iter().take(n).map(|v| v * scale).collect()
}

/// Transform of any order.
///
/// Orders within [`EXACT_ORDER_TOL`] of 0 or π return the input or its
/// parity image exactly. A near-singular order whose alias guard the grid
/// still meets is summed directly; otherwise it is computed as
/// `F_{a - π/2} ∘ F_{π/2}`. Regular orders go straight to [`frft_fast`].
pub fn frft_composed(signal: &ReducedSignal, alpha: FractionalOrder) -> Result<ReducedSignal> {
    let a = alpha.radians();
    if a.abs() <= EXACT_ORDER_TOL {
        return Ok(signal.clone());
    }
    if (PI - a.abs()) <= EXACT_ORDER_TOL {
        return Ok(parity(signal));
    }
    if !alpha.is_near_singular() {
        return frft_fast(signal, alpha);
    }
    if within_guard(signal, alpha) {
        return chirp_z(signal, alpha);
    }
    let quarter = FractionalOrder::new(FRAC_PI_2);
    let mid = frft_fast(signal, quarter)?;
    frft_fast(&mid, FractionalOrder::new(a - FRAC_PI_2))
}

/// `out(ρ_j) = in(-ρ_j)`, zero where `-ρ_j` leaves the grid.
///
/// Index reversal when the grid is mirror-compatible, linear interpolation
/// otherwise.
pub fn parity(signal: &ReducedSignal) -> ReducedSignal {
    let grid = signal.grid();
    let n = grid.n;
    let k = -2.0 * grid.x0 / grid.dx;
    let kr = k.round();
    let src = signal.samples();
    let zero = Complex64::new(0.0, 0.0);
    let samples = if (k - kr).abs() < 1e-9 {
        let k = kr as i64;
        (0..n as i64)
            .map(|j| {
                let i = k - j;
                if (0..n as i64).contains(&i) {
                    src[i as usize]
                } else {
                    zero
                }
            })
            .collect()
    } else {
        (0..n)
            .map(|j| {
                let t = k - j as f64;
                if t < 0.0 || t > (n - 1) as f64 {
                    return zero;
                }
                let i = (t.floor() as usize).min(n - 2);
                let f = t - i as f64;
                src[i] * (1.0 - f) + src[i + 1] * f
            })
            .collect()
    };
    ReducedSignal { samples, grid }
}
