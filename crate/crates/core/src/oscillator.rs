//! Harmonic-oscillator propagator in the canonical-position representation.
//!
//! A single field mode is an oscillator with `H = (p² + ω² q²) / 2`; its
//! transition amplitude over time `t` is
//!
//! ```text
//! K(q_F, q_I; t) = (ω / (2πiħ sin ωt))^{1/2}
//!                  * exp[(i/2ħ) ω ((q_I² + q_F²) cot ωt - 2 q_I q_F / sin ωt)]
//! ```
//!
//! Substituting `ρ = q sqrt(ω / 2πħ)` turns it into `exp(-iωt/2)` times the
//! fractional Fourier kernel of order `ωt`, which is how [`propagate_q`]
//! evaluates it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::frft::{frft_composed, FractionalOrder, ReducedSignal};

/// Reduced Planck constant (J s), CODATA 2018 exact value.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Kernel value at `(q_i, q_f)`; coordinates in m·sqrt(kg).
pub fn harmonic_kernel(q_i: f64, q_f: f64, omega: f64, t: f64, hbar: f64) -> Result<Complex64> {
    let wt = omega * t;
    let (s, c) = wt.sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::SingularTime(wt));
    }
    // ω / (2πiħ sin ωt) = -i ω / (2πħ sin ωt)
    let pre = Complex64::new(0.0, -omega / (2.0 * PI * hbar * s)).sqrt();
    let phase = omega / (2.0 * hbar) * ((q_i * q_i + q_f * q_f) * (c / s) - 2.0 * q_i * q_f / s);
    Ok(pre * Complex64::from_polar(1.0, phase))
}

/// `sqrt(ω / 2πħ)`: the factor taking `q` to the dimensionless `ρ`.
pub fn q_to_rho_scale(omega: f64, hbar: f64) -> f64 {
    (omega / (2.0 * PI * hbar)).sqrt()
}

/// Evolves `psi` (samples over `q`) for a time `t`.
///
/// The output shares the input's `q` grid. Any `ωt` is accepted; orders near
/// multiples of π go through [`frft_composed`].
pub fn propagate_q(psi: &ReducedSignal, omega: f64, t: f64, hbar: f64) -> Result<ReducedSignal> {
    let scale = q_to_rho_scale(omega, hbar);
    let qg = psi.grid();
    let rho_grid = Grid::new(qg.n, qg.dx * scale, qg.x0 * scale)?;
    let rho = ReducedSignal::on_grid(psi.samples().to_vec(), rho_grid)?;
    let wt = omega * t;
    let out = frft_composed(&rho, FractionalOrder::new(wt))?;
    let zero_point = Complex64::from_polar(1.0, -0.5 * wt);
    ReducedSignal::on_grid(out.into_samples(), qg).map(|s| s.scaled(zero_point))
}
