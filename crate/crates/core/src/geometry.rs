//! The dictionary between a physical propagation `(z, R_A, λ)` and a
//! fractional order `(μ, ε, α, R_B)`.
//!
//! With `μ = z / R_A`, Fresnel diffraction from a sphere of radius `R_A` to a
//! sphere of radius `R_B` at distance `z` is a fractional Fourier transform of
//! order `α` in the reduced coordinates `ρ = x' / s`, `σ = (cos α + ε sin α) x / s`,
//! `s = sqrt(λ ε R_A)`, where
//!
//! ```text
//! cot α = ε (1 - μ) / μ
//! 1/R_B + 1/z = ε² (1 - μ) / (μ R_A [μ² + ε² (1 - μ)²])
//! ```
//!
//! The photon-propagator branch adds `cos α + ε sin α = 1`, which forces
//! `ε² = μ / (2 - μ)`, `sin α = μ / ε`, `cos α = 1 - μ` and `R_B = -R_A`; it
//! exists for `0 < μ < 2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Curvature, Grid, SampledField};
use crate::frft::ReducedSignal;
use crate::oscillator::HBAR;

/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

/// `μ` used to stand in for a flat (`R_A = ∞`) input: `R_A = z / FLAT_MU`.
pub const FLAT_MU: f64 = 1e-6;

/// Solved photon-branch geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationGeometry {
    pub z_m: f64,
    #[serde(rename = "R_A_m")]
    pub r_a_m: f64,
    pub lambda_m: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub alpha_rad: f64,
    #[serde(rename = "R_B_m")]
    pub r_b_m: f64,
    pub scale_m: f64,
    /// `true` when `R_A` was synthesised from a flat input via [`FLAT_MU`].
    #[serde(default)]
    pub flat_limit: bool,
}

impl PropagationGeometry {
    /// `cos α + ε sin α`, which is 1 on this branch up to rounding.
    pub fn sigma_factor(&self) -> f64 {
        self.alpha_rad.cos() + self.epsilon * self.alpha_rad.sin()
    }

    pub fn cot_alpha(&self) -> f64 {
        self.alpha_rad.cos() / self.alpha_rad.sin()
    }
}

/// Photon-branch geometry for a propagation distance `z` from a reference
/// sphere of radius `r_a`.
pub fn geometry_from_z(z: f64, r_a: f64, wavelength: f64) -> Result<PropagationGeometry> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::NonpositiveDistance(z));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::InvalidSpec(format!("wavelength must be positive, got {wavelength}")));
    }
    let mu = z / r_a;
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::OutOfBranch { mu });
    }
    let epsilon = (mu / (2.0 - mu)).sqrt();
    let alpha = (mu / epsilon).atan2(1.0 - mu);
    Ok(PropagationGeometry {
        z_m: z,
        r_a_m: r_a,
        lambda_m: wavelength,
        mu,
        epsilon,
        alpha_rad: alpha,
        r_b_m: -r_a,
        scale_m: (wavelength * epsilon * r_a).sqrt(),
        flat_limit: false,
    })
}

/// Geometry for an input with reference surface `curvature`; a flat surface
/// is replaced by the large finite radius `z / FLAT_MU`.
pub fn geometry_for(z: f64, curvature: Curvature, wavelength: f64) -> Result<PropagationGeometry> {
    match curvature {
        Curvature::Radius(r) => geometry_from_z(z, r, wavelength),
        Curvature::Flat => {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::NonpositiveDistance(z));
            }
            let mut g = geometry_from_z(z, z / FLAT_MU, wavelength)?;
            g.flat_limit = true;
            Ok(g)
        }
    }
}

/// Order and `ε` for an arbitrary output radius `R_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PellatSolution {
    pub alpha: f64,
    pub epsilon: f64,
}

/// Solves the curvature relation for `ε` given `z`, `R_A` and `R_B`.
///
/// `R_A` must be finite and nonzero. When `μ = 1` and `R_B = -z` every `ε`
/// solves the relation; the photon-branch value `ε = 1` is returned.
pub fn pellat_geometry(z: f64, r_a: f64, r_b: Curvature, _wavelength: f64) -> Result<PellatSolution> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::NonpositiveDistance(z));
    }
    if !(r_a.is_finite() && r_a != 0.0) {
        return Err(Error::NoRealSolution(format!("R_A must be finite and nonzero, got {r_a}")));
    }
    let mu = z / r_a;
    let lhs = r_b.inverse_radius() + 1.0 / z;
    let one_m = 1.0 - mu;
    if one_m.abs() < 1e-12 {
        return if (lhs * z).abs() < 1e-12 {
            Ok(PellatSolution {
                alpha: FRAC_PI_2,
                epsilon: 1.0,
            })
        } else {
            Err(Error::NoRealSolution(format!(
                "mu = 1 requires 1/R_B + 1/z = 0, got {lhs:e}"
            )))
        };
    }
    let denom = one_m * (1.0 - lhs * z * one_m);
    let e2 = lhs * z * mu * mu / denom;
    if !(e2 > 0.0 && e2.is_finite()) {
        return Err(Error::NoRealSolution(format!("epsilon^2 = {e2:e}")));
    }
    let epsilon = e2.sqrt();
    let rhs = e2 * one_m / (mu * r_a * (mu * mu + e2 * one_m * one_m));
    let resid = (lhs - rhs).abs();
    if resid > 1e-10 * lhs.abs().max(1.0 / z) {
        return Err(Error::NoRealSolution(format!("residual {resid:e}")));
    }
    Ok(PellatSolution {
        alpha: mu.atan2(epsilon * one_m),
        epsilon,
    })
}

/// Effective oscillator mass of a field mode, `m = ħ k / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassTerm {
    pub wavelength: f64,
    pub k: f64,
    pub m_lambda: f64,
}

impl MassTerm {
    pub fn new(wavelength: f64) -> Self {
        let k = 2.0 * PI / wavelength;
        Self {
            wavelength,
            k,
            m_lambda: HBAR * k / C_LIGHT,
        }
    }
}

/// Transverse position of canonical coordinate `q` (m·sqrt(kg)):
/// `x = sqrt(α / m) q`.
pub fn q_to_x(q: f64, alpha: f64, m_lambda: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveOrder(alpha));
    }
    Ok((alpha / m_lambda).sqrt() * q)
}

pub fn x_to_q(x: f64, alpha: f64, m_lambda: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveOrder(alpha));
    }
    Ok((m_lambda / alpha).sqrt() * x)
}

/// Input-plane amplitude `V_A(ρ)` on `ρ = x / s`, referred to the sphere
/// `R_A` of `geometry`.
pub fn reduce_field(field: &SampledField, geometry: &PropagationGeometry) -> Result<ReducedSignal> {
    let s = geometry.scale_m;
    let referred = field.rereferenced(Curvature::Radius(geometry.r_a_m));
    let g = field.grid();
    let grid = Grid::new(g.n, g.dx / s, g.x0 / s)?;
    ReducedSignal::on_grid(referred.into_samples(), grid)
}

/// Inverse of [`reduce_field`]: input-plane field referred to `R_A`.
pub fn unreduce_field(signal: &ReducedSignal, geometry: &PropagationGeometry) -> Result<SampledField> {
    let s = geometry.scale_m;
    let g = signal.grid();
    let grid = Grid::new(g.n, g.dx * s, g.x0 * s)?;
    SampledField::on_grid(
        signal.samples().to_vec(),
        grid,
        geometry.lambda_m,
        Curvature::Radius(geometry.r_a_m),
    )
}

/// Output-plane amplitude `V_B(σ)` mapped back to `x = s σ / (cos α + ε sin α)`,
/// referred to the sphere `R_B`.
pub fn unreduce_output(signal: &ReducedSignal, geometry: &PropagationGeometry) -> Result<SampledField> {
    let s = geometry.scale_m / geometry.sigma_factor();
    let g = signal.grid();
    let grid = Grid::new(g.n, g.dx * s, g.x0 * s)?;
    SampledField::on_grid(
        signal.samples().to_vec(),
        grid,
        geometry.lambda_m,
        Curvature::Radius(geometry.r_b_m),
    )
}
