//! Half-space Green's functions for the Helmholtz equation, and their
//! smoothing by a finite source distribution.
//!
//! The screen `Σ` is the plane `z = 0` and the diffraction half-space is
//! `z > 0`. With `d = |r - r'|` and `d̃ = |r - r̃'|`, `r̃'` the mirror image of
//! `r'` in `Σ`,
//!
//! ```text
//! G±(r, r') = exp(ikd)/d ± exp(ikd̃)/d̃
//! ```
//!
//! (no `-4π` prefactor). A distribution `ρ` with unit integral replaces the
//! point source:
//!
//! ```text
//! 𝒢±(r, r') = ∫ ρ(r'' - r) G±(r'', r') dr''
//! ```
//!
//! which [`generalized_g`] evaluates by product quadrature. Every rule used here
//! is mirror-symmetric in `z`, so `𝒢₋` cancels on `Σ` pair by pair.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use gauss_quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point in the half-space geometry, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Reflection in `Σ`. An involution; points on `Σ` are fixed.
    pub fn mirror(self) -> Self {
        Self::new(self.x, self.y, -self.z)
    }

    pub fn distance(self, other: Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn offset(self, u: [f64; 3]) -> Self {
        Self::new(self.x + u[0], self.y + u[1], self.z + u[2])
    }

    fn offset_mirrored(self, u: [f64; 3]) -> Self {
        Self::new(self.x + u[0], self.y + u[1], self.z - u[2])
    }
}

/// Which image combination: `Plus` is the Neumann function, `Minus` the
/// Dirichlet one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Isotropic source density with unit integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceDistribution {
    Dirac,
    /// `ρ(u) = (2πσ²)^{-3/2} exp(-|u|²/2σ²)`.
    Gaussian { sigma: f64 },
    /// Uniform density on the ball `|u| <= radius`.
    UniformBall { radius: f64 },
    /// Linear combination `Σ c_i ρ_i`; unit integral only if `Σ c_i = 1`.
    Mixture { parts: Vec<(f64, SourceDistribution)> },
}

impl SourceDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceDistribution::Dirac => Ok(()),
            SourceDistribution::Gaussian { sigma } if *sigma > 0.0 && sigma.is_finite() => Ok(()),
            SourceDistribution::UniformBall { radius } if *radius > 0.0 && radius.is_finite() => {
                Ok(())
            }
            SourceDistribution::Mixture { parts } if !parts.is_empty() => {
                for (c, p) in parts {
                    if !c.is_finite() {
                        return Err(Error::InvalidSpec(format!("mixture coefficient {c}")));
                    }
                    p.validate()?;
                }
                Ok(())
            }
            other => Err(Error::InvalidSpec(format!("invalid source distribution {other:?}"))),
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, SourceDistribution::Dirac)
    }

    /// Minimum distance from a singular point at which quadrature is
    /// contracted to converge: `8σ` for a Gaussian, `2a` for a ball.
    pub fn guard_radius(&self) -> f64 {
        match self {
            SourceDistribution::Dirac => 0.0,
            SourceDistribution::Gaussian { sigma } => 8.0 * sigma,
            SourceDistribution::UniformBall { radius } => 2.0 * radius,
            SourceDistribution::Mixture { parts } => parts
                .iter()
                .map(|(_, p)| p.guard_radius())
                .fold(0.0, f64::max),
        }
    }

    /// `∫ ρ(u) exp(i q·u) du` for `|q| = k`; also the factor by which `ρ`
    /// scales any Helmholtz solution regular over its support.
    pub fn characteristic(&self, k: f64) -> f64 {
        match self {
            SourceDistribution::Dirac => 1.0,
            SourceDistribution::Gaussian { sigma } => (-0.5 * (k * sigma).powi(2)).exp(),
            SourceDistribution::UniformBall { radius } => {
                let t = k * radius;
                if t.abs() < 1e-3 {
                    1.0 - t * t / 10.0
                } else {
                    3.0 * (t.sin() - t * t.cos()) / t.powi(3)
                }
            }
            SourceDistribution::Mixture { parts } => {
                parts.iter().map(|(c, p)| c * p.characteristic(k)).sum()
            }
        }
    }

    /// Product rule of order `n` as `(offset, weight)` with `offset.z >= 0`;
    /// a node with positive `z` stands for itself and its mirror.
    fn rule(&self, n: usize) -> Result<Vec<([f64; 3], f64)>> {
        Ok(match self {
            SourceDistribution::Dirac => vec![([0.0; 3], 1.0)],
            SourceDistribution::Gaussian { sigma } => {
                let (t, w) = symmetric_rule(hermite_pairs(n)?);
                let scale = 2f64.sqrt() * sigma;
                let norm = PI.powf(-1.5);
                let mut out = Vec::with_capacity(n * n * n.div_ceil(2));
                for (i, &ti) in t.iter().enumerate() {
                    for (j, &tj) in t.iter().enumerate() {
                        for (l, &tl) in t.iter().enumerate() {
                            if tl < 0.0 {
                                continue;
                            }
                            let u = [scale * ti, scale * tj, scale * tl];
                            out.push((u, norm * w[i] * w[j] * w[l]));
                        }
                    }
                }
                out
            }
            SourceDistribution::UniformBall { radius } => {
                let (s, ws) = symmetric_rule(legendre_pairs(n)?);
                let nphi = 2 * n;
                let dphi = 2.0 * PI / nphi as f64;
                let norm = 3.0 / (4.0 * PI * radius.powi(3));
                let mut out = Vec::with_capacity(n * nphi * n.div_ceil(2));
                for (i, &si) in s.iter().enumerate() {
                    let r = 0.5 * radius * (si + 1.0);
                    let wr = 0.5 * radius * ws[i] * r * r;
                    for (j, &c) in s.iter().enumerate() {
                        if c < 0.0 {
                            continue;
                        }
                        let st = (1.0 - c * c).max(0.0).sqrt();
                        for m in 0..nphi {
                            let (sp, cp) = (m as f64 * dphi).sin_cos();
                            let u = [r * st * cp, r * st * sp, r * c];
                            out.push((u, norm * wr * ws[j] * dphi));
                        }
                    }
                }
                out
            }
            SourceDistribution::Mixture { parts } => {
                let mut out = Vec::new();
                for (c, p) in parts {
                    out.extend(p.rule(n)?.into_iter().map(|(u, w)| (u, c * w)));
                }
                out
            }
        })
    }
}

impl fmt::Display for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceDistribution::Dirac => write!(f, "dirac"),
            SourceDistribution::Gaussian { sigma } => write!(f, "gaussian:sigma={sigma:e}"),
            SourceDistribution::UniformBall { radius } => write!(f, "ball:a={radius:e}"),
            SourceDistribution::Mixture { parts } => {
                let s: Vec<String> = parts.iter().map(|(c, p)| format!("{c:e}*{p}")).collect();
                write!(f, "{}", s.join("+"))
            }
        }
    }
}

/// Parses `dirac`, `gaussian:sigma=<m>` or `ball:a=<m>`.
impl FromStr for SourceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse source distribution {s:?}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let param = |key: &str| -> Result<f64> {
            let (k, v) = rest.split_once('=').ok_or_else(bad)?;
            if k.trim() != key {
                return Err(bad());
            }
            v.trim().parse::<f64>().map_err(|_| bad())
        };
        let dist = match kind.trim() {
            "dirac" if rest.is_empty() => SourceDistribution::Dirac,
            "gaussian" => SourceDistribution::Gaussian { sigma: param("sigma")? },
            "ball" | "uniform_ball" => SourceDistribution::UniformBall { radius: param("a")? },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

fn hermite_pairs(n: usize) -> Result<Vec<(f64, f64)>> {
    GaussHermite::new(n)
        .map(|q| q.into_node_weight_pairs())
        .map_err(|_| Error::InvalidSpec(format!("Gauss-Hermite order {n}")))
}

fn legendre_pairs(n: usize) -> Result<Vec<(f64, f64)>> {
    GaussLegendre::new(n)
        .map(|q| q.into_node_weight_pairs())
        .map_err(|_| Error::InvalidSpec(format!("Gauss-Legendre order {n}")))
}

/// Sorts a rule symmetric about 0 and removes the eigensolver's asymmetry,
/// so that `t[i] = -t[n-1-i]` and `w[i] = w[n-1-i]` exactly.
fn symmetric_rule(mut pairs: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut t = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let j = n - 1 - i;
        t[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        w[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    (t, w)
}

/// Rule orders tried in turn by the adaptive quadrature.
pub const QUAD_ORDERS: [usize; 5] = [16, 24, 32, 48, 64];
/// Relative agreement between successive orders that counts as converged.
pub const QUAD_RTOL: f64 = 1e-6;

/// Quadrature result with the difference to the previous order as the error
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub order: usize,
}

const CHUNK: usize = 4096;

/// `(Σ w f, Σ |w f|)` over the rule, mirror pairs summed first. Fixed chunking
/// keeps the result independent of the thread schedule.
fn apply_rule<F>(rule: &[([f64; 3], f64)], r: Point3, f: &F) -> (Complex64, f64)
where
    F: Fn(Point3) -> Complex64 + Sync,
{
    let partial: Vec<(Complex64, f64)> = rule
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for &(u, w) in chunk {
                let mut v = f(r.offset(u));
                mass += w.abs() * v.norm();
                if u[2] > 0.0 {
                    let m = f(r.offset_mirrored(u));
                    mass += w.abs() * m.norm();
                    v += m;
                }
                acc += w * v;
            }
            (acc, mass)
        })
        .collect();
    partial
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(a, m), (b, n)| (a + b, m + n))
}

/// `∫ ρ(u) f(r + u) du`, raising the rule order until two successive orders
/// agree to [`QUAD_RTOL`] or to the rounding level of the sum.
pub fn integrate<F>(rho: &SourceDistribution, r: Point3, f: F) -> Result<Quadrature>
where
    F: Fn(Point3) -> Complex64 + Sync,
{
    rho.validate()?;
    if rho.is_dirac() {
        return Ok(Quadrature {
            value: f(r),
            error_estimate: 0.0,
            order: 1,
        });
    }
    let mut prev: Option<Complex64> = None;
    let mut last_rel = f64::INFINITY;
    for &n in &QUAD_ORDERS {
        let (v, mass) = apply_rule(&rho.rule(n)?, r, &f);
        if let Some(p) = prev {
            let diff = (v - p).norm();
            let floor = 1e3 * f64::EPSILON * mass;
            if diff <= QUAD_RTOL * v.norm() + floor {
                return Ok(Quadrature {
                    value: v,
                    error_estimate: diff,
                    order: n,
                });
            }
            last_rel = diff / v.norm().max(f64::MIN_POSITIVE);
        }
        prev = Some(v);
    }
    Err(Error::QuadratureNotConverged(last_rel))
}

fn spherical_unchecked(r: Point3, rp: Point3, k: f64, sign: Sign) -> Complex64 {
    let d = r.distance(rp);
    let dm = r.distance(rp.mirror());
    Complex64::from_polar(1.0 / d, k * d) + sign.factor() * Complex64::from_polar(1.0 / dm, k * dm)
}

/// `G±(r, r')` in closed form.
pub fn spherical_g(r: Point3, rp: Point3, k: f64, sign: Sign) -> Result<Complex64> {
    if r.distance(rp) == 0.0 || r.distance(rp.mirror()) == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(spherical_unchecked(r, rp, k, sign))
}

fn check_guard(rho: &SourceDistribution, r: Point3, rp: Point3) -> Result<()> {
    let guard = rho.guard_radius();
    let distance = r.distance(rp).min(r.distance(rp.mirror()));
    if distance < guard {
        return Err(Error::TooCloseToSingularity { distance, guard });
    }
    Ok(())
}

/// `𝒢±(r, r')`, with its quadrature error estimate.
pub fn generalized_g_quad(
    rho: &SourceDistribution,
    r: Point3,
    rp: Point3,
    k: f64,
    sign: Sign,
) -> Result<Quadrature> {
    rho.validate()?;
    if rho.is_dirac() {
        return spherical_g(r, rp, k, sign).map(|value| Quadrature {
            value,
            error_estimate: 0.0,
            order: 1,
        });
    }
    check_guard(rho, r, rp)?;
    integrate(rho, r, |p| spherical_unchecked(p, rp, k, sign))
}

/// `𝒢±(r, r')`. For [`SourceDistribution::Dirac`] this is [`spherical_g`]
/// itself.
pub fn generalized_g(
    rho: &SourceDistribution,
    r: Point3,
    rp: Point3,
    k: f64,
    sign: Sign,
) -> Result<Complex64> {
    generalized_g_quad(rho, r, rp, k, sign).map(|q| q.value)
}

/// Test field `U(r) = (c + g·r) exp(i q·r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub offset: f64,
    pub gradient: [f64; 3],
    pub wavevector: [f64; 3],
}

impl TestField {
    pub fn constant(c: f64) -> Self {
        Self {
            offset: c,
            gradient: [0.0; 3],
            wavevector: [0.0; 3],
        }
    }

    pub fn linear(offset: f64, gradient: [f64; 3]) -> Self {
        Self {
            offset,
            gradient,
            wavevector: [0.0; 3],
        }
    }

    pub fn plane_wave(amplitude: f64, wavevector: [f64; 3]) -> Self {
        Self {
            offset: amplitude,
            gradient: [0.0; 3],
            wavevector,
        }
    }

    pub fn eval(&self, p: Point3) -> Complex64 {
        let [gx, gy, gz] = self.gradient;
        let [qx, qy, qz] = self.wavevector;
        let poly = self.offset + gx * p.x + gy * p.y + gz * p.z;
        Complex64::from_polar(1.0, qx * p.x + qy * p.y + qz * p.z) * poly
    }
}

/// `|∫ U(r') ρ(r - r') dr' - U(r)|`: how far `ρ` is from sifting `U` at `r`.
pub fn sifting_check(rho: &SourceDistribution, field: &TestField, r: Point3) -> Result<f64> {
    let q = integrate(rho, r, |p| field.eval(p))?;
    Ok((q.value - field.eval(r)).norm())
}

/// Phase comparison of the smoothed Dirichlet kernel against ideal
/// wavefronts along the line `(x, 0, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelShapeReport {
    pub z_m: f64,
    pub wavenumber: f64,
    pub distribution: String,
    pub x_m: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `arg` of the kernel, unwrapped from the axis outward.
    pub phase_rad: Vec<f64>,
    pub phase_rms_vs_spherical: f64,
    pub phase_rms_vs_parabolic: f64,
    /// `ρ`'s characteristic function at `k`: the predicted ratio of the
    /// smoothed kernel to the point-source one.
    pub characteristic: f64,
    pub method: KernelMethod,
}

/// How [`kernel_shape_compare`] evaluated the smoothed kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Quadrature,
    /// `χ(k)` times the point-source kernel. Exact for a radial `ρ` seen
    /// from beyond its guard radius; used when the quadrature cannot resolve
    /// a kernel that much smaller than its integrand.
    MeanValue,
}

/// `∂G₋/∂z'` at `r' = 0` on `Σ`: `-2 z exp(ikd) (ikd - 1) / d³`, `d = |r|`.
fn dirichlet_normal_derivative(p: Point3, k: f64) -> Complex64 {
    let d = p.distance(Point3::new(0.0, 0.0, 0.0));
    let kd = k * d;
    Complex64::from_polar(-2.0 * p.z / d.powi(3), kd) * Complex64::new(-1.0, kd)
}

/// Unwraps `phase` in place starting at index `start` and moving outward.
pub fn unwrap_from(phase: &mut [f64], start: usize) {
    let step = |prev: f64, cur: f64| {
        let d = cur - prev;
        prev + (d - 2.0 * PI * (d / (2.0 * PI)).round())
    };
    for j in start + 1..phase.len() {
        phase[j] = step(phase[j - 1], phase[j]);
    }
    for j in (0..start).rev() {
        phase[j] = step(phase[j + 1], phase[j]);
    }
}

fn residual_rms(values: &[Complex64], reference: impl Fn(usize) -> f64, start: usize) -> f64 {
    let mut res: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| (v * Complex64::from_polar(1.0, -reference(j))).arg())
        .collect();
    unwrap_from(&mut res, start);
    let mean = res.iter().sum::<f64>() / res.len() as f64;
    (res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / res.len() as f64).sqrt()
}

/// Samples `∂𝒢₋/∂n'` for a source point at the origin of `Σ` over
/// `x ∈ [-half_width, half_width]` at height `z`, and fits its unwrapped
/// phase against `k r` and against `k (z + x²/2z)` up to a constant.
///
/// The kernel is integrated numerically; if the quadrature does not converge
/// the report falls back to [`KernelMethod::MeanValue`] and says so.
pub fn kernel_shape_compare(
    rho: &SourceDistribution,
    k: f64,
    z: f64,
    half_width: f64,
    n_points: usize,
) -> Result<KernelShapeReport> {
    rho.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::NonpositiveDistance(z));
    }
    if n_points < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "need n_points >= 2 and half_width > 0, got {n_points}, {half_width}"
        )));
    }
    if z < rho.guard_radius() {
        return Err(Error::TooCloseToSingularity {
            distance: z,
            guard: rho.guard_radius(),
        });
    }
    let dx = 2.0 * half_width / (n_points - 1) as f64;
    let x_m: Vec<f64> = (0..n_points).map(|j| -half_width + j as f64 * dx).collect();
    let quadrature = x_m
        .par_iter()
        .map(|&x| {
            integrate(rho, Point3::new(x, 0.0, z), |p| dirichlet_normal_derivative(p, k))
                .map(|q| q.value)
        })
        .collect::<Result<Vec<_>>>();
    let chi = rho.characteristic(k);
    let (values, method) = match quadrature {
        Ok(v) => (v, KernelMethod::Quadrature),
        Err(Error::QuadratureNotConverged(_)) => (
            x_m.iter()
                .map(|&x| chi * dirichlet_normal_derivative(Point3::new(x, 0.0, z), k))
                .collect(),
            KernelMethod::MeanValue,
        ),
        Err(e) => return Err(e),
    };
    let axis = (0..n_points)
        .min_by(|&a, &b| x_m[a].abs().total_cmp(&x_m[b].abs()))
        .unwrap_or(0);
    let mut phase_rad: Vec<f64> = values.iter().map(|v| v.arg()).collect();
    unwrap_from(&mut phase_rad, axis);
    let spherical = residual_rms(&values, |j| k * (z * z + x_m[j] * x_m[j]).sqrt(), axis);
    let parabolic = residual_rms(&values, |j| k * (z + x_m[j] * x_m[j] / (2.0 * z)), axis);
    Ok(KernelShapeReport {
        z_m: z,
        wavenumber: k,
        distribution: rho.to_string(),
        x_m,
        values,
        phase_rad,
        phase_rms_vs_spherical: spherical,
        phase_rms_vs_parabolic: parabolic,
        characteristic: chi,
        method,
    })
}
