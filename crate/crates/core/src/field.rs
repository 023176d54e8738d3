//! Sampled one-dimensional transverse fields and the sources rendered onto them.
//!
//! A [`SampledField`] stores complex amplitudes on the uniform grid
//! `x_j = x0 + j * dx`, together with the wavelength and the radius of the
//! spherical reference surface the amplitude is referred to.
//!
//! Phase convention: time dependence `exp(-i w t)`, so an outgoing spherical
//! wave is `exp(i k r) / r`. A field with reference radius `R` has physical
//! amplitude `samples_j * exp(-i k x_j^2 / (2 R))`; `R > 0` means the centre of
//! curvature lies downstream (a converging wave).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Radius of the reference sphere a sampled amplitude is referred to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    /// Plane reference surface (`R = infinity`).
    Flat,
    /// Signed radius in metres; positive when the centre lies downstream.
    Radius(f64),
}

impl Curvature {
    /// `1/R`, zero for a flat reference.
    pub fn inverse_radius(self) -> f64 {
        match self {
            Curvature::Flat => 0.0,
            Curvature::Radius(r) => 1.0 / r,
        }
    }

    pub fn is_flat(self) -> bool {
        matches!(self, Curvature::Flat)
    }
}

impl Serialize for Curvature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Curvature::Flat => s.serialize_str("flat"),
            Curvature::Radius(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Curvature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(r) if r.is_finite() && r != 0.0 => Ok(Curvature::Radius(r)),
            Repr::Num(r) => Err(serde::de::Error::custom(format!(
                "curvature radius must be finite and nonzero, got {r}"
            ))),
            Repr::Str(s) if s == "flat" => Ok(Curvature::Flat),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected \"flat\" or a radius in metres, got {s:?}"
            ))),
        }
    }
}

/// Uniform grid description shared by fields and reduced signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
}

impl Grid {
    pub fn new(n: usize, dx: f64, x0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidGrid(format!("pitch must be positive, got {dx}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidGrid(format!("origin must be finite, got {x0}")));
        }
        Ok(Self { n, dx, x0 })
    }

    /// Grid of `n` points centred the way a shifted DFT is: `x0 = -(n/2) dx`.
    pub fn centered(n: usize, dx: f64) -> Result<Self> {
        Self::new(n, dx, -((n / 2) as f64) * dx)
    }

    /// Symmetric grid: `x0 = -(n-1) dx / 2`, so `x_j = -x_{n-1-j}`.
    pub fn symmetric(n: usize, dx: f64) -> Result<Self> {
        Self::new(n, dx, -0.5 * (n as f64 - 1.0) * dx)
    }

    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.coord(self.n - 1)
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.coord(j))
    }

    /// Window length `n * dx`.
    pub fn span(&self) -> f64 {
        self.n as f64 * self.dx
    }
}

/// Uniformly sampled complex transverse amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    samples: Vec<Complex64>,
    grid: Grid,
    wavelength: f64,
    curvature: Curvature,
}

impl SampledField {
    pub fn new(
        samples: Vec<Complex64>,
        dx: f64,
        x0: f64,
        wavelength: f64,
        curvature: Curvature,
    ) -> Result<Self> {
        let grid = Grid::new(samples.len(), dx, x0)?;
        Self::on_grid(samples, grid, wavelength, curvature)
    }

    pub fn on_grid(
        samples: Vec<Complex64>,
        grid: Grid,
        wavelength: f64,
        curvature: Curvature,
    ) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.n
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if let Curvature::Radius(r) = curvature {
            if !(r.is_finite() && r != 0.0) {
                return Err(Error::InvalidSpec(format!("bad curvature radius {r}")));
            }
        }
        Ok(Self {
            samples,
            grid,
            wavelength,
            curvature,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx
    }

    pub fn x0(&self) -> f64 {
        self.grid.x0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn coord(&self, j: usize) -> f64 {
        self.grid.coord(j)
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.coords()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|u| u.norm_sqr()).collect()
    }

    /// Same samples, different reference surface label.
    pub fn with_curvature(mut self, curvature: Curvature) -> Self {
        self.curvature = curvature;
        self
    }

    /// Physical amplitude on the plane: the samples with the reference
    /// sphere's quadratic phase applied, labelled flat.
    pub fn to_flat(&self) -> SampledField {
        self.rereferenced(Curvature::Flat)
    }

    /// Refers the same physical field to another reference sphere.
    ///
    /// Intensities are unchanged; only the quadratic phase moves between the
    /// samples and the reference surface.
    pub fn rereferenced(&self, target: Curvature) -> SampledField {
        if target == self.curvature {
            return self.clone();
        }
        let k = self.wavenumber();
        let c = 0.5 * k * (target.inverse_radius() - self.curvature.inverse_radius());
        let samples = self
            .samples
            .iter()
            .zip(self.coords())
            .map(|(u, x)| u * Complex64::from_polar(1.0, c * x * x))
            .collect();
        SampledField {
            samples,
            grid: self.grid,
            wavelength: self.wavelength,
            curvature: target,
        }
    }

    /// Copy restricted to the samples with `lo <= x <= hi`.
    pub fn crop(&self, lo: f64, hi: f64) -> Result<SampledField> {
        let tol = 1e-9 * self.grid.dx;
        let idx: Vec<usize> = (0..self.n())
            .filter(|&j| {
                let x = self.coord(j);
                x >= lo - tol && x <= hi + tol
            })
            .collect();
        if idx.len() < 2 {
            return Err(Error::OutOfRange {
                lo,
                hi,
                win_lo: self.grid.x0,
                win_hi: self.grid.last(),
            });
        }
        let first = idx[0];
        let samples = idx.iter().map(|&j| self.samples[j]).collect();
        SampledField::new(
            samples,
            self.grid.dx,
            self.coord(first),
            self.wavelength,
            self.curvature,
        )
    }
}

/// Sum of `|u_j|^2 dx`.
pub fn energy(field: &SampledField) -> f64 {
    field.samples.iter().map(|u| u.norm_sqr()).sum::<f64>() * field.grid.dx
}

fn one() -> f64 {
    1.0
}

/// Aperture or source shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceShape {
    /// Unit transmission on the closed interval `|x| <= width/2`.
    RectSlit { width_m: f64 },
    /// `exp(-x^2 / w^2)`, `w` the 1/e^2 intensity radius.
    Gaussian { waist_m: f64 },
    /// Two Gaussians centred at `+-separation/2`; the one at `+separation/2`
    /// carries the relative phase.
    GaussianPair {
        waist_m: f64,
        separation_m: f64,
        #[serde(default)]
        relative_phase_rad: f64,
    },
    /// Samples given directly on the target grid.
    Custom { re: Vec<f64>, im: Vec<f64> },
}

/// Declarative source: a shape times a complex amplitude scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    #[serde(flatten)]
    pub shape: SourceShape,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl SourceSpec {
    pub fn rect_slit(width_m: f64) -> Self {
        Self {
            shape: SourceShape::RectSlit { width_m },
            amplitude: 1.0,
        }
    }

    pub fn gaussian(waist_m: f64) -> Self {
        Self {
            shape: SourceShape::Gaussian { waist_m },
            amplitude: 1.0,
        }
    }

    pub fn gaussian_pair(waist_m: f64, separation_m: f64, relative_phase_rad: f64) -> Self {
        Self {
            shape: SourceShape::GaussianPair {
                waist_m,
                separation_m,
                relative_phase_rad,
            },
            amplitude: 1.0,
        }
    }

    pub fn custom(samples: &[Complex64]) -> Self {
        Self {
            shape: SourceShape::Custom {
                re: samples.iter().map(|c| c.re).collect(),
                im: samples.iter().map(|c| c.im).collect(),
            },
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Validates lengths and returns the declared support `[lo, hi]`, if any.
    ///
    /// Gaussians declare `+-2 w` around each centre (intensity down to e^-8).
    pub fn support(&self) -> Result<Option<(f64, f64)>> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidSpec("amplitude must be finite".into()));
        }
        match &self.shape {
            SourceShape::RectSlit { width_m } => {
                positive("width_m", *width_m)?;
                Ok(Some((-0.5 * width_m, 0.5 * width_m)))
            }
            SourceShape::Gaussian { waist_m } => {
                positive("waist_m", *waist_m)?;
                Ok(Some((-2.0 * waist_m, 2.0 * waist_m)))
            }
            SourceShape::GaussianPair {
                waist_m,
                separation_m,
                relative_phase_rad,
            } => {
                positive("waist_m", *waist_m)?;
                if !(*separation_m >= 0.0 && separation_m.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "separation_m must be nonnegative, got {separation_m}"
                    )));
                }
                if !relative_phase_rad.is_finite() {
                    return Err(Error::InvalidSpec("relative_phase_rad must be finite".into()));
                }
                let h = 0.5 * separation_m + 2.0 * waist_m;
                Ok(Some((-h, h)))
            }
            SourceShape::Custom { re, im } => {
                if re.len() != im.len() {
                    return Err(Error::InvalidSpec(format!(
                        "custom re/im lengths differ ({} vs {})",
                        re.len(),
                        im.len()
                    )));
                }
                Ok(None)
            }
        }
    }
}

/// Renders `spec` onto the grid `x_j = x0 + j dx`, flat reference surface.
pub fn render_source(
    spec: &SourceSpec,
    n: usize,
    dx: f64,
    x0: f64,
    wavelength: f64,
) -> Result<SampledField> {
    let grid = Grid::new(n, dx, x0)?;
    render_on(spec, grid, wavelength)
}

pub fn render_on(spec: &SourceSpec, grid: Grid, wavelength: f64) -> Result<SampledField> {
    // A boundary sample counts as inside when it lies within this tolerance.
    let tol = 1e-9 * grid.dx;
    if let Some((lo, hi)) = spec.support()? {
        if lo < grid.x0 - tol || hi > grid.last() + tol {
            return Err(Error::GridTooNarrow {
                lo,
                hi,
                win_lo: grid.x0,
                win_hi: grid.last(),
            });
        }
    }
    let a = spec.amplitude;
    let samples: Vec<Complex64> = match &spec.shape {
        SourceShape::RectSlit { width_m } => {
            let half = 0.5 * width_m;
            grid.coords()
                .map(|x| {
                    if x.abs() <= half + tol {
                        Complex64::new(a, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        SourceShape::Gaussian { waist_m } => grid
            .coords()
            .map(|x| Complex64::new(a * gauss(x, *waist_m), 0.0))
            .collect(),
        SourceShape::GaussianPair {
            waist_m,
            separation_m,
            relative_phase_rad,
        } => {
            let c = 0.5 * separation_m;
            let phase = Complex64::from_polar(1.0, *relative_phase_rad);
            grid.coords()
                .map(|x| {
                    let left = Complex64::new(gauss(x + c, *waist_m), 0.0);
                    let right = phase * gauss(x - c, *waist_m);
                    (left + right) * a
                })
                .collect()
        }
        SourceShape::Custom { re, im } => {
            if re.len() != grid.n {
                return Err(Error::InvalidSpec(format!(
                    "custom source has {} samples, grid has {}",
                    re.len(),
                    grid.n
                )));
            }
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i) * a)
                .collect()
        }
    };
    SampledField::on_grid(samples, grid, wavelength, Curvature::Flat)
}

#[inline]
fn gauss(x: f64, w: f64) -> f64 {
    let t = x / w;
    (-t * t).exp()
}

/// Linear interpolation of `field` onto the grid `(n, dx, x0)`.
///
/// Target points that coincide with source samples copy them exactly.
pub fn resample(field: &SampledField, n: usize, dx: f64, x0: f64) -> Result<SampledField> {
    let target = Grid::new(n, dx, x0)?;
    resample_onto(field, target)
}

pub fn resample_onto(field: &SampledField, target: Grid) -> Result<SampledField> {
    let src = field.grid;
    if target == src {
        return Ok(field.clone());
    }
    let tol = 1e-9 * src.dx;
    if target.x0 < src.x0 - tol || target.last() > src.last() + tol {
        return Err(Error::OutOfRange {
            lo: target.x0,
            hi: target.last(),
            win_lo: src.x0,
            win_hi: src.last(),
        });
    }
    let last = src.n - 1;
    let samples = target
        .coords()
        .map(|x| {
            let t = (x - src.x0) / src.dx;
            let r = t.round();
            if (t - r).abs() < 1e-9 {
                return field.samples[(r.max(0.0) as usize).min(last)];
            }
            let i = (t.floor().max(0.0) as usize).min(last - 1);
            let f = t - i as f64;
            field.samples[i] * (1.0 - f) + field.samples[i + 1] * f
        })
        .collect();
    SampledField::on_grid(samples, target, field.wavelength, field.curvature)
}
