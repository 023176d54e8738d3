//! Run configurations: built-in scenarios, JSON loading with schema errors,
//! and the drivers behind each CLI command.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::counting::{rate_scale_for_total, sample_counts, scan_positions, window_integrals, DetectorScan, RNG_NAME};
use crate::error::{Error, Result};
use crate::field::{render_on, Curvature, Grid, SampledField, SourceSpec};
use crate::geometry::{geometry_from_z, PropagationGeometry};
use crate::propagate::{
    default_reference_radius, fraunhofer, fresnel_direct, fresnel_via_frft, fresnel_with_geometry,
    rayleigh_sommerfeld_oracle,
};

/// Illumination multiplying the source shape in the aperture plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Illumination {
    /// Unit plane wave; the aperture field is referred to a flat surface.
    PlaneWave,
    /// Gaussian amplitude `exp(-x²/w²)` with a flat wavefront.
    GaussianBeam { waist_m: f64 },
    /// Amplitude referred to a sphere of radius `radius_m` (positive:
    /// converging).
    Spherical { radius_m: f64 },
}

impl Default for Illumination {
    fn default() -> Self {
        Illumination::PlaneWave
    }
}

/// Sampling of the aperture plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Pitch; when absent the balanced pitch `sqrt(λ z / n)` is used, for
    /// which the one-step transform keeps the pitch unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx_m: Option<f64>,
}

/// Detector scan parameters. Step, span and total are defaults of ours; the
/// width and dwell describe the instrument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub width_m: f64,
    pub dwell_s: f64,
    pub scan_step_m: f64,
    pub scan_span_m: f64,
    pub total_counts: f64,
}

/// Fractional-order sweep at a fixed reference radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Orders as fractions of `π/2`.
    pub alphas_half_pi: Vec<f64>,
}

/// A complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub wavelength_m: f64,
    pub source: SourceSpec,
    #[serde(default)]
    pub illumination: Illumination,
    pub z_m: f64,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["paper-slit", "young"];

/// Collimated 632 nm beam on a 1905 µm slit, observed 96.84 cm downstream
/// with a 50 µm detector and 10 ms dwell.
pub fn paper_slit() -> Scenario {
    Scenario {
        name: "paper-slit".into(),
        wavelength_m: 632e-9,
        source: SourceSpec::rect_slit(1.905e-3),
        illumination: Illumination::PlaneWave,
        z_m: 0.9684,
        grid: GridConfig { n: 8192, dx_m: None },
        detector: Some(DetectorConfig {
            width_m: 50e-6,
            dwell_s: 10e-3,
            scan_step_m: 50e-6,
            scan_span_m: 5e-3,
            total_counts: 1e5,
        }),
        sweep: None,
    }
}

/// Reference radius of the `young` scenario: `d w / λ`, which makes the
/// reduced pair separation and the reduced fringe period comparable.
pub fn young_reference_radius(waist: f64, separation: f64, wavelength: f64) -> f64 {
    separation * waist / wavelength
}

/// Two Gaussian beams (0.6 mm waist at 1/e², 4 mm apart) referred to a
/// sphere, swept from `α = 0.8 π/2` to `π/2`. `z_m` is the `π/2` plane.
pub fn young() -> Scenario {
    let (lambda, w, d) = (632e-9, 0.6e-3, 4e-3);
    let r_a = young_reference_radius(w, d, lambda);
    Scenario {
        name: "young".into(),
        wavelength_m: lambda,
        source: SourceSpec::gaussian_pair(w, d, 0.0),
        illumination: Illumination::Spherical { radius_m: r_a },
        z_m: r_a,
        grid: GridConfig {
            n: 2048,
            dx_m: Some(25e-6),
        },
        detector: None,
        sweep: Some(SweepConfig {
            alphas_half_pi: vec![0.80, 0.85, 0.90, 0.95, 1.00],
        }),
    }
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "paper-slit" => Some(paper_slit()),
        "young" => Some(young()),
        _ => None,
    }
}

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            Segment::Unknown => {}
        }
    }
    out
}

impl Scenario {
    /// Parses a scenario from JSON text. A metadata file written by a run is
    /// accepted too: its `scenario` member is used.
    pub fn from_json_str(text: &str) -> Result<Scenario> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| schema("", format!("malformed JSON: {e}")))?;
        let (prefix, body) = match value.get("scenario") {
            Some(inner) if value.get("name").is_none() => ("/scenario", inner.clone()),
            _ => ("", value),
        };
        let scenario: Scenario = serde_path_to_error::deserialize(body).map_err(|e| {
            let pointer = format!("{prefix}{}", to_pointer(e.path()));
            schema(&pointer, e.into_inner().to_string())
        })?;
        scenario.validate().map_err(|e| match e {
            Error::Schema { pointer, message } => schema(&format!("{prefix}{pointer}"), message),
            other => other,
        })?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("scenario is always serializable")
    }

    /// Checks value ranges, reporting the offending member as a JSON pointer.
    pub fn validate(&self) -> Result<()> {
        let positive = |ptr: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(schema(ptr, format!("must be positive and finite, got {v}")))
            }
        };
        positive("/wavelength_m", self.wavelength_m)?;
        positive("/z_m", self.z_m)?;
        if self.grid.n < 2 {
            return Err(schema("/grid/n", format!("need at least 2 samples, got {}", self.grid.n)));
        }
        if let Some(dx) = self.grid.dx_m {
            positive("/grid/dx_m", dx)?;
        }
        self.source
            .support()
            .map_err(|e| schema("/source", e.to_string()))?;
        match self.illumination {
            Illumination::PlaneWave => {}
            Illumination::GaussianBeam { waist_m } => positive("/illumination/waist_m", waist_m)?,
            Illumination::Spherical { radius_m } => {
                if !(radius_m.is_finite() && radius_m != 0.0) {
                    return Err(schema(
                        "/illumination/radius_m",
                        format!("must be finite and nonzero, got {radius_m}"),
                    ));
                }
            }
        }
        if let Some(d) = &self.detector {
            positive("/detector/width_m", d.width_m)?;
            positive("/detector/dwell_s", d.dwell_s)?;
            positive("/detector/scan_step_m", d.scan_step_m)?;
            positive("/detector/total_counts", d.total_counts)?;
            if !(d.scan_span_m >= 0.0 && d.scan_span_m.is_finite()) {
                return Err(schema("/detector/scan_span_m", "must be nonnegative"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.alphas_half_pi.is_empty() {
                return Err(schema("/sweep/alphas_half_pi", "must not be empty"));
            }
            for (i, a) in s.alphas_half_pi.iter().enumerate() {
                if !(*a > 0.0 && *a < 2.0) {
                    return Err(schema(
                        &format!("/sweep/alphas_half_pi/{i}"),
                        format!("order must lie in (0, 2) units of pi/2, got {a}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Aperture-plane pitch.
    pub fn pitch(&self) -> f64 {
        self.grid
            .dx_m
            .unwrap_or_else(|| (self.wavelength_m * self.z_m / self.grid.n as f64).sqrt())
    }

    pub fn aperture_grid(&self) -> Result<Grid> {
        Grid::centered(self.grid.n, self.pitch())
    }

    /// Source times illumination on [`Scenario::aperture_grid`].
    pub fn aperture_field(&self) -> Result<SampledField> {
        let f = render_on(&self.source, self.aperture_grid()?, self.wavelength_m)?;
        Ok(match self.illumination {
            Illumination::PlaneWave => f,
            Illumination::GaussianBeam { waist_m } => {
                let samples: Vec<Complex64> = f
                    .samples()
                    .iter()
                    .zip(f.coords())
                    .map(|(u, x)| u * (-(x / waist_m).powi(2)).exp())
                    .collect();
                SampledField::on_grid(samples, f.grid(), f.wavelength(), Curvature::Flat)?
            }
            Illumination::Spherical { radius_m } => f.with_curvature(Curvature::Radius(radius_m)),
        })
    }

    /// Reference radius of the aperture field if it lies on a sphere.
    pub fn reference_radius(&self) -> Option<f64> {
        match self.illumination {
            Illumination::Spherical { radius_m } => Some(radius_m),
            _ => None,
        }
    }
}

/// Loads a built-in scenario by name, or a JSON file by path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = builtin(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(schema(
            "",
            format!(
                "{name_or_path:?} is neither a built-in scenario ({}) nor a readable file",
                BUILTIN_NAMES.join(", ")
            ),
        ));
    }
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json_str(&text)
}

/// Propagation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fresnel,
    Frft,
    Rs,
    Fraunhofer,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fresnel, Method::Frft, Method::Rs, Method::Fraunhofer];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fresnel => "fresnel",
            Method::Frft => "frft",
            Method::Rs => "rs",
            Method::Fraunhofer => "fraunhofer",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Propagates `field` over `z` with `method`. The fractional route uses the
/// field's own reference radius when it has one on the photon branch.
pub fn propagate_with(method: Method, field: &SampledField, z: f64) -> Result<SampledField> {
    match method {
        Method::Fresnel => fresnel_direct(field, z),
        Method::Frft => fresnel_via_frft(field, z, default_reference_radius(field, z)),
        Method::Rs => rayleigh_sommerfeld_oracle(field, z),
        Method::Fraunhofer => fraunhofer(field, z),
    }
}

/// One order of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFrame {
    pub alpha_half_pi: f64,
    pub geometry: PropagationGeometry,
    pub field: SampledField,
}

impl SweepFrame {
    /// Reduced output coordinate `σ_j = x_j / s`.
    pub fn sigma(&self) -> Vec<f64> {
        let s = self.geometry.scale_m;
        self.field.coords().map(|x| x / s).collect()
    }
}

/// Propagates the scenario's aperture field to the plane of each order
/// `α = a π/2`, at fixed reference radius: `z = R_A (1 - cos α)`.
pub fn run_sweep(scenario: &Scenario, alphas_half_pi: &[f64]) -> Result<Vec<SweepFrame>> {
    let r_a = scenario.reference_radius().ok_or_else(|| {
        Error::InvalidSpec("a sweep needs spherical illumination to fix R_A".into())
    })?;
    let field = scenario.aperture_field()?;
    alphas_half_pi
        .par_iter()
        .map(|&a| {
            if !(a > 0.0 && a < 2.0) {
                return Err(Error::InvalidSpec(format!(
                    "order must lie in (0, 2) units of pi/2, got {a}"
                )));
            }
            let alpha = a * PI / 2.0;
            let z = r_a * (1.0 - alpha.cos());
            let geometry = geometry_from_z(z, r_a, scenario.wavelength_m)?;
            let out = fresnel_with_geometry(&field, &geometry)?;
            Ok(SweepFrame {
                alpha_half_pi: a,
                geometry,
                field: out,
            })
        })
        .collect()
}

/// Field at the detector plane and the simulated scan.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRun {
    pub field: SampledField,
    pub window_integrals: Vec<f64>,
    pub scan: DetectorScan,
}

/// Propagates the scenario with one-step Fresnel and scans its detector.
/// `total` overrides the configured expected total count.
pub fn run_counts(scenario: &Scenario, seed: u64, total: Option<f64>) -> Result<CountRun> {
    let det = scenario
        .detector
        .ok_or_else(|| Error::InvalidSpec(format!("scenario {} has no detector", scenario.name)))?;
    let field = fresnel_direct(&scenario.aperture_field()?, scenario.z_m)?;
    let positions = scan_positions(det.scan_span_m, det.scan_step_m)?;
    let windows = window_integrals(&field, &positions, det.width_m)?;
    let rate = rate_scale_for_total(&windows, det.dwell_s, total.unwrap_or(det.total_counts))?;
    let (expected, counts) = sample_counts(&windows, det.dwell_s, rate, seed)?;
    Ok(CountRun {
        field,
        window_integrals: windows,
        scan: DetectorScan {
            positions,
            detector_width: det.width_m,
            dwell_time: det.dwell_s,
            mean_rate_scale: rate,
            expected,
            counts,
            seed,
            rng: RNG_NAME.to_string(),
        },
    })
}
