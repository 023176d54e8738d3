//! Command-line front end. [`run`] parses `argv`, runs one subcommand and
//! returns the process exit code: 0 on success, 1 when a numerical contract
//! fails (for example an aliased input), 2 for usage and configuration
//! errors. Failures are reported on stderr as
//! `{"error": "<kind>", "message": "<text>"}`.

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use frft_optics::field::{energy, Curvature, Grid};
use frft_optics::frft::{frft_composed, max_pitch_sq, FractionalOrder, ReducedSignal};
use frft_optics::geometry::{geometry_for, PropagationGeometry};
use frft_optics::green::{kernel_shape_compare, SourceDistribution};
use frft_optics::io::{read_columns, save_field, save_reduced, save_scan, write_json, Format};
use frft_optics::propagate::compare_fields;
use frft_optics::scenario::{load_scenario, propagate_with, run_counts, run_sweep, Method, Scenario};
use frft_optics::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "frft-optics", version, about = "Fractional Fourier optics toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Encoding of field and scan tables.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fractional Fourier transform of a sampled signal.
    Frft(FrftArgs),
    /// Photon-branch geometry for a distance and reference radius.
    Geometry(GeometryArgs),
    /// Propagates a scenario's aperture field.
    Propagate(PropagateArgs),
    /// Generalized Green kernel across a transverse line.
    GreenKernel(GreenArgs),
    /// Simulated photon counts of a detector scan.
    Counts(CountsArgs),
    /// Fields at a sequence of fractional orders.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct FrftArgs {
    /// Order in units of π/2 (1 is the Fourier transform).
    #[arg(long, allow_hyphen_values = true)]
    order: f64,
    /// CSV whose first three columns are coordinate, re, im. Without it the
    /// transform is applied to `exp(-π ρ²)` on the critical grid.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Points of the built-in signal.
    #[arg(long, default_value_t = 1024)]
    n: usize,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
    /// Input reference radius in metres; omit for a flat input.
    #[arg(long, allow_hyphen_values = true)]
    ra: Option<f64>,
    #[arg(long, default_value_t = 632e-9)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct PropagateArgs {
    /// Built-in scenario name or path to a scenario JSON.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "fresnel", value_parser = parse_method)]
    method: Method,
    /// Second method to compare against; writes metrics.json.
    #[arg(long, value_parser = parse_method)]
    compare_with: Option<Method>,
    /// Comparison window `lo,hi` in metres. Defaults to the detector scan
    /// range when the scenario has one.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
struct GreenArgs {
    /// Source distribution: `dirac`, `gaussian:sigma=S` or `ball:a=A`.
    #[arg(long)]
    rho: String,
    /// Distance of the line from the source, metres.
    #[arg(long)]
    z: f64,
    /// Half-width of the transverse line, metres.
    #[arg(long)]
    window: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long, default_value_t = 632e-9)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct CountsArgs {
    #[arg(long, default_value = "paper-slit")]
    scenario: String,
    /// Expected total counts over the scan; overrides the scenario value.
    #[arg(long)]
    total: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value = "young")]
    scenario: String,
    /// Orders in units of π/2, comma separated; defaults to the scenario's.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("unknown method {s:?}, expected one of {}", names.join(", "))
    })
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("empty window {lo}..{hi}"))
    }
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report("UsageError", &e.to_string());
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            report(e.kind(), &e.to_string());
            if e.is_numerical() {
                1
            } else {
                2
            }
        }
    }
}

fn report(kind: &str, message: &str) {
    let v = json!({ "error": kind, "message": message.trim_end() });
    let _ = writeln!(std::io::stderr(), "{v}");
}

fn dispatch(cli: Cli) -> Result<()> {
    let g = cli.global;
    fs::create_dir_all(&g.out)?;
    match cli.command {
        Command::Frft(a) => frft_cmd(&g, a),
        Command::Geometry(a) => geometry_cmd(&g, a),
        Command::Propagate(a) => propagate_cmd(&g, a),
        Command::GreenKernel(a) => green_cmd(&g, a),
        Command::Counts(a) => counts_cmd(&g, a),
        Command::Sweep(a) => sweep_cmd(&g, a),
    }
}

fn file(g: &Global, stem: &str) -> PathBuf {
    g.out.join(format!("{stem}.{}", Format::from(g.format).extension()))
}

fn emit(path: &Path, value: &Value) -> Result<()> {
    write_json(path, value)?;
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
    Ok(())
}

fn frft_cmd(g: &Global, a: FrftArgs) -> Result<()> {
    let order = FractionalOrder::from_half_pi_fraction(a.order);
    let signal = match &a.input {
        Some(p) => read_signal(p)?,
        None => {
            if a.n < 2 {
                return Err(Error::InvalidGrid(format!("n must be at least 2, got {}", a.n)));
            }
            let bound = max_pitch_sq(order, a.n).min(1.0 / a.n as f64);
            let h = if bound > 0.0 { bound.sqrt() } else { (1.0 / a.n as f64).sqrt() };
            let grid = Grid::symmetric(a.n, h)?;
            ReducedSignal::from_fn(grid, |r| Complex64::from((-std::f64::consts::PI * r * r).exp()))
        }
    };
    let out = frft_composed(&signal, order)?;
    save_reduced(&file(g, "frft"), &out, g.format.into())?;
    emit(
        &g.out.join("frft_summary.json"),
        &json!({
            "order_half_pi": a.order,
            "alpha_rad": order.radians(),
            "n": out.len(),
            "pitch": out.pitch(),
            "input_energy": signal.energy(),
            "output_energy": out.energy(),
        }),
    )
}

/// Reads a CSV with coordinate, re, im columns.
fn read_signal(path: &Path) -> Result<ReducedSignal> {
    let (header, cols) = read_columns(path)?;
    if cols.len() < 3 || cols[0].len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "{}: need coordinate, re, im columns and two rows, got header {header:?}",
            path.display()
        )));
    }
    let x = &cols[0];
    let h = x[1] - x[0];
    let n = x.len();
    let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if !(h > 0.0) || !uniform {
        return Err(Error::InvalidGrid(format!("{}: coordinates are not uniformly increasing", path.display())));
    }
    let samples = cols[1].iter().zip(&cols[2]).map(|(&re, &im)| Complex64::new(re, im)).collect();
    ReducedSignal::new(samples, h, x[0]).map(|s| {
        debug_assert_eq!(s.len(), n);
        s
    })
}

fn geometry_json(geo: &PropagationGeometry) -> Value {
    let mut v = serde_json::to_value(geo).expect("geometry serializes");
    v["rb_m"] = json!(geo.r_b_m);
    v
}

fn geometry_cmd(g: &Global, a: GeometryArgs) -> Result<()> {
    let curvature = match a.ra {
        Some(r) => Curvature::Radius(r),
        None => Curvature::Flat,
    };
    let geo = geometry_for(a.z, curvature, a.lambda)?;
    emit(&g.out.join("geometry.json"), &geometry_json(&geo))
}

fn detector_window(s: &Scenario) -> Option<(f64, f64)> {
    s.detector.map(|d| (-d.scan_span_m, d.scan_span_m))
}

fn propagate_cmd(g: &Global, a: PropagateArgs) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let aperture = scenario.aperture_field()?;
    let out = propagate_with(a.method, &aperture, scenario.z_m)?;
    save_field(&file(g, a.method.name()), &out, g.format.into())?;
    let mut meta = json!({
        "scenario": scenario,
        "method": a.method.name(),
        "input_energy": energy(&aperture),
        "output_energy": energy(&out),
    });
    if let Some(other) = a.compare_with {
        let reference = propagate_with(other, &aperture, scenario.z_m)?;
        save_field(&file(g, other.name()), &reference, g.format.into())?;
        let window = a.window.or_else(|| detector_window(&scenario));
        let metrics = compare_fields(&out, &reference, window)?;
        let report = json!({
            "method": a.method.name(),
            "compare_with": other.name(),
            "window_m": window.map(|(lo, hi)| vec![lo, hi]),
            "rel_L2": metrics.rel_l2_intensity,
            "metrics": metrics,
        });
        write_json(&g.out.join("metrics.json"), &report)?;
        meta["comparison"] = report;
    }
    emit(&g.out.join("propagate.json"), &meta)
}

fn green_cmd(g: &Global, a: GreenArgs) -> Result<()> {
    let rho: SourceDistribution = a.rho.parse()?;
    let k = 2.0 * std::f64::consts::PI / a.lambda;
    let r = kernel_shape_compare(&rho, k, a.z, a.window, a.points)?;
    let path = g.out.join("green_kernel.csv");
    let mut w = csv_writer(&path)?;
    row(&mut w, ["x", "re", "im", "phase"].map(String::from))?;
    for ((x, v), p) in r.x_m.iter().zip(&r.values).zip(&r.phase_rad) {
        row(&mut w, [x, &v.re, &v.im, p].map(|f| format!("{f:e}")))?;
    }
    w.flush()?;
    emit(
        &g.out.join("green_kernel.json"),
        &json!({
            "distribution": r.distribution,
            "z_m": r.z_m,
            "wavelength_m": a.lambda,
            "wavenumber": r.wavenumber,
            "half_width_m": a.window,
            "points": a.points,
            "phase_rms_vs_spherical_rad": r.phase_rms_vs_spherical,
            "phase_rms_vs_parabolic_rad": r.phase_rms_vs_parabolic,
            "characteristic": r.characteristic,
            "method": r.method,
        }),
    )
}

fn csv_writer(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    Ok(std::io::BufWriter::new(fs::File::create(path)?))
}

fn row<const N: usize>(w: &mut impl Write, cells: [String; N]) -> Result<()> {
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

fn counts_cmd(g: &Global, a: CountsArgs) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let run = run_counts(&scenario, g.seed, a.total)?;
    let scan = &run.scan;
    save_scan(&file(g, "counts"), scan, g.format.into())?;
    let total = a.total.or(scenario.detector.map(|d| d.total_counts));
    emit(
        &g.out.join("counts_meta.json"),
        &json!({
            "seed": scan.seed,
            "rng": scan.rng,
            "rate_scale": scan.mean_rate_scale,
            "dwell": scan.dwell_time,
            "detector_width_m": scan.detector_width,
            "expected_total": total,
            "observed_total": scan.total_counts(),
            "positions": scan.positions.len(),
            "scenario": scenario,
        }),
    )
}

fn sweep_cmd(g: &Global, a: SweepArgs) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let alphas = match a.alphas {
        Some(v) => v,
        None => scenario
            .sweep
            .as_ref()
            .map(|s| s.alphas_half_pi.clone())
            .ok_or_else(|| Error::InvalidSpec(format!("scenario {} has no sweep; pass --alphas", scenario.name)))?,
    };
    let frames = run_sweep(&scenario, &alphas)?;
    let mut summary = Vec::with_capacity(frames.len());
    for f in &frames {
        let stem = format!("sweep_a{:.4}", f.alpha_half_pi);
        let path = file(g, &stem);
        save_field(&path, &f.field, g.format.into())?;
        summary.push(json!({
            "alpha_half_pi": f.alpha_half_pi,
            "alpha_rad": f.alpha_half_pi * FRAC_PI_2,
            "file": path.file_name().map(|s| s.to_string_lossy().into_owned()),
            "geometry": geometry_json(&f.geometry),
            "energy": energy(&f.field),
        }));
    }
    emit(
        &g.out.join("sweep.json"),
        &json!({ "scenario": scenario, "frames": summary }),
    )
}
