//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p frft-optics --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use frft_optics::counting::{chi_square_fit, ks_distance};
use frft_optics::field::{energy, render_on, Grid, SampledField, SourceSpec};
use frft_optics::frft::{frft_fast, frft_kernel, frft_reference, FractionalOrder, ReducedSignal};
use frft_optics::geometry::geometry_from_z;
use frft_optics::green::{generalized_g, sifting_check, spherical_g, Point3, Sign, SourceDistribution, TestField};
use frft_optics::io::{read_columns, save_field, Format};
use frft_optics::oscillator::{harmonic_kernel, propagate_q, q_to_rho_scale, HBAR};
use frft_optics::propagate::{
    compare_fields, fraunhofer, fresnel_direct, fresnel_via_frft, local_maxima, local_minima,
    rayleigh_sommerfeld_oracle, FieldMetrics,
};
use frft_optics::scenario::{paper_slit, run_counts, run_sweep, young};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::FftPlanner;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(ok: bool, detail: &mut Vec<String>, line: String) -> bool {
    detail.push(format!("{}{}", if ok { "" } else { "!" }, line));
    ok
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Sum of Gaussian packets `c exp(-π a (ρ - r)² + 2πi f ρ)` with random
/// complex weights, centres and frequencies.
fn random_packets(rng: &mut ChaCha20Rng, grid: Grid) -> ReducedSignal {
    let packets: Vec<(Complex64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                rng.random_range(0.8..1.25),
                rng.random_range(-0.8..0.8),
                rng.random_range(-0.8..0.8),
            )
        })
        .collect();
    ReducedSignal::from_fn(grid, |rho| {
        packets
            .iter()
            .map(|&(c, a, r, f)| c * Complex64::from_polar((-PI * a * (rho - r).powi(2)).exp(), 2.0 * PI * f * rho))
            .sum()
    })
}

fn criterion_1() -> Outcome {
    let mut d = Vec::new();
    let mut ok = true;
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let alphas = [0.3, 0.7, 1.0, 1.3, FRAC_PI_2];
    let n = 512;
    // Fine enough for the smallest additivity sub-order 0.4 * 0.3.
    let h = ((0.4f64 * 0.3).sin() / n as f64).sqrt();
    let grid = Grid::symmetric(n, h).unwrap();
    let (mut unit, mut add) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let f = random_packets(&mut rng, grid);
        for &a in &alphas {
            let fa = frft_fast(&f, FractionalOrder::new(a)).unwrap();
            unit = unit.max((fa.energy() / f.energy() - 1.0).abs());
            let fb = frft_fast(&f, FractionalOrder::new(0.6 * a)).unwrap();
            let fab = frft_fast(&fb, FractionalOrder::new(0.4 * a)).unwrap();
            add = add.max(rel_l2(fab.samples(), fa.samples()));
        }
    }
    ok &= check(unit <= 1e-6, &mut d, format!("unitarity {unit:.2e}"));
    ok &= check(add <= 1e-4, &mut d, format!("additivity {add:.2e}"));

    let dft_grid = Grid::centered(n, 1.0 / (n as f64).sqrt()).unwrap();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut dft_err = 0.0f64;
    for _ in 0..20 {
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let sig = ReducedSignal::on_grid(x.clone(), dft_grid).unwrap();
        let got = frft_fast(&sig, FractionalOrder::new(FRAC_PI_2)).unwrap();
        // Centred unitary DFT: fftshift(fft(ifftshift(x))) / sqrt(N).
        let mut buf: Vec<Complex64> = (0..n).map(|j| x[(j + n / 2) % n]).collect();
        fft.process(&mut buf);
        let want: Vec<Complex64> = (0..n).map(|m| buf[(m + n / 2) % n] / (n as f64).sqrt()).collect();
        dft_err = dft_err.max(rel_l2(got.samples(), &want));
    }
    ok &= check(dft_err <= 1e-10, &mut d, format!("quarter order vs DFT {dft_err:.2e}"));

    let n2 = 256;
    let mut fr = 0.0f64;
    for &a in &alphas {
        let alpha = FractionalOrder::new(a);
        let g = Grid::symmetric(n2, (alpha.sin() / n2 as f64).sqrt()).unwrap();
        for _ in 0..4 {
            let x: Vec<Complex64> = (0..n2)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let sig = ReducedSignal::on_grid(x, g).unwrap();
            let fast = frft_fast(&sig, alpha).unwrap();
            let slow = frft_reference(&sig, alpha).unwrap();
            fr = fr.max(rel_l2(fast.samples(), slow.samples()));
        }
    }
    ok &= check(fr <= 1e-8, &mut d, format!("fast vs reference {fr:.2e}"));
    Outcome { pass: ok, detail: d.join(", ") }
}

fn criterion_2() -> Outcome {
    let mut d = Vec::new();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let lambda = 632e-9;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mu: f64 = rng.random_range(0.01..1.99);
        let r_a = rng.random_range(0.1..10.0);
        let g = geometry_from_z(mu * r_a, r_a, lambda).unwrap();
        let (s, c) = g.alpha_rad.sin_cos();
        let e = g.epsilon;
        let res = [
            g.mu - g.z_m / g.r_a_m,
            s * s - mu * mu / (mu * mu + e * e * (1.0 - mu).powi(2)),
            c + e * s - 1.0,
            s - mu / e,
            e * e - mu / (2.0 - mu),
            g.r_b_m + g.r_a_m,
        ];
        worst = worst.max(res.iter().fold(0.0f64, |m, r| m.max(r.abs())));
    }
    let mut ok = check(worst <= 1e-10, &mut d, format!("1000 random mu, worst residual {worst:.2e}"));
    let g = geometry_from_z(2.0, 3.0, lambda).unwrap();
    let closure = (g.alpha_rad.cos() + g.epsilon * g.alpha_rad.sin() - 1.0).abs();
    ok &= check(
        (g.epsilon - 0.5f64.sqrt()).abs() <= 1e-12 && (g.alpha_rad - 1.23096).abs() < 5e-6 && closure <= 1e-12,
        &mut d,
        format!("mu=2/3: epsilon {:.5}, alpha {:.5}, closure {closure:.1e}", g.epsilon, g.alpha_rad),
    );
    Outcome { pass: ok, detail: d.join(", ") }
}

fn metrics_line(name: &str, m: &FieldMetrics) -> String {
    format!(
        "{name} relL2 {:.2e} max-offset {:.2} samples",
        m.rel_l2_intensity, m.max_extremum_offset_samples
    )
}

fn criterion_3() -> (Outcome, Duration) {
    let mut d = Vec::new();
    let s = paper_slit();
    let aperture = s.aperture_field().unwrap();
    let direct = fresnel_direct(&aperture, s.z_m).unwrap();
    let via = fresnel_via_frft(&aperture, s.z_m, s.z_m).unwrap();
    let t = Instant::now();
    let rs = rayleigh_sommerfeld_oracle(&aperture, s.z_m).unwrap();
    let rs_time = t.elapsed();
    let w = Some((-5e-3, 5e-3));
    let dv = compare_fields(&via, &direct, w).unwrap();
    let dr = compare_fields(&direct, &rs, w).unwrap();
    let vr = compare_fields(&via, &rs, w).unwrap();
    let mut ok = check(
        dv.rel_l2_intensity <= 1e-3 && dv.max_extremum_offset_samples <= 1.0,
        &mut d,
        metrics_line("frft/direct", &dv),
    );
    ok &= check(
        dr.rel_l2_intensity <= 1e-2 && dr.max_extremum_offset_samples <= 1.0,
        &mut d,
        metrics_line("direct/rs", &dr),
    );
    ok &= check(
        vr.rel_l2_intensity <= 1e-2 && vr.max_extremum_offset_samples <= 1.0,
        &mut d,
        metrics_line("frft/rs", &vr),
    );
    ok &= check(rs_time.as_secs_f64() <= 60.0, &mut d, format!("oracle N={} in {:.2} s", aperture.n(), rs_time.as_secs_f64()));
    (Outcome { pass: ok, detail: d.join(", ") }, rs_time)
}

/// Position of the intensity minimum nearest `x`, searched over half a lobe.
fn zero_near(field: &SampledField, x: f64, half: f64) -> Option<f64> {
    let i = field.intensity();
    local_minima(&i)
        .into_iter()
        .map(|j| field.coord(j))
        .filter(|p| (p - x).abs() <= half)
        .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
}

fn criterion_4() -> Outcome {
    let mut d = Vec::new();
    let (lambda, w, z) = (632e-9, 100e-6, 1.0);
    let (n, dx) = (32768, 2e-6);
    // Offset by half a pitch so exactly w/dx samples lie inside the slit.
    let grid = Grid::new(n, dx, -((n / 2) as f64) * dx + 0.5 * dx).unwrap();
    let f = render_on(&SourceSpec::rect_slit(w), grid, lambda).unwrap();
    let nf = (0.5 * w).powi(2) / (lambda * z);
    let mut ok = check(nf <= 0.01, &mut d, format!("N_F {nf:.4}"));
    let spacing = lambda * z / w;
    let methods = [
        ("fraunhofer", fraunhofer(&f, z).unwrap()),
        ("fresnel", fresnel_direct(&f, z).unwrap()),
        ("frft", fresnel_via_frft(&f, z, z).unwrap()),
        ("rs", rayleigh_sommerfeld_oracle(&f, z).unwrap()),
    ];
    for (name, out) in &methods {
        let mut worst = 0.0f64;
        for m in 1..=3 {
            for sign in [-1.0, 1.0] {
                let x = sign * m as f64 * spacing;
                let off = zero_near(out, x, 0.5 * spacing).map_or(f64::INFINITY, |p| (p - x).abs());
                worst = worst.max(off / out.dx());
            }
        }
        ok &= check(worst <= 1.0, &mut d, format!("{name} {worst:.2} samples"));
    }
    Outcome { pass: ok, detail: d.join(", ") }
}

fn criterion_5() -> Outcome {
    let mut d = Vec::new();
    let omega = 2.0 * PI * 299_792_458.0 / 632e-9;
    let c = q_to_rho_scale(omega, HBAR);
    let n = 512;
    // Smallest regular order used below is 0.2π (a tenth of a period).
    let h_rho = ((0.2 * PI).sin() / n as f64).sqrt();
    let qgrid = Grid::symmetric(n, h_rho / c).unwrap();
    let ground = ReducedSignal::from_fn(qgrid, |q| Complex64::new((-omega * q * q / (2.0 * HBAR)).exp(), 0.0));
    let period = 2.0 * PI / omega;
    let intensity = |s: &ReducedSignal| -> Vec<Complex64> {
        s.samples().iter().map(|u| Complex64::new(u.norm_sqr(), 0.0)).collect()
    };
    let i0 = intensity(&ground);
    let mut inv = 0.0f64;
    for frac in [0.1, 0.25, 0.37, 0.5, 0.9] {
        let out = propagate_q(&ground, omega, frac * period, HBAR).unwrap();
        inv = inv.max(rel_l2(&intensity(&out), &i0));
    }
    let mut ok = check(inv <= 1e-6, &mut d, format!("ground state {inv:.2e}"));

    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let rho_grid = Grid::symmetric(n, h_rho).unwrap();
    let packet = random_packets(&mut rng, rho_grid);
    let psi = ReducedSignal::on_grid(packet.samples().to_vec(), qgrid).unwrap();
    let full = propagate_q(&psi, omega, period, HBAR).unwrap();
    let mut stepped = psi.clone();
    for _ in 0..8 {
        stepped = propagate_q(&stepped, omega, period / 8.0, HBAR).unwrap();
    }
    let ip = intensity(&psi);
    let r1 = rel_l2(&intensity(&full), &ip);
    let r8 = rel_l2(&intensity(&stepped), &ip);
    ok &= check(r1 <= 1e-6 && r8 <= 1e-6, &mut d, format!("revival {r1:.1e}, in 8 steps {r8:.2e}"));

    let (w, t) = (omega, 0.37 * period);
    let alpha = FractionalOrder::new(w * t);
    let mut first: Option<Complex64> = None;
    let mut spread = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let (rho, sigma) = (-2.0 + 0.4 * i as f64, -1.7 + 0.35 * j as f64);
            let ratio = harmonic_kernel(rho / c, sigma / c, w, t, HBAR).unwrap() / frft_kernel(rho, sigma, alpha);
            let r0 = *first.get_or_insert(ratio);
            spread = spread.max((ratio - r0).norm() / r0.norm());
        }
    }
    ok &= check(spread <= 1e-12, &mut d, format!("kernel ratio spread {spread:.1e}"));
    Outcome { pass: ok, detail: d.join(", ") }
}

/// Sub-sample extremum position by a parabola through three samples.
fn refine(i: &[f64], j: usize) -> f64 {
    let (a, b, c) = (i[j - 1], i[j], i[j + 1]);
    j as f64 + 0.5 * (a - c) / (a - 2.0 * b + c)
}

fn criterion_6() -> Outcome {
    let mut d = Vec::new();
    let s = young();
    let alphas = s.sweep.clone().unwrap().alphas_half_pi;
    let frames = run_sweep(&s, &alphas).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut energies = Vec::new();
    for fr in &frames {
        let path = dir.path().join(format!("young_alpha_{:.2}.csv", fr.alpha_half_pi));
        save_field(&path, &fr.field, Format::Csv).unwrap();
        let (_, cols) = read_columns(&path).unwrap();
        let dx = cols[0][1] - cols[0][0];
        energies.push(cols[3].iter().sum::<f64>() * dx);
    }
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    let e0 = energy(&s.aperture_field().unwrap());
    let spread = energies.iter().map(|e| (e / e0 - 1.0).abs()).fold(0.0, f64::max);
    let mut ok = check(files == 5 && spread <= 1e-6, &mut d, format!("{files} CSVs, energy spread {spread:.1e}"));

    let last = frames.iter().find(|f| f.alpha_half_pi == 1.0).unwrap();
    let sigma = last.sigma();
    let i = last.field.intensity();
    let peak = i.iter().cloned().fold(0.0, f64::max);
    // Intensity is envelope * cos²(π Δρ σ): the zeros sit exactly on the
    // fringe lattice, while maxima are pulled inward by the envelope.
    let maxima: Vec<usize> = local_maxima(&i).into_iter().filter(|&j| i[j] >= 1e-3 * peak).collect();
    let (j_lo, j_hi) = (maxima[0], maxima[maxima.len() - 1]);
    let minima: Vec<usize> = local_minima(&i).into_iter().filter(|&j| j > j_lo && j < j_hi).collect();
    let dsig = sigma[1] - sigma[0];
    let pos: Vec<f64> = minima.iter().map(|&j| sigma[0] + refine(&i, j) * dsig).collect();
    let period = (pos[pos.len() - 1] - pos[0]) / (pos.len() - 1) as f64;
    let delta_rho = 4e-3 / last.geometry.scale_m;
    let err = (period * delta_rho - 1.0).abs();
    ok &= check(minima.len() >= 3 && err <= 0.01, &mut d, format!("period error {:.3}% over {} zeros", 100.0 * err, minima.len()));

    let centre = maxima
        .iter()
        .copied()
        .min_by(|&a, &b| sigma[a].abs().total_cmp(&sigma[b].abs()))
        .unwrap();
    let half = (0.5 / (delta_rho * dsig)).round() as usize;
    let lo = i[centre - half - 2..=centre - half + 2].iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = i[centre + half - 2..=centre + half + 2].iter().cloned().fold(f64::INFINITY, f64::min);
    let imin = lo.max(hi);
    let vis = (i[centre] - imin) / (i[centre] + imin);
    ok &= check(vis >= 0.95, &mut d, format!("visibility {vis:.4}"));
    Outcome { pass: ok, detail: d.join(", ") }
}

fn criterion_7() -> Outcome {
    let mut d = Vec::new();
    let lambda = 632e-9;
    let k = 2.0 * PI / lambda;
    let r = Point3::new(3e-6, -2e-6, 20e-6);
    let rp = Point3::new(-1e-6, 1e-6, 4e-6);
    let a = generalized_g(&SourceDistribution::Dirac, r, rp, k, Sign::Plus).unwrap();
    let b = spherical_g(r, rp, k, Sign::Plus).unwrap();
    let mut ok = check(a == b, &mut d, "dirac exact".into());

    let g = SourceDistribution::Gaussian { sigma: lambda / 2.0 };
    let on = Point3::new(2e-6, 1e-6, 0.0);
    let src = Point3::new(-3e-6, 0.0, 12e-6);
    let minus = generalized_g(&g, on, src, k, Sign::Minus).unwrap();
    let plus = generalized_g(&g, on, src, k, Sign::Plus).unwrap();
    let ratio = minus.norm() / plus.norm();
    ok &= check(ratio <= 1e-8, &mut d, format!("G- on screen {ratio:.1e}"));

    let pw = TestField::plane_wave(1.0, [0.6 * k, 0.0, 0.8 * k]);
    let got = sifting_check(&g, &pw, r).unwrap();
    let expect = 1.0 - (-(k * lambda / 2.0).powi(2) / 2.0).exp();
    let dev = (got - expect).abs();
    ok &= check(dev <= 1e-8, &mut d, format!("plane-wave sifting {dev:.1e}"));

    let errs: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|div| {
            let rho = SourceDistribution::Gaussian { sigma: lambda / div };
            (generalized_g(&rho, r, rp, k, Sign::Plus).unwrap() - b).norm() / b.norm()
        })
        .collect();
    ok &= check(
        errs[0] > errs[1] && errs[1] > errs[2],
        &mut d,
        format!("sigma halving {:.2e} > {:.2e} > {:.2e}", errs[0], errs[1], errs[2]),
    );
    Outcome { pass: ok, detail: d.join(", ") }
}

fn criterion_8() -> Outcome {
    let mut d = Vec::new();
    let s = paper_slit();
    let a = run_counts(&s, 42, Some(1e5)).unwrap();
    let b = run_counts(&s, 42, Some(1e5)).unwrap();
    let ks = ks_distance(&a.scan.counts, &a.window_integrals).unwrap();
    let chi = chi_square_fit(&a.scan.counts, &a.window_integrals).unwrap();
    let mut ok = check(ks <= 0.01, &mut d, format!("KS {ks:.4} over {} counts", a.scan.total_counts()));
    ok &= check(
        (0.5..=1.6).contains(&chi.per_dof()),
        &mut d,
        format!("chi2/dof {:.3} ({} dof)", chi.per_dof(), chi.dof),
    );
    ok &= check(a.scan == b.scan, &mut d, "same seed, identical scan".into());
    Outcome { pass: ok, detail: d.join(", ") }
}

fn main() -> ExitCode {
    type Run = fn() -> Outcome;
    let criteria: [(u32, &str, f64, Run); 8] = [
        (1, "frft algebra", 5.0, criterion_1),
        (2, "geometry identities", f64::INFINITY, criterion_2),
        (3, "propagator triangle", f64::INFINITY, || criterion_3().0),
        (4, "fraunhofer zeros", f64::INFINITY, criterion_4),
        (5, "oscillator propagator", f64::INFINITY, criterion_5),
        (6, "young sweep", f64::INFINITY, criterion_6),
        (7, "green's functions", 30.0, criterion_7),
        (8, "counting statistics", 10.0, criterion_8),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        let pass = out.pass && secs <= budget;
        if !pass {
            failed += 1;
        }
        let limit = if budget.is_finite() { format!(" / {budget:.0} s") } else { String::new() };
        println!(
            "{} criterion {id} {name} ({secs:.2} s{limit}): {}",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
