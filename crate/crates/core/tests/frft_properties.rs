use std::f64::consts::{FRAC_PI_2, PI};

use frft_optics::field::Grid;
use frft_optics::frft::{frft_composed, frft_fast, parity, FractionalOrder, ReducedSignal};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// `exp(-π a ρ² + 2π b ρ)` and its transform of order `alpha ∈ (0, π)`:
/// `sqrt(1 - i cot α) (a - i cot α)^{-1/2} exp(iπ cot α σ² + π (b - iσ csc α)² / (a - i cot α))`.
fn chirp(a: Complex64, b: Complex64, rho: f64) -> Complex64 {
    (-PI * a * rho * rho + 2.0 * PI * b * rho).exp()
}

fn chirp_transform(a: Complex64, b: Complex64, alpha: f64, sigma: f64) -> Complex64 {
    let (s, c) = alpha.sin_cos();
    let cot = c / s;
    let i = Complex64::i();
    let big_a = a - i * cot;
    let big_b = b - i * sigma / s;
    (1.0 - i * cot).sqrt() / big_a.sqrt() * (i * PI * cot * sigma * sigma + PI * big_b * big_b / big_a).exp()
}

fn packets(grid: Grid, params: &[(f64, f64, f64, f64, f64)]) -> ReducedSignal {
    ReducedSignal::from_fn(grid, |rho| {
        params
            .iter()
            .map(|&(re, im, a, c, f)| {
                Complex64::new(re, im) * chirp(Complex64::from(a), Complex64::new(a * c, f), rho)
            })
            .sum()
    })
}

fn packet_params() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64)>> {
    prop::collection::vec(
        (-1.0..1.0f64, -1.0..1.0f64, 0.8..1.25f64, -0.8..0.8f64, -0.8..0.8f64),
        1..5,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // At the critical pitch h² = |sin α|/N the quadrature is a chirped DFT,
    // hence exactly unitary for any input.
    #[test]
    fn unitary_at_critical_pitch(
        n in prop::sample::select(vec![128usize, 512, 2048]),
        alpha in 0.06..3.08f64,
        seed in any::<u64>(),
    ) {
        let order = FractionalOrder::new(alpha);
        let h = (order.sin().abs() / n as f64).sqrt();
        let grid = Grid::symmetric(n, h).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
            .collect();
        let sig = ReducedSignal::on_grid(x, grid).unwrap();
        let out = frft_fast(&sig, order).unwrap();
        prop_assert!((out.energy() / sig.energy() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unitary_for_smooth_signals_on_fine_grids(
        n in prop::sample::select(vec![128usize, 512, 2048]),
        alpha in 0.3..2.8f64,
        p in packet_params(),
    ) {
        // A window of 10 holds every packet; it is alias free once
        // |sin α| >= N h² = 100/N.
        let h = 10.0 / n as f64;
        prop_assume!(alpha.sin() >= n as f64 * h * h);
        let grid = Grid::symmetric(n, h).unwrap();
        let sig = packets(grid, &p);
        let out = frft_fast(&sig, FractionalOrder::new(alpha)).unwrap();
        prop_assert!((out.energy() / sig.energy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn additive(
        a1 in 0.3..1.2f64,
        a2 in 0.3..1.2f64,
        p in packet_params(),
    ) {
        let n = 1024;
        let h = (0.3f64.sin() / n as f64).sqrt();
        let grid = Grid::symmetric(n, h).unwrap();
        let sig = packets(grid, &p);
        let two = frft_fast(&frft_fast(&sig, FractionalOrder::new(a1)).unwrap(), FractionalOrder::new(a2)).unwrap();
        let one = frft_fast(&sig, FractionalOrder::new(a1 + a2)).unwrap();
        prop_assert!(rel_l2(two.samples(), one.samples()) < 1e-4);
    }

    #[test]
    fn matches_closed_form_for_gaussian_chirps(
        alpha in 0.1..3.0f64,
        a_re in 0.8..1.25f64,
        a_im in -0.5..0.5f64,
        b_re in -0.6..0.6f64,
        b_im in -0.6..0.6f64,
    ) {
        let n = 1024;
        let order = FractionalOrder::new(alpha);
        let h = (order.sin().abs().min(0.5) / n as f64).sqrt();
        let grid = Grid::symmetric(n, h).unwrap();
        let (a, b) = (Complex64::new(a_re, a_im), Complex64::new(b_re, b_im));
        let sig = ReducedSignal::from_fn(grid, |r| chirp(a, b, r));
        let got = frft_composed(&sig, order).unwrap();
        let want: Vec<Complex64> = (0..n).map(|m| chirp_transform(a, b, alpha, grid.coord(m))).collect();
        prop_assert!(rel_l2(got.samples(), &want) < 1e-6, "{}", rel_l2(got.samples(), &want));
    }
}

#[test]
fn near_singular_orders_match_closed_form() {
    let n = 1024;
    let grid = Grid::symmetric(n, 0.9 / (n as f64).sqrt()).unwrap();
    let (a, b) = (Complex64::new(1.0, 0.2), Complex64::new(0.3, -0.4));
    let sig = ReducedSignal::from_fn(grid, |r| chirp(a, b, r));
    for alpha in [0.02, 0.04, PI - 0.03] {
        let order = FractionalOrder::new(alpha);
        assert!(order.is_near_singular());
        let got = frft_composed(&sig, order).unwrap();
        let want: Vec<Complex64> = (0..n).map(|m| chirp_transform(a, b, alpha, grid.coord(m))).collect();
        let e = rel_l2(got.samples(), &want);
        assert!(e < 1e-6, "alpha {alpha}: {e}");
    }
}

#[test]
fn two_quarter_turns_are_parity() {
    let n = 512;
    let grid = Grid::centered(n, 1.0 / (n as f64).sqrt()).unwrap();
    let sig = packets(grid, &[(1.0, 0.5, 1.0, 0.6, -0.3), (0.2, -0.7, 0.9, -0.4, 0.5)]);
    let q = FractionalOrder::new(FRAC_PI_2);
    let twice = frft_fast(&frft_fast(&sig, q).unwrap(), q).unwrap();
    assert!(rel_l2(twice.samples(), parity(&sig).samples()) < 1e-12);
}

#[test]
fn full_turn_is_identity() {
    let grid = Grid::symmetric(256, 0.06).unwrap();
    let sig = packets(grid, &[(1.0, 0.0, 1.0, 0.2, 0.1)]);
    let out = frft_composed(&sig, FractionalOrder::new(2.0 * PI)).unwrap();
    assert_eq!(out.samples(), sig.samples());
}
