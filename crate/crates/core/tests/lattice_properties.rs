use nielsen_core::lattice::{lovasz_violation, max_mu, random_q, LatticeContext, DEFAULT_DELTA};
use nielsen_core::{Lattice, Lattice32, RMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_lattice(d: usize, mu: f64, seed: u64) -> Lattice {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Lattice::embed(&random_q(d, &mut rng), mu).unwrap()
}

fn target(d: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

fn gso_volume(ctx: &Lattice) -> f64 {
    ctx.gso().norms_sq.iter().map(|n| n.sqrt()).product()
}

/// √det G by an independent Cholesky.
fn metric_volume(q: &RMatrix, mu: f64) -> f64 {
    let g = RMatrix::identity(q.nrows(), q.nrows()) + q * (mu - 1.0);
    g.cholesky().unwrap().l().diagonal().iter().product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lll_is_unimodular_and_satisfies_lovasz(d in 2usize..=12, mu in 1.0f64..128.0, seed in any::<u64>()) {
        let mut ctx = random_lattice(d, mu, seed);
        let report = ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        prop_assert!(report.converged);
        prop_assert_eq!(ctx.transform_determinant().map(i128::abs), Some(1));
        prop_assert!(lovasz_violation(ctx.gso(), DEFAULT_DELTA) <= 1e-9);
        prop_assert!(max_mu(ctx.gso()) <= 0.5 + 1e-9);
        prop_assert!(ctx.gso().norms_sq.iter().all(|&n| n > 0.0));
    }

    #[test]
    fn gso_volume_is_the_determinant(d in 1usize..=10, mu in 1.0f64..64.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(d, &mut rng);
        let vol = metric_volume(&q, mu);
        let mut ctx = Lattice::embed(&q, mu).unwrap();
        prop_assert!((gso_volume(&ctx) - vol).abs() <= 1e-9 * vol);
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        prop_assert!((gso_volume(&ctx) - vol).abs() <= 1e-8 * vol);
    }

    #[test]
    fn reduction_tightens_the_covering_bound(mu in 2.0f64..64.0, seed in any::<u64>()) {
        let mut ctx = random_lattice(16, mu, seed);
        let before = ctx.covering_radius_bound();
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        prop_assert!(ctx.covering_radius_bound() <= before * (1.0 + 1e-12));
    }

    #[test]
    fn staged_solutions_are_sandwiched(d in 2usize..=6, mu in 1.0f64..32.0, seed in any::<u64>()) {
        let mut ctx = random_lattice(d, mu, seed);
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        let x = target(d, seed, 60.0);
        let s = ctx.solve_staged(&x, true).unwrap();
        let brute = s.brute.as_ref().unwrap();
        let eps = 1e-9 * (1.0 + s.rounding.value);
        prop_assert!(brute.value >= 0.0);
        prop_assert!(s.rounding.value + eps >= s.babai.value);
        prop_assert!(s.babai.value + eps >= s.greedy.value);
        prop_assert!(s.greedy.value + eps >= brute.value);
        // reported values match the integer vectors
        for sol in [&s.rounding, &s.babai, &s.greedy, brute] {
            prop_assert!((ctx.value_of(&x, &sol.k) - sol.value).abs() <= 1e-9 * (1.0 + sol.value));
        }
        // Babai is never worse than the 2^(D/2) guarantee
        prop_assert!(s.babai.value <= 2f64.powf(d as f64 / 2.0) * brute.value + eps);
    }

    #[test]
    fn greedy_is_idempotent(d in 2usize..=8, seed in any::<u64>()) {
        let mut ctx = random_lattice(d, 16.0, seed);
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        let x = target(d, seed, 40.0);
        let g = ctx.greedy_refine(&x, &ctx.babai_nearest_plane(&x));
        let again = ctx.greedy_refine(&x, &g);
        prop_assert_eq!(&again.k, &g.k);
    }

    #[test]
    fn lattice_points_have_zero_distance(d in 2usize..=8, seed in any::<u64>()) {
        let mut ctx = random_lattice(d, 8.0, seed);
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k: Vec<i64> = (0..d).map(|_| rng.random_range(-20..=20)).collect();
        let x: Vec<f64> = k.iter().map(|&v| 2.0 * PI * v as f64).collect();
        let s = ctx.babai_nearest_plane(&x);
        prop_assert_eq!(&s.k, &k);
        prop_assert!(s.value < 1e-9);
    }

    #[test]
    fn euclidean_babai_rounds(d in 1usize..=8, seed in any::<u64>()) {
        let ctx = Lattice::embed(&RMatrix::zeros(d, d), 3.0).unwrap();
        let x = target(d, seed, 100.0);
        let s = ctx.babai_nearest_plane(&x);
        let expected: Vec<i64> = x.iter().map(|v| (v / (2.0 * PI)).round() as i64).collect();
        prop_assert_eq!(s.k, expected);
    }
}

/// Random D = 6 instances at μ = D: Babai no worse than coordinatewise rounding in ≥ 95%.
#[test]
fn babai_beats_rounding_in_most_trials() {
    let trials = 4000;
    let mut not_worse = 0;
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let mut ctx = Lattice::embed(&random_q(6, &mut rng), 6.0).unwrap();
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-50.0..50.0)).collect();
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        if ctx.babai_nearest_plane(&x).value <= ctx.rounding(&x).value + 1e-12 {
            not_worse += 1;
        }
    }
    assert!(not_worse as f64 >= 0.95 * trials as f64, "{not_worse}/{trials}");
}

#[test]
fn embedding_examples() {
    let d = 6;
    let euclid = Lattice::embed(&RMatrix::zeros(d, d), 40.0).unwrap();
    assert!(euclid.gso().norms_sq.iter().all(|&n| (n - 1.0).abs() < 1e-14));
    assert!((euclid.plateau_estimate() - PI * (d as f64 / 3.0).sqrt()).abs() < 1e-12);
    let four = Lattice::embed(&RMatrix::zeros(4, 4), 1.0).unwrap();
    assert!((four.covering_radius_bound() - 2.0 * PI).abs() < 1e-12);
    let one = Lattice::embed(&RMatrix::zeros(1, 1), 1.0).unwrap();
    assert!((one.covering_radius_bound() - PI).abs() < 1e-12);

    let mu = d as f64;
    let scaled = Lattice::embed(&RMatrix::identity(d, d), mu).unwrap();
    assert!(scaled.gso().norms_sq.iter().all(|&n| (n - mu).abs() < 1e-12));
    assert!((scaled.plateau_estimate() - PI * (d as f64 * mu / 3.0).sqrt()).abs() < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = random_q(d, &mut rng);
    assert!(Lattice::embed(&q, 0.5).is_err());
    // μ = 1 ignores Q entirely
    let flat = Lattice::embed(&q, 1.0).unwrap();
    let x = target(d, 3, 30.0);
    assert!((flat.bounded_value(&x) - euclid.bounded_value(&x)).abs() < 1e-12);
}

#[test]
fn concentrated_spectrum_bridges_the_estimators() {
    let d = 48;
    let mu = d as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for lambda in [0.3, 0.6, 0.95] {
        let o = random_q(d, &mut rng).symmetric_eigen().eigenvectors;
        let spread: Vec<f64> = (0..d).map(|_| lambda + rng.random_range(-0.04..0.04)).collect();
        let var = spread.iter().map(|v| (v - lambda).powi(2)).sum::<f64>() / d as f64;
        assert!(var < 1e-3);
        let mean = spread.iter().sum::<f64>() / d as f64;
        let q = &o * RMatrix::from_diagonal(&nalgebra::DVector::from_vec(spread)) * o.transpose();
        let mut ctx = Lattice::embed(&q, mu).unwrap();
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        let est = PI * (d as f64 * mu * mean / 3.0).sqrt();
        let rel = (ctx.plateau_estimate() - est).abs() / est;
        assert!(rel < 0.05, "lambda {lambda}: {rel}");
    }
}

#[test]
fn single_precision_context_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let q = random_q(5, &mut rng);
    let mut a = Lattice::embed(&q, 8.0).unwrap();
    let mut b = Lattice32::embed(&q, 8.0).unwrap();
    a.lll_reduce(DEFAULT_DELTA).unwrap();
    b.lll_reduce(DEFAULT_DELTA).unwrap();
    let x = target(5, 1, 20.0);
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let va = a.solve_staged(&x, true).unwrap().best().value;
    let vb = b.solve_staged(&x32, true).unwrap().best().value;
    assert!((va - vb as f64).abs() < 1e-3 * va);
    assert_eq!(b.transform_determinant().map(i128::abs), Some(1));
    let _: &LatticeContext<f32> = &b;
}
