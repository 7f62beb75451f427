use nielsen_core::operators::{Convention, GeneratorSet, Spin, Threshold};
use nielsen_core::rmt::{haar_unitary, two_point_check, verify_moments, weingarten, RmtPrediction};
use num_rational::Ratio;
use proptest::prelude::*;

fn prefix(l: usize, count: usize) -> GeneratorSet {
    GeneratorSet::new(l, Spin::HALF, Threshold::new(l, l), Convention::Prefix { count }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Σ_σ∈S_n Wg(σ) D^#cycles(σ) = 1 for n = 2, 4.
    #[test]
    fn weingarten_sum_rules(d in 4u64..300) {
        let dd = Ratio::from_integer(d as i128);
        let wg = |p: &[u32]| weingarten::<Ratio<i128>>(p, d).unwrap();
        let n = |c: i128| Ratio::from_integer(c);
        let s2 = wg(&[1, 1]) * dd.pow(2) + wg(&[2]) * dd;
        prop_assert_eq!(s2, n(1));
        let s4 = wg(&[1, 1, 1, 1]) * dd.pow(4)
            + wg(&[1, 1, 2]) * n(6) * dd.pow(3)
            + wg(&[2, 2]) * n(3) * dd.pow(2)
            + wg(&[1, 3]) * n(8) * dd.pow(2)
            + wg(&[4]) * n(6) * dd;
        prop_assert_eq!(s4, n(1));
    }

    #[test]
    fn mean_prediction_is_a_fraction(d in 2usize..512, n in 0usize..4096, easy in any::<bool>()) {
        prop_assume!(n < d * d);
        let p = RmtPrediction::new(d, n, easy);
        prop_assert!(p.mean_pred >= -1e-12 && p.mean_pred <= 1.0 + 1e-12);
    }

    #[test]
    fn haar_columns_are_orthonormal(d in 2usize..40, seed in any::<u64>()) {
        let u = haar_unitary(d, seed);
        let dev = (u.adjoint() * &u - nielsen_core::CMatrix::identity(d, d)).camax();
        prop_assert!(dev < 1e-12);
    }
}

#[test]
fn two_point_function_within_bands() {
    for d in [4, 16] {
        assert!(two_point_check(d, 4000, 3).unwrap().pass);
    }
}

#[test]
fn q_spectrum_concentrates_with_dimension() {
    // fixed N_loc / D² = 144 / 256²
    let mut variances = Vec::new();
    for (l, n) in [(6, 9), (7, 36), (8, 144)] {
        let gens = prefix(l, n);
        let r = verify_moments(&gens, 10, 11).unwrap();
        assert!(r.mean_pass, "L={l}: mean off by {} SD", r.mean_deviation_sd);
        variances.push(r.var_emp);
    }
    assert!(variances.windows(2).all(|w| w[1] < w[0]), "{variances:?}");
    // roughly 1/D per doubling
    for w in variances.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.2..=4.0).contains(&ratio), "{variances:?}");
    }
}

#[test]
fn identity_correction_shifts_the_mean() {
    let d = 64;
    let with = prefix(6, 40).with_identity_easy(true);
    let r = verify_moments(&with, 10, 5).unwrap();
    let expected = 1.0 - 40.0 / (d * d) as f64 - 1.0 / d as f64;
    assert!((r.prediction.mean_pred - expected).abs() < 1e-15);
    assert!(r.mean_pass, "{}", r.mean_deviation_sd);
}
