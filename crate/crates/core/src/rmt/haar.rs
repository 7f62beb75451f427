use crate::linalg::CMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn haar_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary_with(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Uniform unit vector in C^d, distributed as any single column of a Haar unitary.
pub fn haar_vector_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Complex Ginibre matrix orthonormalized by QR, with R's diagonal phases absorbed.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_with_unit_columns() {
        let u = haar_unitary(16, 3);
        assert!(crate::linalg::unitarity_deviation(&u) < 1e-12);
        for c in u.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        let one = haar_unitary(1, 5);
        assert!((one[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = haar_unitary_with(4, &mut trial_rng(1, 2));
        let b = haar_unitary_with(4, &mut trial_rng(1, 2));
        let c = haar_unitary_with(4, &mut trial_rng(1, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
