use super::gso::{gram_schmidt, Gso};
use crate::error::{Error, Result};
use crate::scalar::{axpy, Real};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DELTA: f64 = 0.99;
pub const REORTHOGONALIZE_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllReport {
    pub delta: f64,
    pub iterations: u64,
    pub swaps: u64,
    pub reorthogonalizations: u64,
    pub converged: bool,
}

/// In-place LLL on `basis` with the integer bookkeeping mirrored on `transform`
/// (column j of the current basis = original basis · transform[j]).
pub fn lll_reduce_basis<T: Real>(
    basis: &mut [Vec<T>],
    transform: &mut [Vec<i64>],
    delta: f64,
    max_iterations: u64,
) -> Result<(Gso<T>, LllReport)> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let n = basis.len();
    let mut gso = gram_schmidt(basis)?;
    let mut report = LllReport {
        delta,
        iterations: 0,
        swaps: 0,
        reorthogonalizations: 0,
        converged: true,
    };
    if n < 2 {
        return Ok((gso, report));
    }
    let half = T::lit(0.5);
    let slack = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
    let d = T::lit(delta);
    let mut k = 1;
    while k < n {
        report.iterations += 1;
        if report.iterations > max_iterations {
            report.converged = false;
            break;
        }
        gso.update_row(basis, k)?;
        for _ in 0..16 {
            let mut changed = false;
            for j in (0..k).rev() {
                let m = gso.mu[k][j];
                if m.abs() <= half + slack {
                    continue;
                }
                let r = m.round();
                let ri = r
                    .to_i64()
                    .ok_or_else(|| Error::DimensionMismatch("size reduction coefficient overflow".into()))?;
                let (head, tail) = basis.split_at_mut(k);
                axpy(-r, &head[j], &mut tail[0]);
                let (th, tt) = transform.split_at_mut(k);
                for (a, &b) in tt[0].iter_mut().zip(&th[j]) {
                    *a -= ri * b;
                }
                for l in 0..j {
                    let mjl = gso.mu[j][l];
                    gso.mu[k][l] = gso.mu[k][l] - r * mjl;
                }
                gso.mu[k][j] = m - r;
                changed = true;
            }
            if !changed {
                break;
            }
            gso.update_row(basis, k)?;
        }
        let m = gso.mu[k][k - 1];
        if gso.norms_sq[k] < (d - m * m) * gso.norms_sq[k - 1] {
            basis.swap(k, k - 1);
            transform.swap(k, k - 1);
            report.swaps += 1;
            if report.swaps.is_multiple_of(REORTHOGONALIZE_EVERY as u64) {
                gso = gram_schmidt(basis)?;
                report.reorthogonalizations += 1;
            } else if k == 1 {
                gso.update_row(basis, 0)?;
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    let gso = gram_schmidt(basis)?;
    Ok((gso, report))
}

/// Largest |mu_ij| over j < i.
pub fn max_mu<T: Real>(gso: &Gso<T>) -> T {
    gso.mu
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |a, &m| a.max(m.abs()))
}

/// Worst violation of ‖b_k*‖² ≥ (δ − mu²)‖b_{k-1}*‖², relative; ≤ 0 when the condition holds.
pub fn lovasz_violation<T: Real>(gso: &Gso<T>, delta: f64) -> T {
    let d = T::lit(delta);
    (1..gso.len())
        .map(|k| {
            let m = gso.mu[k][k - 1];
            let need = (d - m * m) * gso.norms_sq[k - 1];
            (need - gso.norms_sq[k]) / gso.norms_sq[k - 1]
        })
        .fold(T::neg_infinity(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(n: usize) -> Vec<Vec<i64>> {
        (0..n).map(|j| (0..n).map(|i| i64::from(i == j)).collect()).collect()
    }

    #[test]
    fn two_dimensional_reduction() {
        let mut b = vec![vec![1.0f64, 0.0], vec![0.999, 0.05]];
        let mut u = ident(2);
        let (g, rep) = lll_reduce_basis(&mut b, &mut u, DEFAULT_DELTA, 1000).unwrap();
        assert!(rep.converged);
        let short = b.iter().map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt()).fold(f64::INFINITY, f64::min);
        assert!(short < 0.06, "{b:?}");
        assert!(max_mu(&g) <= 0.5 + 1e-9);
        assert!(lovasz_violation(&g, DEFAULT_DELTA) <= 1e-9);
    }

    #[test]
    fn orthogonal_unchanged() {
        let mut b = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]];
        let orig = b.clone();
        let mut u = ident(3);
        lll_reduce_basis(&mut b, &mut u, DEFAULT_DELTA, 1000).unwrap();
        assert_eq!(b, orig);
        assert_eq!(u, ident(3));
    }

    #[test]
    fn bad_delta() {
        let mut b = vec![vec![1.0]];
        let mut u = ident(1);
        assert!(matches!(lll_reduce_basis(&mut b, &mut u, 0.2, 10), Err(Error::InvalidDelta(_))));
        assert!(matches!(lll_reduce_basis(&mut b, &mut u, 1.0, 10), Err(Error::InvalidDelta(_))));
    }
}
