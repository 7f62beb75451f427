//! Closest-vector machinery on (2πZ)^D under the metric G = I + (μ-1)Q.
//!
//! All work happens in embedded coordinates y = Cx with CᵀC = G and C lower
//! triangular, so ‖x‖_G = ‖Cx‖₂. The basis is stored with the factor 2π taken
//! out: column j is C·U_j for the unimodular transform U.

mod bench;
mod cvp;
mod gso;
mod lll;

pub use bench::{cvp_bench, CvpBenchReport, CvpInstance, DEFAULT_BENCH_MU, RATIO_FRACTION, RATIO_THRESHOLD};
pub use cvp::{CvpMethod, CvpSolution, StagedSolution, DEFAULT_NODE_BUDGET, MAX_ORACLE_DIM};
pub use gso::{gram_schmidt, Gso};
pub use lll::{lll_reduce_basis, lovasz_violation, max_mu, LllReport, DEFAULT_DELTA, REORTHOGONALIZE_EVERY};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::scalar::{dot, Real};
use std::fmt::Write;

#[derive(Clone, Debug)]
pub struct LatticeContext<T> {
    d: usize,
    mu: f64,
    /// Rows of C; row i holds columns 0..=i.
    embedding: Vec<Vec<T>>,
    basis: Vec<Vec<T>>,
    transform: Vec<Vec<i64>>,
    gso: Gso<T>,
    basis_gram: Vec<Vec<T>>,
    lll: Option<LllReport>,
}

/// Lower-triangular C with CᵀC = g.
pub fn reverse_cholesky(g: &RMatrix) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch(format!("metric is {}x{}", n, g.ncols())));
    }
    let mut c = vec![vec![0.0; n]; n];
    for i in (0..n).rev() {
        let diag = g[(i, i)] - (i + 1..n).map(|k| c[k][i] * c[k][i]).sum::<f64>();
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let cii = diag.sqrt();
        c[i][i] = cii;
        for j in 0..i {
            let s = g[(i, j)] - (i + 1..n).map(|k| c[k][i] * c[k][j]).sum::<f64>();
            c[i][j] = s / cii;
        }
    }
    Ok(c.into_iter().enumerate().map(|(i, mut r)| {
        r.truncate(i + 1);
        r
    }).collect())
}

impl<T: Real> LatticeContext<T> {
    /// Lattice for G = I + (μ-1)Q.
    pub fn embed(q: &RMatrix, mu: f64) -> Result<Self> {
        if !(mu >= 1.0) || !mu.is_finite() {
            return Err(Error::InvalidPenalty(mu));
        }
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::DimensionMismatch(format!("Q is {}x{}", n, q.ncols())));
        }
        let asym = (q - q.transpose()).amax();
        if asym > 1e-9 * q.amax().max(1.0) {
            return Err(Error::NotHermitian(asym));
        }
        let g = RMatrix::identity(n, n) + q.scale(mu - 1.0);
        let mut ctx = Self::from_metric(&g)?;
        ctx.mu = mu;
        Ok(ctx)
    }

    /// Lattice for an arbitrary positive definite metric.
    pub fn from_metric(g: &RMatrix) -> Result<Self> {
        let c64 = reverse_cholesky(g)?;
        let n = c64.len();
        let embedding: Vec<Vec<T>> = c64
            .iter()
            .map(|r| r.iter().map(|&x| T::lit(x)).collect())
            .collect();
        let basis: Vec<Vec<T>> = (0..n)
            .map(|j| (0..n).map(|i| if i >= j { embedding[i][j] } else { T::zero() }).collect())
            .collect();
        let transform = (0..n).map(|j| (0..n).map(|i| i64::from(i == j)).collect()).collect();
        let gso = gram_schmidt(&basis)?;
        let mut ctx = LatticeContext {
            d: n,
            mu: f64::NAN,
            embedding,
            basis,
            transform,
            gso,
            basis_gram: Vec::new(),
            lll: None,
        };
        ctx.refresh_gram();
        Ok(ctx)
    }

    fn refresh_gram(&mut self) {
        let n = self.d;
        self.basis_gram = (0..n)
            .map(|i| (0..n).map(|j| dot(&self.basis[i], &self.basis[j])).collect())
            .collect();
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Penalty factor, NaN when built directly from a metric.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn embedding(&self) -> &[Vec<T>] {
        &self.embedding
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    pub fn transform(&self) -> &[Vec<i64>] {
        &self.transform
    }

    pub fn gso(&self) -> &Gso<T> {
        &self.gso
    }

    pub fn lll_report(&self) -> Option<LllReport> {
        self.lll
    }

    /// Recomputes the GSO of the current basis.
    pub fn gram_schmidt(&mut self) -> Result<()> {
        self.gso = gram_schmidt(&self.basis)?;
        Ok(())
    }

    pub fn lll_reduce(&mut self, delta: f64) -> Result<LllReport> {
        let cap = 200_000u64.max(50 * (self.d as u64).pow(3));
        let (gso, rep) = lll_reduce_basis(&mut self.basis, &mut self.transform, delta, cap)?;
        self.gso = gso;
        self.lll = Some(rep);
        self.refresh_gram();
        Ok(rep)
    }

    /// Cx
    pub fn apply_embedding(&self, x: &[T]) -> Vec<T> {
        self.embedding
            .iter()
            .map(|row| row.iter().zip(x).map(|(&c, &v)| c * v).sum())
            .collect()
    }

    /// ‖x‖_G
    pub fn norm(&self, x: &[T]) -> T {
        let y = self.apply_embedding(x);
        dot(&y, &y).sqrt()
    }

    /// ‖x − 2πk‖_G
    pub fn value_of(&self, x: &[T], k: &[i64]) -> T {
        let tp = T::two_pi();
        let r: Vec<T> = x.iter().zip(k).map(|(&a, &b)| a - tp * T::lit(b as f64)).collect();
        self.norm(&r)
    }

    /// ½(Σ‖b_i*‖²)^{1/2} at lattice scale 2π.
    pub fn covering_radius_bound(&self) -> T {
        T::lit(std::f64::consts::PI) * self.gso.norms_sq.iter().copied().sum::<T>().sqrt()
    }

    /// π/√3 (Σ‖b_i*‖²)^{1/2} with the 2π scale divided out.
    pub fn plateau_estimate(&self) -> T {
        T::lit(std::f64::consts::PI / 3f64.sqrt()) * self.gso.norms_sq.iter().copied().sum::<T>().sqrt()
    }

    /// det U by fraction-free elimination; None on i128 overflow.
    pub fn transform_determinant(&self) -> Option<i128> {
        integer_determinant(&self.transform)
    }

    /// index, ‖b_i*‖, ‖b_i‖ (2π scale divided out).
    pub fn gso_csv(&self) -> String {
        let mut s = String::from("index,gso_norm,basis_norm\n");
        for i in 0..self.d {
            let b = self.basis_gram[i][i].sqrt();
            let _ = writeln!(
                s,
                "{i},{:e},{:e}",
                self.gso.norms_sq[i].sqrt().to_f64().unwrap_or(f64::NAN),
                b.to_f64().unwrap_or(f64::NAN)
            );
        }
        s
    }
}

/// Q = V diag(λ) Vᵀ with λ uniform in [0, 1] and V Haar orthogonal.
pub fn random_q<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> RMatrix {
    let g = RMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut v = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            v.column_mut(j).neg_mut();
        }
    }
    let lam = RMatrix::from_diagonal(&crate::linalg::RVector::from_fn(d, |_, _| rng.random::<f64>()));
    let q = &v * lam * v.transpose();
    (&q + q.transpose()) * 0.5
}

/// Bareiss determinant of a square integer matrix (rows or columns, det is the same).
pub fn integer_determinant(m: &[Vec<i64>]) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return Some(0);
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    Some(sign * a[n - 1][n - 1])
}
