//! Q-matrix from an eigenbasis and an easy/hard generator split.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix, RMatrix, RVector};
use crate::operators::{GeneratorDescriptor, GeneratorSet};
use crate::spectral::SpectralDecomposition;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub basis_hash: String,
    pub generators_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug)]
pub struct QMatrix {
    matrix: RMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: RMatrix,
    kernel_tol: f64,
    n_loc: usize,
    pub provenance: Provenance,
}

impl QMatrix {
    pub fn from_matrix(matrix: RMatrix, n_loc: usize, kernel_tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Q must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(&matrix);
        Ok(QMatrix {
            matrix,
            eigenvalues,
            eigenvectors,
            kernel_tol,
            n_loc,
            provenance: Provenance::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_kernel_tol(mut self, tol: f64) -> Self {
        self.kernel_tol = tol;
        self
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn n_loc(&self) -> usize {
        self.n_loc
    }

    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &RMatrix {
        &self.eigenvectors
    }

    pub fn kernel_dim(&self) -> usize {
        self.eigenvalues.iter().take_while(|&&l| l < self.kernel_tol).count()
    }

    /// Orthonormal null vectors as columns.
    pub fn kernel(&self) -> RMatrix {
        self.eigenvectors.columns(0, self.kernel_dim()).into_owned()
    }

    pub fn moments(&self) -> Moments {
        q_moments(&self.matrix)
    }

    /// Counts over `bins` uniform bins on [0, 1]; values outside are clamped.
    pub fn histogram(&self, bins: usize) -> Vec<usize> {
        let mut h = vec![0; bins];
        for &l in &self.eigenvalues {
            let b = ((l * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            h[b] += 1;
        }
        h
    }

    /// The quadratic form cᵀ Q c.
    pub fn quadratic_form(&self, c: &RVector) -> f64 {
        c.dot(&(&self.matrix * c))
    }
}

/// Trace moments: λ̄ = Tr Q / D and Var = Tr Q² / D - λ̄².
pub fn q_moments(q: &RMatrix) -> Moments {
    let d = q.nrows() as f64;
    let mean = q.trace() / d;
    let variance = q.iter().map(|x| x * x).sum::<f64>() / d - mean * mean;
    Moments { mean, variance }
}

/// M_{αn} = ⟨n|T_α|n⟩ for the easy generators (rows) and basis columns of `vectors`.
pub fn diagonal_expectations(vectors: &CMatrix, gens: &GeneratorSet) -> Result<RMatrix> {
    let d = gens.dim();
    if vectors.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, generator set acts on dimension {d}",
            vectors.nrows()
        )));
    }
    let ops = gens.easy_operators();
    let n = vectors.ncols();
    let rows: Vec<Vec<f64>> = ops
        .par_iter()
        .map(|op| {
            (0..n)
                .map(|c| op.expectation(vectors.column(c).as_slice()).re)
                .collect()
        })
        .collect();
    Ok(RMatrix::from_fn(ops.len(), n, |a, c| rows[a][c]))
}

pub fn build_q_from_vectors(vectors: &CMatrix, gens: &GeneratorSet, kernel_tol: f64) -> Result<QMatrix> {
    let m = diagonal_expectations(vectors, gens)?;
    let d = vectors.ncols();
    let q = RMatrix::identity(d, d) - m.tr_mul(&m);
    QMatrix::from_matrix(q, gens.n_loc(), kernel_tol)
}

pub fn build_q(basis: &SpectralDecomposition, gens: &GeneratorSet) -> Result<QMatrix> {
    build_q_from_vectors(&basis.vectors, gens, DEFAULT_KERNEL_TOL)
}

pub fn q_kernel(q: &QMatrix, tol: f64) -> RMatrix {
    let k = q.eigenvalues.iter().take_while(|&&l| l < tol).count();
    q.eigenvectors.columns(0, k).into_owned()
}

/// Kernel dimension from the singular values of M: null directions of Q are the
/// right singular vectors with σ = 1, counted as 1 - σ² < tol.
pub fn rank_oracle(basis: &SpectralDecomposition, gens: &GeneratorSet, tol: f64) -> Result<usize> {
    let m = diagonal_expectations(&basis.vectors, gens)?;
    if m.nrows() == 0 {
        return Ok(0);
    }
    let svd = m.svd(false, false);
    Ok(svd.singular_values.iter().filter(|&&s| 1.0 - s * s < tol).count())
}

#[derive(Clone, Debug)]
pub struct ConservedLaw {
    /// Diagonal coefficients c_n in the energy eigenbasis.
    pub coefficients: RVector,
    /// Tr[T_α O] over the easy generators.
    pub easy_expansion: Vec<(GeneratorDescriptor, f64)>,
    /// ‖[H, O]‖_F / (‖H‖_F ‖O‖_F)
    pub commutator_residual: f64,
    pub quadratic_form: f64,
}

/// Turns each null vector of `q` into the operator Σ_n c_n |n⟩⟨n| with diagnostics.
pub fn extract_conserved_laws(
    q: &QMatrix,
    basis: &SpectralDecomposition,
    gens: &GeneratorSet,
    h: &CMatrix,
) -> Result<Vec<ConservedLaw>> {
    let kernel = q.kernel();
    let m = diagonal_expectations(&basis.vectors, gens)?;
    let v = &basis.vectors;
    let mut out = Vec::with_capacity(kernel.ncols());
    for c in kernel.column_iter() {
        let c = c.into_owned();
        let expansion = &m * &c;
        let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, n| v[(i, n)] * c[n]);
        let o = &scaled * v.adjoint();
        let residual = crate::linalg::relative_commutator(h, &o);
        out.push(ConservedLaw {
            quadratic_form: q.quadratic_form(&c),
            easy_expansion: gens.easy().iter().cloned().zip(expansion.iter().copied()).collect(),
            commutator_residual: residual,
            coefficients: c,
        });
    }
    Ok(out)
}

/// ⟨n|O|n⟩ for every column |n⟩ of `vectors`.
pub fn operator_diagonal(vectors: &CMatrix, op: &CMatrix) -> Result<Vec<f64>> {
    if op.nrows() != vectors.nrows() || op.ncols() != vectors.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, basis has dimension {}",
            op.nrows(),
            op.ncols(),
            vectors.nrows()
        )));
    }
    let ov = op * vectors;
    Ok((0..vectors.ncols())
        .map(|n| vectors.column(n).dotc(&ov.column(n)).re)
        .collect())
}

/// Distance of `v` from the column span of the orthonormal `basis`, relative to ‖v‖.
pub fn projection_residual(basis: &RMatrix, v: &RVector) -> f64 {
    let proj = basis * (basis.transpose() * v);
    let n = v.norm();
    if n == 0.0 {
        0.0
    } else {
        (v - proj).norm() / n
    }
}

pub fn projection_residual_of(kernel: &RMatrix, v: &[f64]) -> f64 {
    projection_residual(kernel, &RVector::from_column_slice(v))
}

impl QMatrix {
    pub fn summary(&self) -> QSummary {
        let mom = self.moments();
        QSummary {
            dim: self.dim(),
            n_loc: self.n_loc,
            kernel_dim: self.kernel_dim(),
            mean: mom.mean,
            variance: mom.variance,
            lambda_min: self.eigenvalues.first().copied().unwrap_or(0.0),
            lambda_max: self.eigenvalues.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QSummary {
    pub dim: usize,
    pub n_loc: usize,
    pub kernel_dim: usize,
    pub mean: f64,
    pub variance: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}
