use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix, RMatrix, C0, C1, CI};
use crate::operators::GeneratorSet;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::ops::Range;
use std::sync::OnceLock;

/// Upper limit on Σ_n d_n².
pub const MAX_ENLARGED_DIM: usize = 12_000;
/// Upper limit on N_loc · Σ_n d_n² stored coefficients.
pub const MAX_COEFFICIENTS: usize = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// E_ii
    Diagonal,
    /// (|i⟩⟨j| + |j⟩⟨i|)/√2
    Real,
    /// (-i|i⟩⟨j| + i|j⟩⟨i|)/√2
    Imaginary,
}

/// Index (I_1, I_2) of the enlarged matrix after the Hermitian reparametrization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairLabel {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub kind: PairKind,
}

/// Orthonormal Hermitian basis of d×d matrices, ordered diagonal first then (Real, Imaginary) per i<j.
pub fn hermitian_block_basis(d: usize) -> Vec<(usize, usize, PairKind)> {
    let mut out: Vec<_> = (0..d).map(|i| (i, i, PairKind::Diagonal)).collect();
    for i in 0..d {
        for j in i + 1..d {
            out.push((i, j, PairKind::Real));
            out.push((i, j, PairKind::Imaginary));
        }
    }
    out
}

/// Tr[h_K A] for Hermitian A.
fn pair_coefficient(a: &CMatrix, i: usize, j: usize, kind: PairKind) -> f64 {
    match kind {
        PairKind::Diagonal => a[(i, i)].re,
        PairKind::Real => SQRT_2 * a[(i, j)].re,
        PairKind::Imaginary => -SQRT_2 * a[(i, j)].im,
    }
}

fn add_pair(o: &mut CMatrix, i: usize, j: usize, kind: PairKind, c: f64) {
    match kind {
        PairKind::Diagonal => o[(i, i)] += C1 * c,
        PairKind::Real => {
            o[(i, j)] += C1 * (c * FRAC_1_SQRT_2);
            o[(j, i)] += C1 * (c * FRAC_1_SQRT_2);
        }
        PairKind::Imaginary => {
            o[(i, j)] += -CI * (c * FRAC_1_SQRT_2);
            o[(j, i)] += CI * (c * FRAC_1_SQRT_2);
        }
    }
}

/// Hermitian operator that is block diagonal in a fixed eigenbasis.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    /// (block range, d×d matrix in block coordinates); blocks absent from the list vanish.
    pub parts: Vec<(Range<usize>, CMatrix)>,
}

impl BlockOperator {
    pub fn norm(&self) -> f64 {
        self.parts.iter().map(|(_, m)| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of [A, B], assuming both use the same block list.
    pub fn commutator_norm(&self, other: &BlockOperator) -> f64 {
        self.parts
            .iter()
            .zip(&other.parts)
            .map(|((_, a), (_, b))| (a * b - b * a).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Σ_b V_b o_b V_b†
    pub fn to_dense(&self, vectors: &CMatrix) -> CMatrix {
        let n = vectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (r, m) in &self.parts {
            let vb = vectors.columns(r.start, r.len());
            out += vb * m * vb.adjoint();
        }
        out
    }
}

#[derive(Debug)]
pub struct EnlargedQ {
    pub blocks: Vec<Range<usize>>,
    /// Start of each block's index range in the enlarged space.
    pub offsets: Vec<usize>,
    pub labels: Vec<PairLabel>,
    /// M̃_{αK} = Tr[T_α B_K], N_loc × Σ d_n².
    pub coefficients: RMatrix,
    /// Orthonormal null vectors of Q̃ (columns).
    pub kernel: RMatrix,
    pub kernel_tol: f64,
    gram: OnceLock<RMatrix>,
}

impl EnlargedQ {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    /// M̃ᵀM̃
    pub fn gram(&self) -> &RMatrix {
        self.gram.get_or_init(|| self.coefficients.tr_mul(&self.coefficients))
    }

    /// Q̃ = I - M̃ᵀM̃
    pub fn matrix(&self) -> RMatrix {
        RMatrix::identity(self.dim(), self.dim()) - self.gram()
    }

    /// Eigenvalues of Q̃, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        symmetric_eigen(&self.matrix()).0
    }

    /// Operator Σ_K c_K h_K for an enlarged-space vector c.
    pub fn operator(&self, c: &[f64]) -> BlockOperator {
        let parts = self
            .blocks
            .iter()
            .zip(&self.offsets)
            .map(|(r, &off)| {
                let d = r.len();
                let mut m = CMatrix::zeros(d, d);
                for (k, &(i, j, kind)) in hermitian_block_basis(d).iter().enumerate() {
                    let v = c[off + k];
                    if v != 0.0 {
                        add_pair(&mut m, i, j, kind, v);
                    }
                }
                (r.clone(), m)
            })
            .collect();
        BlockOperator { parts }
    }

    pub fn kernel_operators(&self) -> Vec<BlockOperator> {
        self.kernel
            .column_iter()
            .map(|c| self.operator(c.as_slice()))
            .collect()
    }
}

/// Builds the enlarged matrix over degenerate blocks of `dec` from the easy generators.
pub fn build_enlarged_q(dec: &SpectralDecomposition, gens: &GeneratorSet) -> Result<EnlargedQ> {
    build_enlarged_q_with_tol(dec, gens, crate::qmatrix::DEFAULT_KERNEL_TOL)
}

pub fn build_enlarged_q_with_tol(dec: &SpectralDecomposition, gens: &GeneratorSet, tol: f64) -> Result<EnlargedQ> {
    if gens.dim() != dec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "generator dimension {} vs basis dimension {}",
            gens.dim(),
            dec.dim()
        )));
    }
    let n_tot = dec.enlarged_dim();
    if n_tot > MAX_ENLARGED_DIM {
        return Err(Error::MemoryGuard(format!(
            "enlarged dimension {n_tot} exceeds {MAX_ENLARGED_DIM}; presplit with more symmetries"
        )));
    }
    let n_loc = gens.n_loc();
    if n_loc.saturating_mul(n_tot) > MAX_COEFFICIENTS {
        return Err(Error::MemoryGuard(format!("{n_loc} x {n_tot} enlarged coefficients")));
    }
    let mut offsets = Vec::with_capacity(dec.blocks.len());
    let mut labels = Vec::with_capacity(n_tot);
    for (bi, r) in dec.blocks.iter().enumerate() {
        offsets.push(labels.len());
        for (i, j, kind) in hermitian_block_basis(r.len()) {
            labels.push(PairLabel {
                block: bi,
                i: r.start + i,
                j: r.start + j,
                kind,
            });
        }
    }
    let ops = gens.easy_operators();
    let v = &dec.vectors;
    let d = dec.dim();
    let rows: Vec<Vec<f64>> = ops
        .par_iter()
        .map(|op| {
            let mut row = Vec::with_capacity(n_tot);
            let mut tv = vec![C0; d];
            for r in &dec.blocks {
                let db = r.len();
                // A = V_b† T V_b
                let mut a = CMatrix::zeros(db, db);
                for (jj, col) in r.clone().enumerate() {
                    op.apply(v.column(col).as_slice(), &mut tv);
                    for (ii, row_state) in r.clone().enumerate() {
                        if ii > jj {
                            break;
                        }
                        let vi = v.column(row_state);
                        let s: Complex64 = vi.iter().zip(&tv).map(|(x, y)| x.conj() * y).sum();
                        a[(ii, jj)] = s;
                    }
                }
                for (i, j, kind) in hermitian_block_basis(db) {
                    row.push(pair_coefficient(&a, i, j, kind));
                }
            }
            row
        })
        .collect();
    let coefficients = RMatrix::from_fn(n_loc, n_tot, |a, k| rows[a][k]);
    let gram = OnceLock::new();
    let kernel = if n_loc >= n_tot {
        let g = coefficients.tr_mul(&coefficients);
        let (vals, vecs) = symmetric_eigen(&g);
        let keep: Vec<usize> = (0..n_tot).filter(|&k| 1.0 - vals[k] < tol).collect();
        let _ = gram.set(g);
        RMatrix::from_fn(n_tot, keep.len(), |r, c| vecs[(r, keep[c])])
    } else {
        let small = &coefficients * coefficients.transpose();
        let (vals, vecs) = symmetric_eigen(&small);
        let keep: Vec<usize> = (0..n_loc).filter(|&k| 1.0 - vals[k] < tol).collect();
        let mut k = RMatrix::zeros(n_tot, keep.len());
        for (c, &idx) in keep.iter().enumerate() {
            let col = coefficients.tr_mul(&vecs.column(idx).into_owned()) / vals[idx].sqrt();
            k.set_column(c, &col);
        }
        orthonormalize(k)
    };
    Ok(EnlargedQ {
        blocks: dec.blocks.clone(),
        offsets,
        labels,
        coefficients,
        kernel,
        kernel_tol: tol,
        gram,
    })
}

fn orthonormalize(m: RMatrix) -> RMatrix {
    if m.ncols() == 0 {
        return m;
    }
    m.qr().q()
}
