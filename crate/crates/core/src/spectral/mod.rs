//! Exact diagonalization, degeneracy handling and the preferred-eigenbasis search.

mod enlarged;
mod preferred;

pub use enlarged::{build_enlarged_q, hermitian_block_basis, BlockOperator, EnlargedQ, PairKind, PairLabel};
pub use preferred::{preferred_basis, presplit_compatibility, reconstruct_q_from_qtilde, PreferredBasisResult};

use crate::error::{Error, Result};
use crate::linalg::{check_square, hermitian_eigen, hermiticity_deviation, CMatrix};
use crate::operators::MAX_DENSE_DIM;
use rand::Rng;
use std::ops::Range;

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors |n⟩.
    pub vectors: CMatrix,
    /// Index ranges of (refined) degenerate blocks, in order and covering 0..D.
    pub blocks: Vec<Range<usize>>,
    pub normalized: bool,
    /// Per-state eigenvalues of the presplit operators, in the order they were applied.
    pub labels: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Σ_n d_n², the dimension of the enlarged Q-matrix.
    pub fn enlarged_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.len() * b.len()).sum()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// max |H V - V E| relative to max |H|.
    pub fn residual(&self, h: &CMatrix) -> f64 {
        let hv = h * &self.vectors;
        let mut worst = 0.0f64;
        for n in 0..self.dim() {
            for i in 0..self.dim() {
                worst = worst.max((hv[(i, n)] - self.vectors[(i, n)] * self.energies[n]).norm());
            }
        }
        worst / h.camax().max(f64::MIN_POSITIVE)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        crate::linalg::unitarity_deviation(&self.vectors)
    }

    /// Applies a unitary `rotations[b]` inside every block b.
    pub fn rotate_blocks(&self, rotations: &[CMatrix]) -> Result<SpectralDecomposition> {
        if rotations.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rotations for {} blocks",
                rotations.len(),
                self.blocks.len()
            )));
        }
        let mut out = self.clone();
        for (b, u) in self.blocks.iter().zip(rotations) {
            if u.nrows() != b.len() || u.ncols() != b.len() {
                return Err(Error::DimensionMismatch(format!(
                    "rotation {}x{} for block of size {}",
                    u.nrows(),
                    u.ncols(),
                    b.len()
                )));
            }
            let rotated = self.vectors.columns(b.start, b.len()) * u;
            out.vectors.columns_mut(b.start, b.len()).copy_from(&rotated);
        }
        out.labels = Vec::new();
        Ok(out)
    }

    /// Haar-random rotation inside each block, for basis-independence checks.
    pub fn random_block_rotation<R: Rng + ?Sized>(&self, rng: &mut R) -> SpectralDecomposition {
        let rots: Vec<CMatrix> = self
            .blocks
            .iter()
            .map(|b| crate::rmt::haar_unitary_with(b.len(), rng))
            .collect();
        self.rotate_blocks(&rots).expect("rotations match blocks")
    }
}

/// Maximal runs of consecutive energies whose gaps are below `tol_rel` times the spectral width.
pub fn group_degeneracies(energies: &[f64], tol_rel: f64) -> Vec<Range<usize>> {
    if energies.is_empty() {
        return Vec::new();
    }
    let width = energies[energies.len() - 1] - energies[0];
    let tol = tol_rel * width;
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..energies.len() {
        if energies[i] - energies[i - 1] > tol {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks.push(start..energies.len());
    blocks
}

pub fn diagonalize(h: &CMatrix) -> Result<SpectralDecomposition> {
    diagonalize_with_tol(h, DEFAULT_DEGENERACY_TOL)
}

pub fn diagonalize_with_tol(h: &CMatrix, tol_rel: f64) -> Result<SpectralDecomposition> {
    check_square(h, "Hamiltonian")?;
    if h.nrows() > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: h.nrows(),
            limit: MAX_DENSE_DIM,
        });
    }
    let dev = hermiticity_deviation(h);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let (energies, vectors) = hermitian_eigen(h);
    let blocks = group_degeneracies(&energies, tol_rel);
    let normalized = (h.norm_squared() - 1.0).abs() < 1e-10;
    Ok(SpectralDecomposition {
        energies,
        vectors,
        blocks,
        normalized,
        labels: Vec::new(),
    })
}

/// Clusters ascending values with gaps above `tol`.
fn cluster(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        if values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    if !values.is_empty() {
        out.push(start..values.len());
    }
    out
}

/// Sequentially diagonalizes commuting Hermitian `ops` (d×d, in block coordinates).
/// Returns the block unitary, the refined sub-ranges, and per-column eigenvalue labels.
pub(crate) fn refine_block(ops: &[CMatrix], d: usize, tol: f64) -> (CMatrix, Vec<Range<usize>>, Vec<Vec<f64>>) {
    let mut u = CMatrix::identity(d, d);
    let mut ranges = vec![0..d];
    let mut labels = vec![Vec::with_capacity(ops.len()); d];
    for op in ops {
        let scale = tol * op.camax().max(1.0);
        let mut next = Vec::new();
        for r in &ranges {
            let ur = u.columns(r.start, r.len()).into_owned();
            let sub = ur.adjoint() * op * &ur;
            if r.len() == 1 {
                labels[r.start].push(sub[(0, 0)].re);
                next.push(r.clone());
                continue;
            }
            let (vals, w) = hermitian_eigen(&sub);
            u.columns_mut(r.start, r.len()).copy_from(&(&ur * &w));
            for (k, &v) in vals.iter().enumerate() {
                labels[r.start + k].push(v);
            }
            for c in cluster(&vals, scale) {
                next.push(r.start + c.start..r.start + c.end);
            }
        }
        ranges = next;
    }
    (u, ranges, labels)
}

/// Rotates each degenerate block onto joint eigenvectors of `ops` and refines the blocks.
pub fn presplit(dec: &SpectralDecomposition, ops: &[CMatrix]) -> Result<SpectralDecomposition> {
    if ops.is_empty() {
        return Ok(dec.clone());
    }
    for (i, a) in ops.iter().enumerate() {
        check_square(a, "symmetry operator")?;
        if a.nrows() != dec.dim() {
            return Err(Error::DimensionMismatch(format!(
                "symmetry operator {i} has dimension {}, basis {}",
                a.nrows(),
                dec.dim()
            )));
        }
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            let r = crate::linalg::relative_commutator(a, b);
            if r > 1e-10 {
                return Err(Error::NonCommuting(format!("presplit operators {i} and {j} (residual {r:e})")));
            }
        }
    }
    let v = &dec.vectors;
    let in_basis: Vec<CMatrix> = ops.iter().map(|o| v.adjoint() * o * v).collect();
    // an operator commuting with H has no matrix elements between distinct energy blocks
    for (i, o) in in_basis.iter().enumerate() {
        let mut leak = 0.0f64;
        for (bi, b) in dec.blocks.iter().enumerate() {
            for (bj, c) in dec.blocks.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                for r in b.clone() {
                    for s in c.clone() {
                        leak = leak.max(o[(r, s)].norm());
                    }
                }
            }
        }
        if leak > 1e-8 * o.camax().max(1.0) {
            return Err(Error::NonCommuting(format!(
                "presplit operator {i} does not commute with H (leak {leak:e})"
            )));
        }
    }
    let mut out = dec.clone();
    out.blocks.clear();
    out.labels = vec![Vec::new(); dec.dim()];
    for b in &dec.blocks {
        let locals: Vec<CMatrix> = in_basis
            .iter()
            .map(|o| o.view((b.start, b.start), (b.len(), b.len())).into_owned())
            .collect();
        let (u, ranges, labels) = refine_block(&locals, b.len(), DEFAULT_DEGENERACY_TOL);
        let rotated = v.columns(b.start, b.len()) * &u;
        out.vectors.columns_mut(b.start, b.len()).copy_from(&rotated);
        for r in ranges {
            out.blocks.push(b.start + r.start..b.start + r.end);
        }
        for (k, l) in labels.into_iter().enumerate() {
            out.labels[b.start + k] = l;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C1;
    use crate::models::{build_hamiltonian, normalize_hamiltonian, symmetry_operator, ModelSpec, SymmetryKind};
    use nalgebra::DVector;

    #[test]
    fn diagonal_input() {
        let h = CMatrix::from_diagonal(&DVector::from_vec(vec![C1 * 3.0, C1, C1 * 2.0]));
        let dec = diagonalize(&h).unwrap();
        assert_eq!(dec.energies, vec![1.0, 2.0, 3.0]);
        assert_eq!(dec.blocks.len(), 3);
        assert!((dec.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(dec.residual(&h) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = C1;
        assert!(matches!(diagonalize(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn grouping() {
        assert_eq!(group_degeneracies(&[0.0, 0.0, 1.0], 1e-8), vec![0..2, 2..3]);
        assert_eq!(group_degeneracies(&[0.0, 1.0, 2.0], 1e-8).len(), 3);
        // chain grouping is transitive
        assert_eq!(group_degeneracies(&[0.0, 0.4, 0.8, 10.0], 0.05), vec![0..3, 3..4]);
    }

    #[test]
    fn ising_has_momentum_pairs() {
        let h = build_hamiltonian(&ModelSpec::chaotic_ising(4)).unwrap();
        let dec = diagonalize(&normalize_hamiltonian(&h).unwrap().0).unwrap();
        assert!(dec.normalized);
        assert!(dec.block_sizes().iter().any(|&s| s >= 2));
        assert!(dec.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn presplit_with_momentum() {
        let spec = ModelSpec::chaotic_ising(6);
        let h = build_hamiltonian(&spec).unwrap();
        let dec = diagonalize(&h).unwrap();
        let p = symmetry_operator(&spec, SymmetryKind::Momentum).unwrap();
        assert_eq!(presplit(&dec, &[]).unwrap().blocks, dec.blocks);
        let split = presplit(&dec, std::slice::from_ref(&p)).unwrap();
        assert!(split.enlarged_dim() < dec.enlarged_dim());
        assert!(split.residual(&h) < 1e-10);
        let pv = split.vectors.adjoint() * &p * &split.vectors;
        let mut off = pv.clone();
        off.fill_diagonal(C1 * 0.0);
        assert!(off.camax() < 1e-9);
    }

    #[test]
    fn xxz_blocks_carry_momentum_and_magnetization() {
        let spec = ModelSpec::default_xxz(6);
        let h = build_hamiltonian(&spec).unwrap();
        let dec = diagonalize(&h).unwrap();
        let ops: Vec<CMatrix> = [SymmetryKind::Momentum, SymmetryKind::Jz]
            .iter()
            .map(|&k| symmetry_operator(&spec, k).unwrap())
            .collect();
        let split = presplit(&dec, &ops).unwrap();
        for b in &split.blocks {
            let first = &split.labels[b.start];
            assert_eq!(first.len(), 2);
            for n in b.clone() {
                for (x, y) in split.labels[n].iter().zip(first) {
                    assert!((x - y).abs() < 1e-8);
                }
            }
            // magnetization labels are integers (even multiples of 1 with S_z = ±1)
            assert!((first[1] - first[1].round()).abs() < 1e-8);
        }
    }

    #[test]
    fn presplit_rejects_non_commuting_list() {
        let spec = ModelSpec::transverse_ising(4);
        let dec = diagonalize(&build_hamiltonian(&spec).unwrap()).unwrap();
        let p = symmetry_operator(&spec, SymmetryKind::Momentum).unwrap();
        let r = symmetry_operator(&spec, SymmetryKind::Parity).unwrap();
        assert!(matches!(presplit(&dec, &[p, r]), Err(Error::NonCommuting(_))));
    }
}
