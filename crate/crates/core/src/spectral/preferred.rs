use super::enlarged::{build_enlarged_q, hermitian_block_basis, BlockOperator, EnlargedQ, PairKind};
use super::{refine_block, SpectralDecomposition, DEFAULT_DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::operators::GeneratorSet;
use crate::qmatrix::{build_q, QMatrix, DEFAULT_KERNEL_TOL};

pub const COMMUTING_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PreferredBasisResult {
    /// Block unitaries a_i^k, one per block of the input decomposition.
    pub rotation: Vec<CMatrix>,
    pub decomposition: SpectralDecomposition,
    /// Mutually commuting kernel charges, diagonal in the rotated basis.
    pub commuting_charges: Vec<BlockOperator>,
    /// Kernel charges skipped because they fail to commute with the selected ones.
    pub rejected_charges: usize,
    pub enlarged_kernel_dim: usize,
    pub kernel_dim: usize,
    pub input_kernel_dim: usize,
    pub q: QMatrix,
    pub warnings: Vec<String>,
}

/// Rotates degenerate blocks so that a maximal commuting set of local conserved
/// charges (null vectors of the enlarged matrix) becomes diagonal.
pub fn preferred_basis(dec: &SpectralDecomposition, gens: &GeneratorSet) -> Result<PreferredBasisResult> {
    let input_q = build_q(dec, gens)?;
    let input_kernel_dim = input_q.kernel_dim();
    let identity: Vec<CMatrix> = dec.blocks.iter().map(|b| CMatrix::identity(b.len(), b.len())).collect();
    if dec.is_nondegenerate() {
        return Ok(PreferredBasisResult {
            rotation: identity,
            decomposition: dec.clone(),
            commuting_charges: Vec::new(),
            rejected_charges: 0,
            enlarged_kernel_dim: input_kernel_dim,
            kernel_dim: input_kernel_dim,
            input_kernel_dim,
            q: input_q,
            warnings: Vec::new(),
        });
    }
    let enlarged = build_enlarged_q(dec, gens)?;
    let charges = enlarged.kernel_operators();
    let mut selected: Vec<BlockOperator> = Vec::new();
    let mut rejected = 0;
    for c in charges {
        if selected.iter().all(|s| s.commutator_norm(&c) < COMMUTING_TOL) {
            selected.push(c);
        } else {
            rejected += 1;
        }
    }
    let mut rotation = Vec::with_capacity(dec.blocks.len());
    for (bi, b) in dec.blocks.iter().enumerate() {
        if b.len() == 1 {
            rotation.push(CMatrix::identity(1, 1));
            continue;
        }
        let locals: Vec<CMatrix> = selected.iter().map(|c| c.parts[bi].1.clone()).collect();
        let (u, _, _) = refine_block(&locals, b.len(), DEFAULT_DEGENERACY_TOL);
        rotation.push(u);
    }
    let rotated = dec.rotate_blocks(&rotation)?;
    let mut charges_rotated = Vec::with_capacity(selected.len());
    for c in &selected {
        let parts = c
            .parts
            .iter()
            .zip(&rotation)
            .map(|((r, m), u)| (r.clone(), u.adjoint() * m * u))
            .collect();
        charges_rotated.push(BlockOperator { parts });
    }
    let q = build_q(&rotated, gens)?;
    let mut warnings = Vec::new();
    if rejected > 0 {
        warnings.push(format!("{rejected} kernel charges do not commute with the selected set"));
    }
    let kernel_dim = q.kernel_dim();
    if kernel_dim < input_kernel_dim {
        warnings.push(format!(
            "rotated basis has kernel {kernel_dim} < input {input_kernel_dim}; keeping the input basis"
        ));
        return Ok(PreferredBasisResult {
            rotation: identity,
            decomposition: dec.clone(),
            commuting_charges: charges_rotated,
            rejected_charges: rejected,
            enlarged_kernel_dim: enlarged.kernel_dim(),
            kernel_dim: input_kernel_dim,
            input_kernel_dim,
            q: input_q,
            warnings,
        });
    }
    Ok(PreferredBasisResult {
        rotation,
        decomposition: rotated,
        commuting_charges: charges_rotated,
        rejected_charges: rejected,
        enlarged_kernel_dim: enlarged.kernel_dim(),
        kernel_dim,
        input_kernel_dim,
        q,
        warnings,
    })
}

/// Q in the basis rotated by `rotation` (one unitary per block), from Q̃ alone: Q' = W Q̃ Wᵀ.
pub fn reconstruct_q_from_qtilde(enlarged: &EnlargedQ, rotation: &[CMatrix]) -> Result<QMatrix> {
    if rotation.len() != enlarged.blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rotations for {} blocks",
            rotation.len(),
            enlarged.blocks.len()
        )));
    }
    let d: usize = enlarged.blocks.iter().map(|b| b.len()).sum();
    let n = enlarged.dim();
    let mut w = RMatrix::zeros(d, n);
    for ((b, &off), u) in enlarged.blocks.iter().zip(&enlarged.offsets).zip(rotation) {
        if u.nrows() != b.len() || u.ncols() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "rotation {}x{} for block of size {}",
                u.nrows(),
                u.ncols(),
                b.len()
            )));
        }
        for a in 0..b.len() {
            let col = u.column(a);
            for (k, &(i, j, kind)) in hermitian_block_basis(b.len()).iter().enumerate() {
                // ⟨a|h_K|a⟩
                let val = match kind {
                    PairKind::Diagonal => col[i].norm_sqr(),
                    PairKind::Real => std::f64::consts::SQRT_2 * (col[i].conj() * col[j]).re,
                    PairKind::Imaginary => std::f64::consts::SQRT_2 * (col[i].conj() * col[j]).im,
                };
                w[(b.start + a, off + k)] = val;
            }
        }
    }
    let q = RMatrix::identity(d, d) - &w * enlarged.gram() * w.transpose();
    QMatrix::from_matrix(q, enlarged.coefficients.nrows(), DEFAULT_KERNEL_TOL)
}

/// Largest relative commutator between each presplit operator and the enlarged-kernel
/// charges of the unsplit decomposition.
pub fn presplit_compatibility(dec: &SpectralDecomposition, gens: &GeneratorSet, ops: &[CMatrix]) -> Result<Vec<f64>> {
    let enlarged = build_enlarged_q(dec, gens)?;
    let charges: Vec<CMatrix> = enlarged
        .kernel_operators()
        .iter()
        .map(|c| c.to_dense(&dec.vectors))
        .collect();
    Ok(ops
        .iter()
        .map(|o| {
            charges
                .iter()
                .map(|c| crate::linalg::relative_commutator(o, c))
                .fold(0.0, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hamiltonian, normalize_hamiltonian, ModelSpec};
    use crate::operators::{Convention, Spin, Threshold};
    use crate::spectral::diagonalize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(spec: ModelSpec, k: usize) -> (CMatrix, SpectralDecomposition, GeneratorSet) {
        let h = normalize_hamiltonian(&build_hamiltonian(&spec).unwrap()).unwrap().0;
        let gens = GeneratorSet::new(spec.l, spec.spin(), Threshold::new(k, k), Convention::T1).unwrap();
        let dec = diagonalize(&h).unwrap();
        (h, dec, gens)
    }

    #[test]
    fn nondegenerate_is_identity() {
        let (_, mut dec, gens) = setup(ModelSpec::chaotic_ising(4), 2);
        dec.blocks = (0..dec.dim()).map(|i| i..i + 1).collect();
        let r = preferred_basis(&dec, &gens).unwrap();
        assert!(r.rotation.iter().all(|u| (u - CMatrix::identity(1, 1)).camax() == 0.0));
    }

    #[test]
    fn ising_kernels_at_six_sites() {
        let (h, dec, gens) = setup(ModelSpec::chaotic_ising(6), 2);
        let r = preferred_basis(&dec, &gens).unwrap();
        assert_eq!(r.kernel_dim, 1);
        let (h2, dec2, gens2) = setup(ModelSpec::transverse_ising(6), 2);
        let r2 = preferred_basis(&dec2, &gens2).unwrap();
        assert_eq!(r2.kernel_dim, 2);
        for (hh, res) in [(&h, &r), (&h2, &r2)] {
            assert!(res.decomposition.residual(hh) < 1e-9);
            for c in &res.commuting_charges {
                let dense = c.to_dense(&res.decomposition.vectors);
                assert!(crate::linalg::relative_commutator(hh, &dense) < 1e-8);
                for (_, m) in &c.parts {
                    let mut off = m.clone();
                    off.fill_diagonal(crate::linalg::C0);
                    assert!(off.camax() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn reconstruction_matches_direct_build() {
        let (_, dec, gens) = setup(ModelSpec::chaotic_ising(4), 2);
        let e = build_enlarged_q(&dec, &gens).unwrap();
        let id: Vec<CMatrix> = dec.blocks.iter().map(|b| CMatrix::identity(b.len(), b.len())).collect();
        let q0 = reconstruct_q_from_qtilde(&e, &id).unwrap();
        assert!((q0.matrix() - build_q(&dec, &gens).unwrap().matrix()).amax() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rots: Vec<CMatrix> = dec
            .blocks
            .iter()
            .map(|b| crate::rmt::haar_unitary_with(b.len(), &mut rng))
            .collect();
        let rotated = dec.rotate_blocks(&rots).unwrap();
        let q1 = reconstruct_q_from_qtilde(&e, &rots).unwrap();
        assert!((q1.matrix() - build_q(&rotated, &gens).unwrap().matrix()).amax() < 1e-9);
        assert!(reconstruct_q_from_qtilde(&e, &rots[1..]).is_err());
    }

    #[test]
    fn kernel_is_basis_independent() {
        let (_, dec, gens) = setup(ModelSpec::transverse_ising(6), 3);
        let base = preferred_basis(&dec, &gens).unwrap().kernel_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2 {
            let r = dec.random_block_rotation(&mut rng);
            let res = preferred_basis(&r, &gens).unwrap();
            assert_eq!(res.kernel_dim, base);
            assert!(res.kernel_dim >= res.input_kernel_dim);
        }
        let _ = Spin::HALF;
    }
}
