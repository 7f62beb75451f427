use super::chain::{permutation_matrix, reflection_permutation, shift_permutation, translation_sum};
use super::{spin_matrices, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C1};
use crate::operators::{gell_mann_site, Spin};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    Translation,
    Momentum,
    Parity,
    SpinFlip,
    Jz,
    J2,
    /// Σ_j t_3^(j)
    Cartan3,
    /// Σ_j t_8^(j)
    Cartan8,
}

#[derive(Clone, Debug)]
pub struct SymmetryOperators {
    pub translation: CMatrix,
    pub momentum: CMatrix,
    pub parity: CMatrix,
    pub spin_flip: Option<CMatrix>,
    pub jz: Option<CMatrix>,
    pub j2: Option<CMatrix>,
}

fn su2_invariant(spec: &ModelSpec) -> (bool, bool) {
    match spec.family {
        Family::Xyz { j_x, j_y, j_z, h_z } => {
            let u1 = j_x == j_y;
            (u1, u1 && j_y == j_z && h_z == 0.0)
        }
        Family::Spin1Naive | Family::Spin1Integrable => (true, true),
        Family::Ising { .. } => (false, false),
    }
}

fn total_spin(spec: &ModelSpec, axis: usize) -> CMatrix {
    let s = spin_matrices(spec.spin());
    translation_sum(spec.l, spec.spin().dim(), &s[axis])
}

/// P = i log T with eigenphases of T taken in (-π, π].
pub fn momentum_from_shift(l: usize, d: usize) -> CMatrix {
    let perm = shift_permutation(l, d);
    let n = perm.len();
    let thetas: Vec<f64> = (0..l)
        .map(|q| {
            let t = TAU * q as f64 / l as f64;
            if t > PI + 1e-12 {
                t - TAU
            } else {
                t
            }
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    let mut power: Vec<usize> = (0..n).collect();
    for m in 0..l {
        let c: Complex64 = thetas
            .iter()
            .map(|&t| Complex64::from_polar(-t, -t * m as f64))
            .sum::<Complex64>()
            / l as f64;
        if c.norm() > 1e-15 {
            for (x, &y) in power.iter().enumerate() {
                out[(y, x)] += c;
            }
        }
        power = power.iter().map(|&i| perm[i]).collect();
    }
    out
}

pub fn symmetry_operator(spec: &ModelSpec, kind: SymmetryKind) -> Result<CMatrix> {
    spec.validate()?;
    let d = spec.spin().dim();
    let l = spec.l;
    let (u1, su2) = su2_invariant(spec);
    match kind {
        SymmetryKind::Translation => Ok(permutation_matrix(&shift_permutation(l, d))),
        SymmetryKind::Momentum => Ok(momentum_from_shift(l, d)),
        SymmetryKind::Parity => Ok(permutation_matrix(&reflection_permutation(l, d))),
        SymmetryKind::SpinFlip => match spec.family {
            Family::Ising { h_z, .. } | Family::Xyz { h_z, .. } if h_z == 0.0 => {
                let [x, _, _] = spin_matrices(Spin::HALF);
                let mut out = CMatrix::from_element(1, 1, C1);
                for _ in 0..l {
                    out = out.kronecker(&x);
                }
                Ok(out)
            }
            _ => Err(Error::UnavailableSymmetry(format!(
                "spin flip does not commute with {} at these couplings",
                spec.name()
            ))),
        },
        SymmetryKind::Jz if u1 => Ok(total_spin(spec, 2)),
        SymmetryKind::J2 if su2 => {
            let parts: Vec<CMatrix> = (0..3).map(|a| total_spin(spec, a)).collect();
            Ok(parts.iter().map(|j| j * j).fold(CMatrix::zeros(spec.dim(), spec.dim()), |a, b| a + b))
        }
        SymmetryKind::Cartan3 | SymmetryKind::Cartan8 if spec.family == Family::Spin1Integrable => {
            let t = gell_mann_site();
            let idx = if kind == SymmetryKind::Cartan3 { 2 } else { 7 };
            Ok(translation_sum(l, 3, &t[idx]))
        }
        _ => Err(Error::UnavailableSymmetry(format!("{kind:?} is not a symmetry of {}", spec.name()))),
    }
}

pub fn symmetry_operators(spec: &ModelSpec) -> Result<SymmetryOperators> {
    Ok(SymmetryOperators {
        translation: symmetry_operator(spec, SymmetryKind::Translation)?,
        momentum: symmetry_operator(spec, SymmetryKind::Momentum)?,
        parity: symmetry_operator(spec, SymmetryKind::Parity)?,
        spin_flip: symmetry_operator(spec, SymmetryKind::SpinFlip).ok(),
        jz: symmetry_operator(spec, SymmetryKind::Jz).ok(),
        j2: symmetry_operator(spec, SymmetryKind::J2).ok(),
    })
}

/// Default presplit list: momentum always, plus the commuting Cartan-type charges.
pub fn default_presplit(spec: &ModelSpec) -> Vec<SymmetryKind> {
    let mut out = vec![SymmetryKind::Momentum];
    let (u1, su2) = su2_invariant(spec);
    match spec.family {
        Family::Spin1Integrable => out.extend([SymmetryKind::Cartan3, SymmetryKind::Cartan8]),
        _ => {
            if u1 {
                out.push(SymmetryKind::Jz);
            }
            if su2 {
                out.push(SymmetryKind::J2);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, hermiticity_deviation, relative_commutator};
    use crate::models::build_hamiltonian;

    #[test]
    fn translation_and_flip_commute_with_ising() {
        let spec = ModelSpec::transverse_ising(4);
        let h = build_hamiltonian(&spec).unwrap();
        let ops = symmetry_operators(&spec).unwrap();
        assert!(relative_commutator(&h, &ops.translation) < 1e-14);
        assert!(relative_commutator(&h, ops.spin_flip.as_ref().unwrap()) < 1e-14);
        assert!(relative_commutator(&h, &ops.parity) < 1e-14);
        assert!(ops.jz.is_none());
        let chaotic = ModelSpec::chaotic_ising(4);
        assert!(matches!(
            symmetry_operator(&chaotic, SymmetryKind::SpinFlip),
            Err(Error::UnavailableSymmetry(_))
        ));
    }

    #[test]
    fn xxz_has_u1() {
        let spec = ModelSpec::default_xxz(6);
        let h = build_hamiltonian(&spec).unwrap();
        let jz = symmetry_operator(&spec, SymmetryKind::Jz).unwrap();
        assert!(relative_commutator(&h, &jz) < 1e-14);
        assert!(symmetry_operator(&ModelSpec::default_xyz(6), SymmetryKind::Jz).is_err());
    }

    #[test]
    fn momentum_is_log_of_translation() {
        let (l, d) = (5, 2);
        let p = momentum_from_shift(l, d);
        assert!(hermiticity_deviation(&p) < 1e-13);
        let t = permutation_matrix(&shift_permutation(l, d));
        assert!(relative_commutator(&p, &t) < 1e-14);
        // exp(-i P) reproduces T on each eigenspace
        let (vals, vecs) = hermitian_eigen(&p);
        let n = vals.len();
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&v| Complex64::from_polar(1.0, -v)),
        ));
        let rebuilt = &vecs * phases * vecs.adjoint();
        assert!((rebuilt - t).camax() < 1e-12);
        assert!(vals.iter().all(|&v| (-PI - 1e-12..PI + 1e-12).contains(&v)));
    }

    #[test]
    fn spin_one_symmetries() {
        let spec = ModelSpec::spin1_integrable(4);
        let h = build_hamiltonian(&spec).unwrap();
        for kind in [SymmetryKind::Momentum, SymmetryKind::Jz, SymmetryKind::J2, SymmetryKind::Cartan3, SymmetryKind::Cartan8] {
            let op = symmetry_operator(&spec, kind).unwrap();
            assert!(relative_commutator(&h, &op) < 1e-13, "{kind:?}");
        }
        assert!(symmetry_operator(&ModelSpec::spin1_naive(4), SymmetryKind::Cartan8).is_err());
    }
}
