//! Spin-chain Hamiltonians, global symmetries and conserved charges.

mod chain;
mod charges;
mod symmetry;

pub use chain::{add_local, kron_all, permutation_matrix, reflection_permutation, shift_permutation, translation_sum};
pub use charges::{conserved_tower, Charge, ChargeTower};
pub use symmetry::{default_presplit, momentum_from_shift, symmetry_operator, symmetry_operators, SymmetryKind, SymmetryOperators};

use crate::error::{Error, Result};
use crate::linalg::{check_square, hermiticity_deviation, CMatrix, C1};
use crate::operators::{gell_mann_site, single_site_spin, Axis, Spin, MAX_SITES};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// -Σ [Z Z + h_x X + h_z Z]
    Ising { h_x: f64, h_z: f64 },
    /// Σ [J_x X X + J_y Y Y + J_z Z Z + h_z Z]
    Xyz {
        j_x: f64,
        j_y: f64,
        j_z: f64,
        #[serde(default)]
        h_z: f64,
    },
    /// Spin-1 Heisenberg chain Σ S·S.
    Spin1Naive,
    /// Spin-1 SU(3)-symmetric chain.
    Spin1Integrable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub family: Family,
    pub l: usize,
}

impl ModelSpec {
    pub fn new(family: Family, l: usize) -> Result<Self> {
        let spec = ModelSpec { family, l };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ising(l: usize, h_x: f64, h_z: f64) -> Self {
        ModelSpec {
            family: Family::Ising { h_x, h_z },
            l,
        }
    }

    pub fn xyz(l: usize, j_x: f64, j_y: f64, j_z: f64, h_z: f64) -> Self {
        ModelSpec {
            family: Family::Xyz { j_x, j_y, j_z, h_z },
            l,
        }
    }

    pub fn chaotic_ising(l: usize) -> Self {
        Self::ising(l, -1.05, 0.5)
    }

    pub fn transverse_ising(l: usize) -> Self {
        Self::ising(l, -1.05, 0.0)
    }

    pub fn default_xyz(l: usize) -> Self {
        Self::xyz(l, -0.35, 0.5, -0.1, 0.0)
    }

    pub fn default_xxz(l: usize) -> Self {
        Self::xyz(l, -0.35, -0.35, -0.1, 0.0)
    }

    pub fn xyz_field(l: usize) -> Self {
        Self::xyz(l, -0.35, 0.5, -0.1, 0.8)
    }

    pub fn spin1_naive(l: usize) -> Self {
        ModelSpec {
            family: Family::Spin1Naive,
            l,
        }
    }

    pub fn spin1_integrable(l: usize) -> Self {
        ModelSpec {
            family: Family::Spin1Integrable,
            l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidModel(format!("chain length must be >= 2, got {}", self.l)));
        }
        if self.l > MAX_SITES {
            return Err(Error::DimensionTooLarge {
                dim: self.l,
                limit: MAX_SITES,
            });
        }
        let finite = match self.family {
            Family::Ising { h_x, h_z } => h_x.is_finite() && h_z.is_finite(),
            Family::Xyz { j_x, j_y, j_z, h_z } => [j_x, j_y, j_z, h_z].iter().all(|v| v.is_finite()),
            _ => true,
        };
        if !finite {
            return Err(Error::InvalidModel("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn spin(&self) -> Spin {
        match self.family {
            Family::Ising { .. } | Family::Xyz { .. } => Spin::HALF,
            Family::Spin1Naive | Family::Spin1Integrable => Spin::ONE,
        }
    }

    pub fn dim(&self) -> usize {
        self.spin().dim().pow(self.l as u32)
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Ising { .. } => "ising",
            Family::Xyz { .. } => "xyz",
            Family::Spin1Naive => "spin1_naive",
            Family::Spin1Integrable => "spin1_integrable",
        }
    }

    /// Couplings in a fixed order, for headers and hashes.
    pub fn couplings(&self) -> Vec<(&'static str, f64)> {
        match self.family {
            Family::Ising { h_x, h_z } => vec![("h_x", h_x), ("h_z", h_z)],
            Family::Xyz { j_x, j_y, j_z, h_z } => vec![("j_x", j_x), ("j_y", j_y), ("j_z", j_z), ("h_z", h_z)],
            _ => Vec::new(),
        }
    }
}

pub(crate) fn spin_matrices(spin: Spin) -> [CMatrix; 3] {
    Axis::ALL.map(|a| single_site_spin(spin, a))
}

/// Two-site density Σ_a S_a ⊗ S_a for spin 1.
fn spin1_exchange() -> CMatrix {
    let s = spin_matrices(Spin::ONE);
    s.iter().map(|m| kron_all(&[m, m])).fold(CMatrix::zeros(9, 9), |a, b| a + b)
}

/// Dense two-site (or one-site) density whose translation sum is H.
pub fn hamiltonian_density(spec: &ModelSpec) -> CMatrix {
    match spec.family {
        Family::Ising { h_x, h_z } => {
            let [x, _, z] = spin_matrices(Spin::HALF);
            let i = CMatrix::identity(2, 2);
            -(kron_all(&[&z, &z]) + kron_all(&[&x, &i]) * (C1 * h_x) + kron_all(&[&z, &i]) * (C1 * h_z))
        }
        Family::Xyz { j_x, j_y, j_z, h_z } => {
            let [x, y, z] = spin_matrices(Spin::HALF);
            let i = CMatrix::identity(2, 2);
            kron_all(&[&x, &x]) * (C1 * j_x)
                + kron_all(&[&y, &y]) * (C1 * j_y)
                + kron_all(&[&z, &z]) * (C1 * j_z)
                + kron_all(&[&z, &i]) * (C1 * h_z)
        }
        Family::Spin1Naive => spin1_exchange(),
        Family::Spin1Integrable => {
            let x = spin1_exchange();
            let i = CMatrix::identity(9, 9);
            (&x + &x * &x * (C1 * 0.25) - i * (C1 * (16.0 / 3.0))) * (C1 * 0.5)
        }
    }
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<CMatrix> {
    spec.validate()?;
    let d = spec.spin().dim();
    if spec.dim() > crate::operators::MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: spec.dim(),
            limit: crate::operators::MAX_DENSE_DIM,
        });
    }
    Ok(translation_sum(spec.l, d, &hamiltonian_density(spec)))
}

/// Σ_j Σ_a t_a^(j) t_a^(j+1) with Gell-Mann matrices.
pub fn su3_hamiltonian(l: usize) -> CMatrix {
    let t = gell_mann_site();
    let dens = t.iter().map(|m| kron_all(&[m, m])).fold(CMatrix::zeros(9, 9), |a, b| a + b);
    translation_sum(l, 3, &dens)
}

/// Rescales H so that Tr[H²] = 1; returns the applied factor.
pub fn normalize_hamiltonian(h: &CMatrix) -> Result<(CMatrix, f64)> {
    check_square(h, "Hamiltonian")?;
    let dev = hermiticity_deviation(h);
    if dev > 1e-10 * (1.0 + h.camax()) {
        return Err(Error::NotHermitian(dev));
    }
    let tr2 = h.norm_squared();
    if tr2 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let scale = 1.0 / tr2.sqrt();
    Ok((h * Complex64::new(scale, 0.0), scale))
}
