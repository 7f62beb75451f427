use super::chain::{kron_all, translation_sum};
use super::{spin_matrices, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C1};
use crate::operators::{gell_mann_site, su3_structure_constants, Locality, Spin};

#[derive(Clone, Debug)]
pub struct Charge {
    pub label: String,
    pub matrix: CMatrix,
    pub locality: Locality,
}

#[derive(Clone, Debug)]
pub struct ChargeTower {
    pub spec: ModelSpec,
    pub charges: Vec<Charge>,
}

fn cube(k: usize) -> Locality {
    Locality {
        k_op: k,
        k_sp: k,
        k_int: k,
    }
}

/// Σ_j of a product of consecutive single-site matrices.
fn string_sum(l: usize, d: usize, ops: &[&CMatrix]) -> CMatrix {
    translation_sum(l, d, &kron_all(ops))
}

fn ising_charge(l: usize, h_x: f64, n: usize) -> CMatrix {
    let [x, y, z] = spin_matrices(Spin::HALF);
    let chain = |ops: Vec<&CMatrix>| string_sum(l, 2, &ops);
    let with_x = |first: &CMatrix, k: usize, last: &CMatrix| -> CMatrix {
        let mut ops: Vec<&CMatrix> = vec![first];
        ops.extend(std::iter::repeat_n(&x, k));
        ops.push(last);
        chain(ops)
    };
    let m = n.div_ceil(2);
    if n % 2 == 1 {
        // I_{2m-1} = Σ [Y X^{m-1} Z - Z X^{m-1} Y]
        with_x(&y, m - 1, &z) - with_x(&z, m - 1, &y)
    } else {
        // I_{2m} = Σ [Z X^m Z - h_x (Y X^{m-1} Y + Z X^{m-1} Z) + Y X^{m-2} Y], with X in place of the last term at m = 1
        let hx = C1 * h_x;
        let tail = if m == 1 { -chain(vec![&x]) } else { with_x(&y, m - 2, &y) };
        with_x(&z, m, &z) - (with_x(&y, m - 1, &y) + with_x(&z, m - 1, &z)) * hx + tail
    }
}

fn xyz_charge(l: usize, j: [f64; 3]) -> CMatrix {
    let s = spin_matrices(Spin::HALF);
    let mut out = CMatrix::zeros(1 << l, 1 << l);
    for (a, b, c, sign) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)] {
        out += string_sum(l, 2, &[&s[a], &s[b], &s[c]]) * (C1 * (sign * j[a] * j[c]));
    }
    out
}

fn su3_charges(l: usize, n: usize) -> Vec<CMatrix> {
    let t = gell_mann_site();
    let f = su3_structure_constants(&t);
    let fi = |a: usize, b: usize, c: usize| f[(a * 8 + b) * 8 + c];
    let mut h3 = CMatrix::zeros(27, 27);
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..8 {
                let v = fi(a, b, c);
                if v.abs() > 1e-12 {
                    h3 += kron_all(&[&t[a], &t[b], &t[c]]) * (C1 * v);
                }
            }
        }
    }
    let mut out = vec![translation_sum(l, 3, &h3)];
    if n >= 2 {
        let mut h4 = CMatrix::zeros(81, 81);
        for a in 0..8 {
            for b in 0..8 {
                for p in 0..8 {
                    let fab = fi(a, b, p);
                    if fab.abs() < 1e-12 {
                        continue;
                    }
                    for c in 0..8 {
                        for d in 0..8 {
                            let v = fab * fi(p, c, d);
                            if v.abs() > 1e-12 {
                                h4 += kron_all(&[&t[a], &t[b], &t[c], &t[d]]) * (C1 * v);
                            }
                        }
                    }
                }
            }
        }
        let id = CMatrix::identity(3, 3);
        for ta in &t {
            h4 += kron_all(&[ta, &id, ta, &id]);
        }
        out.push(translation_sum(l, 3, &h4));
    }
    out
}

/// Explicit local charges commuting with the Hamiltonian of `spec`.
pub fn conserved_tower(spec: &ModelSpec, n_charges: usize) -> Result<ChargeTower> {
    spec.validate()?;
    let l = spec.l;
    let charges = match spec.family {
        Family::Ising { h_x, h_z } => {
            if h_z != 0.0 {
                return Err(Error::NoTower("Ising chain with longitudinal field is chaotic".into()));
            }
            if n_charges > 6 {
                return Err(Error::NoTower(format!("Ising tower implemented up to I_6, requested {n_charges}")));
            }
            (1..=n_charges)
                .map(|n| {
                    let m = n.div_ceil(2);
                    let k = if n % 2 == 1 { m + 1 } else { m + 2 };
                    Charge {
                        label: format!("I_{n}"),
                        matrix: ising_charge(l, h_x, n),
                        locality: cube(k),
                    }
                })
                .collect()
        }
        Family::Xyz { j_x, j_y, j_z, h_z } => {
            if h_z != 0.0 {
                return Err(Error::NoTower("XYZ chain with field has no local tower".into()));
            }
            if n_charges > 1 {
                return Err(Error::NoTower(format!("XYZ tower implemented up to I_1, requested {n_charges}")));
            }
            (0..n_charges)
                .map(|_| Charge {
                    label: "I_1".into(),
                    matrix: xyz_charge(l, [j_x, j_y, j_z]),
                    locality: cube(3),
                })
                .collect()
        }
        Family::Spin1Integrable => {
            if n_charges > 2 {
                return Err(Error::NoTower(format!("spin-1 tower implemented up to H_4, requested {n_charges}")));
            }
            let localities = [
                Locality { k_op: 3, k_sp: 3, k_int: 5 },
                Locality { k_op: 4, k_sp: 4, k_int: 8 },
            ];
            su3_charges(l, n_charges)
                .into_iter()
                .zip(localities)
                .enumerate()
                .map(|(i, (matrix, locality))| Charge {
                    label: format!("H_{}", i + 3),
                    matrix,
                    locality,
                })
                .collect()
        }
        Family::Spin1Naive => return Err(Error::NoTower("spin-1 Heisenberg chain is not integrable".into())),
    };
    Ok(ChargeTower { spec: *spec, charges })
}
