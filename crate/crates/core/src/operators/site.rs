use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C1, CI};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Half-integer spin stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn new(s: f64) -> Result<Self> {
        let t = 2.0 * s;
        if !(s > 0.0) || (t - t.round()).abs() > 1e-12 || t > 64.0 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin { twice: t.round() as u32 })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Local Hilbert space dimension 2s+1.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Generalized spin matrix with spectrum {2s, 2s-2, ..., -2s}; rows ordered m = s, s-1, ..., -s.
pub fn single_site_spin(spin: Spin, axis: Axis) -> CMatrix {
    let d = spin.dim();
    let s2 = spin.twice as f64;
    let mut m = CMatrix::zeros(d, d);
    match axis {
        Axis::Z => {
            for j in 0..d {
                m[(j, j)] = C1 * (s2 - 2.0 * j as f64);
            }
        }
        Axis::X | Axis::Y => {
            for j in 0..d - 1 {
                // 1-based row j+1, entry sqrt(j(2s-j+1))
                let jj = (j + 1) as f64;
                let a = (jj * (s2 - jj + 1.0)).sqrt();
                let (up, down) = match axis {
                    Axis::X => (C1 * a, C1 * a),
                    _ => (-CI * a, CI * a),
                };
                m[(j, j + 1)] = up;
                m[(j + 1, j)] = down;
            }
        }
    }
    m
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩ with all arguments doubled.
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if j > j1 + j2 || j < (j1 - j2).abs() || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let pre = ((j + 1) as f64 * factorial(h(j + j1 - j2)) * factorial(h(j - j1 + j2))
        * factorial(h(j1 + j2 - j))
        / factorial(h(j1 + j2 + j) + 1))
    .sqrt();
    let norm = (factorial(h(j + m))
        * factorial(h(j - m))
        * factorial(h(j1 - m1))
        * factorial(h(j1 + m1))
        * factorial(h(j2 - m2))
        * factorial(h(j2 + m2)))
    .sqrt();
    let mut sum = 0.0;
    for k in 0..=h(j1 + j2 - j) {
        let args = [
            h(j1 + j2 - j) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(j - j2 + m1) + k,
            h(j - j1 - m2) + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let denom: f64 = factorial(k) * args.iter().map(|&a| factorial(a)).product::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    pre * norm * sum
}

/// Spherical tensor operator T^J_q on a single spin-s site (trace-normalized).
fn spherical_tensor(spin: Spin, big_j: i64, q: i64) -> CMatrix {
    let s = spin.twice as i64;
    let d = spin.dim();
    let mut t = CMatrix::zeros(d, d);
    for r in 0..d {
        let m = s - 2 * r as i64;
        for c in 0..d {
            let mp = s - 2 * c as i64;
            let cg = clebsch_gordan(s, m, s, -mp, 2 * big_j, 2 * q);
            if cg != 0.0 {
                let sign = if ((s - mp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                t[(r, c)] = C1 * (sign * cg);
            }
        }
    }
    t
}

/// Orthonormal Hermitian basis of operators on one site.
#[derive(Clone, Debug)]
pub struct SiteOperatorBasis {
    pub spin: Spin,
    pub elements: Vec<CMatrix>,
    pub internal_degree: Vec<u32>,
    pub identity_index: usize,
}

impl SiteOperatorBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Index of the element proportional to the spin matrix along `axis`.
    pub fn spin_index(&self, axis: Axis) -> usize {
        1 + match axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Expansion coefficients Tr[e_a X] of a single-site operator.
    pub fn coefficients(&self, x: &CMatrix) -> Vec<Complex64> {
        self.elements
            .iter()
            .map(|e| crate::linalg::trace_product(e, x))
            .collect()
    }
}

/// Basis graded by spin J = 0..2s; within J the order is (cos q, sin q) for q = 1..J, then q = 0.
pub fn single_site_basis(spin: Spin) -> SiteOperatorBasis {
    let two_s = spin.twice as i64;
    let mut elements = Vec::new();
    let mut internal_degree = Vec::new();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    for big_j in 0..=two_s {
        for q in 1..=big_j {
            let tp = spherical_tensor(spin, big_j, q);
            let tm = spherical_tensor(spin, big_j, -q);
            let phase = if q % 2 == 0 { 1.0 } else { -1.0 };
            let mut a = (&tm + &tp * Complex64::new(phase, 0.0)) * Complex64::new(r2, 0.0);
            let mut b = (&tm - &tp * Complex64::new(phase, 0.0)) * Complex64::new(0.0, r2);
            if big_j == 1 {
                align_sign(&mut a, &single_site_spin(spin, Axis::X));
                align_sign(&mut b, &single_site_spin(spin, Axis::Y));
            }
            elements.push(a);
            elements.push(b);
            internal_degree.extend([big_j as u32, big_j as u32]);
        }
        let mut t0 = spherical_tensor(spin, big_j, 0);
        if big_j == 1 {
            align_sign(&mut t0, &single_site_spin(spin, Axis::Z));
        }
        elements.push(t0);
        internal_degree.push(big_j as u32);
    }
    SiteOperatorBasis {
        spin,
        elements,
        internal_degree,
        identity_index: 0,
    }
}

fn align_sign(m: &mut CMatrix, reference: &CMatrix) {
    if crate::linalg::trace_product(m, reference).re < 0.0 {
        *m = -m.clone();
    }
}

/// The eight Gell-Mann matrices in the basis ordered m = 1, 0, -1.
pub fn gell_mann_site() -> Vec<CMatrix> {
    let mut out = vec![CMatrix::zeros(3, 3); 8];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    // symmetric / antisymmetric off-diagonal pairs: λ1,λ2 | λ4,λ5 | λ6,λ7
    let slots = [(0, 1), (3, 4), (5, 6)];
    for (&(i, j), &(sx, sy)) in pairs.iter().zip(&slots) {
        out[sx][(i, j)] = C1;
        out[sx][(j, i)] = C1;
        out[sy][(i, j)] = -CI;
        out[sy][(j, i)] = CI;
    }
    out[2][(0, 0)] = C1;
    out[2][(1, 1)] = -C1;
    let r3 = 1.0 / 3f64.sqrt();
    out[7][(0, 0)] = C1 * r3;
    out[7][(1, 1)] = C1 * r3;
    out[7][(2, 2)] = C1 * (-2.0 * r3);
    out
}

/// Totally antisymmetric structure constants with [t_a, t_b] = 2i f_abc t_c.
pub fn su3_structure_constants(t: &[CMatrix]) -> Vec<f64> {
    let n = t.len();
    let mut f = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            let c_ab = crate::linalg::commutator(&t[a], &t[b]);
            for c in 0..n {
                let v = crate::linalg::trace_product(&c_ab, &t[c]) / Complex64::new(0.0, 4.0);
                f[(a * n + b) * n + c] = v.re;
            }
        }
    }
    f
}

/// Symmetric constants with {t_a, t_b} = (4/3) δ_ab + 2 d_abc t_c.
pub fn su3_symmetric_constants(t: &[CMatrix]) -> Vec<f64> {
    let n = t.len();
    let mut d = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            let ac = &t[a] * &t[b] + &t[b] * &t[a];
            for c in 0..n {
                d[(a * n + b) * n + c] = crate::linalg::trace_product(&ac, &t[c]).re / 4.0;
            }
        }
    }
    d
}
