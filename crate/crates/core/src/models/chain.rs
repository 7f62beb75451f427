use crate::linalg::{CMatrix, C0, C1};
use num_complex::Complex64;

/// Σ_j of a dense `r`-site density placed on sites j, j+1, ..., j+r-1 (mod L).
pub fn translation_sum(l: usize, d: usize, density: &CMatrix) -> CMatrix {
    let n = d.pow(l as u32);
    let mut out = CMatrix::zeros(n, n);
    for start in 0..l {
        add_local(&mut out, l, d, start, density);
    }
    out
}

/// Adds `density` acting on consecutive sites from `start` (periodic) to `target`.
pub fn add_local(target: &mut CMatrix, l: usize, d: usize, start: usize, density: &CMatrix) {
    let dim_loc = density.nrows();
    let mut r = 0;
    while d.pow(r as u32) < dim_loc {
        r += 1;
    }
    let strides: Vec<usize> = (0..r).map(|k| d.pow((l - 1 - (start + k) % l) as u32)).collect();
    let n = target.nrows();
    let nz: Vec<Vec<(usize, Complex64)>> = (0..dim_loc)
        .map(|c| {
            (0..dim_loc)
                .filter(|&row| density[(row, c)] != C0)
                .map(|row| (row, density[(row, c)]))
                .collect()
        })
        .collect();
    // (local digit word, index with those digits cleared)
    let digits = |idx: usize| -> (usize, usize) {
        let mut word = 0;
        let mut rest = idx;
        for &s in &strides {
            let dig = (idx / s) % d;
            word = word * d + dig;
            rest -= dig * s;
        }
        (word, rest)
    };
    for col in 0..n {
        let (c_loc, base) = digits(col);
        for &(r_loc, v) in &nz[c_loc] {
            let mut row = base;
            let mut w = r_loc;
            for &s in strides.iter().rev() {
                row += (w % d) * s;
                w /= d;
            }
            target[(row, col)] += v;
        }
    }
}

/// Kronecker product of site matrices, first factor leftmost.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, C1);
    for f in factors {
        out = out.kronecker(*f);
    }
    out
}

/// Basis permutation for the cyclic shift |s_0 ... s_{L-1}⟩ ↦ |s_{L-1} s_0 ... s_{L-2}⟩.
pub fn shift_permutation(l: usize, d: usize) -> Vec<usize> {
    let n = d.pow(l as u32);
    (0..n)
        .map(|x| {
            let last = x % d;
            x / d + last * d.pow(l as u32 - 1)
        })
        .collect()
}

/// Basis permutation reversing the site order.
pub fn reflection_permutation(l: usize, d: usize) -> Vec<usize> {
    let n = d.pow(l as u32);
    (0..n)
        .map(|x| {
            let mut r = x;
            let mut y = 0;
            for _ in 0..l {
                y = y * d + r % d;
                r /= d;
            }
            y
        })
        .collect()
}

/// Matrix with ones at (perm[x], x).
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (x, &y) in perm.iter().enumerate() {
        m[(y, x)] = C1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{single_site_spin, Axis, Spin};

    #[test]
    fn add_local_matches_kron() {
        let d = 2;
        let l = 4;
        let x = single_site_spin(Spin::HALF, Axis::X);
        let z = single_site_spin(Spin::HALF, Axis::Z);
        let i = CMatrix::identity(2, 2);
        let dens = kron_all(&[&x, &z]);
        let mut got = CMatrix::zeros(16, 16);
        add_local(&mut got, l, d, 3, &dens);
        // wrap: X on site 3, Z on site 0
        let want = kron_all(&[&z, &i, &i, &x]);
        assert!((got - want).camax() < 1e-15);
    }

    #[test]
    fn shift_generates_cyclic_group() {
        let p = shift_permutation(5, 3);
        let mut x: Vec<usize> = (0..p.len()).collect();
        for _ in 0..5 {
            x = x.iter().map(|&i| p[i]).collect();
        }
        assert!(x.iter().enumerate().all(|(i, &v)| i == v));
        // |0,0,0,0,1⟩ (last site in state 1) moves to site 0
        assert_eq!(p[1], 81);
    }
}
