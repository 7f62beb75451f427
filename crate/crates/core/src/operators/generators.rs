use super::site::{single_site_basis, SiteOperatorBasis, Spin};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C0, C1, CI};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub const MAX_SITES: usize = 14;

/// Product generator: nontrivial site operators, identity elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorDescriptor {
    pub sites: Vec<usize>,
    pub site_ops: Vec<usize>,
}

impl GeneratorDescriptor {
    pub fn identity() -> Self {
        GeneratorDescriptor {
            sites: Vec::new(),
            site_ops: Vec::new(),
        }
    }

    /// Builds a descriptor from (site, element) pairs; identity elements (index 0) are dropped.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut p: Vec<(usize, usize)> = pairs.into_iter().filter(|&(_, o)| o != 0).collect();
        p.sort_unstable();
        p.dedup_by_key(|x| x.0);
        GeneratorDescriptor {
            sites: p.iter().map(|x| x.0).collect(),
            site_ops: p.iter().map(|x| x.1).collect(),
        }
    }

    pub fn k_op(&self) -> usize {
        self.sites.len()
    }

    pub fn is_identity(&self) -> bool {
        self.sites.is_empty()
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.k_op()
            .cmp(&other.k_op())
            .then_with(|| self.sites.cmp(&other.sites))
            .then_with(|| self.site_ops.cmp(&other.site_ops))
    }
}

impl PartialOrd for GeneratorDescriptor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GeneratorDescriptor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locality {
    pub k_op: usize,
    pub k_sp: usize,
    pub k_int: usize,
}

impl Locality {
    pub fn max(self, other: Locality) -> Locality {
        Locality {
            k_op: self.k_op.max(other.k_op),
            k_sp: self.k_sp.max(other.k_sp),
            k_int: self.k_int.max(other.k_int),
        }
    }
}

/// Length of the smallest periodic window covering `sites` (sorted).
pub fn minimal_window(sites: &[usize], l: usize) -> usize {
    match sites.len() {
        0 => 0,
        1 => 1,
        n => {
            let mut max_gap = sites[0] + l - sites[n - 1];
            for w in sites.windows(2) {
                max_gap = max_gap.max(w[1] - w[0]);
            }
            l + 1 - max_gap
        }
    }
}

pub fn locality_degrees(desc: &GeneratorDescriptor, l: usize, basis: &SiteOperatorBasis) -> Locality {
    Locality {
        k_op: desc.k_op(),
        k_sp: minimal_window(&desc.sites, l),
        k_int: desc
            .site_ops
            .iter()
            .map(|&o| basis.internal_degree[o] as usize)
            .sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub k_op: usize,
    pub k_sp: usize,
    /// Ignored for spin-1/2; `None` leaves internal degree unbounded.
    #[serde(default)]
    pub k_int: Option<usize>,
}

impl Threshold {
    pub fn new(k_op: usize, k_sp: usize) -> Self {
        Threshold {
            k_op,
            k_sp,
            k_int: None,
        }
    }

    /// (k, k) for T1/T3 and (k, 6) for T2, with k_sp clamped to [k, L].
    pub fn standard(k: usize, l: usize, convention: Convention) -> Self {
        match convention {
            Convention::T2 => Threshold::new(k, 6.min(l).max(k)),
            _ => Threshold::new(k, k),
        }
    }

    pub fn with_k_int(mut self, k_int: usize) -> Self {
        self.k_int = Some(k_int);
        self
    }

    fn admits(&self, loc: Locality, spin: Spin) -> bool {
        let int_ok = spin == Spin::HALF || self.k_int.is_none_or(|k| loc.k_int <= k);
        loc.k_op <= self.k_op && loc.k_sp <= self.k_sp && int_ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Convention {
    T1,
    T2,
    /// T1 with every operator acting nontrivially on all of sites l..l+k-1 removed.
    T3 { removed_site: usize },
    /// First `count` traceless generators in canonical order.
    Prefix { count: usize },
}

/// Easy/hard partition of the generator basis on a periodic chain.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    l: usize,
    basis: SiteOperatorBasis,
    threshold: Threshold,
    convention: Convention,
    identity_easy: bool,
    easy: Vec<GeneratorDescriptor>,
}

pub fn build_generator_set(
    l: usize,
    spin: Spin,
    threshold: Threshold,
    convention: Convention,
) -> Result<GeneratorSet> {
    GeneratorSet::new(l, spin, threshold, convention)
}

impl GeneratorSet {
    pub fn new(l: usize, spin: Spin, threshold: Threshold, convention: Convention) -> Result<Self> {
        if l == 0 || l > MAX_SITES {
            return Err(Error::DimensionTooLarge {
                dim: l,
                limit: MAX_SITES,
            });
        }
        let basis = single_site_basis(spin);
        let d2 = basis.len();
        let easy = match convention {
            Convention::Prefix { count } => {
                let total = (d2 as u128).pow(l as u32) - 1;
                if count as u128 > total {
                    return Err(Error::InvalidThreshold(format!(
                        "prefix of {count} exceeds the {total} traceless generators"
                    )));
                }
                all_descriptors(l, d2).take(count).collect()
            }
            _ => {
                if threshold.k_op < 1 || threshold.k_op > threshold.k_sp || threshold.k_sp > l {
                    return Err(Error::InvalidThreshold(format!(
                        "need 1 <= k_op <= k_sp <= L, got ({}, {}) with L = {l}",
                        threshold.k_op, threshold.k_sp
                    )));
                }
                if let Convention::T3 { removed_site } = convention {
                    if removed_site >= l {
                        return Err(Error::InvalidThreshold(format!(
                            "removed site {removed_site} outside chain of length {l}"
                        )));
                    }
                }
                let mut out = Vec::new();
                for k in 1..=threshold.k_op {
                    for sites in Combinations::new(l, k) {
                        if minimal_window(&sites, l) > threshold.k_sp {
                            continue;
                        }
                        for ops in Assignments::new(d2, k) {
                            let desc = GeneratorDescriptor {
                                sites: sites.clone(),
                                site_ops: ops,
                            };
                            let loc = locality_degrees(&desc, l, &basis);
                            if threshold.admits(loc, spin) && !removed_by(convention, threshold, l, &desc) {
                                out.push(desc);
                            }
                        }
                    }
                }
                out
            }
        };
        Ok(GeneratorSet {
            l,
            basis,
            threshold,
            convention,
            identity_easy: false,
            easy,
        })
    }

    /// Declares the identity easy (it is hard by default).
    pub fn with_identity_easy(mut self, easy: bool) -> Self {
        if easy && !self.identity_easy {
            self.easy.insert(0, GeneratorDescriptor::identity());
        } else if !easy && self.identity_easy {
            self.easy.remove(0);
        }
        self.identity_easy = easy;
        self
    }

    /// Set with no easy generators at all.
    pub fn empty(l: usize, spin: Spin) -> Result<Self> {
        GeneratorSet::new(l, spin, Threshold::new(l, l), Convention::Prefix { count: 0 })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn spin(&self) -> Spin {
        self.basis.spin
    }

    pub fn basis(&self) -> &SiteOperatorBasis {
        &self.basis
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn identity_easy(&self) -> bool {
        self.identity_easy
    }

    /// Hilbert space dimension (2s+1)^L.
    pub fn dim(&self) -> usize {
        self.basis.dim().pow(self.l as u32)
    }

    pub fn n_loc(&self) -> usize {
        self.easy.len()
    }

    pub fn easy(&self) -> &[GeneratorDescriptor] {
        &self.easy
    }

    pub fn is_easy(&self, desc: &GeneratorDescriptor) -> bool {
        if desc.is_identity() {
            return self.identity_easy;
        }
        match self.convention {
            Convention::Prefix { .. } => self.easy.binary_search(desc).is_ok(),
            c => {
                let loc = locality_degrees(desc, self.l, &self.basis);
                self.threshold.admits(loc, self.spin()) && !removed_by(c, self.threshold, self.l, desc)
            }
        }
    }

    pub fn locality(&self, desc: &GeneratorDescriptor) -> Locality {
        locality_degrees(desc, self.l, &self.basis)
    }

    /// All traceless generators in canonical order.
    pub fn all(&self) -> impl Iterator<Item = GeneratorDescriptor> + '_ {
        all_descriptors(self.l, self.basis.len())
    }

    /// Hard traceless generators (the identity is reported separately).
    pub fn hard(&self) -> impl Iterator<Item = GeneratorDescriptor> + '_ {
        self.all().filter(move |d| !self.is_easy(d))
    }

    pub fn operator(&self, desc: &GeneratorDescriptor) -> LocalOperator {
        LocalOperator::new(desc, self.l, &self.basis)
    }

    pub fn easy_operators(&self) -> Vec<LocalOperator> {
        self.easy.iter().map(|d| self.operator(d)).collect()
    }

    pub fn materialize(&self, desc: &GeneratorDescriptor) -> Result<CMatrix> {
        materialize(desc, self.l, &self.basis)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            l: self.l,
            spin: self.spin().value(),
            threshold: self.threshold,
            convention: self.convention,
            identity_easy: self.identity_easy,
            n_loc: self.n_loc(),
            descriptors: self
                .easy
                .iter()
                .map(|d| ManifestEntry {
                    sites: d.sites.clone(),
                    ops: d.site_ops.clone(),
                    locality: self.locality(d),
                })
                .collect(),
        }
    }
}

fn removed_by(c: Convention, t: Threshold, l: usize, desc: &GeneratorDescriptor) -> bool {
    match c {
        Convention::T3 { removed_site } => {
            let k = t.k_op;
            if desc.k_op() != k {
                return false;
            }
            let mut window: Vec<usize> = (0..k).map(|i| (removed_site + i) % l).collect();
            window.sort_unstable();
            desc.sites == window
        }
        _ => false,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sites: Vec<usize>,
    pub ops: Vec<usize>,
    pub locality: Locality,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub l: usize,
    pub spin: f64,
    pub threshold: Threshold,
    pub convention: Convention,
    pub identity_easy: bool,
    pub n_loc: usize,
    pub descriptors: Vec<ManifestEntry>,
}

/// Lexicographic k-subsets of 0..n.
pub struct Combinations {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            cur: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let k = out.len();
        let mut c = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if c[i] < self.n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                self.cur = Some(c);
                break;
            }
        }
        Some(out)
    }
}

/// Odometer over {1..base-1}^k, last position fastest.
pub struct Assignments {
    base: usize,
    cur: Option<Vec<usize>>,
}

impl Assignments {
    pub fn new(base: usize, k: usize) -> Self {
        Assignments {
            base,
            cur: (base > 1).then(|| vec![1; k]),
        }
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let mut c = out.clone();
        let mut i = c.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if c[i] + 1 < self.base {
                c[i] += 1;
                self.cur = Some(c);
                break;
            }
            c[i] = 1;
        }
        Some(out)
    }
}

/// Every traceless product generator on `l` sites with `d2` site elements, canonical order.
pub fn all_descriptors(l: usize, d2: usize) -> impl Iterator<Item = GeneratorDescriptor> {
    (1..=l).flat_map(move |k| {
        Combinations::new(l, k).flat_map(move |sites| {
            Assignments::new(d2, k).map(move |ops| GeneratorDescriptor {
                sites: sites.clone(),
                site_ops: ops,
            })
        })
    })
}

/// Σ_{j≤k} 3^j C(L, j): spin-1/2 generators supported on at most k arbitrary sites.
pub fn spin_half_count(l: usize, k: usize) -> usize {
    let mut binom = 1usize;
    let mut total = 0usize;
    for j in 1..=k.min(l) {
        binom = binom * (l + 1 - j) / j;
        total += 3usize.pow(j as u32) * binom;
    }
    total
}

#[derive(Clone, Copy, Debug)]
struct PauliString {
    flip: usize,
    phase_mask: usize,
    y_count: u32,
}

/// Generator acting on vectors without forming the D×D matrix.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    l: usize,
    d: usize,
    scale: f64,
    factors: Vec<(usize, CMatrix)>,
    pauli: Option<PauliString>,
}

impl LocalOperator {
    pub fn new(desc: &GeneratorDescriptor, l: usize, basis: &SiteOperatorBasis) -> Self {
        let d = basis.dim();
        let scale = (d as f64).powf(-((l - desc.k_op()) as f64) / 2.0);
        let factors = desc
            .sites
            .iter()
            .zip(&desc.site_ops)
            .map(|(&s, &o)| (s, basis.elements[o].clone()))
            .collect();
        let pauli = (basis.spin == Spin::HALF).then(|| {
            let mut p = PauliString {
                flip: 0,
                phase_mask: 0,
                y_count: 0,
            };
            for (&s, &o) in desc.sites.iter().zip(&desc.site_ops) {
                let bit = 1usize << (l - 1 - s);
                match o {
                    1 => p.flip |= bit,
                    2 => {
                        p.flip |= bit;
                        p.phase_mask |= bit;
                        p.y_count += 1;
                    }
                    _ => p.phase_mask |= bit,
                }
            }
            p
        });
        let scale = if pauli.is_some() {
            (d as f64).powf(-(l as f64) / 2.0)
        } else {
            scale
        };
        LocalOperator {
            l,
            d,
            scale,
            factors,
            pauli,
        }
    }

    /// Operator built from explicit site matrices, e.g. Hamiltonian terms.
    pub fn from_factors(l: usize, d: usize, coefficient: f64, factors: Vec<(usize, CMatrix)>) -> Self {
        LocalOperator {
            l,
            d,
            scale: coefficient,
            factors,
            pauli: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.l as u32)
    }

    fn global_phase(&self) -> Complex64 {
        match self.pauli {
            Some(p) => match p.y_count % 4 {
                0 => C1,
                1 => CI,
                2 => -C1,
                _ => -CI,
            },
            None => C1,
        }
    }

    /// out = O v
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        if let Some(p) = self.pauli {
            let g = self.global_phase() * self.scale;
            for (x, &vx) in v.iter().enumerate() {
                let sign = if (x & p.phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                out[x ^ p.flip] = g * sign * vx;
            }
            return;
        }
        out.copy_from_slice(v);
        let mut tmp = vec![C0; self.d];
        for (site, m) in &self.factors {
            let stride = self.d.pow((self.l - 1 - site) as u32);
            let block = stride * self.d;
            for base in (0..out.len()).step_by(block) {
                for inner in 0..stride {
                    for (a, t) in tmp.iter_mut().enumerate() {
                        *t = out[base + inner + a * stride];
                    }
                    for r in 0..self.d {
                        let mut acc = C0;
                        for (c, &t) in tmp.iter().enumerate() {
                            acc += m[(r, c)] * t;
                        }
                        out[base + inner + r * stride] = acc;
                    }
                }
            }
        }
        for x in out.iter_mut() {
            *x *= self.scale;
        }
    }

    /// ⟨v|O|v⟩
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        if let Some(p) = self.pauli {
            let mut acc = C0;
            for (x, &vx) in v.iter().enumerate() {
                let t = v[x ^ p.flip].conj() * vx;
                if (x & p.phase_mask).count_ones() % 2 == 0 {
                    acc += t;
                } else {
                    acc -= t;
                }
            }
            return acc * self.global_phase() * self.scale;
        }
        let mut w = vec![C0; v.len()];
        self.apply(v, &mut w);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }

    /// ⟨u|O|v⟩
    pub fn matrix_element(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mut w = vec![C0; v.len()];
        self.apply(v, &mut w);
        u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        let mut e = vec![C0; n];
        let mut col = vec![C0; n];
        for j in 0..n {
            e[j] = C1;
            self.apply(&e, &mut col);
            e[j] = C0;
            for (i, &c) in col.iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        m
    }
}

pub const MAX_DENSE_DIM: usize = 4096;

pub fn materialize(desc: &GeneratorDescriptor, l: usize, basis: &SiteOperatorBasis) -> Result<CMatrix> {
    let dim = basis.dim().checked_pow(l as u32).unwrap_or(usize::MAX);
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: MAX_DENSE_DIM,
        });
    }
    Ok(LocalOperator::new(desc, l, basis).to_matrix())
}

/// Coefficients Tr[T_a X] over every product generator, indexed by the mixed-radix
/// word (a_0, ..., a_{L-1}) with site 0 most significant.
pub fn expand_operator(x: &CMatrix, l: usize, basis: &SiteOperatorBasis) -> Result<Vec<Complex64>> {
    let d = basis.dim();
    let n = d.pow(l as u32);
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, chain needs {n}",
            x.nrows(),
            x.ncols()
        )));
    }
    let d2 = d * d;
    // pair layout: per-site index p_s = i_s * d + j_s
    let mut cur = vec![C0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj, mut p, mut mult) = (i, j, 0usize, 1usize);
            for _ in 0..l {
                p += ((ii % d) * d + jj % d) * mult;
                ii /= d;
                jj /= d;
                mult *= d2;
            }
            cur[p] = x[(i, j)];
        }
    }
    // e_a contracted as Σ_{ij} (e_a)_{ji} X_{ij}
    let mut trans = vec![C0; d2 * d2];
    for (a, e) in basis.elements.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                trans[a * d2 + i * d + j] = e[(j, i)];
            }
        }
    }
    let mut next = vec![C0; n * n];
    for s in 0..l {
        let stride = d2.pow((l - 1 - s) as u32);
        let block = stride * d2;
        next.par_chunks_mut(block)
            .zip(cur.par_chunks(block))
            .for_each(|(dst, src)| {
                for inner in 0..stride {
                    for a in 0..d2 {
                        let mut acc = C0;
                        for p in 0..d2 {
                            acc += trans[a * d2 + p] * src[inner + p * stride];
                        }
                        dst[inner + a * stride] = acc;
                    }
                }
            });
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Nonzero generator components of `x` (|coefficient| > tol), identity included.
pub fn decompose_operator(
    x: &CMatrix,
    l: usize,
    basis: &SiteOperatorBasis,
    tol: f64,
) -> Result<Vec<(GeneratorDescriptor, Complex64)>> {
    let coeffs = expand_operator(x, l, basis)?;
    let d2 = basis.len();
    let mut out = Vec::new();
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.norm() <= tol {
            continue;
        }
        let mut word = vec![0usize; l];
        let mut r = idx;
        for s in (0..l).rev() {
            word[s] = r % d2;
            r /= d2;
        }
        out.push((GeneratorDescriptor::new(word.into_iter().enumerate()), c));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_product;

    fn desc(p: &[(usize, usize)]) -> GeneratorDescriptor {
        GeneratorDescriptor::new(p.iter().copied())
    }

    #[test]
    fn window_examples() {
        let b = single_site_basis(Spin::HALF);
        let z = b.spin_index(super::super::site::Axis::Z);
        let x = 1;
        let loc = |d: &GeneratorDescriptor| locality_degrees(d, 12, &b);
        assert_eq!(loc(&desc(&[(0, z), (1, z)])), Locality { k_op: 2, k_sp: 2, k_int: 2 });
        assert_eq!(loc(&desc(&[(0, x), (2, x)])), Locality { k_op: 2, k_sp: 3, k_int: 2 });
        assert_eq!(loc(&desc(&[(0, x), (11, x)])), Locality { k_op: 2, k_sp: 2, k_int: 2 });
        assert_eq!(minimal_window(&[0, 4, 8], 12), 9);
    }

    #[test]
    fn counts_at_twelve_sites() {
        let s = GeneratorSet::new(12, Spin::HALF, Threshold::new(2, 12), Convention::T1).unwrap();
        assert_eq!(s.n_loc(), 630);
        assert_eq!(spin_half_count(12, 2), 630);
        let t1 = GeneratorSet::new(12, Spin::HALF, Threshold::new(2, 2), Convention::T1).unwrap();
        assert_eq!(t1.n_loc(), 144);
        for k in 2..=4 {
            let t1 = GeneratorSet::new(12, Spin::HALF, Threshold::new(k, k), Convention::T1).unwrap();
            let t3 = GeneratorSet::new(12, Spin::HALF, Threshold::new(k, k), Convention::T3 { removed_site: 0 })
                .unwrap();
            assert_eq!(t1.n_loc() - t3.n_loc(), 3usize.pow(k as u32));
        }
    }

    #[test]
    fn enumeration_oracle_for_adjacent_pairs() {
        // independent count: L single-site triples plus 9 per periodic bond
        for l in 3..=9 {
            let s = GeneratorSet::new(l, Spin::HALF, Threshold::new(2, 2), Convention::T1).unwrap();
            assert_eq!(s.n_loc(), 3 * l + 9 * l);
        }
    }

    #[test]
    fn full_enumeration_counts() {
        for l in 1..=5 {
            assert_eq!(all_descriptors(l, 4).count(), 4usize.pow(l as u32) - 1);
        }
        assert_eq!(all_descriptors(3, 9).count(), 9usize.pow(3) - 1);
    }

    #[test]
    fn canonical_order_is_sorted() {
        let all: Vec<_> = all_descriptors(4, 4).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], desc(&[(0, 1)]));
    }

    #[test]
    fn t1_inside_t2_and_equal_at_six() {
        let l = 7;
        for k in 2..=6 {
            let t1 = GeneratorSet::new(l, Spin::HALF, Threshold::new(k, k), Convention::T1).unwrap();
            let t2 = GeneratorSet::new(l, Spin::HALF, Threshold::new(k, 6), Convention::T2).unwrap();
            assert!(t1.easy().iter().all(|d| t2.is_easy(d)));
            if k == 6 {
                assert_eq!(t1.n_loc(), t2.n_loc());
            }
        }
    }

    #[test]
    fn rejects_bad_thresholds() {
        assert!(GeneratorSet::new(6, Spin::HALF, Threshold::new(3, 7), Convention::T1).is_err());
        assert!(GeneratorSet::new(6, Spin::HALF, Threshold::new(4, 3), Convention::T1).is_err());
        assert!(GeneratorSet::new(6, Spin::HALF, Threshold::new(0, 3), Convention::T3 { removed_site: 0 }).is_err());
        assert!(GeneratorSet::new(15, Spin::HALF, Threshold::new(2, 2), Convention::T1).is_err());
    }

    #[test]
    fn identity_flag() {
        let s = GeneratorSet::new(4, Spin::HALF, Threshold::new(1, 1), Convention::T1).unwrap();
        assert_eq!(s.n_loc(), 12);
        assert!(!s.is_easy(&GeneratorDescriptor::identity()));
        let s = s.with_identity_easy(true);
        assert_eq!(s.n_loc(), 13);
        assert!(s.is_easy(&GeneratorDescriptor::identity()));
        let id = s.materialize(&GeneratorDescriptor::identity()).unwrap();
        assert!((id - CMatrix::identity(16, 16) * (C1 * 0.25)).camax() < 1e-15);
    }

    #[test]
    fn materialize_by_hand() {
        let b = single_site_basis(Spin::HALF);
        let m = materialize(&desc(&[(0, 3)]), 2, &b).unwrap();
        let want = [0.5, 0.5, -0.5, -0.5];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((m[(i, j)] - C1 * w).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_fast_path_matches_dense() {
        let b = single_site_basis(Spin::HALF);
        for d in all_descriptors(3, 4) {
            let fast = LocalOperator::new(&d, 3, &b).to_matrix();
            let mut slow = LocalOperator::new(&d, 3, &b);
            slow.pauli = None;
            slow.scale = 2f64.powf(-((3 - d.k_op()) as f64) / 2.0);
            assert!((fast - slow.to_matrix()).camax() < 1e-15, "{d:?}");
        }
    }

    #[test]
    fn orthonormal_generators_small_chains() {
        for (l, spin) in [(3, Spin::HALF), (2, Spin::ONE)] {
            let b = single_site_basis(spin);
            let mut all: Vec<_> = all_descriptors(l, b.len()).collect();
            all.insert(0, GeneratorDescriptor::identity());
            let mats: Vec<_> = all.iter().map(|d| materialize(d, l, &b).unwrap()).collect();
            for i in 0..mats.len() {
                assert!(crate::linalg::hermiticity_deviation(&mats[i]) < 1e-14);
                for j in 0..mats.len() {
                    let g = trace_product(&mats[i], &mats[j]);
                    let w = if i == j { 1.0 } else { 0.0 };
                    assert!((g - C1 * w).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn expansion_recovers_generators() {
        let b = single_site_basis(Spin::ONE);
        let d = desc(&[(0, 4), (2, 7)]);
        let m = materialize(&d, 3, &b).unwrap() * (C1 * 2.5);
        let parts = decompose_operator(&m, 3, &b, 1e-12).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, d);
        assert!((parts[0].1 - C1 * 2.5).norm() < 1e-12);
    }

    #[test]
    fn hard_iterator_complements_easy() {
        let s = GeneratorSet::new(4, Spin::HALF, Threshold::new(2, 2), Convention::T3 { removed_site: 1 }).unwrap();
        assert_eq!(s.hard().count() + s.n_loc(), 255);
        assert!(s.easy().iter().all(|d| s.is_easy(d)));
        let p = GeneratorSet::new(4, Spin::HALF, Threshold::new(4, 4), Convention::Prefix { count: 20 }).unwrap();
        assert_eq!(p.n_loc(), 20);
        assert_eq!(p.hard().count(), 235);
    }
}
