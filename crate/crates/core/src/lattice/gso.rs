use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, Real};

/// Gram-Schmidt data of an ordered list of basis vectors.
#[derive(Clone, Debug)]
pub struct Gso<T> {
    /// b_i*
    pub vectors: Vec<Vec<T>>,
    /// ‖b_i*‖²
    pub norms_sq: Vec<T>,
    /// mu[i][j] = ⟨b_i, b_j*⟩/‖b_j*‖² for j < i
    pub mu: Vec<Vec<T>>,
}

impl<T: Real> Gso<T> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn norms(&self) -> Vec<T> {
        self.norms_sq.iter().map(|b| b.sqrt()).collect()
    }

    /// Recomputes row `k` by modified Gram-Schmidt against rows 0..k.
    pub(crate) fn update_row(&mut self, basis: &[Vec<T>], k: usize) -> Result<()> {
        let mut v = basis[k].clone();
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let m = dot(&v, &self.vectors[j]) / self.norms_sq[j];
            axpy(-m, &self.vectors[j], &mut v);
            row.push(m);
        }
        let nsq = dot(&v, &v);
        let scale = dot(&basis[k], &basis[k]);
        if !(nsq > scale * T::epsilon() * T::epsilon()) || !nsq.is_finite() {
            return Err(Error::RankDeficient);
        }
        if k < self.vectors.len() {
            self.vectors[k] = v;
            self.norms_sq[k] = nsq;
            self.mu[k] = row;
        } else {
            self.vectors.push(v);
            self.norms_sq.push(nsq);
            self.mu.push(row);
        }
        Ok(())
    }
}

/// GSO of `basis` in order.
pub fn gram_schmidt<T: Real>(basis: &[Vec<T>]) -> Result<Gso<T>> {
    let n = basis.len();
    if let Some(b) = basis.iter().find(|b| b.len() != basis[0].len()) {
        return Err(Error::DimensionMismatch(format!(
            "basis vectors of lengths {} and {}",
            basis[0].len(),
            b.len()
        )));
    }
    let mut gso = Gso {
        vectors: Vec::with_capacity(n),
        norms_sq: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
    };
    for k in 0..n {
        gso.update_row(basis, k)?;
    }
    Ok(gso)
}
