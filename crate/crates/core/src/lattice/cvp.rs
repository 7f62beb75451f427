use super::LatticeContext;
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};
use serde::{Deserialize, Serialize};

pub const MAX_ORACLE_DIM: usize = 8;
pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CvpMethod {
    #[serde(rename = "rounding")]
    Rounding,
    #[serde(rename = "babai")]
    Babai,
    #[serde(rename = "babai+greedy")]
    BabaiGreedy,
    #[serde(rename = "brute")]
    Brute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvpSolution<T> {
    pub k: Vec<i64>,
    pub value: T,
    pub method: CvpMethod,
}

/// Each stage keeps the best point found so far, so values never increase
/// from one stage to the next.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagedSolution<T> {
    pub rounding: CvpSolution<T>,
    pub babai: CvpSolution<T>,
    pub greedy: CvpSolution<T>,
    pub brute: Option<CvpSolution<T>>,
}

impl<T> StagedSolution<T> {
    pub fn best(&self) -> &CvpSolution<T> {
        self.brute.as_ref().unwrap_or(&self.greedy)
    }
}

struct Shifted<T> {
    k0: Vec<i64>,
    /// x − 2πk0
    xs: Vec<T>,
}

impl<T: Real> LatticeContext<T> {
    fn shift(&self, x: &[T]) -> Shifted<T> {
        assert_eq!(x.len(), self.d, "target dimension");
        let tp = T::two_pi();
        let k0: Vec<i64> = x.iter().map(|&v| (v / tp).round_to_i64()).collect();
        let xs = x.iter().zip(&k0).map(|(&v, &k)| v - tp * T::lit(k as f64)).collect();
        Shifted { k0, xs }
    }

    fn solution(&self, s: &Shifted<T>, dk: &[i64], method: CvpMethod) -> CvpSolution<T> {
        CvpSolution {
            k: s.k0.iter().zip(dk).map(|(a, b)| a + b).collect(),
            value: self.value_of(&s.xs, dk),
            method,
        }
    }

    fn z_to_k(&self, z: &[i64]) -> Vec<i64> {
        let mut dk = vec![0i64; self.d];
        for (zj, col) in z.iter().zip(&self.transform) {
            if *zj != 0 {
                for (a, &u) in dk.iter_mut().zip(col) {
                    *a += zj * u;
                }
            }
        }
        dk
    }

    /// Coordinatewise nearest integer of x/2π, ties away from zero.
    pub fn rounding(&self, x: &[T]) -> CvpSolution<T> {
        let s = self.shift(x);
        self.solution(&s, &vec![0; self.d], CvpMethod::Rounding)
    }

    /// Nearest plane from b_{D-1} down to b_0 on the current basis.
    pub fn babai_nearest_plane(&self, x: &[T]) -> CvpSolution<T> {
        let s = self.shift(x);
        let tp = T::two_pi();
        let mut y: Vec<T> = self.apply_embedding(&s.xs).into_iter().map(|v| v / tp).collect();
        let mut z = vec![0i64; self.d];
        for i in (0..self.d).rev() {
            let c = (dot(&y, &self.gso.vectors[i]) / self.gso.norms_sq[i]).round();
            if c != T::zero() {
                for (a, &b) in y.iter_mut().zip(&self.basis[i]) {
                    *a = *a - c * b;
                }
                z[i] = c.round_to_i64();
            }
        }
        self.solution(&s, &self.z_to_k(&z), CvpMethod::Babai)
    }

    /// Repeatedly applies the single basis move k += c·U_i with the largest decrease.
    pub fn greedy_refine(&self, x: &[T], start: &CvpSolution<T>) -> CvpSolution<T> {
        let s = self.shift(x);
        let tp = T::two_pi();
        let mut dk: Vec<i64> = start.k.iter().zip(&s.k0).map(|(a, b)| a - b).collect();
        let r: Vec<T> = s.xs.iter().zip(&dk).map(|(&v, &k)| (v - tp * T::lit(k as f64)) / tp).collect();
        let e = self.apply_embedding(&r);
        let mut g: Vec<T> = self.basis.iter().map(|b| dot(&e, b)).collect();
        let mut nsq = dot(&e, &e);
        let eps = T::lit(1e-13);
        for _ in 0..100_000 {
            let mut best: Option<(usize, T, T)> = None;
            for i in 0..self.d {
                let gii = self.basis_gram[i][i];
                let c = (g[i] / gii).round();
                if c == T::zero() {
                    continue;
                }
                let gain = T::lit(2.0) * c * g[i] - c * c * gii;
                if best.is_none_or(|(_, _, bg)| gain > bg) {
                    best = Some((i, c, gain));
                }
            }
            let Some((i, c, gain)) = best else { break };
            if gain <= eps * nsq.max(T::min_positive_value()) {
                break;
            }
            let ci = c.round_to_i64();
            for (a, &u) in dk.iter_mut().zip(&self.transform[i]) {
                *a += ci * u;
            }
            for (gj, row) in g.iter_mut().zip(&self.basis_gram) {
                *gj = *gj - c * row[i];
            }
            nsq = nsq - gain;
        }
        let out = self.solution(&s, &dk, CvpMethod::BabaiGreedy);
        if out.value < start.value {
            out
        } else {
            CvpSolution {
                k: start.k.clone(),
                value: start.value,
                method: CvpMethod::BabaiGreedy,
            }
        }
    }

    /// Exact CVP by sphere enumeration over the current basis, with the radius
    /// set by the best heuristic point. Every lattice point inside that radius
    /// is visited, so the result is the global minimum.
    pub fn brute_force_cvp(&self, x: &[T], node_budget: Option<u64>) -> Result<CvpSolution<T>> {
        if self.d > MAX_ORACLE_DIM {
            return Err(Error::OracleDimension {
                dim: self.d,
                max: MAX_ORACLE_DIM,
            });
        }
        let start = self.greedy_refine(x, &self.babai_nearest_plane(x));
        let start = if start.value <= self.rounding(x).value {
            start
        } else {
            self.rounding(x)
        };
        self.enumerate(x, start, node_budget.unwrap_or(DEFAULT_NODE_BUDGET))
    }

    fn enumerate(&self, x: &[T], start: CvpSolution<T>, budget: u64) -> Result<CvpSolution<T>> {
        let n = self.d;
        let s = self.shift(x);
        let tp = T::two_pi();
        let y: Vec<T> = self.apply_embedding(&s.xs).into_iter().map(|v| v / tp).collect();
        let t: Vec<T> = (0..n)
            .map(|j| dot(&y, &self.gso.vectors[j]) / self.gso.norms_sq[j])
            .collect();
        let best_dk: Vec<i64> = start.k.iter().zip(&s.k0).map(|(a, b)| a - b).collect();
        let mut st = Enumeration {
            ctx: self,
            xs: &s.xs,
            t,
            z: vec![0; n],
            best_value: start.value,
            best_dk,
            radius_sq: T::zero(),
            nodes: 0,
            budget,
        };
        st.set_radius();
        st.descend(n - 1, T::zero())?;
        Ok(CvpSolution {
            k: s.k0.iter().zip(&st.best_dk).map(|(a, b)| a + b).collect(),
            value: st.best_value,
            method: CvpMethod::Brute,
        })
    }

    /// Rounding, then Babai, then greedy, each keeping the best point so far;
    /// optionally followed by exact enumeration.
    pub fn solve_staged(&self, x: &[T], with_brute: bool) -> Result<StagedSolution<T>> {
        let rounding = self.rounding(x);
        let mut babai = self.babai_nearest_plane(x);
        if rounding.value <= babai.value {
            babai.k = rounding.k.clone();
            babai.value = rounding.value;
        }
        let greedy = self.greedy_refine(x, &babai);
        let brute = if with_brute {
            Some(self.enumerate(x, greedy.clone(), DEFAULT_NODE_BUDGET)?)
        } else {
            None
        };
        Ok(StagedSolution {
            rounding,
            babai,
            greedy,
            brute,
        })
    }

    /// min_k ‖x − 2πk‖_G by the staged heuristic.
    pub fn bounded_value(&self, x: &[T]) -> T {
        let rounding = self.rounding(x);
        let babai = self.babai_nearest_plane(x);
        let start = if rounding.value <= babai.value { rounding } else { babai };
        self.greedy_refine(x, &start).value
    }
}

struct Enumeration<'a, T> {
    ctx: &'a LatticeContext<T>,
    xs: &'a [T],
    /// target coordinates on the GSO vectors
    t: Vec<T>,
    z: Vec<i64>,
    best_value: T,
    best_dk: Vec<i64>,
    radius_sq: T,
    nodes: u64,
    budget: u64,
}

impl<T: Real> Enumeration<'_, T> {
    fn set_radius(&mut self) {
        let r = self.best_value / T::two_pi();
        self.radius_sq = r * r * (T::one() + T::lit(1e-9)) + T::epsilon();
    }

    /// Visits every z_level whose partial squared distance stays inside the radius,
    /// nearest candidates first.
    fn descend(&mut self, level: usize, partial: T) -> Result<()> {
        let gso = &self.ctx.gso;
        let mut c = self.t[level];
        for i in level + 1..self.z.len() {
            c = c - gso.mu[i][level] * T::lit(self.z[i] as f64);
        }
        let b = gso.norms_sq[level];
        let c0 = c.round_to_i64();
        for dir in [1i64, -1] {
            let mut zl = if dir == 1 { c0 } else { c0 - 1 };
            loop {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::BoxTooLarge(self.nodes as u128));
                }
                let diff = c - T::lit(zl as f64);
                let here = partial + b * diff * diff;
                if here > self.radius_sq {
                    break;
                }
                self.z[level] = zl;
                if level == 0 {
                    let dk = self.ctx.z_to_k(&self.z);
                    let v = self.ctx.value_of(self.xs, &dk);
                    if v < self.best_value {
                        self.best_value = v;
                        self.best_dk = dk;
                        self.set_radius();
                    }
                } else {
                    self.descend(level - 1, here)?;
                }
                zl += dir;
            }
        }
        self.z[level] = 0;
        Ok(())
    }
}
