use super::{random_q, LatticeContext, DEFAULT_DELTA, MAX_ORACLE_DIM};
use crate::error::{Error, Result};
use crate::rmt::trial_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BENCH_MU: f64 = 16.0;
pub const RATIO_THRESHOLD: f64 = 1.1;
pub const RATIO_FRACTION: f64 = 0.9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvpInstance {
    pub index: usize,
    pub d: usize,
    pub rounding: f64,
    pub babai: f64,
    pub greedy: f64,
    pub brute: f64,
    /// greedy / brute
    pub ratio: f64,
    pub sandwich: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvpBenchReport {
    pub dims: Vec<usize>,
    pub mu: f64,
    pub seed: u64,
    pub violations: usize,
    pub within_ratio: f64,
    pub pass: bool,
    pub instances: Vec<CvpInstance>,
}

/// Random metrics I + (μ-1)Q with Q = V diag(U[0,1]) Vᵀ, LLL-reduced, with targets
/// uniform in [-50, 50]^D; instance i uses dimension dims[i mod len].
pub fn cvp_bench(dims: &[usize], n_instances: usize, mu: f64, seed: u64) -> Result<CvpBenchReport> {
    if dims.is_empty() {
        return Err(Error::DimensionMismatch("no dimensions given".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d > MAX_ORACLE_DIM || d == 0) {
        return Err(Error::OracleDimension {
            dim: d,
            max: MAX_ORACLE_DIM,
        });
    }
    let instances = (0..n_instances)
        .into_par_iter()
        .map(|i| -> Result<CvpInstance> {
            let d = dims[i % dims.len()];
            let mut rng = trial_rng(seed, i as u64);
            let mut ctx = LatticeContext::<f64>::embed(&random_q(d, &mut rng), mu)?;
            ctx.lll_reduce(DEFAULT_DELTA)?;
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-50.0..50.0)).collect();
            let s = ctx.solve_staged(&x, true)?;
            let brute = s.brute.as_ref().map_or(f64::NAN, |b| b.value);
            let ratio = if brute > 0.0 { s.greedy.value / brute } else { 1.0 };
            Ok(CvpInstance {
                index: i,
                d,
                rounding: s.rounding.value,
                babai: s.babai.value,
                greedy: s.greedy.value,
                brute,
                ratio,
                sandwich: s.rounding.value >= s.babai.value && s.babai.value >= s.greedy.value && s.greedy.value >= brute,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = instances.iter().filter(|i| !i.sandwich).count();
    let within = instances.iter().filter(|i| i.ratio <= RATIO_THRESHOLD).count();
    let within_ratio = within as f64 / n_instances.max(1) as f64;
    Ok(CvpBenchReport {
        dims: dims.to_vec(),
        mu,
        seed,
        violations,
        within_ratio,
        pass: violations == 0 && within_ratio >= RATIO_FRACTION,
        instances,
    })
}
