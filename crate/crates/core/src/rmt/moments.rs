use super::haar::{haar_unitary_with, haar_vector_with, trial_rng};
use crate::error::{Error, Result};
use crate::operators::GeneratorSet;
use crate::qmatrix::{diagonal_expectations, q_moments};
use crate::linalg::RMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmtPrediction {
    pub d: usize,
    pub n_loc: usize,
    pub identity_easy: bool,
    pub mean_pred: f64,
    pub var_pred: f64,
    pub var_of_mean_pred: f64,
    pub r: f64,
}

impl RmtPrediction {
    /// `n_loc` counts traceless easy generators only.
    pub fn new(d: usize, n_loc: usize, identity_easy: bool) -> Self {
        let df = d as f64;
        let n = n_loc as f64;
        let r = n / (df * df);
        let mean_pred = 1.0 - r - if identity_easy { 1.0 / df } else { 0.0 };
        RmtPrediction {
            d,
            n_loc,
            identity_easy,
            mean_pred,
            var_pred: n / df.powi(3),
            var_of_mean_pred: 2.0 * n / df.powi(5) + 2.0 * n * n / df.powi(6),
            r,
        }
    }

    pub fn for_generators(gens: &GeneratorSet) -> Self {
        let traceless = gens.n_loc() - usize::from(gens.identity_easy());
        RmtPrediction::new(gens.dim(), traceless, gens.identity_easy())
    }
}

/// π·√(Dμλ̄/3).
pub fn plateau_from_mean(mean: f64, mu: f64, d: usize) -> f64 {
    std::f64::consts::PI * (d as f64 * mu * mean / 3.0).sqrt()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn within(estimate: f64, target: f64, se: f64, k: f64) -> bool {
    (estimate - target).abs() <= k * se + 1e-15
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternResult {
    pub label: String,
    /// (i, j, k, l) or (i, j, n, m) depending on the check.
    pub indices: [usize; 4],
    pub predicted: f64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourPointReport {
    pub d: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub band_se: f64,
    pub patterns: Vec<PatternResult>,
    pub pass: bool,
}

type Sampler = dyn Fn(&crate::linalg::CMatrix) -> Complex64 + Sync;
type Pattern = (String, [usize; 4], f64, Box<Sampler>);

/// Full unitaries, or only the first column when every pattern uses column 0.
fn run_patterns(d: usize, n_samples: usize, seed: u64, patterns: Vec<Pattern>, column_only: bool) -> FourPointReport {
    let samples: Vec<Vec<Complex64>> = (0..n_samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let u = if column_only {
                crate::linalg::CMatrix::from_vec(d, 1, haar_vector_with(d, &mut rng))
            } else {
                haar_unitary_with(d, &mut rng)
            };
            patterns.iter().map(|p| (p.3)(&u)).collect()
        })
        .collect();
    let band = 3.0;
    let results: Vec<PatternResult> = patterns
        .iter()
        .enumerate()
        .map(|(k, (label, idx, pred, _))| {
            let re: Vec<f64> = samples.iter().map(|s| s[k].re).collect();
            let im: Vec<f64> = samples.iter().map(|s| s[k].im).collect();
            let (mr, sr) = mean_se(&re);
            let (mi, si) = mean_se(&im);
            PatternResult {
                label: label.clone(),
                indices: *idx,
                predicted: *pred,
                estimate_re: mr,
                estimate_im: mi,
                se_re: sr,
                se_im: si,
                pass: within(mr, *pred, sr, band) && within(mi, 0.0, si, band),
            }
        })
        .collect();
    FourPointReport {
        d,
        n_samples,
        seed,
        band_se: band,
        pass: results.iter().all(|r| r.pass),
        patterns: results,
    }
}

/// ⟨|ψ_i^n|²⟩ = 1/D.
pub fn first_moment_check(d: usize, n_samples: usize, seed: u64) -> Result<FourPointReport> {
    if d < 1 {
        return Err(Error::DimensionMismatch("D must be at least 1".into()));
    }
    let p: Vec<Pattern> = vec![(
        "|psi_0^0|^2".into(),
        [0, 0, 0, 0],
        1.0 / d as f64,
        Box::new(|u| Complex64::new(u[(0, 0)].norm_sqr(), 0.0)),
    )];
    Ok(run_patterns(d, n_samples, seed, p, false))
}

/// ⟨(ψ_i^n)* ψ_j^m⟩ = δ_ij δ_nm / D.
pub fn two_point_check(d: usize, n_samples: usize, seed: u64) -> Result<FourPointReport> {
    if d < 2 {
        return Err(Error::DimensionMismatch("two-point check needs D >= 2".into()));
    }
    let inv = 1.0 / d as f64;
    let mk = |i: usize, j: usize, n: usize, m: usize| -> Box<Sampler> {
        Box::new(move |u| u[(i, n)].conj() * u[(j, m)])
    };
    let p: Vec<Pattern> = vec![
        ("i=j, n=m".into(), [1, 1, 0, 0], inv, mk(1, 1, 0, 0)),
        ("i!=j, n=m".into(), [0, 1, 0, 0], 0.0, mk(0, 1, 0, 0)),
        ("i=j, n!=m".into(), [0, 0, 0, 1], 0.0, mk(0, 0, 0, 1)),
        ("i!=j, n!=m".into(), [0, 1, 1, 0], 0.0, mk(0, 1, 1, 0)),
    ];
    Ok(run_patterns(d, n_samples, seed, p, false))
}

/// ⟨(ψ_i^n)*(ψ_k^n)* ψ_j^n ψ_l^n⟩ = (δ_ij δ_kl + δ_il δ_kj) / (D(D+1)), single column n = 0.
pub fn four_point_check(d: usize, n_samples: usize, seed: u64) -> Result<FourPointReport> {
    if d < 2 {
        return Err(Error::DimensionMismatch("four-point check needs D >= 2".into()));
    }
    let norm = 1.0 / (d as f64 * (d as f64 + 1.0));
    let pred = |i: usize, j: usize, k: usize, l: usize| {
        (f64::from(u8::from(i == j && k == l)) + f64::from(u8::from(i == l && k == j))) * norm
    };
    let mk = |i: usize, j: usize, k: usize, l: usize| -> Box<Sampler> {
        Box::new(move |u| u[(i, 0)].conj() * u[(k, 0)].conj() * u[(j, 0)] * u[(l, 0)])
    };
    let mut cases = vec![
        ("i=j=k=l", [0, 0, 0, 0]),
        ("i=j, k=l", [0, 0, 1, 1]),
        ("i=l, k=j", [0, 1, 1, 0]),
    ];
    if d >= 3 {
        cases.push(("non-matching", [0, 1, 2, 2]));
    } else {
        cases.push(("non-matching", [0, 1, 0, 0]));
    }
    let p = cases
        .into_iter()
        .map(|(label, [i, j, k, l])| (label.to_string(), [i, j, k, l], pred(i, j, k, l), mk(i, j, k, l)))
        .collect();
    Ok(run_patterns(d, n_samples, seed, p, true))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub prediction: RmtPrediction,
    pub n_trials: usize,
    pub seed: u64,
    pub trial_means: Vec<f64>,
    pub trial_variances: Vec<f64>,
    pub mean_emp: f64,
    pub mean_se: f64,
    /// |⟨λ̄⟩ − mean_pred| in units of √var_of_mean_pred.
    pub mean_deviation_sd: f64,
    pub mean_pass: bool,
    pub var_emp: f64,
    pub var_ratio: f64,
    pub var_pass: bool,
    pub var_of_mean_emp: f64,
    pub var_of_mean_ratio: f64,
    pub var_of_mean_order_ok: bool,
    /// Largest |Tr(T_a T_b)|/D off the diagonal among easy generators, which the
    /// leading-order formulas take to be zero.
    pub max_trace_overlap: f64,
    pub warnings: Vec<String>,
}

/// Q moments over Haar-random eigenbases, one independent RNG stream per trial.
pub fn verify_moments(gens: &GeneratorSet, n_trials: usize, seed: u64) -> Result<MomentReport> {
    if n_trials < 2 {
        return Err(Error::DimensionMismatch("need at least 2 trials".into()));
    }
    let d = gens.dim();
    let pred = RmtPrediction::for_generators(gens);
    let moments: Vec<(f64, f64)> = (0..n_trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let u = haar_unitary_with(d, &mut trial_rng(seed, t as u64));
            let m = diagonal_expectations(&u, gens)?;
            let q = RMatrix::identity(d, d) - m.tr_mul(&m);
            let mo = q_moments(&q);
            Ok((mo.mean, mo.variance))
        })
        .collect::<Result<_>>()?;
    let trial_means: Vec<f64> = moments.iter().map(|m| m.0).collect();
    let trial_variances: Vec<f64> = moments.iter().map(|m| m.1).collect();
    let (mean_emp, mean_se) = mean_se(&trial_means);
    let sd_pred = pred.var_of_mean_pred.sqrt();
    let mean_deviation_sd = (mean_emp - pred.mean_pred).abs() / sd_pred;
    let var_emp = trial_variances.iter().sum::<f64>() / n_trials as f64;
    let var_ratio = var_emp / pred.var_pred;
    let var_of_mean_emp = mean_se * mean_se * n_trials as f64;
    let var_of_mean_ratio = var_of_mean_emp / pred.var_of_mean_pred;
    let max_trace_overlap = trace_overlap(gens);
    let mut warnings = Vec::new();
    if max_trace_overlap > 1e-9 {
        warnings.push(format!(
            "easy generators are not trace-orthogonal (max overlap {max_trace_overlap:.3e}); leading-order predictions may not apply"
        ));
    }
    Ok(MomentReport {
        prediction: pred,
        n_trials,
        seed,
        trial_means,
        trial_variances,
        mean_emp,
        mean_se,
        mean_deviation_sd,
        mean_pass: mean_deviation_sd < 5.0,
        var_emp,
        var_ratio,
        var_pass: (0.2..=5.0).contains(&var_ratio),
        var_of_mean_emp,
        var_of_mean_ratio,
        var_of_mean_order_ok: (0.1..=10.0).contains(&var_of_mean_ratio),
        max_trace_overlap,
        warnings,
    })
}

/// Tr(T_a T_b) over the first few easy generators; skipped above D = 1024.
fn trace_overlap(gens: &GeneratorSet) -> f64 {
    let ops = gens.easy_operators();
    let d = gens.dim();
    if d > 1024 {
        return 0.0;
    }
    let take = ops.len().min(12);
    let mut worst: f64 = 0.0;
    for a in 0..take {
        for b in 0..take {
            if a == b {
                continue;
            }
            let mut tr = Complex64::new(0.0, 0.0);
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            let mut out = vec![Complex64::new(0.0, 0.0); d];
            for x in 0..d {
                e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                e[x] = Complex64::new(1.0, 0.0);
                ops[b].apply(&e, &mut out);
                tr += ops[a].matrix_element(&e, &out);
            }
            worst = worst.max(tr.norm());
        }
    }
    worst
}
