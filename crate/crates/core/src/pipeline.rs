//! Complexity curves over a time window and plateau statistics.

use crate::error::{Error, Result};
use crate::fingerprint;
use crate::linalg::CMatrix;
use crate::lattice::{LatticeContext, LllReport, DEFAULT_DELTA};
use crate::models::{build_hamiltonian, default_presplit, normalize_hamiltonian, symmetry_operator, ModelSpec, SymmetryKind};
use crate::operators::{Convention, GeneratorSet, Threshold};
use crate::qmatrix::{QMatrix, DEFAULT_KERNEL_TOL};
use crate::rmt::plateau_from_mean;
use crate::scalar::Real;
use crate::spectral::{diagonalize, preferred_basis, presplit, SpectralDecomposition};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative difference of the window halves above which the window is flagged.
pub const STATIONARITY_WARN: f64 = 0.10;
/// Relative difference of the window halves accepted as a stable plateau.
pub const STATIONARITY_STABLE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Defaults to D.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "yes")]
    pub clip_to_linear: bool,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn yes() -> bool {
    true
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            t_start: 5e5,
            t_end: 6e5,
            dt: 1e3,
            mu: None,
            clip_to_linear: true,
            delta: DEFAULT_DELTA,
        }
    }
}

impl CurveConfig {
    /// Window for full-size runs at D = 4096.
    pub fn long_run() -> Self {
        CurveConfig {
            t_start: 5e7,
            t_end: 6e7,
            dt: 1e4,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0 && self.t_end > self.t_start && self.dt > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidTimeGrid(format!(
                "need t_end > t_start > 0 and dt > 0, got [{}, {}] step {}",
                self.t_start, self.t_end, self.dt
            )));
        }
        if (self.t_end - self.t_start) / self.dt > 1e7 {
            return Err(Error::InvalidTimeGrid("more than 10^7 time samples".into()));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 1.0) {
                return Err(Error::InvalidPenalty(mu));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let n = ((self.t_end - self.t_start) / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|i| self.t_start + i as f64 * self.dt).collect()
    }
}

/// min_k ‖tE − 2πk‖ by coordinatewise rounding.
pub fn biinvariant_at<T: Real>(e: &[T], t: T) -> T {
    let tp = T::two_pi();
    e.iter()
        .map(|&v| {
            let x = v * t;
            let r = x - tp * (x / tp).round();
            r * r
        })
        .sum::<T>()
        .sqrt()
}

/// Bounded complexity at time t on a frozen lattice; with `clip`, never above the k = 0 value.
pub fn bounded_at<T: Real>(e: &[T], ctx: &LatticeContext<T>, t: T, clip: bool) -> T {
    let x: Vec<T> = e.iter().map(|&v| v * t).collect();
    let v = ctx.bounded_value(&x);
    if clip {
        v.min(t * ctx.norm(e))
    } else {
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauStats {
    pub mean: f64,
    pub std: f64,
    /// std/√n
    pub se: f64,
    pub n: usize,
    pub first_half_mean: f64,
    pub second_half_mean: f64,
    /// |first − second| / mean
    pub half_difference: f64,
    pub stable: bool,
    pub stationary_warning: bool,
}

pub fn plateau_sample(values: &[f64]) -> PlateauStats {
    let n = values.len();
    let mean_of = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let mean = mean_of(values);
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (a, b) = values.split_at(n / 2);
    let first = mean_of(a);
    let second = mean_of(b);
    let half_difference = if n < 2 {
        0.0
    } else if mean == 0.0 {
        (first - second).abs()
    } else {
        (first - second).abs() / mean.abs()
    };
    PlateauStats {
        mean,
        std,
        se: if n > 0 { std / (n as f64).sqrt() } else { f64::NAN },
        n,
        first_half_mean: first,
        second_half_mean: second,
        half_difference,
        stable: half_difference <= STATIONARITY_STABLE,
        stationary_warning: half_difference > STATIONARITY_WARN,
    }
}

/// Bounded and bi-invariant values on `times`, evaluated in parallel.
pub fn sample_curve<T: Real>(e: &[T], ctx: &LatticeContext<T>, times: &[f64], clip: bool) -> (Vec<f64>, Vec<f64>) {
    times
        .par_iter()
        .map(|&t| {
            let tt = T::lit(t);
            (
                bounded_at(e, ctx, tt, clip).to_f64().unwrap_or(f64::NAN),
                biinvariant_at(e, tt).to_f64().unwrap_or(f64::NAN),
            )
        })
        .unzip()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimators {
    /// π/√3 (Σ‖b_i*‖²)^{1/2} on the reduced basis.
    pub gso: f64,
    /// π√(Dμλ̄/3)
    pub mean: f64,
    pub biinvariant: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CurveProvenance {
    pub config_hash: String,
    pub hamiltonian_hash: String,
    pub basis_hash: String,
    pub q_hash: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub biinvariant: Vec<f64>,
    pub plateau: PlateauStats,
    pub biinvariant_plateau: PlateauStats,
    pub estimators: Estimators,
    pub provenance: CurveProvenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub curve: CurveConfig,
    /// None selects the model's default list.
    #[serde(default)]
    pub presplit: Option<Vec<SymmetryKind>>,
    #[serde(default = "yes")]
    pub preferred_basis: bool,
    #[serde(default = "default_kernel_tol")]
    pub kernel_tol: f64,
}

fn default_kernel_tol() -> f64 {
    DEFAULT_KERNEL_TOL
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            curve: CurveConfig::default(),
            presplit: None,
            preferred_basis: true,
            kernel_tol: DEFAULT_KERNEL_TOL,
        }
    }
}

impl ExperimentConfig {
    pub fn hash(&self) -> String {
        fingerprint::hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// Normalized Hamiltonian and its presplit eigenbasis.
#[derive(Clone, Debug)]
pub struct Eigenbasis {
    pub spec: ModelSpec,
    pub hamiltonian: CMatrix,
    pub decomposition: SpectralDecomposition,
    pub presplit: Vec<SymmetryKind>,
    pub hamiltonian_hash: String,
}

/// Eigenbasis and Q for a model, before the lattice stage.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub spec: ModelSpec,
    pub decomposition: SpectralDecomposition,
    pub q: QMatrix,
    pub presplit: Vec<SymmetryKind>,
    pub enlarged_kernel_dim: Option<usize>,
    pub hamiltonian_hash: String,
    pub warnings: Vec<String>,
}

/// build model → normalize → diagonalize → presplit
pub fn eigenbasis(spec: &ModelSpec, config: &ExperimentConfig) -> Result<Eigenbasis> {
    spec.validate().map_err(Error::at("model"))?;
    let h = build_hamiltonian(spec).map_err(Error::at("hamiltonian"))?;
    let (h, _) = normalize_hamiltonian(&h).map_err(Error::at("normalize"))?;
    let hamiltonian_hash = fingerprint::complex_matrix(&h);
    let dec = diagonalize(&h).map_err(Error::at("diagonalize"))?;
    let kinds = config.presplit.clone().unwrap_or_else(|| default_presplit(spec));
    let ops = kinds
        .iter()
        .map(|&k| symmetry_operator(spec, k))
        .collect::<Result<Vec<_>>>()
        .map_err(Error::at("presplit"))?;
    let dec = presplit(&dec, &ops).map_err(Error::at("presplit"))?;
    Ok(Eigenbasis {
        spec: *spec,
        hamiltonian: h,
        decomposition: dec,
        presplit: kinds,
        hamiltonian_hash,
    })
}

/// preferred basis → Q on an existing eigenbasis
pub fn prepare_with(basis: &Eigenbasis, gens: &GeneratorSet, config: &ExperimentConfig) -> Result<Prepared> {
    let spec = &basis.spec;
    if gens.l() != spec.l || gens.spin() != spec.spin() {
        return Err(Error::at("generators")(Error::DimensionMismatch(format!(
            "generator set is for L = {} spin {}, model has L = {} spin {}",
            gens.l(),
            gens.spin().value(),
            spec.l,
            spec.spin().value()
        ))));
    }
    let dec = &basis.decomposition;
    let (dec, q, enlarged, warnings) = if config.preferred_basis {
        let r = preferred_basis(dec, gens).map_err(Error::at("preferred basis"))?;
        (r.decomposition, r.q, Some(r.enlarged_kernel_dim), r.warnings)
    } else {
        let q = crate::qmatrix::build_q(dec, gens).map_err(Error::at("q matrix"))?;
        (dec.clone(), q, None, Vec::new())
    };
    Ok(Prepared {
        spec: *spec,
        decomposition: dec,
        q: q.with_kernel_tol(config.kernel_tol),
        presplit: basis.presplit.clone(),
        enlarged_kernel_dim: enlarged,
        hamiltonian_hash: basis.hamiltonian_hash.clone(),
        warnings,
    })
}

/// build model → normalize → diagonalize → presplit → preferred basis → Q
pub fn prepare(spec: &ModelSpec, gens: &GeneratorSet, config: &ExperimentConfig) -> Result<Prepared> {
    if gens.l() != spec.l {
        return Err(Error::at("generators")(Error::DimensionMismatch(format!(
            "generator set is for L = {}, model has L = {}",
            gens.l(),
            spec.l
        ))));
    }
    prepare_with(&eigenbasis(spec, config)?, gens, config)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub spec: ModelSpec,
    pub threshold: Threshold,
    pub convention: Convention,
    pub identity_easy: bool,
    pub n_loc: usize,
    pub mu: f64,
    pub d: usize,
    pub kernel_dim: usize,
    pub lambda_bar: f64,
    pub lambda_var: f64,
    pub c_sat: f64,
    pub c_sat_std: f64,
    pub c_sat_se: f64,
    pub c_est_gso: f64,
    pub c_est_mean: f64,
    pub c_biinv: f64,
    pub stationary_warning: bool,
    pub lll: LllReport,
    pub experiment_hash: String,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub prepared: Prepared,
    pub curve: ComplexityCurve,
    pub lattice: LatticeContext<f64>,
    pub summary: Summary,
}

/// Runs the whole chain; deterministic for a given config.
pub fn run_experiment(spec: &ModelSpec, gens: &GeneratorSet, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.curve.validate().map_err(Error::at("config"))?;
    let prepared = prepare(spec, gens, config)?;
    let d = prepared.decomposition.dim();
    let mu = config.curve.mu.unwrap_or(d as f64);
    let mut ctx = LatticeContext::<f64>::embed(prepared.q.matrix(), mu).map_err(Error::at("embed"))?;
    let lll = ctx.lll_reduce(config.curve.delta).map_err(Error::at("lll"))?;
    let mut warnings = prepared.warnings.clone();
    if !lll.converged {
        warnings.push(format!("LLL stopped after {} iterations without converging", lll.iterations));
    }
    let e = &prepared.decomposition.energies;
    let times = config.curve.times();
    let (values, biinv) = sample_curve(e, &ctx, &times, config.curve.clip_to_linear);
    let plateau = plateau_sample(&values);
    if plateau.stationary_warning {
        warnings.push(format!(
            "window halves differ by {:.1}%; plateau may not be reached",
            100.0 * plateau.half_difference
        ));
    }
    let moments = prepared.q.moments();
    let estimators = Estimators {
        gso: ctx.plateau_estimate(),
        mean: plateau_from_mean(moments.mean, mu, d),
        biinvariant: std::f64::consts::PI * (d as f64 / 3.0).sqrt(),
    };
    let provenance = CurveProvenance {
        config_hash: config.hash(),
        hamiltonian_hash: prepared.hamiltonian_hash.clone(),
        basis_hash: fingerprint::complex_matrix(&prepared.decomposition.vectors),
        q_hash: fingerprint::real_matrix(prepared.q.matrix()),
    };
    let biinvariant_plateau = plateau_sample(&biinv);
    let summary = Summary {
        model: spec.name().to_string(),
        spec: *spec,
        threshold: gens.threshold(),
        convention: gens.convention(),
        identity_easy: gens.identity_easy(),
        n_loc: gens.n_loc(),
        mu,
        d,
        kernel_dim: prepared.q.kernel_dim(),
        lambda_bar: moments.mean,
        lambda_var: moments.variance,
        c_sat: plateau.mean,
        c_sat_std: plateau.std,
        c_sat_se: plateau.se,
        c_est_gso: estimators.gso,
        c_est_mean: estimators.mean,
        c_biinv: estimators.biinvariant,
        stationary_warning: plateau.stationary_warning,
        lll,
        experiment_hash: provenance.config_hash.clone(),
        warnings,
    };
    Ok(ExperimentResult {
        curve: ComplexityCurve {
            times,
            values,
            biinvariant: biinv,
            plateau,
            biinvariant_plateau,
            estimators,
            provenance,
        },
        prepared,
        lattice: ctx,
        summary,
    })
}

/// Largest t such that every |tE_n| ≤ π, where no lattice point can beat k = 0.
pub fn first_crossing(e: &[f64]) -> f64 {
    let m = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    std::f64::consts::PI / m
}
