use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{num, write_csv, write_json};
use nielsen_core::lattice::cvp_bench;
use nielsen_core::linalg::relative_commutator;
use nielsen_core::models::{conserved_tower, symmetry_operator, ModelSpec, SymmetryKind};
use nielsen_core::operators::{Convention, GeneratorSet, Locality, Spin, Threshold};
use nielsen_core::pipeline::{eigenbasis, prepare_with, run_experiment, Summary};
use nielsen_core::qmatrix::{extract_conserved_laws, operator_diagonal, projection_residual_of, rank_oracle};
use nielsen_core::rmt::{four_point_check, verify_moments, FourPointReport, MomentReport};
use nielsen_core::Error;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub hash: String,
}

impl Context {
    pub fn new(config: RunConfig, out: PathBuf) -> Result<Self> {
        fs::create_dir_all(&out)?;
        let hash = config.hash();
        Ok(Context { config, out, hash })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Serialize)]
struct CurveSummary<'a> {
    #[serde(flatten)]
    summary: &'a Summary,
    plateau_half_difference: f64,
    biinvariant_plateau: f64,
    kernel_tol: f64,
}

/// curve.csv and summary.json
pub fn cmd_curve(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spec = ctx.config.model()?;
    let gens = ctx.config.generators(&spec)?;
    let exp = ctx.config.experiment();
    let r = run_experiment(&spec, &gens, &exp)?;
    let rows: Vec<Vec<String>> = r
        .curve
        .times
        .iter()
        .zip(&r.curve.values)
        .zip(&r.curve.biinvariant)
        .map(|((t, v), b)| vec![num(*t), num(*v), num(*b)])
        .collect();
    let csv = write_csv(&ctx.path("curve.csv"), &ctx.hash, &["t", "C_bound", "C_biinv"], &rows)?;
    let body = CurveSummary {
        summary: &r.summary,
        plateau_half_difference: r.curve.plateau.half_difference,
        biinvariant_plateau: r.curve.biinvariant_plateau.mean,
        kernel_tol: exp.kernel_tol,
    };
    let json = write_json(&ctx.path("summary.json"), &ctx.hash, &body)?;
    Ok(vec![csv, json])
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    threshold: Threshold,
    n_loc: usize,
    kernel_dim: usize,
    oracle_kernel_dim: usize,
    enlarged_kernel_dim: Option<usize>,
    lambda_bar: f64,
    lambda_var: f64,
    lambda_min: f64,
    lambda_max: f64,
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    model: &'a str,
    spec: ModelSpec,
    d: usize,
    convention: Convention,
    bins: usize,
    sweep: Vec<SpectrumRow>,
}

/// qspectrum.csv, histogram.csv and qspectrum.json over the k sweep
pub fn cmd_qspectrum(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spec = ctx.config.model()?;
    let (ks, bins) = match &ctx.config.sweep {
        Some(s) => (s.k.clone(), s.bins),
        None => (vec![ctx.config.generators.k], 40),
    };
    if ks.is_empty() {
        return Err(CliError::Config("sweep.k: empty sweep list".into()));
    }
    if bins == 0 {
        return Err(CliError::Config("sweep.bins: must be positive".into()));
    }
    let sets = ks
        .iter()
        .map(|&k| ctx.config.generators_at(&spec, k))
        .collect::<Result<Vec<_>>>()?;
    let exp = ctx.config.experiment();
    let basis = eigenbasis(&spec, &exp)?;
    let mut rows = Vec::new();
    let mut hist_rows = Vec::new();
    for (&k, gens) in ks.iter().zip(&sets) {
        let p = prepare_with(&basis, gens, &exp)?;
        let oracle = rank_oracle(&p.decomposition, gens, exp.kernel_tol)?;
        let s = p.q.summary();
        for (b, count) in p.q.histogram(bins).into_iter().enumerate() {
            hist_rows.push(vec![
                k.to_string(),
                b.to_string(),
                num(b as f64 / bins as f64),
                num((b + 1) as f64 / bins as f64),
                count.to_string(),
            ]);
        }
        rows.push(SpectrumRow {
            k,
            threshold: gens.threshold(),
            n_loc: gens.n_loc(),
            kernel_dim: s.kernel_dim,
            oracle_kernel_dim: oracle,
            enlarged_kernel_dim: p.enlarged_kernel_dim,
            lambda_bar: s.mean,
            lambda_var: s.variance,
            lambda_min: s.lambda_min,
            lambda_max: s.lambda_max,
        });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.threshold.k_op.to_string(),
                r.threshold.k_sp.to_string(),
                r.n_loc.to_string(),
                r.kernel_dim.to_string(),
                r.oracle_kernel_dim.to_string(),
                num(r.lambda_bar),
                num(r.lambda_var),
            ]
        })
        .collect();
    let a = write_csv(
        &ctx.path("qspectrum.csv"),
        &ctx.hash,
        &["k", "k_op", "k_sp", "n_loc", "kernel_dim", "oracle_kernel_dim", "lambda_bar", "lambda_var"],
        &table,
    )?;
    let b = write_csv(
        &ctx.path("histogram.csv"),
        &ctx.hash,
        &["k", "bin", "lo", "hi", "count"],
        &hist_rows,
    )?;
    let report = SpectrumReport {
        model: spec.name(),
        spec,
        d: spec.dim(),
        convention: ctx.config.convention()?,
        bins,
        sweep: rows,
    };
    let c = write_json(&ctx.path("qspectrum.json"), &ctx.hash, &report)?;
    Ok(vec![a, b, c])
}

#[derive(Serialize)]
struct Term {
    sites: Vec<usize>,
    ops: Vec<usize>,
    coefficient: f64,
}

#[derive(Serialize)]
struct LawEntry {
    index: usize,
    commutator_residual: f64,
    quadratic_form: f64,
    /// |cos| between the law's diagonal and the energies
    h_overlap: f64,
    leading_terms: Vec<Term>,
}

#[derive(Serialize)]
struct TowerEntry {
    label: String,
    locality: Locality,
    within_threshold: bool,
    commutator_residual: f64,
    projection_residual: f64,
    in_kernel: bool,
    h_overlap: f64,
}

#[derive(Serialize)]
struct SymmetryEntry {
    kind: SymmetryKind,
    projection_residual: f64,
    in_kernel: bool,
}

#[derive(Serialize)]
struct ChargeReport<'a> {
    model: &'a str,
    spec: ModelSpec,
    threshold: Threshold,
    n_loc: usize,
    kernel_dim: usize,
    tolerance: f64,
    laws: Vec<LawEntry>,
    tower: Vec<TowerEntry>,
    tower_note: Option<String>,
    tower_in_kernel: usize,
    symmetries: Vec<SymmetryEntry>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).abs()
    }
}

fn fits(loc: Locality, t: Threshold, spin: Spin) -> bool {
    let int_ok = spin == Spin::HALF || t.k_int.is_none_or(|k| loc.k_int <= k);
    loc.k_op <= t.k_op && loc.k_sp <= t.k_sp && int_ok
}

/// charges.json: kernel laws, explicit tower cross-check and symmetry detection
pub fn cmd_charges(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spec = ctx.config.model()?;
    let gens = ctx.config.generators(&spec)?;
    let exp = ctx.config.experiment();
    let tol = ctx.config.tolerances.commutator;
    let basis = eigenbasis(&spec, &exp)?;
    let p = prepare_with(&basis, &gens, &exp)?;
    let h = &basis.hamiltonian;
    let energies = &p.decomposition.energies;
    let kernel = p.q.kernel();
    let laws = extract_conserved_laws(&p.q, &p.decomposition, &gens, h)?
        .into_iter()
        .enumerate()
        .map(|(i, law)| {
            let mut terms: Vec<_> = law
                .easy_expansion
                .iter()
                .filter(|(_, c)| c.abs() > 1e-9)
                .map(|(d, c)| Term {
                    sites: d.sites.clone(),
                    ops: d.site_ops.clone(),
                    coefficient: *c,
                })
                .collect();
            terms.sort_by(|a, b| b.coefficient.abs().total_cmp(&a.coefficient.abs()));
            terms.truncate(8);
            LawEntry {
                index: i,
                commutator_residual: law.commutator_residual,
                quadratic_form: law.quadratic_form,
                h_overlap: cosine(law.coefficients.as_slice(), energies),
                leading_terms: terms,
            }
        })
        .collect();
    let (charges, tower_note) = tower_charges(&spec);
    let threshold = gens.threshold();
    let mut tower = Vec::new();
    for c in charges {
        let diag = operator_diagonal(&p.decomposition.vectors, &c.matrix)?;
        let residual = projection_residual_of(&kernel, &diag);
        tower.push(TowerEntry {
            within_threshold: fits(c.locality, threshold, spec.spin()),
            commutator_residual: relative_commutator(h, &c.matrix),
            projection_residual: residual,
            in_kernel: residual < tol,
            h_overlap: cosine(&diag, energies),
            label: c.label,
            locality: c.locality,
        });
    }
    let mut symmetries = Vec::new();
    for kind in [SymmetryKind::Jz, SymmetryKind::J2, SymmetryKind::Cartan3, SymmetryKind::Cartan8] {
        match symmetry_operator(&spec, kind) {
            Ok(op) => {
                let diag = operator_diagonal(&p.decomposition.vectors, &op)?;
                let residual = projection_residual_of(&kernel, &diag);
                symmetries.push(SymmetryEntry {
                    kind,
                    projection_residual: residual,
                    in_kernel: residual < tol,
                });
            }
            Err(Error::UnavailableSymmetry(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let report = ChargeReport {
        model: spec.name(),
        spec,
        threshold,
        n_loc: gens.n_loc(),
        kernel_dim: p.q.kernel_dim(),
        tolerance: tol,
        laws,
        tower_in_kernel: tower.iter().filter(|t| t.in_kernel).count(),
        tower,
        tower_note,
        symmetries,
    };
    Ok(vec![write_json(&ctx.path("charges.json"), &ctx.hash, &report)?])
}

/// The longest explicit tower available for the model.
fn tower_charges(spec: &ModelSpec) -> (Vec<nielsen_core::models::Charge>, Option<String>) {
    for n in (1..=6).rev() {
        match conserved_tower(spec, n) {
            Ok(t) => return (t.charges, None),
            Err(Error::NoTower(msg)) if n == 1 || !msg.contains("implemented") => {
                return (Vec::new(), Some(msg));
            }
            Err(_) => continue,
        }
    }
    (Vec::new(), None)
}

#[derive(Serialize)]
struct RmtReport<'a> {
    d: usize,
    seed: u64,
    moments: &'a MomentReport,
    four_point: &'a FourPointReport,
    mean_pass: bool,
    var_pass: bool,
    four_point_pass: bool,
}

/// rmt.csv (per trial) and rmt.json
pub fn cmd_rmt(ctx: &Context) -> Result<Vec<PathBuf>> {
    let r = &ctx.config.rmt;
    if r.l == 0 || r.l > 12 {
        return Err(CliError::Config(format!("rmt.l: need 1 <= l <= 12, got {}", r.l)));
    }
    if r.trials < 10 {
        return Err(CliError::Config(format!("rmt.trials: need at least 10, got {}", r.trials)));
    }
    let seed = ctx.config.run.seed;
    let gens = GeneratorSet::new(
        r.l,
        Spin::HALF,
        Threshold::new(r.l, r.l),
        Convention::Prefix { count: r.n_loc },
    )
    .map_err(|e| CliError::Config(format!("rmt.n_loc: {e}")))?
    .with_identity_easy(r.identity_easy);
    let moments = verify_moments(&gens, r.trials, seed)?;
    let four = four_point_check(gens.dim(), r.samples, seed.wrapping_add(1))?;
    let rows: Vec<Vec<String>> = moments
        .trial_means
        .iter()
        .zip(&moments.trial_variances)
        .enumerate()
        .map(|(i, (m, v))| vec![i.to_string(), num(*m), num(*v)])
        .collect();
    let a = write_csv(&ctx.path("rmt.csv"), &ctx.hash, &["trial", "lambda_bar", "lambda_var"], &rows)?;
    let report = RmtReport {
        d: gens.dim(),
        seed,
        mean_pass: moments.mean_pass,
        var_pass: moments.var_pass,
        four_point_pass: four.pass,
        moments: &moments,
        four_point: &four,
    };
    let b = write_json(&ctx.path("rmt.json"), &ctx.hash, &report)?;
    Ok(vec![a, b])
}

/// cvpbench.csv (per instance) and cvpbench.json
pub fn cmd_cvpbench(ctx: &Context) -> Result<Vec<PathBuf>> {
    let c = &ctx.config.cvpbench;
    let report = cvp_bench(&c.dims, c.instances, c.mu, ctx.config.run.seed)?;
    let rows: Vec<Vec<String>> = report
        .instances
        .iter()
        .map(|i| {
            vec![
                i.index.to_string(),
                i.d.to_string(),
                num(i.rounding),
                num(i.babai),
                num(i.greedy),
                num(i.brute),
                num(i.ratio),
                i.sandwich.to_string(),
            ]
        })
        .collect();
    let a = write_csv(
        &ctx.path("cvpbench.csv"),
        &ctx.hash,
        &["index", "d", "rounding", "babai", "babai_greedy", "brute", "ratio", "sandwich"],
        &rows,
    )?;
    let b = write_json(&ctx.path("cvpbench.json"), &ctx.hash, &report)?;
    Ok(vec![a, b])
}

pub fn output_dir(flag: Option<&Path>, config: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.run.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
