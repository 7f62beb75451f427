//! One PASS/FAIL line per acceptance criterion. Run with `cargo test --test acceptance`.

use nielsen_core::lattice::{cvp_bench, LatticeContext, DEFAULT_BENCH_MU, DEFAULT_DELTA};
use nielsen_core::linalg::relative_commutator;
use nielsen_core::models::{build_hamiltonian, conserved_tower, ModelSpec};
use nielsen_core::operators::{Convention, GeneratorSet, Spin, Threshold};
use nielsen_core::pipeline::{bounded_at, eigenbasis, first_crossing, prepare_with, run_experiment, ExperimentConfig, Summary};
use nielsen_core::qmatrix::{build_q, rank_oracle};
use nielsen_core::rmt::{four_point_check, verify_moments};
use nielsen_core::spectral::{diagonalize, preferred_basis};
use nielsen_core::models::normalize_hamiltonian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const L: usize = 8;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn t1(spec: &ModelSpec, k: usize) -> GeneratorSet {
    GeneratorSet::new(spec.l, spec.spin(), Threshold::new(k, k), Convention::T1).unwrap()
}

fn with_convention(spec: &ModelSpec, k: usize, c: Convention) -> GeneratorSet {
    GeneratorSet::new(spec.l, spec.spin(), Threshold::standard(k, spec.l, c), c).unwrap()
}

/// Plateau runs shared between criteria.
#[derive(Default)]
struct Runs(HashMap<String, Summary>);

impl Runs {
    fn get(&mut self, label: &str, spec: ModelSpec, gens: GeneratorSet) -> Summary {
        self.0
            .entry(label.to_string())
            .or_insert_with(|| {
                run_experiment(&spec, &gens, &ExperimentConfig::default())
                    .unwrap_or_else(|e| panic!("{label}: {e}"))
                    .summary
            })
            .clone()
    }
}

fn combined_se(a: &Summary, b: &Summary) -> f64 {
    a.c_sat_se.hypot(b.c_sat_se)
}

fn early_time_law() -> Outcome {
    let models = [
        ModelSpec::transverse_ising(L),
        ModelSpec::chaotic_ising(L),
        ModelSpec::default_xxz(L),
        ModelSpec::default_xyz(L),
        ModelSpec::xyz_field(L),
        ModelSpec::spin1_naive(5),
        ModelSpec::spin1_integrable(5),
    ];
    let config = ExperimentConfig::default();
    let mut worst = 0.0f64;
    let mut worst_unclipped = 0.0f64;
    for spec in models {
        let basis = eigenbasis(&spec, &config).unwrap();
        let p = prepare_with(&basis, &t1(&spec, 2), &config).unwrap();
        let d = p.decomposition.dim();
        let mut ctx = LatticeContext::<f64>::embed(p.q.matrix(), d as f64).unwrap();
        ctx.lll_reduce(DEFAULT_DELTA).unwrap();
        let e = &p.decomposition.energies;
        let tc = first_crossing(e);
        for f in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999] {
            let t = f * tc;
            worst = worst.max((bounded_at(e, &ctx, t, true) - t).abs() / t);
            worst_unclipped = worst_unclipped.max((bounded_at(e, &ctx, t, false) - t).abs() / t);
        }
    }
    outcome(
        worst < 1e-6,
        format!("max relative deviation {worst:.2e} over 7 models (unclipped heuristic {worst_unclipped:.2e})"),
    )
}

fn biinvariant_plateau(runs: &mut Runs) -> Outcome {
    let spec = ModelSpec::chaotic_ising(L);
    let r = run_experiment(&spec, &t1(&spec, 2), &ExperimentConfig::default()).unwrap();
    runs.0.insert("cising-2".into(), r.summary.clone());
    let target = PI * (256.0f64 / 3.0).sqrt();
    let got = r.curve.biinvariant_plateau.mean;
    let rel = (got - target).abs() / target;
    outcome(rel < 0.03, format!("mean {got:.3} vs {target:.3}, off by {:.2}%", 100.0 * rel))
}

fn kernel_tower() -> Outcome {
    let config = ExperimentConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, spec) in [("transverse", ModelSpec::transverse_ising(L)), ("chaotic", ModelSpec::chaotic_ising(L))] {
        let basis = eigenbasis(&spec, &config).unwrap();
        let mut dims = Vec::new();
        for k in 2..=5 {
            let gens = t1(&spec, k);
            let p = prepare_with(&basis, &gens, &config).unwrap();
            let oracle = rank_oracle(&p.decomposition, &gens, config.kernel_tol).unwrap();
            let kd = p.q.kernel_dim();
            pass &= kd == oracle;
            dims.push(kd);
        }
        if name == "transverse" {
            pass &= dims.windows(2).all(|w| w[1] == w[0] + 2);
        } else {
            pass &= dims.iter().all(|&k| k == 1);
        }
        lines.push(format!("{name} {dims:?}"));
    }
    outcome(pass, format!("kernel dims for k=2..5: {}; rank oracle agrees", lines.join(", ")))
}

fn charge_verification() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (spec, n) in [
        (ModelSpec::transverse_ising(L), 4),
        (ModelSpec::default_xyz(L), 1),
        (ModelSpec::spin1_integrable(5), 2),
    ] {
        let h = build_hamiltonian(&spec).unwrap();
        let tower = conserved_tower(&spec, n).unwrap();
        pass &= tower.charges.len() == n;
        for c in &tower.charges {
            worst = worst.max(relative_commutator(&h, &c.matrix));
        }
    }
    pass &= worst < 1e-9;
    let naive = build_hamiltonian(&ModelSpec::spin1_naive(5)).unwrap();
    let h3 = &conserved_tower(&ModelSpec::spin1_integrable(5), 1).unwrap().charges[0].matrix;
    let against_naive = relative_commutator(&naive, h3);
    pass &= against_naive >= 1e-3;
    outcome(
        pass,
        format!("worst commutator {worst:.2e} (I_1..I_4, I_1 XYZ, H_3, H_4); H_3 vs naive spin-1 {against_naive:.3e}"),
    )
}

fn cvp_sandwich() -> Outcome {
    let r = cvp_bench(&[4, 5, 6], 200, DEFAULT_BENCH_MU, SEED).unwrap();
    let frac = r.within_ratio;
    outcome(
        r.violations == 0 && frac >= 0.9,
        format!(
            "{} instances, {} sandwich violations, ratio <= 1.1 in {:.1}%",
            r.instances.len(),
            r.violations,
            100.0 * frac
        ),
    )
}

fn integrability_ordering(runs: &mut Runs) -> Outcome {
    let ti = runs.get("tising-3", ModelSpec::transverse_ising(L), t1(&ModelSpec::transverse_ising(L), 3));
    let ci = runs.get("cising-3", ModelSpec::chaotic_ising(L), t1(&ModelSpec::chaotic_ising(L), 3));
    let xxz = runs.get("xxz-3", ModelSpec::default_xxz(L), t1(&ModelSpec::default_xxz(L), 3));
    let xyz = runs.get("xyz-3", ModelSpec::default_xyz(L), t1(&ModelSpec::default_xyz(L), 3));
    let xyzf = runs.get("xyzf-3", ModelSpec::xyz_field(L), t1(&ModelSpec::xyz_field(L), 3));
    let gaps = [
        (ci.c_sat - ti.c_sat) / combined_se(&ti, &ci),
        (xyz.c_sat - xxz.c_sat) / combined_se(&xxz, &xyz),
        (xyzf.c_sat - xyz.c_sat) / combined_se(&xyz, &xyzf),
    ];
    outcome(
        gaps.iter().all(|&g| g > 2.0),
        format!(
            "TI {:.1} < CI {:.1}; XXZ {:.1} <= XYZ {:.1} < XYZ+h {:.1}; gaps in combined SE {:.1}, {:.1}, {:.1}",
            ti.c_sat, ci.c_sat, xxz.c_sat, xyz.c_sat, xyzf.c_sat, gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn locality_sets(runs: &mut Runs) -> Outcome {
    let spec = ModelSpec::transverse_ising(L);
    let chaotic = ModelSpec::chaotic_ising(L);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [3, 4] {
        let a = runs.get(&format!("tising-{k}"), spec, t1(&spec, k));
        let b = runs.get(&format!("tising-t2-{k}"), spec, with_convention(&spec, k, Convention::T2));
        let c = runs.get(
            &format!("tising-t3-{k}"),
            spec,
            with_convention(&spec, k, Convention::T3 { removed_site: 0 }),
        );
        let ci = runs.get(&format!("cising-{k}"), chaotic, t1(&chaotic, k));
        let gap = ci.c_sat - a.c_sat;
        let t2_diff = (b.c_sat - a.c_sat).abs();
        let t3_sigma = (c.c_sat - a.c_sat) / combined_se(&a, &c);
        pass &= gap > 0.0 && t2_diff < 0.25 * gap && t3_sigma > 2.0;
        parts.push(format!(
            "k={k}: |T2-T1| {t2_diff:.1} vs 25% gap {:.1}, T3-T1 {:.1} SE",
            0.25 * gap,
            t3_sigma
        ));
    }
    outcome(pass, parts.join("; "))
}

fn rmt_moments() -> Outcome {
    let gens = GeneratorSet::new(L, Spin::HALF, Threshold::new(L, L), Convention::Prefix { count: 144 }).unwrap();
    let m = verify_moments(&gens, 20, SEED).unwrap();
    let f = four_point_check(256, 20_000, SEED + 1).unwrap();
    outcome(
        m.mean_pass && m.var_pass && f.pass,
        format!(
            "mean off by {:.2} SD, variance ratio {:.3}, four-point {}",
            m.mean_deviation_sd,
            m.var_ratio,
            if f.pass { "within 3 SE" } else { "outside 3 SE" }
        ),
    )
}

fn estimator_bridge(runs: &mut Runs) -> Outcome {
    let c = runs.get("cising-2", ModelSpec::chaotic_ising(L), t1(&ModelSpec::chaotic_ising(L), 2));
    let t = runs.get("tising-2", ModelSpec::transverse_ising(L), t1(&ModelSpec::transverse_ising(L), 2));
    let dg = (c.c_sat - c.c_est_gso).abs() / c.c_est_gso;
    let dm = (c.c_sat - c.c_est_mean).abs() / c.c_est_mean;
    outcome(
        dg < 0.15 && dm < 0.15 && t.c_sat < t.c_est_mean,
        format!(
            "chaotic C_sat {:.1} vs {:.1} ({:.1}%) and {:.1} ({:.1}%); transverse C_sat {:.1} < {:.1}",
            c.c_sat,
            c.c_est_gso,
            100.0 * dg,
            c.c_est_mean,
            100.0 * dm,
            t.c_sat,
            t.c_est_mean
        ),
    )
}

fn degenerate_basis() -> Outcome {
    let spec = ModelSpec::default_xxz(L);
    let h = normalize_hamiltonian(&build_hamiltonian(&spec).unwrap()).unwrap().0;
    let dec = diagonalize(&h).unwrap();
    let gens = t1(&spec, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut raw = Vec::new();
    let mut preferred = Vec::new();
    for _ in 0..5 {
        let rotated = dec.random_block_rotation(&mut rng);
        raw.push(build_q(&rotated, &gens).unwrap().kernel_dim());
        preferred.push(preferred_basis(&rotated, &gens).unwrap().kernel_dim);
    }
    let invariant = preferred.windows(2).all(|w| w[0] == w[1]);
    let dominates = preferred[0] >= *raw.iter().max().unwrap();
    outcome(
        invariant && dominates,
        format!("preferred kernel {preferred:?}, unrotated-procedure kernel {raw:?}"),
    )
}

fn main() {
    let mut runs = Runs::default();
    type Check<'a> = Box<dyn FnOnce(&mut Runs) -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, u64, Check)> = vec![
        (1, "early-time law", 60, Box::new(|_| early_time_law())),
        (2, "bi-invariant plateau", 300, Box::new(biinvariant_plateau)),
        (3, "kernel-tower correspondence", 600, Box::new(|_| kernel_tower())),
        (4, "charge verification", 600, Box::new(|_| charge_verification())),
        (5, "CVP oracle sandwich", 600, Box::new(|_| cvp_sandwich())),
        (6, "integrability ordering", 7200, Box::new(integrability_ordering)),
        (7, "locality-set sensitivity", 7200, Box::new(locality_sets)),
        (8, "RMT moments", 900, Box::new(|_| rmt_moments())),
        (9, "estimator bridge", 1800, Box::new(estimator_bridge)),
        (10, "degenerate-basis procedure", 1200, Box::new(|_| degenerate_basis())),
    ];
    let mut failed = Vec::new();
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let o = check(&mut runs);
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let pass = o.pass && in_time;
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.1}s of {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
