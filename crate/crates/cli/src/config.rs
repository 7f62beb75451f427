use crate::error::{CliError, Result};
use nielsen_core::lattice::{DEFAULT_BENCH_MU, DEFAULT_DELTA};
use nielsen_core::models::{Family, ModelSpec, SymmetryKind};
use nielsen_core::operators::{Convention, GeneratorSet, Threshold};
use nielsen_core::pipeline::{CurveConfig, ExperimentConfig};
use nielsen_core::qmatrix::DEFAULT_KERNEL_TOL;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub generators: GeneratorSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub symmetry: SymmetrySection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub rmt: RmtSection,
    #[serde(default)]
    pub cvpbench: CvpBenchSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: default_seed(),
            output_dir: None,
        }
    }
}

fn default_seed() -> u64 {
    1
}

/// `family` is a family name or a named coupling preset; coupling keys override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: String,
    pub l: usize,
    pub h_x: Option<f64>,
    pub h_z: Option<f64>,
    pub j_x: Option<f64>,
    pub j_y: Option<f64>,
    pub j_z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    #[serde(default = "default_k")]
    pub k: usize,
    pub k_op: Option<usize>,
    pub k_sp: Option<usize>,
    pub k_int: Option<usize>,
    #[serde(default = "default_convention")]
    pub convention: String,
    #[serde(default)]
    pub removed_site: usize,
    pub count: Option<usize>,
    #[serde(default)]
    pub identity_easy: bool,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        GeneratorSection {
            k: default_k(),
            k_op: None,
            k_sp: None,
            k_int: None,
            convention: default_convention(),
            removed_site: 0,
            count: None,
            identity_easy: false,
        }
    }
}

fn default_k() -> usize {
    2
}

fn default_convention() -> String {
    "t1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub k: Vec<usize>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub mu: Option<f64>,
    #[serde(default = "yes")]
    pub clip_to_linear: bool,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for CurveSection {
    fn default() -> Self {
        let c = CurveConfig::default();
        CurveSection {
            t_start: c.t_start,
            t_end: c.t_end,
            dt: c.dt,
            mu: None,
            clip_to_linear: true,
            delta: DEFAULT_DELTA,
        }
    }
}

fn default_t_start() -> f64 {
    CurveConfig::default().t_start
}
fn default_t_end() -> f64 {
    CurveConfig::default().t_end
}
fn default_dt() -> f64 {
    CurveConfig::default().dt
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    /// Omitted: the model's default list.
    pub presplit: Option<Vec<SymmetryKind>>,
    #[serde(default = "yes")]
    pub preferred_basis: bool,
}

impl Default for SymmetrySection {
    fn default() -> Self {
        SymmetrySection {
            presplit: None,
            preferred_basis: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_kernel")]
    pub kernel: f64,
    #[serde(default = "default_commutator")]
    pub commutator: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            kernel: default_kernel(),
            commutator: default_commutator(),
        }
    }
}

fn default_kernel() -> f64 {
    DEFAULT_KERNEL_TOL
}
fn default_commutator() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmtSection {
    /// D = 2^l
    #[serde(default = "default_rmt_l")]
    pub l: usize,
    #[serde(default = "default_rmt_n_loc")]
    pub n_loc: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub identity_easy: bool,
}

impl Default for RmtSection {
    fn default() -> Self {
        RmtSection {
            l: default_rmt_l(),
            n_loc: default_rmt_n_loc(),
            trials: default_trials(),
            samples: default_samples(),
            identity_easy: false,
        }
    }
}

fn default_rmt_l() -> usize {
    7
}
fn default_rmt_n_loc() -> usize {
    144
}
fn default_trials() -> usize {
    20
}
fn default_samples() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvpBenchSection {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_bench_mu")]
    pub mu: f64,
}

impl Default for CvpBenchSection {
    fn default() -> Self {
        CvpBenchSection {
            dims: default_dims(),
            instances: default_instances(),
            mu: default_bench_mu(),
        }
    }
}

fn default_dims() -> Vec<usize> {
    vec![4, 5, 6]
}
fn default_instances() -> usize {
    200
}
fn default_bench_mu() -> f64 {
    DEFAULT_BENCH_MU
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        nielsen_core::fingerprint::hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing section [model]".into()))?;
        let l = m.l;
        let base = match m.family.as_str() {
            "ising" => ModelSpec::ising(l, -1.05, 0.0),
            "chaotic_ising" => ModelSpec::chaotic_ising(l),
            "transverse_ising" => ModelSpec::transverse_ising(l),
            "xyz" => ModelSpec::default_xyz(l),
            "xxz" => ModelSpec::default_xxz(l),
            "xyz_field" => ModelSpec::xyz_field(l),
            "spin1_naive" => ModelSpec::spin1_naive(l),
            "spin1_integrable" => ModelSpec::spin1_integrable(l),
            other => {
                return Err(CliError::Config(format!(
                    "model.family: unknown family `{other}`"
                )))
            }
        };
        let family = match base.family {
            Family::Ising { h_x, h_z } => {
                reject(m.j_x.or(m.j_y).or(m.j_z), "model.j_*", "Ising")?;
                Family::Ising {
                    h_x: m.h_x.unwrap_or(h_x),
                    h_z: m.h_z.unwrap_or(h_z),
                }
            }
            Family::Xyz { j_x, j_y, j_z, h_z } => {
                reject(m.h_x, "model.h_x", "XYZ")?;
                Family::Xyz {
                    j_x: m.j_x.unwrap_or(j_x),
                    j_y: m.j_y.unwrap_or(j_y),
                    j_z: m.j_z.unwrap_or(j_z),
                    h_z: m.h_z.unwrap_or(h_z),
                }
            }
            f => {
                reject(m.h_x.or(m.h_z).or(m.j_x).or(m.j_y).or(m.j_z), "model couplings", "spin-1")?;
                f
            }
        };
        ModelSpec::new(family, l).map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn convention(&self) -> Result<Convention> {
        let g = &self.generators;
        Ok(match g.convention.as_str() {
            "t1" => Convention::T1,
            "t2" => Convention::T2,
            "t3" => Convention::T3 {
                removed_site: g.removed_site,
            },
            "prefix" => Convention::Prefix {
                count: g
                    .count
                    .ok_or_else(|| CliError::Config("generators.count is required for convention `prefix`".into()))?,
            },
            other => {
                return Err(CliError::Config(format!(
                    "generators.convention: unknown convention `{other}`"
                )))
            }
        })
    }

    /// Generator set at locality k (the [generators] k unless overridden).
    pub fn generators_at(&self, spec: &ModelSpec, k: usize) -> Result<GeneratorSet> {
        let g = &self.generators;
        let convention = self.convention()?;
        let mut t = Threshold::standard(k, spec.l, convention);
        if let Some(k_op) = g.k_op {
            t.k_op = k_op;
        }
        if let Some(k_sp) = g.k_sp {
            t.k_sp = k_sp;
        }
        if let Some(k_int) = g.k_int {
            t = t.with_k_int(k_int);
        }
        let set = GeneratorSet::new(spec.l, spec.spin(), t, convention)
            .map_err(|e| CliError::Config(format!("generators: {e}")))?;
        Ok(set.with_identity_easy(g.identity_easy))
    }

    pub fn generators(&self, spec: &ModelSpec) -> Result<GeneratorSet> {
        self.generators_at(spec, self.generators.k)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        let c = &self.curve;
        ExperimentConfig {
            curve: CurveConfig {
                t_start: c.t_start,
                t_end: c.t_end,
                dt: c.dt,
                mu: c.mu,
                clip_to_linear: c.clip_to_linear,
                delta: c.delta,
            },
            presplit: self.symmetry.presplit.clone(),
            preferred_basis: self.symmetry.preferred_basis,
            kernel_tol: self.tolerances.kernel,
        }
    }

    pub fn apply_long_run(&mut self) {
        let c = CurveConfig::long_run();
        self.curve.t_start = c.t_start;
        self.curve.t_end = c.t_end;
        self.curve.dt = c.dt;
    }
}

fn reject(value: Option<f64>, key: &str, family: &str) -> Result<()> {
    match value {
        Some(_) => Err(CliError::Config(format!("{key}: not a coupling of the {family} family"))),
        None => Ok(()),
    }
}
