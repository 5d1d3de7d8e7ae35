//! Experiment configuration (one JSON document) and model construction.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use parasketch::nystrom::DEFAULT_EPSILON;
use parasketch::param::{
    random_affine_model, schrodinger_model, schrodinger_sigma, synthetic_model, AffineModel, Phi, SnapshotModel,
};
use parasketch::{DenseMatrix, Method, MethodConfig, ParamDomain, ParamGrid, ParamMatrixModel, RngState};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Shorthand for a single entry of `methods`.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub methods: Vec<Method>,
    /// Target ranks `r`; each run sketches with `r + p` columns.
    pub ranks: Vec<usize>,
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
    /// `ℓ` for the Nyström methods; `ceil(0.2 (r + p))` when absent.
    #[serde(default)]
    pub second_oversampling: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Relative to the config file.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub bench: BenchSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `A(t) = e^{tW₁} eᵗD e^{tW₂}` on `[0, 1]`.
    Synthetic {
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Imaginary-time Schrödinger equation on `[0, 0.1]`.
    Schrodinger {
        n: usize,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default)]
        seed: u64,
        /// Initial singular values; `10^{-i}` (cut at 1e-16) when absent.
        #[serde(default)]
        sigma: Option<Vec<f64>>,
    },
    /// `Σ φ_i(t) A_i` with `A_i` read from matrix CSV files.
    AffineFile { domain: [f64; 2], terms: Vec<TermSpec> },
    /// Stored snapshots listed in a `t,path` manifest.
    SnapshotFile { manifest: PathBuf },
    /// Gaussian `A_i` with `φ_i(t) = t^{i-1}` on `[0, 1]`.
    RandomAffine {
        k: usize,
        m: usize,
        n: usize,
        #[serde(default)]
        decay: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Expression in `t`, e.g. `"1"`, `"t^2"`, `"exp(-t)"`, `"cos(3*t)"`.
    pub phi: String,
    pub matrix: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Defaults to the model's domain.
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            interval: None,
            points: default_points(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "default_expectation_trials")]
    pub expectation_trials: usize,
    #[serde(default = "default_tail_trials")]
    pub tail_trials: usize,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Sup-norm tail check (HMT methods only).
    #[serde(default)]
    pub sup: Option<SupSpec>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            expectation_trials: default_expectation_trials(),
            tail_trials: default_tail_trials(),
            gammas: default_gammas(),
            sup: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupSpec {
    pub gamma: f64,
    pub u: f64,
    pub k_subintervals: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Assert `online <= 0.5 * direct` when the cost model predicts a win
    /// (`q > k²`).
    #[serde(default = "default_true")]
    pub assert_timing: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self { assert_timing: true }
    }
}

fn default_oversampling() -> usize {
    10
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_trials() -> usize {
    20
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_steps() -> usize {
    2000
}
fn default_points() -> usize {
    300
}
fn default_expectation_trials() -> usize {
    100
}
fn default_tail_trials() -> usize {
    200
}
fn default_gammas() -> Vec<f64> {
    vec![1.25, 1.5]
}
fn default_true() -> bool {
    true
}

/// A parsed config plus the directory its relative paths refer to.
#[derive(Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let loaded = Self { config, base };
        loaded.check_static()?;
        Ok(loaded)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    /// Checks that need no model: non-empty sweeps and existing files.
    fn check_static(&self) -> Result<(), Failure> {
        let c = &self.config;
        if c.ranks.is_empty() {
            return Err(Failure::Usage("`ranks` must list at least one rank".into()));
        }
        if c.trials == 0 {
            return Err(Failure::Usage("`trials` must be at least 1".into()));
        }
        let files: Vec<&Path> = match &c.model {
            ModelSpec::AffineFile { terms, .. } => terms.iter().map(|t| t.matrix.as_path()).collect(),
            ModelSpec::SnapshotFile { manifest } => vec![manifest.as_path()],
            _ => Vec::new(),
        };
        for f in files {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(Failure::Usage(format!(
                    "referenced file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// `method` and `methods` combined, in order, without duplicates.
    pub fn methods(&self, default: &[Method]) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for m in self.config.method.iter().chain(&self.config.methods) {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        if out.is_empty() {
            out.extend_from_slice(default);
        }
        out
    }

    pub fn method_config(&self, method: Method, rank: usize) -> MethodConfig {
        let mut mc = MethodConfig::new(method, rank, self.config.oversampling);
        if let Some(l) = self.config.second_oversampling {
            mc = mc.with_second_oversampling(l);
        }
        mc.epsilon = self.config.epsilon;
        mc
    }

    /// The model and its evaluation grid. Snapshot models are evaluated at
    /// their stored parameters; other models on `points` uniform points of
    /// `interval` (one point means the left end only).
    pub fn build(&self) -> Result<(Arc<dyn ParamMatrixModel>, ParamGrid), Failure> {
        let model: Arc<dyn ParamMatrixModel> = match &self.config.model {
            ModelSpec::Synthetic { n, seed } => Arc::new(synthetic_model(*n, &mut RngState::new(*seed, 0))?),
            ModelSpec::Schrodinger { n, steps, seed, sigma } => {
                let sigma = sigma.clone().unwrap_or_else(|| schrodinger_sigma(*n));
                Arc::new(schrodinger_model(*n, &sigma, *steps, &mut RngState::new(*seed, 0))?)
            }
            ModelSpec::AffineFile { domain, terms } => {
                let domain = ParamDomain::interval(domain[0], domain[1])?;
                let terms = terms
                    .iter()
                    .map(|t| {
                        let phi = Phi::parse(&t.phi)?;
                        let a = DenseMatrix::load_csv(self.resolve(&t.matrix))?;
                        Ok((phi, a))
                    })
                    .collect::<parasketch::Result<Vec<_>>>()?;
                Arc::new(AffineModel::new(domain, terms)?)
            }
            ModelSpec::SnapshotFile { manifest } => {
                let stored = SnapshotModel::load_manifest(self.resolve(manifest))?;
                let grid = stored.grid();
                return Ok((Arc::new(stored), grid));
            }
            ModelSpec::RandomAffine { k, m, n, decay, seed } => {
                Arc::new(random_affine_model(*k, *m, *n, *decay, &mut RngState::new(*seed, 0))?)
            }
        };
        let grid = self.uniform_grid(model.as_ref())?;
        Ok((model, grid))
    }

    fn uniform_grid(&self, model: &dyn ParamMatrixModel) -> Result<ParamGrid, Failure> {
        let gs = &self.config.grid;
        let (lo, hi) = match gs.interval {
            Some([lo, hi]) => (lo, hi),
            None => model.domain().bounds()?,
        };
        let points = match gs.points {
            0 => return Err(Failure::Usage("grid needs at least one point".into())),
            1 => vec![lo],
            q => ParamGrid::uniform(&ParamDomain::interval(lo, hi)?, q)?
                .points()
                .to_vec(),
        };
        Ok(ParamGrid::new(points, model.domain())?)
    }
}
