//! End-to-end runs: load or generate an instance, preprocess, build a coreset,
//! audit it and write the artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::evaluator::{self, default_suites, DistortionReport, SuiteSpec};
use crate::io::{self, CoresetSidecar, PointFormat};
use crate::lower_bounds::basis::{gen_basis_instance, BasisInstance};
use crate::lower_bounds::discrete::{gen_star_instance, gen_subinstance, DiscreteInstance};
use crate::metric::{PointSet, PowerParams};
use crate::partition::CatalogSummary;
use crate::sampler::{self, RawPoints, SamplerConfig, WeightedCoreset};
use crate::synth::{gaussian_mixture, MixtureSpec};

/// Instance generators addressable by a one-line spec such as
/// `basis k=2 eps=1/12` or `mixture n=1000 d=2 k=3 seed=4`.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Basis { k: usize, eps: Option<f64>, q: Option<usize>, z: u32 },
    Mixture(MixtureSpec),
    Subinstance { clients: usize, centers: usize, z: u32, seed: u64 },
    Star { k: usize, eps: f64, centers: usize, z: u32, seed: u64, n_u: Option<usize> },
}

/// Parses `a/b` fractions as well as plain numbers.
pub fn parse_number(s: &str) -> Result<f64> {
    let bad = || CoresetError::invalid(format!("bad number {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

struct Args(BTreeMap<String, String>);

impl Args {
    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        self.0.remove(key).map(|v| parse_number(&v)).transpose()
    }

    fn int<T: TryFrom<u64>>(&mut self, key: &str) -> Result<Option<T>> {
        match self.num(key)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => T::try_from(v as u64)
                .map(Some)
                .map_err(|_| CoresetError::invalid(format!("{key} out of range"))),
            Some(v) => Err(CoresetError::invalid(format!("{key} = {v} is not a non-negative integer"))),
        }
    }

    fn need<T>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| CoresetError::invalid(format!("generator needs {key}=")))
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(CoresetError::invalid(format!("unknown generator argument {k:?}"))),
            None => Ok(()),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(|| CoresetError::invalid("empty generator spec"))?;
        let mut map = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CoresetError::invalid(format!("expected key=value, found {p:?}")))?;
            map.insert(k.to_string(), v.to_string());
        }
        let mut a = Args(map);
        let spec = match kind {
            "basis" => {
                let k = Args::need(a.int("k")?, "k")?;
                let eps = a.num("eps")?;
                let q = a.int("q")?;
                if eps.is_none() == q.is_none() {
                    return Err(CoresetError::invalid("basis needs exactly one of eps= or q="));
                }
                GeneratorSpec::Basis {
                    k,
                    eps,
                    q,
                    z: a.int("z")?.unwrap_or(2),
                }
            }
            "mixture" => {
                let d = MixtureSpec::default();
                let proportions = match a.0.remove("props") {
                    Some(v) => v.split(':').map(parse_number).collect::<Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                GeneratorSpec::Mixture(MixtureSpec {
                    n: a.int("n")?.unwrap_or(d.n),
                    d: a.int("d")?.unwrap_or(d.d),
                    k: a.int("k")?.unwrap_or(d.k),
                    separation: a.num("sep")?.unwrap_or(d.separation),
                    sigma: a.num("sigma")?.unwrap_or(d.sigma),
                    proportions,
                    seed: a.int("seed")?.unwrap_or(d.seed),
                })
            }
            "subinstance" => GeneratorSpec::Subinstance {
                clients: Args::need(a.int("clients")?, "clients")?,
                centers: Args::need(a.int("centers")?, "centers")?,
                z: a.int("z")?.unwrap_or(2),
                seed: a.int("seed")?.unwrap_or(0),
            },
            "star" => GeneratorSpec::Star {
                k: Args::need(a.int("k")?, "k")?,
                eps: Args::need(a.num("eps")?, "eps")?,
                centers: Args::need(a.int("centers")?, "centers")?,
                z: a.int("z")?.unwrap_or(2),
                seed: a.int("seed")?.unwrap_or(0),
                n_u: a.int("nu")?,
            },
            other => return Err(CoresetError::invalid(format!("unknown generator {other:?}"))),
        };
        a.finish()?;
        Ok(spec)
    }
}

impl GeneratorSpec {
    pub fn is_discrete(&self) -> bool {
        matches!(self, GeneratorSpec::Subinstance { .. } | GeneratorSpec::Star { .. })
    }

    pub fn basis(&self) -> Result<BasisInstance> {
        match *self {
            GeneratorSpec::Basis { k, eps: Some(eps), z, .. } => gen_basis_instance(k, eps, z),
            GeneratorSpec::Basis { k, q: Some(q), .. } => BasisInstance::new(k, q),
            _ => Err(CoresetError::invalid("not a basis generator")),
        }
    }

    /// Euclidean instances.
    pub fn points(&self) -> Result<PointSet> {
        match self {
            GeneratorSpec::Basis { .. } => Ok(self.basis()?.points),
            GeneratorSpec::Mixture(m) => Ok(gaussian_mixture(m)?.0),
            _ => Err(CoresetError::invalid("discrete generators do not produce point sets")),
        }
    }

    pub fn discrete(&self) -> Result<DiscreteInstance> {
        match *self {
            GeneratorSpec::Subinstance { clients, centers, z, seed } => gen_subinstance(clients, centers, z, seed),
            GeneratorSpec::Star { k, eps, centers, z, seed, n_u } => gen_star_instance(k, eps, centers, z, seed, n_u),
            _ => Err(CoresetError::invalid("not a discrete generator")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Point file; the format follows the extension.
    File(PathBuf),
    Generator(String),
}

impl InstanceSource {
    pub fn load(&self) -> Result<RawPoints> {
        match self {
            InstanceSource::File(path) => io::load_raw_points(path, PointFormat::from_path(path)),
            InstanceSource::Generator(spec) => Ok(RawPoints::from(&spec.parse::<GeneratorSpec>()?.points()?)),
        }
    }
}

/// Pass/fail conditions checked after the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Criteria {
    /// Largest allowed distortion; defaults to epsilon.
    pub max_distortion: Option<f64>,
    /// Require `w(Omega)` within `(1 +- 2 eps) N`.
    pub weight_check: bool,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria {
            max_distortion: None,
            weight_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: InstanceSource,
    pub k: usize,
    pub z: u32,
    pub epsilon: f64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Empty means the default suite mix.
    #[serde(default)]
    pub suites: Vec<SuiteSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub criteria: Criteria,
}

impl RunConfig {
    pub fn new(source: InstanceSource, k: usize, z: u32, epsilon: f64) -> Self {
        RunConfig {
            source,
            k,
            z,
            epsilon,
            sampler: SamplerConfig::default(),
            suites: Vec::new(),
            output_dir: None,
            seed: 0,
            criteria: Criteria::default(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CoresetError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self) -> Result<PowerParams> {
        PowerParams::new(self.z, self.epsilon)
    }

    /// Checks everything that can be checked before touching data.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.k == 0 {
            return Err(CoresetError::invalid("k must be at least 1"));
        }
        if self.sampler.delta == Some(0) {
            return Err(CoresetError::invalid("delta must be at least 1"));
        }
        if !(self.sampler.c_delta > 0.0) {
            return Err(CoresetError::invalid("c_delta must be positive"));
        }
        if let InstanceSource::Generator(g) = &self.source {
            if g.parse::<GeneratorSpec>()?.is_discrete() {
                return Err(CoresetError::invalid("coreset runs need a Euclidean instance"));
            }
        }
        Ok(())
    }

    /// Sampler settings with the master seed applied.
    pub fn effective_sampler(&self) -> SamplerConfig {
        SamplerConfig {
            seed: self.seed,
            ..self.sampler.clone()
        }
    }

    pub fn effective_suites(&self) -> Vec<SuiteSpec> {
        if self.suites.is_empty() {
            default_suites(self.seed)
        } else {
            self.suites.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub input_points: usize,
    pub working_points: usize,
    pub dim: usize,
    pub input_scale: f64,
    pub weight_factor: f64,
    pub dropped: usize,
    pub projection: Option<crate::projection::ProjectionSpec>,
    pub precoreset_applied: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub preprocess_ms: f64,
    pub build_ms: f64,
    pub audit_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub config: RunConfig,
    pub coreset_path: Option<PathBuf>,
    pub preprocessing: PreprocessSummary,
    pub catalog: CatalogSummary,
    pub report: DistortionReport,
    pub passed: bool,
    pub timing: Timing,
}

/// Everything computed by [`execute`], before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub bundle: ResultBundle,
    pub coreset: WeightedCoreset,
    pub sidecar: CoresetSidecar,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs preprocess, build and audit without writing files.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let params = cfg.params()?;
    let raw = cfg.source.load()?;
    let sampler_cfg = cfg.effective_sampler();

    let t = Instant::now();
    let pre = sampler::preprocess(&raw, cfg.k, &params, &sampler_cfg)?;
    let preprocess_ms = ms(t);

    let t = Instant::now();
    let build = sampler::build_coreset(&pre.points, cfg.k, &params, &sampler_cfg)?;
    let coreset = build.coreset.clone().rescaled(pre.weight_factor);
    let build_ms = ms(t);

    let t = Instant::now();
    let mut report = evaluator::audit(&pre.reference, &coreset, &cfg.effective_suites(), cfg.k, &params)?;
    report.build = Some(evaluator::BuildMeta {
        delta: build.delta.value,
        delta_formula: build.delta.formula,
        delta_capped: build.delta.capped,
        c_delta: sampler_cfg.c_delta,
        seed: sampler_cfg.seed,
        groups: build.catalog.group_count(),
        sampled_points: build.sampled_points,
        center_points: build.center_points,
        reference_cost: build.reference_cost,
    });
    let audit_ms = ms(t);

    let catalog = build.catalog.summary(pre.points.multiplicities());
    let limit = cfg.criteria.max_distortion.unwrap_or(cfg.epsilon);
    let passed = report.max <= limit && (!cfg.criteria.weight_check || report.weight_check);
    let sidecar = CoresetSidecar {
        k: cfg.k,
        z: cfg.z,
        epsilon: cfg.epsilon,
        delta: build.delta.value,
        delta_capped: build.delta.capped,
        c_delta: sampler_cfg.c_delta,
        seed: sampler_cfg.seed,
        size: coreset.weights.len(),
        total_weight: coreset.weights.iter().sum(),
        offset: coreset.offset,
        weight_factor: pre.weight_factor,
        input_scale: pre.input_scale,
        projection: pre.projection.as_ref().map(|p| p.spec()),
        groups: catalog.groups.clone(),
    };
    let preprocessing = PreprocessSummary {
        input_points: raw.n(),
        working_points: pre.points.n(),
        dim: pre.reference.coords().len() / pre.reference.n(),
        input_scale: pre.input_scale,
        weight_factor: pre.weight_factor,
        dropped: pre.dropped,
        projection: pre.projection.as_ref().map(|p| p.spec()),
        precoreset_applied: pre.precoreset_applied,
        warnings: pre.warnings.clone(),
    };
    Ok(RunOutcome {
        bundle: ResultBundle {
            config: cfg.clone(),
            coreset_path: None,
            preprocessing,
            catalog,
            report,
            passed,
            timing: Timing {
                preprocess_ms,
                build_ms,
                audit_ms,
            },
        },
        coreset,
        sidecar,
    })
}

/// Output file names inside the output directory.
pub const CORESET_FILE: &str = "coreset.csv";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_CSV_FILE: &str = "report.csv";
pub const BUNDLE_FILE: &str = "bundle.json";

/// [`execute`] and, when an output directory is configured, write the coreset
/// (with sidecar), the report (JSON and CSV) and the bundle. Nothing is
/// written if any stage fails.
pub fn run_experiment(cfg: &RunConfig) -> Result<ResultBundle> {
    let mut out = execute(cfg)?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir).map_err(|e| CoresetError::io(dir, e))?;
        let coreset_path = dir.join(CORESET_FILE);
        io::save_coreset(&coreset_path, &out.coreset, Some(&out.sidecar))?;
        io::save_json(&dir.join(REPORT_FILE), &out.bundle.report)?;
        io::write_text(&dir.join(REPORT_CSV_FILE), &out.bundle.report.to_csv())?;
        out.bundle.coreset_path = Some(coreset_path);
        io::save_json(&dir.join(BUNDLE_FILE), &out.bundle)?;
    }
    Ok(out.bundle)
}
