//! Subcommand handlers. Each returns whether its criteria passed.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use coreset_forge::evaluator::{self, LabeledSolution, SuiteKind, SuiteSpec};
use coreset_forge::experiment::{self, GeneratorSpec, InstanceSource, RunConfig};
use coreset_forge::io::{self, PointFormat};
use coreset_forge::lower_bounds::anticoncentration::anticoncentration_mc;
use coreset_forge::lower_bounds::basis::{hadamard_solutions, unit_center_bound};
use coreset_forge::metric::{total_cost, PointSet, PowerParams, WeightedPoints};
use coreset_forge::projection::make_projection;
use coreset_forge::sampler;
use coreset_forge::seeding::{self, LocalSearch};
use coreset_forge::synth::gaussian_mixture;
use coreset_forge::{par, rng};

use crate::{AuditArgs, Cli, Command, McCommand, ProblemArgs, SourceArgs};

pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        par::set_threads(n);
    }
    let base = match &cli.config {
        Some(path) => Some(RunConfig::from_json_file(path)?),
        None => None,
    };
    let ctx = Ctx { cli, base };
    match &cli.command {
        Command::Build {
            source,
            problem,
            audit,
            delta,
            c_delta,
            min_factor,
            project,
            precoreset,
            no_weight_check,
            out_dir,
        } => {
            let mut cfg = ctx.run_config(source, problem, true)?;
            if delta.is_some() {
                cfg.sampler.delta = *delta;
            }
            if let Some(c) = c_delta {
                cfg.sampler.c_delta = *c;
            }
            cfg.sampler.use_min_factor |= *min_factor;
            if precoreset.is_some() {
                cfg.sampler.precoreset_bound = *precoreset;
            }
            if let Some(p) = project {
                cfg.sampler.project_dim = Some(projection_dim(p, &cfg)?);
            }
            apply_audit(&mut cfg, audit)?;
            if *no_weight_check {
                cfg.criteria.weight_check = false;
            }
            if out_dir.is_some() {
                cfg.output_dir = out_dir.clone();
            }
            if cfg.output_dir.is_none() {
                bail!("build needs --out-dir (or output_dir in the config)");
            }
            let bundle = experiment::run_experiment(&cfg)?;
            let r = &bundle.report;
            println!(
                "coreset {} points, weight {:.6} of {} (check {}), max distortion {:.6} over {} solutions: {}",
                r.coreset_size,
                r.total_weight,
                r.total_mass,
                if r.weight_check { "ok" } else { "failed" },
                r.max,
                r.solutions,
                verdict(bundle.passed)
            );
            if let Some(path) = &bundle.coreset_path {
                println!("wrote {}", path.display());
            }
            ctx.emit(&bundle)?;
            Ok(bundle.passed)
        }
        Command::Eval {
            points,
            coreset,
            problem,
            audit,
            solutions,
            csv_out,
        } => ctx.eval(points, coreset, problem, audit, solutions.as_deref(), csv_out.as_deref()),
        Command::LbGen { spec, out, solutions } => ctx.lb_gen(spec, out, solutions.as_deref()),
        Command::Approx {
            source,
            problem,
            sweeps,
            out,
        } => ctx.approx(source, problem, *sweeps, out.as_deref()),
        Command::Mc { experiment } => match experiment {
            McCommand::Tail {
                m,
                p,
                eps,
                trials,
                weights,
                max_rate,
            } => ctx.mc_tail(*m, *p, *eps, *trials, weights.as_deref(), *max_rate),
            McCommand::Unbiased {
                source,
                problem,
                delta,
                reps,
                solutions,
                max_group_points,
                tolerance,
            } => ctx.mc_unbiased(source, problem, *delta, *reps, *solutions, *max_group_points, *tolerance),
        },
        Command::Inspect { source, problem, delta } => ctx.inspect(source, problem, *delta),
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Parses `name=count[,name=count...]`.
pub fn parse_suites(text: &str, seed: u64) -> Result<Vec<SuiteSpec>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(i, item)| {
            let (name, count) = item
                .trim()
                .split_once('=')
                .ok_or_else(|| anyhow!("suite {item:?} is not name=count"))?;
            let kind: SuiteKind = name.parse()?;
            let count: usize = count.parse().with_context(|| format!("bad count in {item:?}"))?;
            Ok(SuiteSpec::new(kind, count, rng::derive_seed(seed, &[i as u64])))
        })
        .collect()
}

fn apply_audit(cfg: &mut RunConfig, audit: &AuditArgs) -> Result<()> {
    if let Some(text) = &audit.suites {
        cfg.suites = parse_suites(text, cfg.seed)?;
    }
    if audit.max_distortion.is_some() {
        cfg.criteria.max_distortion = audit.max_distortion;
    }
    Ok(())
}

fn projection_dim(text: &str, cfg: &RunConfig) -> Result<usize> {
    if text != "auto" {
        return text.parse().with_context(|| format!("bad projection dimension {text:?}"));
    }
    let (p, _, _) = sampler::round_weights(&cfg.source.load()?, cfg.sampler.weight_scale)?;
    Ok(coreset_forge::projection::default_target_dim(p.dim(), p.distinct_count(), cfg.epsilon))
}

struct Ctx<'a> {
    cli: &'a Cli,
    base: Option<RunConfig>,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.cli.seed.or(self.base.as_ref().map(|c| c.seed)).unwrap_or(0)
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        if let Some(path) = &self.cli.json_out {
            io::save_json(path, value)?;
        }
        Ok(())
    }

    fn source(&self, s: &SourceArgs) -> Result<InstanceSource> {
        match (&s.input, &s.generate) {
            (Some(p), _) => Ok(InstanceSource::File(p.clone())),
            (None, Some(g)) => Ok(InstanceSource::Generator(g.clone())),
            (None, None) => self
                .base
                .as_ref()
                .map(|c| c.source.clone())
                .ok_or_else(|| anyhow!("need --input or --generate (or a config file)")),
        }
    }

    fn k(&self, p: &ProblemArgs) -> Result<usize> {
        p.k.or(self.base.as_ref().map(|c| c.k))
            .ok_or_else(|| anyhow!("need -k (or a config file)"))
    }

    fn z(&self, p: &ProblemArgs) -> u32 {
        p.z.or(self.base.as_ref().map(|c| c.z)).unwrap_or(2)
    }

    fn eps(&self, p: &ProblemArgs) -> Result<f64> {
        p.eps
            .or(self.base.as_ref().map(|c| c.epsilon))
            .ok_or_else(|| anyhow!("need --eps (or a config file)"))
    }

    fn run_config(&self, s: &SourceArgs, p: &ProblemArgs, need_eps: bool) -> Result<RunConfig> {
        let source = self.source(s)?;
        let (k, z) = (self.k(p)?, self.z(p));
        let eps = if need_eps { self.eps(p)? } else { self.eps(p).unwrap_or(0.1) };
        let mut cfg = match &self.base {
            Some(base) => RunConfig {
                source,
                k,
                z,
                epsilon: eps,
                ..base.clone()
            },
            None => RunConfig::new(source, k, z, eps),
        };
        cfg.seed = self.seed();
        Ok(cfg)
    }

    /// Loads and rounds the instance of `cfg`.
    fn instance(&self, cfg: &RunConfig) -> Result<PointSet> {
        cfg.validate()?;
        let (p, _, dropped) = sampler::round_weights(&cfg.source.load()?, cfg.sampler.weight_scale)?;
        if dropped > 0 {
            eprintln!("warning: {dropped} points dropped after weight rounding");
        }
        Ok(p)
    }

    fn eval(
        &self,
        points: &Path,
        coreset: &Path,
        problem: &ProblemArgs,
        audit: &AuditArgs,
        solutions: Option<&Path>,
        csv_out: Option<&Path>,
    ) -> Result<bool> {
        let omega = io::load_coreset(coreset)?;
        let sidecar_file = io::sidecar_path(coreset);
        let sidecar = if sidecar_file.exists() {
            Some(io::load_sidecar(&sidecar_file)?)
        } else {
            None
        };
        let k = problem
            .k
            .or(sidecar.as_ref().map(|s| s.k))
            .or(self.base.as_ref().map(|c| c.k))
            .ok_or_else(|| anyhow!("need -k (no sidecar found)"))?;
        let z = problem
            .z
            .or(sidecar.as_ref().map(|s| s.z))
            .or(self.base.as_ref().map(|c| c.z))
            .unwrap_or(2);
        let eps = problem
            .eps
            .or(sidecar.as_ref().map(|s| s.epsilon))
            .or(self.base.as_ref().map(|c| c.epsilon))
            .ok_or_else(|| anyhow!("need --eps (no sidecar found)"))?;
        let params = PowerParams::new(z, eps)?;

        let raw = io::load_raw_points(points, PointFormat::from_path(points))?;
        let (mut p, _, _) = sampler::round_weights(&raw, sidecar.as_ref().map(|s| s.input_scale))?;
        if let Some(spec) = sidecar.as_ref().and_then(|s| s.projection) {
            p = make_projection(spec.d, spec.m, spec.seed)?.apply_points(&p)?;
        }

        let seed = self.seed();
        let specs = match &audit.suites {
            Some(text) => parse_suites(text, seed)?,
            None if solutions.is_some() => Vec::new(),
            None => self
                .base
                .as_ref()
                .map(|c| c.effective_suites())
                .unwrap_or_else(|| evaluator::default_suites(seed)),
        };
        let (mut labeled, mut excluded) = evaluator::prepare_suites(&p, k, z, &specs, Some(&omega))?;
        if let Some(path) = solutions {
            for (index, solution) in io::load_solutions(path)?.into_iter().enumerate() {
                let full_cost = total_cost(&p, &solution, z)?;
                if full_cost > 0.0 {
                    labeled.push(LabeledSolution {
                        kind: SuiteKind::Supplied,
                        index,
                        solution,
                        full_cost,
                    });
                } else {
                    excluded += 1;
                }
            }
        }
        let report = evaluator::evaluate(&p, &omega, &labeled, excluded, k, &params)?;
        let limit = audit
            .max_distortion
            .or(self.base.as_ref().and_then(|c| c.criteria.max_distortion))
            .unwrap_or(eps);
        let passed = report.max <= limit;
        println!(
            "audited {} solutions: max {:.6}, median {:.6}, p99 {:.6} (limit {limit}): {}",
            report.solutions,
            report.max,
            report.median,
            report.p99,
            verdict(passed)
        );
        if let Some(path) = csv_out {
            io::write_text(path, &report.to_csv())?;
        }
        self.emit(&json!({ "passed": passed, "limit": limit, "report": report }))?;
        Ok(passed)
    }

    fn lb_gen(&self, spec: &str, out: &Path, solutions: Option<&Path>) -> Result<bool> {
        let mut text = spec.to_string();
        if let Some(seed) = self.cli.seed {
            if !spec.split_whitespace().any(|t| t.starts_with("seed=")) && !spec.trim_start().starts_with("basis") {
                text = format!("{spec} seed={seed}");
            }
        }
        let gen: GeneratorSpec = text.parse()?;
        let summary = match &gen {
            GeneratorSpec::Basis { .. } => {
                let inst = gen.basis()?;
                io::save_points(out, &inst.points, PointFormat::from_path(out))?;
                if let Some(path) = solutions {
                    io::save_solutions(path, &hadamard_solutions(&inst)?)?;
                }
                let d = inst.d;
                json!({
                    "kind": "basis",
                    "k": inst.k,
                    "q": inst.q,
                    "d": d,
                    "ambient_dim": inst.ambient_dim(),
                    "points": inst.points.n(),
                    "unit_center_bound_z2": unit_center_bound(d, inst.k, 2),
                    "orthogonal_cost_z2": 2.0 * d as f64,
                })
            }
            GeneratorSpec::Mixture(m) => {
                let (p, planted) = gaussian_mixture(m)?;
                io::save_points(out, &p, PointFormat::from_path(out))?;
                if let Some(path) = solutions {
                    io::save_solutions(path, std::slice::from_ref(&planted))?;
                }
                json!({ "kind": "mixture", "spec": m, "points": p.n(), "planted_cost_z2": total_cost(&p, &planted, 2)? })
            }
            _ => {
                if solutions.is_some() {
                    bail!("--solutions is not available for discrete instances");
                }
                let inst = gen.discrete()?;
                io::save_discrete(out, &inst)?;
                json!({ "kind": "discrete", "manifest": io::discrete_manifest(&inst) })
            }
        };
        println!("wrote {}", out.display());
        println!("{}", serde_json::to_string_pretty(&summary)?);
        self.emit(&summary)?;
        Ok(true)
    }

    fn approx(&self, source: &SourceArgs, problem: &ProblemArgs, sweeps: usize, out: Option<&Path>) -> Result<bool> {
        let cfg = self.run_config(source, problem, false)?;
        let p = self.instance(&cfg)?;
        let seeded = seeding::dz_seed(&p, cfg.k, cfg.z, cfg.seed)?;
        let seeded_cost = total_cost(&p, &seeded, cfg.z)?;
        let s = if sweeps > 0 {
            let search = LocalSearch {
                max_sweeps: sweeps,
                seed: rng::derive_seed(cfg.seed, &[1]),
                ..LocalSearch::default()
            };
            seeding::local_search_with(&p, &seeded, cfg.z, &search)?
        } else {
            seeded
        };
        let cost = total_cost(&p, &s, cfg.z)?;
        println!("seeding cost {seeded_cost:.6}, final cost {cost:.6} ({sweeps} local-search sweeps)");
        if let Some(path) = out {
            io::save_solutions(path, std::slice::from_ref(&s))?;
        }
        let centers: Vec<&[f64]> = s.centers().collect();
        self.emit(&json!({
            "k": cfg.k,
            "z": cfg.z,
            "seed": cfg.seed,
            "seeding_cost": seeded_cost,
            "cost": cost,
            "sweeps": sweeps,
            "centers": centers,
        }))?;
        Ok(true)
    }

    fn mc_tail(&self, m: usize, p: f64, eps: f64, trials: u64, weights: Option<&Path>, max_rate: Option<f64>) -> Result<bool> {
        let w = match weights {
            Some(path) => Some(
                fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| l.trim().parse::<f64>().with_context(|| format!("bad weight {l:?}")))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let est = anticoncentration_mc(m, p, eps, w.as_deref(), trials, self.seed())?;
        let passed = match (max_rate, est.fitted_rate) {
            (None, _) => true,
            (Some(limit), Some(rate)) => rate <= limit,
            (Some(_), None) => false,
        };
        println!(
            "m={m} p={p} eps={eps}: {} / {} hits, estimate {:.3e} [{:.3e}, {:.3e}], fitted rate {}: {}",
            est.hits,
            est.trials,
            est.estimate,
            est.lower,
            est.upper,
            est.fitted_rate.map_or("n/a".to_string(), |r| format!("{r:.4}")),
            verdict(passed)
        );
        self.emit(&json!({ "passed": passed, "max_rate": max_rate, "estimate": est }))?;
        Ok(passed)
    }

    #[allow(clippy::too_many_arguments)]
    fn mc_unbiased(
        &self,
        source: &SourceArgs,
        problem: &ProblemArgs,
        delta: usize,
        reps: usize,
        n_solutions: usize,
        max_group_points: usize,
        tolerance: f64,
    ) -> Result<bool> {
        let cfg = self.run_config(source, problem, true)?;
        let p = self.instance(&cfg)?;
        let params = cfg.params()?;
        let sampler_cfg = cfg.effective_sampler();
        let clu = sampler::reference_clustering(&p, cfg.k, cfg.z, &sampler_cfg)?;
        let cat = coreset_forge::partition::partition(&clu, &params, p.multiplicities());
        let spec = SuiteSpec::new(SuiteKind::DzSeeded, n_solutions, rng::derive_seed(cfg.seed, &[7]));
        let solutions = evaluator::generate_suite(&p, cfg.k, cfg.z, &spec, None)?;
        let mut rows = Vec::new();
        for (key, group) in &cat.groups {
            if group.members.len() > max_group_points || !(group.cost > 0.0) {
                continue;
            }
            for (j, s) in solutions.iter().enumerate() {
                let est = sampler::group_estimator_mc(&p, &clu, &cat, key, s, delta, reps, rng::derive_seed(cfg.seed, &[key.stable_id(), j as u64]))?;
                rows.push(json!({ "solution": j, "estimate": est }));
                println!(
                    "{:<14} solution {j}: exact {:.6e}, mean {:.6e}, relative error {:.2e}",
                    est.group, est.exact, est.mean, est.relative_error
                );
            }
        }
        if rows.is_empty() {
            bail!("no group with at most {max_group_points} points");
        }
        let worst = rows
            .iter()
            .map(|r| r["estimate"]["relative_error"].as_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        let passed = worst <= tolerance;
        println!("worst relative error {worst:.3e} (tolerance {tolerance}): {}", verdict(passed));
        self.emit(&json!({ "passed": passed, "tolerance": tolerance, "worst": worst, "rows": rows }))?;
        Ok(passed)
    }

    fn inspect(&self, source: &SourceArgs, problem: &ProblemArgs, delta: Option<usize>) -> Result<bool> {
        let mut cfg = self.run_config(source, problem, true)?;
        if delta.is_some() {
            cfg.sampler.delta = delta;
        }
        let p = self.instance(&cfg)?;
        let params = cfg.params()?;
        let sampler_cfg = cfg.effective_sampler();
        let clu = sampler::reference_clustering(&p, cfg.k, cfg.z, &sampler_cfg)?;
        let cat = coreset_forge::partition::partition(&clu, &params, p.multiplicities());
        let summary = cat.summary(p.multiplicities());
        let choice = match cfg.sampler.delta {
            Some(d) => d,
            None => sampler::default_delta(cfg.k, &params, &sampler_cfg, p.total_mass())?.value,
        };
        println!(
            "{} points in dimension {}, reference cost {:.6}, {} groups (bound {:.1}), {} proxied points",
            p.n(),
            p.dim(),
            clu.total_cost(),
            summary.group_count,
            summary.group_count_bound,
            summary.proxied_points
        );
        println!("{:<14} {:>8} {:>10} {:>14}", "group", "points", "mass", "cost");
        for g in &summary.groups {
            println!("{:<14} {:>8} {:>10} {:>14.6e}", g.id, g.points, g.mass, g.cost);
        }
        println!("draws per group {choice}, expected sample size at most {}", choice * summary.group_count + cfg.k);
        self.emit(&json!({
            "reference_cost": clu.total_cost(),
            "delta": choice,
            "catalog": summary,
        }))?;
        Ok(true)
    }
}
