//! Empirical auditing of a weighted coreset against the full instance.
//!
//! The coreset guarantee quantifies over every `k`-center solution; here it is
//! probed with finite suites of solutions and the relative error
//! `|cost(Omega, S) + offset - cost(P, S)| / cost(P, S)` is reported per solution.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::lower_bounds::basis::{hadamard_solutions, BasisInstance};
use crate::metric::{nearest_unchecked, total_cost, PointSet, PowerParams, Solution, WeightedPoints};
use crate::sampler::{Provenance, WeightedCoreset};
use crate::seeding::dz_seed;
use crate::{par, rng, stats};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Iteration cap for [`lloyd_refine`] in suites.
pub const LLOYD_ITERATIONS: usize = 20;
/// Iterations used when refining adversarial solutions on the coreset.
pub const ADVERSARIAL_ITERATIONS: usize = 10;
/// Candidate medoids drawn per cluster when `z != 2`.
pub const MEDOID_CANDIDATES: usize = 24;

/// `|cost(Omega, S) + offset - cost(P, S)| / cost(P, S)`.
pub fn distortion(p: &PointSet, omega: &WeightedCoreset, s: &Solution, z: u32) -> Result<f64> {
    let full = total_cost(p, s, z)?;
    if !(full > 0.0) {
        return Err(CoresetError::ZeroReferenceCost);
    }
    Ok(relative_error(full, omega.cost(s, z)?))
}

pub fn relative_error(full: f64, approx: f64) -> f64 {
    (approx - full).abs() / full
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    RandomBox,
    SubsetOfP,
    DzSeeded,
    LloydRefined,
    CoresetAdversarial,
    HadamardFamily,
    /// Solutions read from a file; never generated.
    Supplied,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::RandomBox,
        SuiteKind::SubsetOfP,
        SuiteKind::DzSeeded,
        SuiteKind::LloydRefined,
        SuiteKind::CoresetAdversarial,
        SuiteKind::HadamardFamily,
        SuiteKind::Supplied,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::RandomBox => "random_box",
            SuiteKind::SubsetOfP => "subset_of_p",
            SuiteKind::DzSeeded => "dz_seeded",
            SuiteKind::LloydRefined => "lloyd_refined",
            SuiteKind::CoresetAdversarial => "coreset_adversarial",
            SuiteKind::HadamardFamily => "hadamard_family",
            SuiteKind::Supplied => "supplied",
        }
    }

    /// Whether the suite depends on the coreset.
    pub fn needs_coreset(self) -> bool {
        self == SuiteKind::CoresetAdversarial
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoresetError::invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub kind: SuiteKind,
    pub count: usize,
    pub seed: u64,
}

impl SuiteSpec {
    pub fn new(kind: SuiteKind, count: usize, seed: u64) -> Self {
        SuiteSpec { kind, count, seed }
    }
}

/// The default mix: 200 random-box, 100 subset, 100 seeded, 50 Lloyd and 50
/// coreset-adversarial solutions.
pub fn default_suites(seed: u64) -> Vec<SuiteSpec> {
    [
        (SuiteKind::RandomBox, 200),
        (SuiteKind::SubsetOfP, 100),
        (SuiteKind::DzSeeded, 100),
        (SuiteKind::LloydRefined, 50),
        (SuiteKind::CoresetAdversarial, 50),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (kind, count))| SuiteSpec::new(kind, count, rng::derive_seed(seed, &[i as u64])))
    .collect()
}

fn bounding_box(p: &PointSet) -> (Vec<f64>, Vec<f64>) {
    let d = p.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in p.rows() {
        for t in 0..d {
            lo[t] = lo[t].min(row[t]);
            hi[t] = hi[t].max(row[t]);
        }
    }
    (lo, hi)
}

/// Alternating assignment and center update, at most `max_iter` rounds.
/// Centers move to weighted centroids for `z = 2` and to the best of a
/// sample of cluster members (plus the current center) otherwise. An update
/// is kept only if it lowers the total cost.
pub fn lloyd_refine<W: WeightedPoints + ?Sized>(points: &W, s: &Solution, z: u32, max_iter: usize, seed: u64) -> Result<Solution> {
    let mut best = s.clone();
    let mut best_cost = total_cost(points, &best, z)?;
    let mut r = rng::seeded(seed);
    let d = points.dim();
    for _ in 0..max_iter {
        let mut members = vec![Vec::new(); best.k()];
        for i in 0..points.len() {
            members[nearest_unchecked(points.point(i), &best, z).0].push(i);
        }
        let mut next = best.clone();
        for (j, m) in members.iter().enumerate() {
            if m.is_empty() {
                continue;
            }
            if z == 2 {
                let mut acc = vec![0.0; d];
                let mut mass = 0.0;
                for &i in m {
                    let w = points.weight(i);
                    mass += w;
                    acc.iter_mut().zip(points.point(i)).for_each(|(a, x)| *a += w * x);
                }
                if mass > 0.0 {
                    acc.iter_mut().for_each(|a| *a /= mass);
                    next.set_center(j, &acc);
                }
            } else {
                let cluster_cost = |c: &[f64]| -> f64 {
                    m.iter()
                        .map(|&i| points.weight(i) * crate::metric::distance_pow(points.point(i), c, z))
                        .sum()
                };
                let mut best_c = best.center(j).to_vec();
                let mut best_v = cluster_cost(&best_c);
                for _ in 0..MEDOID_CANDIDATES.min(m.len()) {
                    let cand = points.point(m[r.random_range(0..m.len())]);
                    let v = cluster_cost(cand);
                    if v < best_v {
                        best_v = v;
                        best_c = cand.to_vec();
                    }
                }
                next.set_center(j, &best_c);
            }
        }
        let cost = total_cost(points, &next, z)?;
        if cost < best_cost {
            best = next;
            best_cost = cost;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Solutions of one suite, deterministic given the spec's seed.
pub fn generate_suite(p: &PointSet, k: usize, z: u32, spec: &SuiteSpec, omega: Option<&WeightedCoreset>) -> Result<Vec<Solution>> {
    if k == 0 {
        return Err(CoresetError::invalid("k must be at least 1"));
    }
    let d = p.dim();
    let seeds: Vec<u64> = (0..spec.count as u64).map(|i| rng::derive_seed(spec.seed, &[i])).collect();
    match spec.kind {
        SuiteKind::RandomBox => {
            let (lo, hi) = bounding_box(p);
            seeds
                .iter()
                .map(|&sd| {
                    let mut r = rng::seeded(sd);
                    let c = (0..k * d)
                        .map(|i| {
                            let t = i % d;
                            if hi[t] > lo[t] {
                                r.random_range(lo[t]..=hi[t])
                            } else {
                                lo[t]
                            }
                        })
                        .collect();
                    Solution::new(c, d)
                })
                .collect()
        }
        SuiteKind::SubsetOfP => seeds
            .iter()
            .map(|&sd| {
                let mut r = rng::seeded(sd);
                let idx: Vec<usize> = if p.n() >= k {
                    rand::seq::index::sample(&mut r, p.n(), k).into_vec()
                } else {
                    (0..k).map(|_| r.random_range(0..p.n())).collect()
                };
                Solution::new(idx.iter().flat_map(|&i| p.point(i).to_vec()).collect(), d)
            })
            .collect(),
        SuiteKind::DzSeeded => par::try_map(&seeds, |&sd| dz_seed(p, k, z, sd)),
        SuiteKind::LloydRefined => par::try_map(&seeds, |&sd| {
            let s = dz_seed(p, k, z, sd)?;
            lloyd_refine(p, &s, z, LLOYD_ITERATIONS, rng::derive_seed(sd, &[1]))
        }),
        SuiteKind::CoresetAdversarial => {
            let omega = omega.ok_or_else(|| CoresetError::invalid("coreset-adversarial suite needs a coreset"))?;
            if omega.dim != d {
                return Err(CoresetError::DimensionMismatch {
                    expected: d,
                    found: omega.dim,
                });
            }
            par::try_map(&seeds, |&sd| {
                let s = dz_seed(omega, k, z, sd)?;
                lloyd_refine(omega, &s, z, ADVERSARIAL_ITERATIONS, rng::derive_seed(sd, &[1]))
            })
        }
        SuiteKind::Supplied => Err(CoresetError::invalid("supplied solutions are loaded, not generated")),
        SuiteKind::HadamardFamily => {
            let inst = BasisInstance::recognize(p, k)?;
            let mut sols = hadamard_solutions(&inst)?;
            if spec.count > 0 {
                sols.truncate(spec.count);
            }
            Ok(sols)
        }
    }
}

/// A suite solution with its full-instance cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSolution {
    pub kind: SuiteKind,
    pub index: usize,
    pub solution: Solution,
    pub full_cost: f64,
}

/// Generates the suites and evaluates `cost(P, S)` for every solution.
/// Solutions with zero full cost are dropped; the count of dropped ones is returned.
pub fn prepare_suites(
    p: &PointSet,
    k: usize,
    z: u32,
    specs: &[SuiteSpec],
    omega: Option<&WeightedCoreset>,
) -> Result<(Vec<LabeledSolution>, usize)> {
    let mut out = Vec::new();
    let mut excluded = 0;
    for spec in specs {
        let sols = generate_suite(p, k, z, spec, omega)?;
        let costs = par::try_map(&sols, |s| total_cost(p, s, z))?;
        for (index, (solution, full_cost)) in sols.into_iter().zip(costs).enumerate() {
            if full_cost > 0.0 {
                out.push(LabeledSolution {
                    kind: spec.kind,
                    index,
                    solution,
                    full_cost,
                });
            } else {
                excluded += 1;
            }
        }
    }
    Ok((out, excluded))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub suite: SuiteKind,
    pub index: usize,
    pub full_cost: f64,
    pub coreset_cost: f64,
    pub distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteStats {
    pub suite: SuiteKind,
    pub count: usize,
    pub max: f64,
    pub mean: f64,
}

/// Build parameters echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildMeta {
    pub delta: usize,
    pub delta_formula: f64,
    pub delta_capped: bool,
    pub c_delta: f64,
    pub seed: u64,
    pub groups: usize,
    pub sampled_points: usize,
    pub center_points: usize,
    pub reference_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub schema_version: u32,
    pub k: usize,
    pub z: u32,
    pub epsilon: f64,
    pub coreset_size: usize,
    pub solutions: usize,
    pub excluded_zero_cost: usize,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub p99: f64,
    pub suites: Vec<SuiteStats>,
    pub total_weight: f64,
    pub total_mass: u64,
    /// `w(Omega) / N`.
    pub weight_ratio: f64,
    /// `w(Omega)` lies in `(1 +- 2 eps) N`.
    pub weight_check: bool,
    pub build: Option<BuildMeta>,
    pub rows: Vec<SolutionRow>,
}

impl DistortionReport {
    /// Whether the largest observed distortion is at most `eps`.
    pub fn within(&self, eps: f64) -> bool {
        self.max <= eps
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per solution: `suite,index,full_cost,coreset_cost,distortion`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,index,full_cost,coreset_cost,distortion\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:?},{:?},{:?}\n", r.suite, r.index, r.full_cost, r.coreset_cost, r.distortion));
        }
        out
    }
}

/// Evaluates the coreset on prepared solutions.
pub fn evaluate(
    p: &PointSet,
    omega: &WeightedCoreset,
    solutions: &[LabeledSolution],
    excluded: usize,
    k: usize,
    params: &PowerParams,
) -> Result<DistortionReport> {
    if solutions.is_empty() {
        return Err(CoresetError::invalid("no solutions to audit"));
    }
    let z = params.z;
    let rows: Vec<SolutionRow> = par::try_map(solutions, |ls| {
        let coreset_cost = omega.cost(&ls.solution, z)?;
        Ok(SolutionRow {
            suite: ls.kind,
            index: ls.index,
            full_cost: ls.full_cost,
            coreset_cost,
            distortion: relative_error(ls.full_cost, coreset_cost),
        })
    })?;
    let mut sorted: Vec<f64> = rows.iter().map(|r| r.distortion).collect();
    sorted.sort_by(f64::total_cmp);
    let mut per: BTreeMap<SuiteKind, (usize, f64, f64)> = BTreeMap::new();
    for r in &rows {
        let e = per.entry(r.suite).or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 = e.1.max(r.distortion);
        e.2 += r.distortion;
    }
    let total_weight: f64 = omega.weights.iter().sum();
    let total_mass = p.total_mass();
    let ratio = total_weight / total_mass as f64;
    Ok(DistortionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        k,
        z,
        epsilon: params.epsilon,
        coreset_size: omega.len(),
        solutions: rows.len(),
        excluded_zero_cost: excluded,
        max: *sorted.last().unwrap(),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median: stats::quantile(&sorted, 0.5),
        p90: stats::quantile(&sorted, 0.9),
        p99: stats::quantile(&sorted, 0.99),
        suites: per
            .into_iter()
            .map(|(suite, (count, max, sum))| SuiteStats {
                suite,
                count,
                max,
                mean: sum / count as f64,
            })
            .collect(),
        total_weight,
        total_mass,
        weight_ratio: ratio,
        weight_check: (ratio - 1.0).abs() < 2.0 * params.epsilon,
        build: None,
        rows,
    })
}

/// Generates the suites and audits `omega` against `p`.
pub fn audit(p: &PointSet, omega: &WeightedCoreset, suites: &[SuiteSpec], k: usize, params: &PowerParams) -> Result<DistortionReport> {
    if suites.is_empty() {
        return Err(CoresetError::invalid("at least one suite is required"));
    }
    let (solutions, excluded) = prepare_suites(p, k, params.z, suites, Some(omega))?;
    evaluate(p, omega, &solutions, excluded, k, params)
}

/// `size` draws uniform over the total mass, each with weight `N / size`,
/// aggregated per point.
pub fn uniform_baseline(p: &PointSet, size: usize, seed: u64) -> Result<WeightedCoreset> {
    if size == 0 {
        return Err(CoresetError::invalid("baseline size must be at least 1"));
    }
    let mass = p.total_mass();
    let cumulative: Vec<u64> = p
        .multiplicities()
        .iter()
        .scan(0u64, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let mut r = rng::seeded(seed);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..size {
        let t = r.random_range(0..mass);
        let i = cumulative.partition_point(|&c| c <= t);
        *counts.entry(i).or_default() += 1;
    }
    let per_draw = mass as f64 / size as f64;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (&i, &c) in &counts {
        coords.extend_from_slice(p.point(i));
        weights.push(c as f64 * per_draw);
    }
    let prov = vec![Provenance::Uniform; weights.len()];
    WeightedCoreset::new(p.dim(), coords, weights, prov)
}
