//! Per-group sensitivity sampling and coreset assembly.
//!
//! Inside a group `G` a point is drawn with probability proportional to
//! `mult(p) * cost(p, A)`, `delta` times with replacement, and each draw
//! carries weight `cost(G, A) / (delta * cost(p, A))`. Proxied points are
//! represented by their cluster center, weighted by the proxied mass. The
//! coreset offset is always zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::{PointSet, PowerParams, Solution, WeightedPoints};
use crate::partition::{self, GroupCatalog, GroupKey, Label};
use crate::seeding::{self, build_clustering, Clustering, LocalSearch};
use crate::{par, rng};

/// Sampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Draws per group; `None` uses [`default_delta`].
    pub delta: Option<usize>,
    pub seed: u64,
    /// Constant multiplying `k * ln(k/eps) * eps^-2` in the default draw count.
    pub c_delta: f64,
    /// Multiply the default draw count by `min(eps^-z, k)`.
    pub use_min_factor: bool,
    /// Target dimension of the optional random projection.
    pub project_dim: Option<usize>,
    /// Factor applied to real input weights before rounding to multiplicities.
    pub weight_scale: Option<f64>,
    /// Run a plain sensitivity-sampling reduction when the instance has more
    /// distinct points than this.
    pub precoreset_bound: Option<usize>,
    pub local_search: LocalSearch,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            delta: None,
            seed: 0,
            c_delta: DEFAULT_C_DELTA,
            use_min_factor: false,
            project_dim: None,
            weight_scale: None,
            precoreset_bound: None,
            local_search: LocalSearch::default(),
        }
    }
}

pub const DEFAULT_C_DELTA: f64 = 200.0;

const STREAM_SEEDING: u64 = 1;
const STREAM_LOCAL_SEARCH: u64 = 2;
const STREAM_GROUP: u64 = 3;
const STREAM_PRECORESET: u64 = 4;
const STREAM_PROJECTION: u64 = 5;

/// Chosen number of draws per group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaChoice {
    pub value: usize,
    /// Value of the formula before the cap.
    pub formula: f64,
    /// True when the formula exceeded the total mass and was clamped to it.
    pub capped: bool,
}

/// `ceil(c_delta * k * ln(k/eps) * eps^-2 * [min(eps^-z, k)])`, capped at the
/// total mass. The `log^3(1/eps)` and `2^O(z log z)` factors live in `c_delta`.
pub fn default_delta(k: usize, params: &PowerParams, cfg: &SamplerConfig, total_mass: u64) -> Result<DeltaChoice> {
    if k == 0 {
        return Err(CoresetError::invalid("k must be at least 1"));
    }
    if !(cfg.c_delta > 0.0) {
        return Err(CoresetError::invalid("c_delta must be positive"));
    }
    let eps = params.epsilon;
    let kf = k as f64;
    let mut formula = cfg.c_delta * kf * (kf / eps).ln() * eps.powi(-2);
    if cfg.use_min_factor {
        formula *= eps.powi(-(params.z as i32)).min(kf);
    }
    let formula = formula.ceil().max(1.0);
    let cap = total_mass.max(1) as f64;
    Ok(if formula > cap {
        DeltaChoice {
            value: total_mass.max(1) as usize,
            formula,
            capped: true,
        }
    } else {
        DeltaChoice {
            value: formula as usize,
            formula,
            capped: false,
        }
    })
}

/// Draws `delta` points of group `key` and returns aggregated `(point index, weight)`
/// pairs in increasing index order.
pub fn sample_group(
    points: &PointSet,
    clu: &Clustering,
    cat: &GroupCatalog,
    key: &GroupKey,
    delta: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let group = cat
        .groups
        .get(key)
        .ok_or_else(|| CoresetError::invalid(format!("no group {key} in catalog")))?;
    if delta == 0 {
        return Err(CoresetError::invalid("delta must be at least 1"));
    }
    if !(group.cost > 0.0) {
        return Err(CoresetError::ZeroCostGroup(key.to_string()));
    }
    let probs: Vec<f64> = group
        .members
        .iter()
        .map(|&i| points.multiplicity(i) as f64 * clu.point_cost[i])
        .collect();
    if probs.iter().any(|&w| !(w > 0.0)) {
        return Err(CoresetError::ZeroCostGroup(key.to_string()));
    }
    let alias = WeightedAliasIndex::new(probs).map_err(|e| CoresetError::invalid(format!("group {key}: {e}")))?;
    let mut rng = rng::substream(seed, &[STREAM_GROUP, key.stable_id()]);
    let mut counts = vec![0usize; group.members.len()];
    for _ in 0..delta {
        counts[alias.sample(&mut rng)] += 1;
    }
    Ok(group
        .members
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&i, &c)| (i, (c as f64 * group.cost) / (delta as f64 * clu.point_cost[i])))
        .collect())
}

/// Center weights: proxied mass of every cluster, omitting zeros.
pub fn proxy_centers(clu: &Clustering, cat: &GroupCatalog, multiplicity: &[u64]) -> Vec<(usize, u64)> {
    let mut mass = vec![0u64; clu.k()];
    for (i, label) in cat.labels.iter().enumerate() {
        if *label == Label::Proxied {
            mass[clu.assignment[i]] += multiplicity[i];
        }
    }
    mass.into_iter().enumerate().filter(|(_, m)| *m > 0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Sampled(GroupKey),
    Center(usize),
    /// Drawn by a uniform baseline sample.
    Uniform,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Sampled(key) => write!(f, "{key}"),
            Provenance::Center(i) => write!(f, "center:{i}"),
            Provenance::Uniform => write!(f, "uniform"),
        }
    }
}

impl FromStr for Provenance {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(Provenance::Uniform);
        }
        match s.strip_prefix("center:") {
            Some(i) => i
                .parse()
                .map(Provenance::Center)
                .map_err(|_| CoresetError::invalid(format!("bad provenance {s:?}"))),
            None => s.parse().map(Provenance::Sampled),
        }
    }
}

/// Weighted point set with an additive offset (always 0 here).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCoreset {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub offset: f64,
    pub provenance: Vec<Provenance>,
}

impl WeightedCoreset {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>, provenance: Vec<Provenance>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() || provenance.len() != weights.len() {
            return Err(CoresetError::invalid("inconsistent coreset dimensions"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(CoresetError::invalid("coreset weights must be positive and finite"));
        }
        Ok(WeightedCoreset {
            dim,
            points,
            weights,
            offset: 0.0,
            provenance,
        })
    }

    /// Every input point with its multiplicity as weight.
    pub fn identity(points: &PointSet) -> Self {
        WeightedCoreset {
            dim: points.dim(),
            points: points.coords().to_vec(),
            weights: points.multiplicities().iter().map(|&m| m as f64).collect(),
            offset: 0.0,
            provenance: (0..points.n()).map(Provenance::Center).collect(),
        }
    }

    /// `sum w_p cost(p, S) + offset`.
    pub fn cost(&self, s: &Solution, z: u32) -> Result<f64> {
        Ok(crate::metric::total_cost(self, s, z)? + self.offset)
    }

    /// Multiplies every weight by `factor`.
    pub fn rescaled(mut self, factor: f64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self
    }
}

impl WeightedPoints for WeightedCoreset {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Everything produced by one coreset build.
#[derive(Debug, Clone)]
pub struct CoresetBuild {
    pub coreset: WeightedCoreset,
    pub clustering: Clustering,
    pub catalog: GroupCatalog,
    pub delta: DeltaChoice,
    pub reference_cost: f64,
    pub sampled_points: usize,
    pub center_points: usize,
}

/// Seeds the reference solution used by [`build_coreset`].
pub fn reference_clustering(points: &PointSet, k: usize, z: u32, cfg: &SamplerConfig) -> Result<Clustering> {
    let seed = rng::derive_seed(cfg.seed, &[STREAM_SEEDING]);
    let s = seeding::dz_seed(points, k, z, seed)?;
    let search = LocalSearch {
        seed: rng::derive_seed(cfg.seed, &[STREAM_LOCAL_SEARCH]),
        ..cfg.local_search
    };
    let s = seeding::local_search_with(points, &s, z, &search)?;
    build_clustering(points, &s, z)
}

/// Builds a coreset of an already preprocessed instance: reference solution,
/// ring and group partition, per-group sampling and center weighting.
pub fn build_coreset(points: &PointSet, k: usize, params: &PowerParams, cfg: &SamplerConfig) -> Result<CoresetBuild> {
    let clu = reference_clustering(points, k, params.z, cfg)?;
    build_coreset_with(points, clu, params, cfg)
}

/// [`build_coreset`] with a caller-provided reference clustering.
pub fn build_coreset_with(points: &PointSet, clu: Clustering, params: &PowerParams, cfg: &SamplerConfig) -> Result<CoresetBuild> {
    let k = clu.k();
    let delta = match cfg.delta {
        Some(0) => return Err(CoresetError::invalid("delta must be at least 1")),
        Some(d) => DeltaChoice {
            value: d,
            formula: d as f64,
            capped: false,
        },
        None => default_delta(k, params, cfg, points.total_mass())?,
    };
    let catalog = partition::partition(&clu, params, points.multiplicities());
    let keys: Vec<GroupKey> = catalog.groups.keys().copied().collect();
    let samples = par::try_map(&keys, |key| sample_group(points, &clu, &catalog, key, delta.value, cfg.seed))?;

    let dim = points.dim();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut provenance = Vec::new();
    for (key, drawn) in keys.iter().zip(&samples) {
        for &(i, w) in drawn {
            coords.extend_from_slice(points.point(i));
            weights.push(w);
            provenance.push(Provenance::Sampled(*key));
        }
    }
    let sampled_points = weights.len();
    let centers = proxy_centers(&clu, &catalog, points.multiplicities());
    for &(c, m) in &centers {
        coords.extend_from_slice(clu.solution.center(c));
        weights.push(m as f64);
        provenance.push(Provenance::Center(c));
    }
    let coreset = WeightedCoreset::new(dim, coords, weights, provenance)?;
    Ok(CoresetBuild {
        reference_cost: clu.total_cost(),
        coreset,
        clustering: clu,
        catalog,
        delta,
        sampled_points,
        center_points: centers.len(),
    })
}

/// Splits per-point costs under `S` into the entries where `S` is "huge"
/// relative to `A` (`cost(p,S) >= (4z/eps)^z cost(p,A)`) and the rest.
/// Returns `(||u||_1, ||v - u||_1)` with multiplicities.
pub fn huge_split(points: &PointSet, members: &[usize], cost_s: &[f64], cost_a: &[f64], params: &PowerParams) -> (f64, f64) {
    let factor = (4.0 * params.z as f64 / params.epsilon).powi(params.z as i32);
    let mut huge = 0.0;
    let mut rest = 0.0;
    for &i in members {
        let v = points.multiplicity(i) as f64 * cost_s[i];
        if cost_s[i] >= factor * cost_a[i] {
            huge += v;
        } else {
            rest += v;
        }
    }
    (huge, rest)
}

/// Raw input: coordinates with optional non-negative real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPoints {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl RawPoints {
    pub fn n(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }
}

impl From<&PointSet> for RawPoints {
    fn from(p: &PointSet) -> Self {
        RawPoints {
            dim: p.dim(),
            coords: p.coords().to_vec(),
            weights: Some(p.multiplicities().iter().map(|&m| m as f64).collect()),
        }
    }
}

/// Output of [`preprocess`].
#[derive(Debug, Clone)]
pub struct Preprocessed {
    /// Instance handed to [`build_coreset`].
    pub points: PointSet,
    /// Instance the coreset approximates: rounded (and projected), before
    /// any pre-coreset reduction. Audits run against this.
    pub reference: PointSet,
    /// Factor that maps coreset weights built on `points` to the units of `reference`.
    pub weight_factor: f64,
    /// Scale applied to real input weights before rounding.
    pub input_scale: f64,
    pub dropped: usize,
    pub projection: Option<crate::projection::ProjectionMap>,
    pub precoreset_applied: bool,
    pub warnings: Vec<String>,
}

/// Rounds real weights to multiplicities (`round(w * scale)`, zeros dropped).
pub fn round_weights(raw: &RawPoints, scale: Option<f64>) -> Result<(PointSet, f64, usize)> {
    let Some(weights) = &raw.weights else {
        return Ok((PointSet::new(raw.coords.clone(), raw.dim)?, 1.0, 0));
    };
    if weights.len() != raw.n() {
        return Err(CoresetError::invalid(format!("{} weights for {} points", weights.len(), raw.n())));
    }
    if let Some(row) = weights.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(CoresetError::NegativeWeight { row });
    }
    let scale = match scale {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(CoresetError::invalid(format!("weight scale must be positive, got {s}"))),
        None => {
            let min_pos = weights.iter().copied().filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
            if min_pos.is_finite() && min_pos < 1.0 {
                1.0 / min_pos
            } else {
                1.0
            }
        }
    };
    let mut coords = Vec::with_capacity(raw.coords.len());
    let mut mult = Vec::with_capacity(weights.len());
    let mut dropped = 0;
    for (row, &w) in raw.coords.chunks_exact(raw.dim).zip(weights) {
        let m = (w * scale).round();
        if m < 1.0 {
            dropped += 1;
            continue;
        }
        coords.extend_from_slice(row);
        mult.push(m as u64);
    }
    Ok((PointSet::with_multiplicities(coords, raw.dim, mult)?, scale, dropped))
}

/// Establishes the working assumptions: integer multiplicities, optional
/// projection to a lower dimension, optional reduction of the number of
/// distinct points.
pub fn preprocess(raw: &RawPoints, k: usize, params: &PowerParams, cfg: &SamplerConfig) -> Result<Preprocessed> {
    let mut warnings = Vec::new();
    let (rounded, input_scale, dropped) = round_weights(raw, cfg.weight_scale)?;
    if dropped > 0 {
        warnings.push(format!("{dropped} points dropped after weight rounding"));
    }

    let mut projection = None;
    let reference = match cfg.project_dim {
        Some(m) => {
            let map = crate::projection::make_projection(
                rounded.dim(),
                m,
                rng::derive_seed(cfg.seed, &[STREAM_PROJECTION]),
            )?;
            if map.is_identity() {
                warnings.push(format!(
                    "projection dimension {m} >= input dimension {}; projection skipped",
                    rounded.dim()
                ));
            }
            let projected = map.apply_points(&rounded)?;
            projection = Some(map);
            projected
        }
        None => rounded,
    };

    let (points, weight_factor, precoreset_applied) = match cfg.precoreset_bound {
        Some(bound) if seeding::distinct_count(&reference) > bound => {
            let (reduced, factor) = sensitivity_precoreset(&reference, k, params.z, bound, cfg)?;
            (reduced, factor, true)
        }
        _ => (reference.clone(), 1.0, false),
    };

    Ok(Preprocessed {
        points,
        reference,
        weight_factor,
        input_scale,
        dropped,
        projection,
        precoreset_applied,
        warnings,
    })
}

/// One round of plain sensitivity sampling with `draws` draws. Sampling
/// probabilities follow `mult * (cost(p,A)/cost(P,A) + 1/|C_p|)`; weights are
/// rounded to multiplicities with the smallest weight mapped to 1. Returns the
/// reduced instance and the factor mapping its multiplicities back to input mass.
fn sensitivity_precoreset(points: &PointSet, k: usize, z: u32, draws: usize, cfg: &SamplerConfig) -> Result<(PointSet, f64)> {
    if draws == 0 {
        return Err(CoresetError::invalid("pre-coreset bound must be at least 1"));
    }
    let seed = rng::derive_seed(cfg.seed, &[STREAM_PRECORESET]);
    let s = seeding::dz_seed(points, k, z, seed)?;
    let clu = build_clustering(points, &s, z)?;
    let total = clu.total_cost();
    let score: Vec<f64> = (0..points.n())
        .map(|i| {
            let size = clu.cluster_size[clu.assignment[i]] as f64;
            let share = if total > 0.0 { clu.point_cost[i] / total } else { 0.0 };
            points.multiplicity(i) as f64 * (share + 1.0 / size)
        })
        .collect();
    let score_total: f64 = score.iter().sum();
    let alias = WeightedAliasIndex::new(score.clone()).map_err(|e| CoresetError::invalid(e.to_string()))?;
    let mut rng = rng::substream(seed, &[1]);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..draws {
        *counts.entry(alias.sample(&mut rng)).or_default() += 1;
    }
    let real: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(i, c)| {
            let q = score[i] / score_total;
            (i, c as f64 * points.multiplicity(i) as f64 / (draws as f64 * q))
        })
        .collect();
    let min_w = real.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min);
    let scale = 1.0 / min_w;
    let mut coords = Vec::new();
    let mut mult = Vec::new();
    for &(i, w) in &real {
        coords.extend_from_slice(points.point(i));
        mult.push(((w * scale).round() as u64).max(1));
    }
    Ok((PointSet::with_multiplicities(coords, points.dim(), mult)?, min_w))
}

/// Monte Carlo check of one group estimator against a fixed solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEstimate {
    pub group: String,
    pub points: usize,
    pub delta: usize,
    pub repetitions: usize,
    /// `cost(G, S)` with multiplicities.
    pub exact: f64,
    pub mean: f64,
    pub relative_error: f64,
}

/// Repeats [`sample_group`] `repetitions` times with independent seeds and
/// averages the estimate `sum w_i cost(p_i, S)`.
#[allow(clippy::too_many_arguments)]
pub fn group_estimator_mc(
    points: &PointSet,
    clu: &Clustering,
    cat: &GroupCatalog,
    key: &GroupKey,
    s: &Solution,
    delta: usize,
    repetitions: usize,
    seed: u64,
) -> Result<GroupEstimate> {
    if repetitions == 0 {
        return Err(CoresetError::invalid("repetitions must be at least 1"));
    }
    let group = cat
        .groups
        .get(key)
        .ok_or_else(|| CoresetError::invalid(format!("no group {key} in catalog")))?;
    let z = cat.params.z;
    let mut cost_s = vec![0.0; points.n()];
    for &i in &group.members {
        cost_s[i] = crate::metric::point_cost(points.point(i), s, z)?;
    }
    let exact: f64 = group.members.iter().map(|&i| points.multiplicity(i) as f64 * cost_s[i]).sum();
    let reps: Vec<u64> = (0..repetitions as u64).collect();
    let estimates = par::try_map(&reps, |&r| {
        let sample = sample_group(points, clu, cat, key, delta, rng::derive_seed(seed, &[r]))?;
        Ok(sample.iter().map(|&(i, w)| w * cost_s[i]).sum::<f64>())
    })?;
    let mean = estimates.iter().sum::<f64>() / repetitions as f64;
    Ok(GroupEstimate {
        group: key.to_string(),
        points: group.members.len(),
        delta,
        repetitions,
        exact,
        mean,
        relative_error: if exact > 0.0 { (mean - exact).abs() / exact } else { mean.abs() },
    })
}
