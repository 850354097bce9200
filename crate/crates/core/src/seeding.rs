//! Reference solution used to define sampling probabilities: `D^z` seeding
//! followed by an optional single-swap local search.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::{
    assign, distance_pow, power_from_squared, squared_distance, PointSet, Solution, WeightedPoints,
};
use crate::rng::{self, Rng};

/// Distinct coordinate rows among points with positive weight.
pub fn distinct_count<W: WeightedPoints + ?Sized>(points: &W) -> usize {
    let mut keys: Vec<Vec<u64>> = (0..points.len())
        .filter(|&i| points.weight(i) > 0.0)
        .map(|i| points.point(i).iter().map(|x| x.to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Index drawn with probability proportional to `weights[i]`.
/// `total` must be the (positive) sum of `weights`.
pub(crate) fn draw_proportional(weights: &[f64], total: f64, rng: &mut Rng) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// `D^z` seeding: the first center is drawn proportionally to weight, every
/// further center proportionally to `weight * cost(p, current centers)`.
pub fn dz_seed<W: WeightedPoints + ?Sized>(points: &W, k: usize, z: u32, seed: u64) -> Result<Solution> {
    if k == 0 {
        return Err(CoresetError::invalid("k must be at least 1"));
    }
    if z == 0 {
        return Err(CoresetError::invalid("z must be a positive integer"));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(CoresetError::TooFewDistinctPoints { k, distinct });
    }
    let mut rng = rng::seeded(seed);
    let n = points.len();
    let dim = points.dim();
    let mass: Vec<f64> = (0..n).map(|i| points.weight(i)).collect();
    let first = draw_proportional(&mass, mass.iter().sum(), &mut rng);

    let mut centers = Vec::with_capacity(k * dim);
    centers.extend_from_slice(points.point(first));
    let mut cost: Vec<f64> = (0..n)
        .map(|i| distance_pow(points.point(i), points.point(first), z))
        .collect();
    let mut score = vec![0.0; n];

    for _ in 1..k {
        for i in 0..n {
            score[i] = mass[i] * cost[i];
        }
        let total: f64 = score.iter().sum();
        if !(total > 0.0) {
            // cannot happen while fewer than `distinct` centers are placed
            return Err(CoresetError::TooFewDistinctPoints { k, distinct });
        }
        let pick = draw_proportional(&score, total, &mut rng);
        let c = points.point(pick).to_vec();
        for i in 0..n {
            let nc = distance_pow(points.point(i), &c, z);
            if nc < cost[i] {
                cost[i] = nc;
            }
        }
        centers.extend_from_slice(&c);
    }
    Solution::new(centers, dim)
}

/// Settings for [`local_search_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSearch {
    /// Upper bound on improvement sweeps; a sweep without an accepted swap ends the search.
    pub max_sweeps: usize,
    /// Instances with at most this many points use every point as a swap candidate.
    pub exhaustive_limit: usize,
    /// Candidates drawn per sweep (`D^z` sampling) on larger instances.
    pub candidates_per_sweep: usize,
    pub seed: u64,
}

impl Default for LocalSearch {
    fn default() -> Self {
        LocalSearch {
            max_sweeps: 3,
            exhaustive_limit: 256,
            candidates_per_sweep: 24,
            seed: 0x5eed_10ca,
        }
    }
}

/// Minimum relative improvement for a swap to be accepted.
pub const SWAP_IMPROVEMENT: f64 = 1e-6;

/// Single-swap local search with candidate centers drawn from the input.
/// `max_swaps` bounds the number of sweeps; `0` returns `s` unchanged.
pub fn local_search_refine<W: WeightedPoints + ?Sized>(
    points: &W,
    s: &Solution,
    z: u32,
    max_swaps: usize,
) -> Result<Solution> {
    local_search_with(
        points,
        s,
        z,
        &LocalSearch {
            max_sweeps: max_swaps,
            ..LocalSearch::default()
        },
    )
}

struct SwapState {
    best: Vec<usize>,
    best_cost: Vec<f64>,
    second_cost: Vec<f64>,
}

fn swap_state<W: WeightedPoints + ?Sized>(points: &W, s: &Solution, z: u32) -> SwapState {
    let n = points.len();
    let mut st = SwapState {
        best: vec![0; n],
        best_cost: vec![f64::INFINITY; n],
        second_cost: vec![f64::INFINITY; n],
    };
    for i in 0..n {
        let p = points.point(i);
        let (mut b, mut b1, mut b2) = (0, f64::INFINITY, f64::INFINITY);
        for (j, c) in s.centers().enumerate() {
            let sq = squared_distance(p, c);
            if sq < b1 {
                b2 = b1;
                b1 = sq;
                b = j;
            } else if sq < b2 {
                b2 = sq;
            }
        }
        st.best[i] = b;
        st.best_cost[i] = power_from_squared(b1, z);
        st.second_cost[i] = if b2.is_finite() { power_from_squared(b2, z) } else { f64::INFINITY };
    }
    st
}

pub fn local_search_with<W: WeightedPoints + ?Sized>(
    points: &W,
    s: &Solution,
    z: u32,
    cfg: &LocalSearch,
) -> Result<Solution> {
    if s.dim() != points.dim() {
        return Err(CoresetError::DimensionMismatch {
            expected: s.dim(),
            found: points.dim(),
        });
    }
    let n = points.len();
    let k = s.k();
    let mut current = s.clone();
    if cfg.max_sweeps == 0 || n == 0 {
        return Ok(current);
    }
    let mut rng = rng::seeded(cfg.seed);
    let weight: Vec<f64> = (0..n).map(|i| points.weight(i)).collect();
    let mut st = swap_state(points, &current, z);
    let mut cost: f64 = (0..n).map(|i| weight[i] * st.best_cost[i]).sum();
    let mut removal = vec![0.0; k];

    for _ in 0..cfg.max_sweeps {
        let candidates: Vec<usize> = if n <= cfg.exhaustive_limit {
            (0..n).collect()
        } else {
            let score: Vec<f64> = (0..n).map(|i| weight[i] * st.best_cost[i]).collect();
            let total: f64 = score.iter().sum();
            if !(total > 0.0) {
                break;
            }
            (0..cfg.candidates_per_sweep)
                .map(|_| draw_proportional(&score, total, &mut rng))
                .collect()
        };
        let mut improved = false;
        for &cand in &candidates {
            let c = points.point(cand);
            // removal[j]: cost change when center j is replaced by c
            removal.iter_mut().for_each(|r| *r = 0.0);
            let mut base = 0.0;
            for i in 0..n {
                let dc = distance_pow(points.point(i), c, z);
                let keep = st.best_cost[i].min(dc);
                base += weight[i] * keep;
                removal[st.best[i]] += weight[i] * (st.second_cost[i].min(dc) - keep);
            }
            let (j, delta) = removal
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (j, &r)| if r < acc.1 { (j, r) } else { acc });
            if base + delta >= cost * (1.0 - SWAP_IMPROVEMENT) {
                continue;
            }
            let previous = current.center(j).to_vec();
            current.set_center(j, c);
            let next = swap_state(points, &current, z);
            let exact: f64 = (0..n).map(|i| weight[i] * next.best_cost[i]).sum();
            if exact < cost {
                cost = exact;
                st = next;
                improved = true;
            } else {
                current.set_center(j, &previous);
            }
        }
        if !improved {
            break;
        }
    }
    Ok(current)
}

/// Constant-factor reference clustering with per-cluster statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub solution: Solution,
    pub z: u32,
    pub assignment: Vec<usize>,
    /// `cost(p, A)` per point, without multiplicity.
    pub point_cost: Vec<f64>,
    /// `|C_i|`: total multiplicity per cluster.
    pub cluster_size: Vec<u64>,
    /// `cost(C_i, A)`.
    pub cluster_cost: Vec<f64>,
    /// Average cost `cost(C_i, A) / |C_i|`, or 0 for empty clusters.
    pub delta: Vec<f64>,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.solution.k()
    }

    pub fn total_cost(&self) -> f64 {
        self.cluster_cost.iter().sum()
    }

    /// Point indices of every cluster, in index order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

pub fn build_clustering(points: &PointSet, s: &Solution, z: u32) -> Result<Clustering> {
    let a = assign(points, s, z)?;
    let k = s.k();
    let mut cluster_size = vec![0u64; k];
    let mut cluster_cost = vec![0.0; k];
    for (i, (&c, &v)) in a.index.iter().zip(a.costs.values()).enumerate() {
        let m = points.multiplicity(i);
        cluster_size[c] += m;
        cluster_cost[c] += m as f64 * v;
    }
    let delta = cluster_size
        .iter()
        .zip(&cluster_cost)
        .map(|(&n, &c)| if n > 0 { c / n as f64 } else { 0.0 })
        .collect();
    Ok(Clustering {
        solution: s.clone(),
        z,
        assignment: a.index,
        point_cost: a.costs.0,
        cluster_size,
        cluster_cost,
        delta,
    })
}

/// Seeds and refines a reference solution for `points`.
pub fn reference_solution(points: &PointSet, k: usize, z: u32, seed: u64, search: &LocalSearch) -> Result<Solution> {
    let s = dz_seed(points, k, z, seed)?;
    local_search_with(points, &s, z, search)
}
