//! Synthetic Gaussian mixtures with planted centers.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::{squared_distance, PointSet, Solution};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixtureSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Minimum distance between planted centers.
    pub separation: f64,
    /// Per-coordinate standard deviation.
    pub sigma: f64,
    /// Relative component sizes; uniform when empty.
    pub proportions: Vec<f64>,
    pub seed: u64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        MixtureSpec {
            n: 1000,
            d: 2,
            k: 3,
            separation: 20.0,
            sigma: 1.0,
            proportions: Vec::new(),
            seed: 0,
        }
    }
}

/// Planted centers with pairwise distance at least `separation`: scaled basis
/// vectors when `k <= d`, rejection sampling in a box otherwise.
fn planted_centers(spec: &MixtureSpec, r: &mut rng::Rng) -> Result<Vec<f64>> {
    let (k, d, sep) = (spec.k, spec.d, spec.separation);
    let mut centers = vec![0.0; k * d];
    if k <= d {
        for j in 0..k {
            centers[j * d + j] = sep / 2f64.sqrt();
        }
        return Ok(centers);
    }
    let side = sep * (k as f64).powf(1.0 / d as f64) * 4.0;
    let mut placed = 0;
    for _ in 0..100_000 {
        let c: Vec<f64> = (0..d).map(|_| r.random_range(0.0..side)).collect();
        if (0..placed).all(|j| squared_distance(&centers[j * d..(j + 1) * d], &c) >= sep * sep) {
            centers[placed * d..(placed + 1) * d].copy_from_slice(&c);
            placed += 1;
            if placed == k {
                return Ok(centers);
            }
        }
    }
    Err(CoresetError::invalid("could not place separated centers"))
}

/// Samples the mixture; returns the points and the planted centers.
pub fn gaussian_mixture(spec: &MixtureSpec) -> Result<(PointSet, Solution)> {
    if spec.n == 0 || spec.d == 0 || spec.k == 0 {
        return Err(CoresetError::invalid("n, d and k must be positive"));
    }
    if !(spec.sigma >= 0.0) || !(spec.separation >= 0.0) {
        return Err(CoresetError::invalid("sigma and separation must be non-negative"));
    }
    let props = if spec.proportions.is_empty() {
        vec![1.0; spec.k]
    } else if spec.proportions.len() == spec.k && spec.proportions.iter().all(|p| *p >= 0.0) {
        spec.proportions.clone()
    } else {
        return Err(CoresetError::invalid("proportions must be k non-negative values"));
    };
    let mut r = rng::seeded(spec.seed);
    let centers = planted_centers(spec, &mut r)?;
    let total: f64 = props.iter().sum();
    if !(total > 0.0) {
        return Err(CoresetError::invalid("proportions sum to zero"));
    }
    // deterministic component sizes by largest remainder
    let raw: Vec<f64> = props.iter().map(|p| p / total * spec.n as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..spec.k).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let mut missing = spec.n - sizes.iter().sum::<usize>();
    for &j in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        sizes[j] += 1;
        missing -= 1;
    }

    let d = spec.d;
    let mut coords = Vec::with_capacity(spec.n * d);
    for (j, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            for t in 0..d {
                let g: f64 = StandardNormal.sample(&mut r);
                coords.push(centers[j * d + t] + spec.sigma * g);
            }
        }
    }
    Ok((PointSet::new(coords, d)?, Solution::new(centers, d)?))
}
