//! Point storage, Euclidean `(k, z)` costs and the power triangle inequality.
//!
//! The cost of a point `p` against a solution `S` is `min_{s in S} |p - s|^z`.
//! Costs are computed from the squared distance: `sq^(z/2)` for even `z`,
//! `sqrt(sq)^z` otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};

/// Anything that looks like a weighted point cloud: input instances with
/// integer multiplicities and coresets with real weights.
pub trait WeightedPoints {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }
}

/// An immutable instance: `n` points in `R^d` with positive integer multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    multiplicity: Vec<u64>,
}

impl PointSet {
    /// Builds a point set with unit multiplicities from row-major coordinates.
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::invalid("dimension must be at least 1"));
        }
        let n = coords.len() / dim;
        Self::with_multiplicities(coords, dim, vec![1; n])
    }

    pub fn with_multiplicities(coords: Vec<f64>, dim: usize, multiplicity: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::invalid("dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(CoresetError::invalid(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(CoresetError::invalid("point set must contain at least one point"));
        }
        if multiplicity.len() != n {
            return Err(CoresetError::invalid(format!(
                "{} multiplicities for {n} points",
                multiplicity.len()
            )));
        }
        if let Some(row) = coords.chunks_exact(dim).position(|r| r.iter().any(|x| !x.is_finite())) {
            return Err(CoresetError::NonFinite { row });
        }
        if multiplicity.iter().any(|&m| m == 0) {
            return Err(CoresetError::invalid("multiplicities must be at least 1"));
        }
        Ok(PointSet {
            dim,
            coords,
            multiplicity,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(CoresetError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(rows.concat(), dim)
    }

    pub fn n(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn multiplicity(&self, i: usize) -> u64 {
        self.multiplicity[i]
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicity
    }

    /// Total mass `N = sum of multiplicities`.
    pub fn total_mass(&self) -> u64 {
        self.multiplicity.iter().sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Number of distinct coordinate rows (bitwise comparison).
    pub fn distinct_count(&self) -> usize {
        let mut keys: Vec<Vec<u64>> = self
            .rows()
            .map(|r| r.iter().map(|x| x.to_bits()).collect())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    /// Scales every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_multiplicities(
            self.coords.iter().map(|x| x * factor).collect(),
            self.dim,
            self.multiplicity.clone(),
        )
    }
}

impl WeightedPoints for PointSet {
    fn len(&self) -> usize {
        self.n()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn weight(&self, i: usize) -> f64 {
        self.multiplicity[i] as f64
    }
}

/// A candidate clustering: `k` centers in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    dim: usize,
    centers: Vec<f64>,
}

impl Solution {
    pub fn new(centers: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || centers.is_empty() || centers.len() % dim != 0 {
            return Err(CoresetError::invalid(format!(
                "cannot form centers of dimension {dim} from {} coordinates",
                centers.len()
            )));
        }
        if centers.iter().any(|x| !x.is_finite()) {
            return Err(CoresetError::invalid("center coordinates must be finite"));
        }
        Ok(Solution { dim, centers })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(CoresetError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(rows.concat(), dim)
    }

    pub fn k(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[f64]> {
        self.centers.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.centers
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.centers.iter().map(|x| x * factor).collect(), self.dim)
    }

    /// Returns a copy with one more center appended.
    pub fn with_center(&self, c: &[f64]) -> Result<Self> {
        check_dim(self.dim, c.len())?;
        let mut centers = self.centers.clone();
        centers.extend_from_slice(c);
        Self::new(centers, self.dim)
    }

    pub(crate) fn set_center(&mut self, j: usize, c: &[f64]) {
        self.centers[j * self.dim..(j + 1) * self.dim].copy_from_slice(c);
    }
}

/// Per-point cost `v_p = cost(p, S)`, without multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector(pub Vec<f64>);

impl CostVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Multiplicity-weighted l1 norm; equals `total_cost` for the solution that produced it.
    pub fn weighted_sum<W: WeightedPoints + ?Sized>(&self, points: &W) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, v)| points.weight(i) * v)
            .sum()
    }
}

/// `z` and `epsilon` for a `(k, z)` coreset build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub z: u32,
    pub epsilon: f64,
}

impl PowerParams {
    pub fn new(z: u32, epsilon: f64) -> Result<Self> {
        if z == 0 {
            return Err(CoresetError::invalid("z must be a positive integer"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(CoresetError::invalid(format!(
                "epsilon must lie in (0, 1/2), got {epsilon}"
            )));
        }
        Ok(PowerParams { z, epsilon })
    }
}

/// Result of nearest-center assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub index: Vec<usize>,
    pub costs: CostVector,
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `sqrt(sq)^z`, evaluated without the square root when `z` is even.
#[inline]
pub fn power_from_squared(sq: f64, z: u32) -> f64 {
    if z % 2 == 0 {
        sq.powi((z / 2) as i32)
    } else {
        sq.sqrt().powi(z as i32)
    }
}

#[inline]
pub fn distance_pow(a: &[f64], b: &[f64], z: u32) -> f64 {
    power_from_squared(squared_distance(a, b), z)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CoresetError::DimensionMismatch { expected, found })
    }
}

/// Index and cost of the nearest center (lowest index on ties).
#[inline]
pub(crate) fn nearest_unchecked(p: &[f64], s: &Solution, z: u32) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in s.centers().enumerate() {
        let sq = squared_distance(p, c);
        if sq < best.1 {
            best = (j, sq);
        }
    }
    (best.0, power_from_squared(best.1, z))
}

pub fn nearest(p: &[f64], s: &Solution, z: u32) -> Result<(usize, f64)> {
    check_dim(s.dim(), p.len())?;
    Ok(nearest_unchecked(p, s, z))
}

pub fn point_cost(p: &[f64], s: &Solution, z: u32) -> Result<f64> {
    nearest(p, s, z).map(|(_, c)| c)
}

/// `cost(P, S) = sum_p w_p * cost(p, S)`, accumulated sequentially by point index.
pub fn total_cost<W: WeightedPoints + ?Sized>(points: &W, s: &Solution, z: u32) -> Result<f64> {
    check_dim(s.dim(), points.dim())?;
    let mut acc = 0.0;
    for i in 0..points.len() {
        acc += points.weight(i) * nearest_unchecked(points.point(i), s, z).1;
    }
    Ok(acc)
}

pub fn assign<W: WeightedPoints + ?Sized>(points: &W, s: &Solution, z: u32) -> Result<Assignment> {
    check_dim(s.dim(), points.dim())?;
    let (index, costs) = (0..points.len())
        .map(|i| nearest_unchecked(points.point(i), s, z))
        .unzip();
    Ok(Assignment {
        index,
        costs: CostVector(costs),
    })
}

/// Upper bound on `d(a,b)^z` given `d(a,c)^z` and `d(b,c)^z`:
/// `(1+eps)^(z-1) * a_cost + ((1+eps)/eps)^(z-1) * c_cost`.
pub fn power_triangle_bound(a_cost: f64, c_cost: f64, z: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(CoresetError::invalid(format!("eps must be positive, got {eps}")));
    }
    if z == 0 {
        return Err(CoresetError::invalid("z must be a positive integer"));
    }
    let e = (z - 1) as i32;
    Ok((1.0 + eps).powi(e) * a_cost + ((1.0 + eps) / eps).powi(e) * c_cost)
}
