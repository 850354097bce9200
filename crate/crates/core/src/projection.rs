//! Gaussian random projection used by preprocessing to lower the dimension.
//!
//! Entries are i.i.d. standard normal scaled by `1/sqrt(m)`. Only the seed and
//! the dimensions are serialized; the matrix is regenerated on load.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::{PointSet, Solution, WeightedPoints};
use crate::rng;

/// Serialized form of a [`ProjectionMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProjectionSpec", from = "ProjectionSpec")]
pub struct ProjectionMap {
    spec: ProjectionSpec,
    /// Row-major `m x d`; empty for the identity map.
    matrix: Vec<f64>,
}

impl From<ProjectionMap> for ProjectionSpec {
    fn from(p: ProjectionMap) -> Self {
        p.spec
    }
}

impl From<ProjectionSpec> for ProjectionMap {
    fn from(spec: ProjectionSpec) -> Self {
        build(spec)
    }
}

fn build(spec: ProjectionSpec) -> ProjectionMap {
    if spec.m >= spec.d {
        return ProjectionMap { spec, matrix: Vec::new() };
    }
    let mut r = rng::seeded(spec.seed);
    let scale = 1.0 / (spec.m as f64).sqrt();
    let matrix = (0..spec.m * spec.d)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut r);
            g * scale
        })
        .collect();
    ProjectionMap { spec, matrix }
}

/// `m >= d` yields the identity map (see [`ProjectionMap::is_identity`]).
pub fn make_projection(d: usize, m: usize, seed: u64) -> Result<ProjectionMap> {
    if d == 0 || m == 0 {
        return Err(CoresetError::invalid("projection dimensions must be positive"));
    }
    Ok(build(ProjectionSpec { d, m, seed }))
}

/// `ceil(8 eps^-2 ln(distinct))`, at least 1 and at most `d`.
pub fn default_target_dim(d: usize, distinct: usize, eps: f64) -> usize {
    let m = (8.0 * eps.powi(-2) * (distinct.max(2) as f64).ln()).ceil() as usize;
    m.clamp(1, d)
}

impl ProjectionMap {
    pub fn spec(&self) -> ProjectionSpec {
        self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.d
    }

    pub fn output_dim(&self) -> usize {
        if self.is_identity() {
            self.spec.d
        } else {
            self.spec.m
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.d {
            return Err(CoresetError::DimensionMismatch {
                expected: self.spec.d,
                found: x.len(),
            });
        }
        if self.is_identity() {
            return Ok(x.to_vec());
        }
        Ok(self
            .matrix
            .chunks_exact(self.spec.d)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn apply_flat(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let rows: Vec<&[f64]> = coords.chunks_exact(self.spec.d).collect();
        let out = crate::par::try_map(&rows, |r| self.apply_vec(r))?;
        Ok(out.concat())
    }

    pub fn apply_points(&self, p: &PointSet) -> Result<PointSet> {
        if p.dim() != self.spec.d {
            return Err(CoresetError::DimensionMismatch {
                expected: self.spec.d,
                found: p.dim(),
            });
        }
        PointSet::with_multiplicities(self.apply_flat(p.coords())?, self.output_dim(), p.multiplicities().to_vec())
    }

    pub fn apply_solution(&self, s: &Solution) -> Result<Solution> {
        if s.dim() != self.spec.d {
            return Err(CoresetError::DimensionMismatch {
                expected: self.spec.d,
                found: s.dim(),
            });
        }
        Solution::new(self.apply_flat(s.coords())?, self.output_dim())
    }
}
