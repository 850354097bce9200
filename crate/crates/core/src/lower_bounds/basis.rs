//! Standard-basis instances in `R^{2d}` and their Hadamard solution families.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::{PointSet, Solution, WeightedPoints};

/// The points `e_1..e_d` in `R^{2d}`, with `d = k * q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisInstance {
    pub k: usize,
    pub q: usize,
    pub d: usize,
    pub points: PointSet,
    /// Unrounded block size from the sizing rule, when generated from `eps`.
    pub target_q: Option<f64>,
}

/// Sizing metadata reported alongside generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSizing {
    pub k: usize,
    pub q: usize,
    pub d: usize,
    pub ambient_dim: usize,
    pub target_q: Option<f64>,
}

impl BasisInstance {
    /// Instance with explicit block count `k` and block size `q` (a power of two).
    pub fn new(k: usize, q: usize) -> Result<Self> {
        if k == 0 {
            return Err(CoresetError::invalid("k must be at least 1"));
        }
        if q == 0 || !q.is_power_of_two() {
            return Err(CoresetError::invalid(format!("q = {q} is not a power of two")));
        }
        let d = k * q;
        let mut coords = vec![0.0; d * 2 * d];
        for h in 0..d {
            coords[h * 2 * d + h] = 1.0;
        }
        Ok(BasisInstance {
            k,
            q,
            d,
            points: PointSet::new(coords, 2 * d)?,
            target_q: None,
        })
    }

    /// Recognizes `points` as a basis instance split into `k` blocks.
    pub fn recognize(points: &PointSet, k: usize) -> Result<Self> {
        let n = points.n();
        let not = |why: String| CoresetError::NotBasisInstance(why);
        if points.dim() != 2 * n {
            return Err(not(format!("dimension {} is not twice the point count {n}", points.dim())));
        }
        if k == 0 || n % k != 0 || !(n / k).is_power_of_two() {
            return Err(not(format!("{n} points do not split into {k} power-of-two blocks")));
        }
        for (h, row) in points.rows().enumerate() {
            let ok = row.iter().enumerate().all(|(c, &x)| x == if c == h { 1.0 } else { 0.0 });
            if !ok || points.multiplicity(h) != 1 {
                return Err(not(format!("point {h} is not e_{}", h + 1)));
            }
        }
        let mut inst = BasisInstance::new(k, n / k)?;
        inst.points = points.clone();
        Ok(inst)
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.d
    }

    pub fn sizing(&self) -> BasisSizing {
        BasisSizing {
            k: self.k,
            q: self.q,
            d: self.d,
            ambient_dim: self.ambient_dim(),
            target_q: self.target_q,
        }
    }

    /// All `k` centers at `e_{d+1}`, orthogonal to every input point.
    pub fn orthogonal_solution(&self) -> Solution {
        let dim = self.ambient_dim();
        let mut c = vec![0.0; self.k * dim];
        for j in 0..self.k {
            c[j * dim + self.d] = 1.0;
        }
        Solution::new(c, dim).expect("finite centers")
    }
}

/// Target block size: `1/(36 eps^2)` for `z = 2`, otherwise
/// `1/(min(1, (z/2)^2) * 32^2 * eps^2)`.
pub fn target_block_size(eps: f64, z: u32) -> f64 {
    if z == 2 {
        1.0 / (36.0 * eps * eps)
    } else {
        let half = z as f64 / 2.0;
        1.0 / ((half * half).min(1.0) * 1024.0 * eps * eps)
    }
}

/// Basis instance with `q` the largest power of two not above the target block size.
pub fn gen_basis_instance(k: usize, eps: f64, z: u32) -> Result<BasisInstance> {
    if k == 0 || k % 2 != 0 {
        return Err(CoresetError::invalid(format!("k = {k} must be even and positive")));
    }
    if !(eps > 0.0 && eps < 0.5) || z == 0 {
        return Err(CoresetError::invalid("need 0 < eps < 1/2 and z >= 1"));
    }
    let target = target_block_size(eps, z);
    // small tolerance so that exact powers of two survive rounding in the target
    let target_floor = (target * (1.0 + 1e-12)).floor();
    if target_floor < 2.0 {
        return Err(CoresetError::invalid(format!(
            "eps = {eps} gives block size {target:.3} < 2 for z = {z}"
        )));
    }
    let q = 1usize << (target_floor.log2().floor() as u32);
    let mut inst = BasisInstance::new(k, q)?;
    inst.target_q = Some(target);
    Ok(inst)
}

/// Rows of the Sylvester Hadamard matrix of order `q`, scaled by `1/sqrt(q)`.
pub fn hadamard_rows(q: usize) -> Result<Vec<Vec<f64>>> {
    if q == 0 || !q.is_power_of_two() {
        return Err(CoresetError::invalid(format!("q = {q} is not a power of two")));
    }
    let mut h: Vec<Vec<i8>> = vec![vec![1]];
    while h.len() < q {
        let n = h.len();
        let mut next = vec![vec![0i8; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    let s = 1.0 / (q as f64).sqrt();
    Ok(h.into_iter().map(|r| r.into_iter().map(|x| x as f64 * s).collect()).collect())
}

/// Solution `i` places row `h_i` into each of the `k` coordinate blocks.
pub fn hadamard_solutions(inst: &BasisInstance) -> Result<Vec<Solution>> {
    let rows = hadamard_rows(inst.q)?;
    let dim = inst.ambient_dim();
    rows.iter()
        .map(|h| {
            let mut c = vec![0.0; inst.k * dim];
            for j in 0..inst.k {
                c[j * dim + j * inst.q..j * dim + (j + 1) * inst.q].copy_from_slice(h);
            }
            Solution::new(c, dim)
        })
        .collect()
}

/// Lower bound on the cost of the basis instance for any `k` unit-norm centers:
/// `2d - 2 sqrt(dk)` at `z = 2`, otherwise
/// `2^{z/2} d - 2^{z/2} max(1, z/2) sqrt(dk)`.
pub fn unit_center_bound(d: usize, k: usize, z: u32) -> f64 {
    let (d, k) = (d as f64, k as f64);
    if z == 2 {
        2.0 * d - 2.0 * (d * k).sqrt()
    } else {
        let scale = 2f64.powf(z as f64 / 2.0);
        scale * d - scale * (z as f64 / 2.0).max(1.0) * (d * k).sqrt()
    }
}

/// Analytic `z = 2` cost of Hadamard solution `i` (0-based): `2d - 2d/sqrt(q)`
/// for the all-positive first row, `2d - d/sqrt(q)` for the rest.
pub fn hadamard_cost_z2(inst: &BasisInstance, i: usize) -> f64 {
    let (d, q) = (inst.d as f64, inst.q as f64);
    if i == 0 {
        2.0 * d - 2.0 * d / q.sqrt()
    } else {
        2.0 * d - d / q.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{squared_distance, total_cost};
    use crate::rng;
    use rand::Rng as _;

    fn brute_cost(p: &PointSet, s: &Solution, z: u32) -> f64 {
        p.rows()
            .map(|x| {
                s.centers()
                    .map(|c| {
                        let sq = squared_distance(x, c);
                        if z == 2 {
                            sq
                        } else {
                            sq.sqrt().powi(z as i32)
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    #[test]
    fn sizing_examples() {
        assert!(gen_basis_instance(2, 1.0 / 6.0, 2).is_err());
        let inst = gen_basis_instance(2, 1.0 / 12.0, 2).unwrap();
        assert_eq!((inst.q, inst.d, inst.ambient_dim()), (4, 8, 16));
        assert_eq!(gen_basis_instance(4, 1.0 / 24.0, 2).unwrap().q, 16);
        assert!(gen_basis_instance(3, 0.05, 2).is_err());
        // general z at eps = 1/12 is too coarse
        assert!(gen_basis_instance(2, 1.0 / 12.0, 1).is_err());
        assert_eq!(gen_basis_instance(2, 1.0 / 64.0, 4).unwrap().q, 4);
    }

    #[test]
    fn basis_points_are_orthonormal() {
        let inst = BasisInstance::new(3, 4).unwrap();
        for (a, x) in inst.points.rows().enumerate() {
            assert_eq!(x.iter().map(|v| v * v).sum::<f64>(), 1.0);
            for y in inst.points.rows().skip(a + 1) {
                assert_eq!(x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>(), 0.0);
                assert_eq!(squared_distance(x, y), 2.0);
            }
        }
    }

    #[test]
    fn sylvester_base_case() {
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(hadamard_rows(2).unwrap(), vec![vec![s, s], vec![s, -s]]);
        assert!(hadamard_rows(6).is_err());
        for q in [4, 8, 16] {
            let h = hadamard_rows(q).unwrap();
            for i in 0..q {
                for j in 0..q {
                    let dot: f64 = h[i].iter().zip(&h[j]).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hadamard_costs_match_brute_force() {
        for (k, q) in [(2, 4), (2, 16), (4, 4), (4, 16)] {
            let inst = BasisInstance::new(k, q).unwrap();
            for (i, s) in hadamard_solutions(&inst).unwrap().iter().enumerate() {
                let brute = brute_cost(&inst.points, s, 2);
                let want = hadamard_cost_z2(&inst, i);
                assert!((brute - want).abs() <= 1e-9 * want, "k={k} q={q} i={i}");
                assert!((total_cost(&inst.points, s, 2).unwrap() - brute).abs() <= 1e-9 * brute);
                assert!(brute >= unit_center_bound(inst.d, k, 2));
            }
        }
        let inst = BasisInstance::new(2, 4).unwrap();
        assert_eq!(hadamard_cost_z2(&inst, 1), 12.0);
        assert_eq!(unit_center_bound(8, 2, 2), 8.0);
        assert_eq!(unit_center_bound(8, 8, 2), 0.0);
    }

    #[test]
    fn hadamard_centers_structure() {
        // entries 1/2 and 1/4 make every product exact at q = 4 and q = 16
        for (k, q) in [(2, 4), (4, 4), (2, 16), (4, 16)] {
            let inst = BasisInstance::new(k, q).unwrap();
            let sols = hadamard_solutions(&inst).unwrap();
            let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
            for s in &sols {
                for a in 0..k {
                    assert!((dot(s.center(a), s.center(a)) - 1.0).abs() < 1e-12);
                    for b in a + 1..k {
                        assert_eq!(dot(s.center(a), s.center(b)), 0.0);
                    }
                }
            }
            // the q centers covering one block are pairwise orthogonal
            for j in 0..k {
                for a in 0..q {
                    for b in a + 1..q {
                        assert_eq!(dot(sols[a].center(j), sols[b].center(j)), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonal_solution_cost() {
        for k in 2..=8 {
            let inst = BasisInstance::new(k, 4).unwrap();
            let s = inst.orthogonal_solution();
            for z in 1..=4u32 {
                let want = 2f64.powf(z as f64 / 2.0) * inst.d as f64;
                let got = total_cost(&inst.points, &s, z).unwrap();
                assert!((got - want).abs() <= 1e-9 * want);
            }
        }
    }

    #[test]
    fn random_unit_solutions_respect_bound() {
        let inst = BasisInstance::new(2, 4).unwrap();
        let dim = inst.ambient_dim();
        let mut r = rng::seeded(1);
        for _ in 0..200 {
            let mut c: Vec<f64> = (0..2 * dim).map(|_| r.random_range(-1.0..1.0)).collect();
            for row in c.chunks_mut(dim) {
                let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                row.iter_mut().for_each(|v| *v /= n);
            }
            let s = Solution::new(c, dim).unwrap();
            assert!(total_cost(&inst.points, &s, 2).unwrap() >= unit_center_bound(inst.d, 2, 2));
        }
    }

    #[test]
    fn recognize_round_trip() {
        let inst = BasisInstance::new(2, 4).unwrap();
        assert_eq!(BasisInstance::recognize(&inst.points, 2).unwrap(), inst);
        assert!(BasisInstance::recognize(&inst.points, 3).is_err());
        let other = PointSet::new(vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 4).unwrap();
        assert!(matches!(BasisInstance::recognize(&other, 1), Err(CoresetError::NotBasisInstance(_))));
    }
}
