//! Ring decomposition of the reference clusters and bucketing of rings into
//! sampled groups.
//!
//! A point `p` of cluster `C_i` with positive cost lies in ring `j` when
//! `2^j * Delta_i <= cost(p, A) < 2^(j+1) * Delta_i`. Points are inner when
//! `cost <= (eps/z)^z * Delta_i`, outer when `cost > (z/eps)^(2z) * Delta_i`,
//! main otherwise. Main rings `R_ij` are bucketed per ring index `j` by their
//! share of `cost(R_j)`, outer rings per cluster by their share of the total
//! outer cost. Inner points and the cheapest buckets (`b <= 0`) are proxied by
//! their cluster center; everything else is sampled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::metric::PowerParams;
use crate::seeding::Clustering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingKind {
    Inner,
    Main,
    Outer,
}

/// Per-point ring classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rings {
    pub kind: Vec<RingKind>,
    /// Ring index `j`, defined when `cost(p, A) > 0`.
    pub ring: Vec<Option<i32>>,
}

/// Identifier of a sampled group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupKey {
    Main { ring: i32, bucket: i32 },
    MainMax { ring: i32 },
    Outer { bucket: i32 },
    OuterMax,
}

impl GroupKey {
    pub fn is_outer(&self) -> bool {
        matches!(self, GroupKey::Outer { .. } | GroupKey::OuterMax)
    }

    /// Stable 64-bit encoding used to derive per-group random substreams.
    pub fn stable_id(&self) -> u64 {
        let (tag, a, b) = match *self {
            GroupKey::Main { ring, bucket } => (1u64, ring, bucket),
            GroupKey::MainMax { ring } => (2, ring, 0),
            GroupKey::Outer { bucket } => (3, 0, bucket),
            GroupKey::OuterMax => (4, 0, 0),
        };
        (tag << 48) | ((a as u16 as u64) << 16) | (b as u16 as u64)
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Main { ring, bucket } => write!(f, "main:{ring}:{bucket}"),
            GroupKey::MainMax { ring } => write!(f, "mainmax:{ring}"),
            GroupKey::Outer { bucket } => write!(f, "outer:{bucket}"),
            GroupKey::OuterMax => write!(f, "outermax"),
        }
    }
}

impl FromStr for GroupKey {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |t: &str| {
            t.parse::<i32>()
                .map_err(|_| CoresetError::invalid(format!("bad group id {s:?}")))
        };
        match parts.as_slice() {
            ["main", j, b] => Ok(GroupKey::Main {
                ring: int(j)?,
                bucket: int(b)?,
            }),
            ["mainmax", j] => Ok(GroupKey::MainMax { ring: int(j)? }),
            ["outer", b] => Ok(GroupKey::Outer { bucket: int(b)? }),
            ["outermax"] => Ok(GroupKey::OuterMax),
            _ => Err(CoresetError::invalid(format!("bad group id {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Proxied,
    Group(GroupKey),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupInfo {
    /// Member point indices in increasing order.
    pub members: Vec<usize>,
    /// `cost(G, A)` including multiplicities.
    pub cost: f64,
    pub mass: u64,
}

/// Partition of the instance into proxied points and sampled groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCatalog {
    pub params: PowerParams,
    pub labels: Vec<Label>,
    pub ring_index: Vec<Option<i32>>,
    pub groups: BTreeMap<GroupKey, GroupInfo>,
}

/// Largest `j` with `base * 2^j <= value`, for positive finite inputs.
pub(crate) fn dyadic_index(value: f64, base: f64) -> i32 {
    let mut j = (value / base).log2().floor() as i32;
    while base * 2f64.powi(j) > value {
        j -= 1;
    }
    while base * 2f64.powi(j + 1) <= value {
        j += 1;
    }
    j
}

/// `(eps / z)^z`: inner-ring threshold relative to the cluster average.
pub fn inner_factor(params: &PowerParams) -> f64 {
    (params.epsilon / params.z as f64).powi(params.z as i32)
}

/// `(z / eps)^(2z)`: outer-ring threshold relative to the cluster average.
pub fn outer_factor(params: &PowerParams) -> f64 {
    (params.z as f64 / params.epsilon).powi(2 * params.z as i32)
}

/// `(eps / 4z)^z`: bucket unit relative to `cost(R_j) / k`.
pub fn bucket_factor(params: &PowerParams) -> f64 {
    (params.epsilon / (4.0 * params.z as f64)).powi(params.z as i32)
}

/// Buckets at or above `z * log2(4z / eps)` are merged into the max group.
pub fn max_bucket(params: &PowerParams) -> f64 {
    params.z as f64 * (4.0 * params.z as f64 / params.epsilon).log2()
}

pub fn ring_decompose(clu: &Clustering, params: &PowerParams) -> Rings {
    let inner = inner_factor(params);
    let outer = outer_factor(params);
    let (kind, ring) = clu
        .point_cost
        .iter()
        .zip(&clu.assignment)
        .map(|(&cost, &c)| {
            let delta = clu.delta[c];
            if !(cost > 0.0) {
                return (RingKind::Inner, None);
            }
            let j = dyadic_index(cost, delta);
            let kind = if cost <= inner * delta {
                RingKind::Inner
            } else if cost > outer * delta {
                RingKind::Outer
            } else {
                RingKind::Main
            };
            (kind, Some(j))
        })
        .unzip();
    Rings { kind, ring }
}

fn classify_bucket(share: f64, unit: f64, top: f64) -> Option<(i32, bool)> {
    let b = dyadic_index(share, unit);
    if b <= 0 {
        None
    } else {
        Some((b, b as f64 >= top))
    }
}

pub fn build_groups(clu: &Clustering, rings: &Rings, params: &PowerParams, multiplicity: &[u64]) -> GroupCatalog {
    let n = clu.assignment.len();
    let k = clu.k() as f64;
    let unit = bucket_factor(params);
    let top = max_bucket(params);
    let mut labels = vec![Label::Proxied; n];

    // cost(R_ij) and cost(R_j)
    let mut ring_cost: BTreeMap<(i32, usize), f64> = BTreeMap::new();
    let mut level_cost: BTreeMap<i32, f64> = BTreeMap::new();
    // cost(R_O(C_i)) and cost(R_O)
    let mut outer_cost: BTreeMap<usize, f64> = BTreeMap::new();
    let mut outer_total = 0.0;
    for i in 0..n {
        let c = multiplicity[i] as f64 * clu.point_cost[i];
        match rings.kind[i] {
            RingKind::Main => {
                let j = rings.ring[i].expect("main points have positive cost");
                *ring_cost.entry((j, clu.assignment[i])).or_default() += c;
                *level_cost.entry(j).or_default() += c;
            }
            RingKind::Outer => {
                *outer_cost.entry(clu.assignment[i]).or_default() += c;
                outer_total += c;
            }
            RingKind::Inner => {}
        }
    }

    let ring_label: BTreeMap<(i32, usize), Label> = ring_cost
        .iter()
        .map(|(&(j, i), &cost)| {
            let base = unit * level_cost[&j] / k;
            let label = match classify_bucket(cost, base, top) {
                None => Label::Proxied,
                Some((_, true)) => Label::Group(GroupKey::MainMax { ring: j }),
                Some((b, false)) => Label::Group(GroupKey::Main { ring: j, bucket: b }),
            };
            ((j, i), label)
        })
        .collect();
    let outer_label: BTreeMap<usize, Label> = outer_cost
        .iter()
        .map(|(&i, &cost)| {
            let base = unit * outer_total / k;
            let label = match classify_bucket(cost, base, top) {
                None => Label::Proxied,
                Some((_, true)) => Label::Group(GroupKey::OuterMax),
                Some((b, false)) => Label::Group(GroupKey::Outer { bucket: b }),
            };
            (i, label)
        })
        .collect();

    let mut groups: BTreeMap<GroupKey, GroupInfo> = BTreeMap::new();
    for i in 0..n {
        let label = match rings.kind[i] {
            RingKind::Inner => Label::Proxied,
            RingKind::Main => ring_label[&(rings.ring[i].unwrap(), clu.assignment[i])],
            RingKind::Outer => outer_label[&clu.assignment[i]],
        };
        labels[i] = label;
        if let Label::Group(key) = label {
            let g = groups.entry(key).or_insert_with(|| GroupInfo {
                members: Vec::new(),
                cost: 0.0,
                mass: 0,
            });
            g.members.push(i);
            g.cost += multiplicity[i] as f64 * clu.point_cost[i];
            g.mass += multiplicity[i];
        }
    }

    GroupCatalog {
        params: *params,
        labels,
        ring_index: rings.ring.clone(),
        groups,
    }
}

/// Convenience: ring decomposition followed by group construction.
pub fn partition(clu: &Clustering, params: &PowerParams, multiplicity: &[u64]) -> GroupCatalog {
    let rings = ring_decompose(clu, params);
    build_groups(clu, &rings, params, multiplicity)
}

/// `P^G`: all points of the clusters that intersect the outer group `key`.
pub fn outer_support(cat: &GroupCatalog, clu: &Clustering, key: &GroupKey) -> Result<Vec<usize>> {
    if !key.is_outer() {
        return Err(CoresetError::NotAnOuterGroup(key.to_string()));
    }
    let Some(group) = cat.groups.get(key) else {
        return Ok(Vec::new());
    };
    let clusters: BTreeSet<usize> = group.members.iter().map(|&i| clu.assignment[i]).collect();
    Ok((0..clu.assignment.len())
        .filter(|&i| clusters.contains(&clu.assignment[i]))
        .collect())
}

/// `c * z^2 * log2(z / eps)^2`.
pub fn group_count_bound(params: &PowerParams, c: f64) -> f64 {
    let z = params.z as f64;
    c * z * z * (z / params.epsilon).log2().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub id: String,
    pub kind: String,
    pub ring: Option<i32>,
    pub bucket: Option<i32>,
    pub points: usize,
    pub mass: u64,
    pub cost: f64,
}

/// Diagnostic view of a catalog, serialized by `inspect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub z: u32,
    pub epsilon: f64,
    pub proxied_points: usize,
    pub proxied_mass: u64,
    pub group_count: usize,
    pub group_count_bound: f64,
    pub groups: Vec<GroupSummary>,
}

impl GroupCatalog {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn summary(&self, multiplicity: &[u64]) -> CatalogSummary {
        let proxied: Vec<usize> = (0..self.labels.len())
            .filter(|&i| self.labels[i] == Label::Proxied)
            .collect();
        let groups = self
            .groups
            .iter()
            .map(|(key, g)| {
                let (kind, ring, bucket) = match *key {
                    GroupKey::Main { ring, bucket } => ("main", Some(ring), Some(bucket)),
                    GroupKey::MainMax { ring } => ("main_max", Some(ring), None),
                    GroupKey::Outer { bucket } => ("outer", None, Some(bucket)),
                    GroupKey::OuterMax => ("outer_max", None, None),
                };
                GroupSummary {
                    id: key.to_string(),
                    kind: kind.to_string(),
                    ring,
                    bucket,
                    points: g.members.len(),
                    mass: g.mass,
                    cost: g.cost,
                }
            })
            .collect();
        CatalogSummary {
            z: self.params.z,
            epsilon: self.params.epsilon,
            proxied_points: proxied.len(),
            proxied_mass: proxied.iter().map(|&i| multiplicity[i]).sum(),
            group_count: self.groups.len(),
            group_count_bound: group_count_bound(&self.params, GROUP_COUNT_CONSTANT),
            groups,
        }
    }
}

/// Constant in the reported group-count bound `c * z^2 * log2(z/eps)^2`.
pub const GROUP_COUNT_CONSTANT: f64 = 40.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{PointSet, Solution};
    use crate::seeding::{build_clustering, dz_seed};
    use rand::Rng as _;

    fn line(points: &[f64], centers: &[f64], z: u32) -> (PointSet, Clustering) {
        let p = PointSet::new(points.to_vec(), 1).unwrap();
        let clu = build_clustering(&p, &Solution::new(centers.to_vec(), 1).unwrap(), z).unwrap();
        (p, clu)
    }

    #[test]
    fn dyadic_index_is_half_open() {
        assert_eq!(dyadic_index(1.0, 1.0), 0);
        assert_eq!(dyadic_index(2.0, 1.0), 1);
        assert_eq!(dyadic_index(1.999, 1.0), 0);
        assert_eq!(dyadic_index(0.5, 1.0), -1);
        assert_eq!(dyadic_index(3.0, 1.5), 1);
    }

    #[test]
    fn average_cost_point_is_main_ring_zero() {
        // costs 1 and 1 under z=1: delta = 1, both at j = 0
        let (_, clu) = line(&[1.0, -1.0], &[0.0], 1);
        let rings = ring_decompose(&clu, &PowerParams::new(1, 0.1).unwrap());
        assert_eq!(rings.kind, vec![RingKind::Main, RingKind::Main]);
        assert_eq!(rings.ring, vec![Some(0), Some(0)]);
    }

    #[test]
    fn zero_cost_point_is_inner() {
        let (_, clu) = line(&[0.0, 3.0], &[0.0], 2);
        let rings = ring_decompose(&clu, &PowerParams::new(2, 0.2).unwrap());
        assert_eq!(rings.kind[0], RingKind::Inner);
        assert_eq!(rings.ring[0], None);
    }

    #[test]
    fn thresholds_on_hand_example() {
        // costs {1,1,1,1,4}, delta 1.6, inner cutoff 0.8, outer cutoff 6.4
        let (_, clu) = line(&[1.0, -1.0, 1.0, -1.0, 4.0], &[0.0], 1);
        assert!((clu.delta[0] - 1.6).abs() < 1e-15);
        let params = PowerParams::new(1, 0.49999999).unwrap();
        let rings = ring_decompose(&clu, &params);
        assert!(rings.kind.iter().all(|&k| k == RingKind::Main));
        assert_eq!(rings.ring, vec![Some(-1), Some(-1), Some(-1), Some(-1), Some(1)]);
    }

    #[test]
    fn single_cluster_equal_costs_form_one_group() {
        let (p, clu) = line(&[1.0, -1.0, 1.0, -1.0], &[0.0], 1);
        // ratio = k / (eps/4z)^z = 40 -> b = 5 < log2(40)
        let cat = partition(&clu, &PowerParams::new(1, 0.1).unwrap(), p.multiplicities());
        assert_eq!(cat.groups.len(), 1);
        assert_eq!(cat.groups.keys().next(), Some(&GroupKey::Main { ring: 0, bucket: 5 }));
        // ratio = 32 -> b = 5 = z*log2(4z/eps): max bucket
        let cat = partition(&clu, &PowerParams::new(1, 0.125).unwrap(), p.multiplicities());
        assert_eq!(cat.groups.keys().next(), Some(&GroupKey::MainMax { ring: 0 }));
        assert!(!cat.groups.keys().any(|k| k.is_outer()));
    }

    #[test]
    fn group_key_round_trips_through_strings() {
        for key in [
            GroupKey::Main { ring: -3, bucket: 4 },
            GroupKey::MainMax { ring: 7 },
            GroupKey::Outer { bucket: 2 },
            GroupKey::OuterMax,
        ] {
            assert_eq!(key.to_string().parse::<GroupKey>().unwrap(), key);
        }
        assert!("nope:1".parse::<GroupKey>().is_err());
    }

    #[test]
    fn outer_support_examples() {
        // cluster 0: seven points, one far outlier; cluster 1: tight pair
        let pts = [0.1, -0.1, 0.1, -0.1, 0.1, -0.1, 1.0e4, -100.0, -100.1];
        let (p, clu) = line(&pts, &[0.0, -100.05], 1);
        let cat = partition(&clu, &PowerParams::new(1, 0.49).unwrap(), p.multiplicities());
        let outer: Vec<_> = cat.groups.keys().filter(|k| k.is_outer()).copied().collect();
        assert_eq!(outer.len(), 1);
        assert_eq!(outer_support(&cat, &clu, &outer[0]).unwrap(), (0..7).collect::<Vec<_>>());
        assert!(outer_support(&cat, &clu, &GroupKey::Outer { bucket: 99 }).unwrap().is_empty());
        assert!(matches!(
            outer_support(&cat, &clu, &GroupKey::MainMax { ring: 0 }),
            Err(CoresetError::NotAnOuterGroup(_))
        ));
    }

    #[test]
    fn outer_support_unions_clusters() {
        // two clusters with equally expensive outliers share one outer group
        let pts = [0.1, -0.1, 0.1, -0.1, 0.1, 1.0e4, 5.0e5 + 0.1, 5.0e5 - 0.1, 5.0e5 + 0.1, 5.0e5 - 0.1, 5.0e5 + 0.1, 5.0e5 + 1.0e4];
        let (p, clu) = line(&pts, &[0.0, 5.0e5], 1);
        let cat = partition(&clu, &PowerParams::new(1, 0.49).unwrap(), p.multiplicities());
        let outer: Vec<_> = cat.groups.keys().filter(|k| k.is_outer()).copied().collect();
        assert_eq!(outer.len(), 1);
        let support = outer_support(&cat, &clu, &outer[0]).unwrap();
        let oracle: BTreeSet<usize> = (0..6).chain(6..12).collect();
        assert_eq!(support, oracle.into_iter().collect::<Vec<_>>());
    }

    fn random_config(seed: u64) -> (PointSet, Clustering, PowerParams) {
        let mut r = crate::rng::seeded(seed);
        let n = r.random_range(20..400);
        let d = r.random_range(1..5);
        let k = r.random_range(1..8);
        let z = r.random_range(1..5);
        let eps = r.random_range(0.05..0.49);
        let coords: Vec<f64> = (0..n * d)
            .map(|_| {
                let scale = if r.random::<f64>() < 0.05 { 1e3 } else { 1.0 };
                scale * r.random_range(-5.0..5.0)
            })
            .collect();
        let mult = (0..n).map(|_| r.random_range(1..5)).collect();
        let p = PointSet::with_multiplicities(coords, d, mult).unwrap();
        let s = dz_seed(&p, k, z, seed).unwrap();
        let clu = build_clustering(&p, &s, z).unwrap();
        (p, clu, PowerParams::new(z, eps).unwrap())
    }

    #[test]
    fn catalog_invariants_on_random_configurations() {
        for seed in 0..50 {
            let (p, clu, params) = random_config(seed);
            let rings = ring_decompose(&clu, &params);
            let cat = build_groups(&clu, &rings, &params, p.multiplicities());

            // partition: every point labelled once, group members disjoint
            let in_groups: usize = cat.groups.values().map(|g| g.members.len()).sum();
            let proxied = cat.labels.iter().filter(|l| **l == Label::Proxied).count();
            assert_eq!(in_groups + proxied, p.n());
            for (key, g) in &cat.groups {
                for &i in &g.members {
                    assert_eq!(cat.labels[i], Label::Group(*key));
                    assert!(clu.point_cost[i] > 0.0);
                }
                let cost: f64 = g.members.iter().map(|&i| p.multiplicity(i) as f64 * clu.point_cost[i]).sum();
                assert!((cost - g.cost).abs() <= 1e-9 * cost);
            }

            // ring membership
            for i in 0..p.n() {
                if rings.kind[i] == RingKind::Main {
                    let j = rings.ring[i].unwrap();
                    let delta = clu.delta[clu.assignment[i]];
                    assert!(delta * 2f64.powi(j) <= clu.point_cost[i]);
                    assert!(clu.point_cost[i] < delta * 2f64.powi(j + 1));
                }
            }

            // bucket membership of every Main(j, b) ring
            let unit = bucket_factor(&params);
            let k = clu.k() as f64;
            for (key, g) in &cat.groups {
                if let GroupKey::Main { ring, bucket } = key {
                    let level: f64 = (0..p.n())
                        .filter(|&i| rings.kind[i] == RingKind::Main && rings.ring[i] == Some(*ring))
                        .map(|i| p.multiplicity(i) as f64 * clu.point_cost[i])
                        .sum();
                    let clusters: BTreeSet<usize> = g.members.iter().map(|&i| clu.assignment[i]).collect();
                    for c in clusters {
                        let rc: f64 = (0..p.n())
                            .filter(|&i| {
                                clu.assignment[i] == c
                                    && rings.kind[i] == RingKind::Main
                                    && rings.ring[i] == Some(*ring)
                            })
                            .map(|i| p.multiplicity(i) as f64 * clu.point_cost[i])
                            .sum();
                        let base = unit * level / k;
                        assert!(base * 2f64.powi(*bucket) <= rc * (1.0 + 1e-12));
                        assert!(rc < base * 2f64.powi(bucket + 1) * (1.0 + 1e-12));
                    }
                }
            }

            // one outer group per cluster
            let mut outer_of: BTreeMap<usize, GroupKey> = BTreeMap::new();
            for (i, l) in cat.labels.iter().enumerate() {
                if let Label::Group(key) = l {
                    if key.is_outer() {
                        let prev = outer_of.insert(clu.assignment[i], *key);
                        assert!(prev.is_none() || prev == Some(*key));
                    }
                }
            }

            assert!((cat.group_count() as f64) <= group_count_bound(&params, GROUP_COUNT_CONSTANT));
            assert_eq!(cat, build_groups(&clu, &ring_decompose(&clu, &params), &params, p.multiplicities()));
        }
    }
}
