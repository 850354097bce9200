//! Random bipartite client/center metrics with edge lengths `1` and `2^{1/z}`,
//! and their star composition.
//!
//! Costs are evaluated with exact powers: a length-1 edge costs 1 and a long
//! edge costs 2 for every `z`.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::rng;

/// Probability of a length-1 edge.
pub const EDGE_PROBABILITY: f64 = 0.25;

/// Star composition of `copies` subinstances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarParams {
    pub copies: usize,
    pub eps: f64,
    /// Hub distance `n_U * k / eps`.
    pub d_inf: f64,
    /// Clients per copy follow the default size rule (false when overridden).
    pub default_size: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    /// Clients per copy.
    pub n_clients: usize,
    /// Centers per copy.
    pub n_centers: usize,
    pub z: u32,
    pub seed: u64,
    pub star: Option<StarParams>,
    /// Packed edge bits, indexed by `(copy * n_clients + client) * n_centers + center`.
    pub(crate) bits: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CenterId {
    Copy { copy: usize, index: usize },
    /// The hub `c^inf`.
    Hub,
    /// The far hub `c^{4 inf}`.
    FarHub,
    /// The per-copy center `c^2_i` at distance `2^{1/z}` from its own clients.
    Local(usize),
}

impl fmt::Display for CenterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterId::Copy { copy, index } => write!(f, "c{copy}:{index}"),
            CenterId::Hub => write!(f, "hub"),
            CenterId::FarHub => write!(f, "farhub"),
            CenterId::Local(i) => write!(f, "local{i}"),
        }
    }
}

impl FromStr for CenterId {
    type Err = CoresetError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoresetError::UnknownCenter(s.to_string());
        match s {
            "hub" => return Ok(CenterId::Hub),
            "farhub" => return Ok(CenterId::FarHub),
            _ => {}
        }
        if let Some(i) = s.strip_prefix("local") {
            return i.parse().map(CenterId::Local).map_err(|_| bad());
        }
        let (copy, index) = s.strip_prefix('c').and_then(|r| r.split_once(':')).ok_or_else(bad)?;
        Ok(CenterId::Copy {
            copy: copy.parse().map_err(|_| bad())?,
            index: index.parse().map_err(|_| bad())?,
        })
    }
}

/// Cost of a (weighted) client set, split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCost {
    pub cost: f64,
    /// Total client weight.
    pub weight: f64,
    /// Weight of clients whose nearest chosen center is at distance 1.
    pub n1: f64,
}

fn fill_edges(bits: &mut [u64], offset: usize, count: usize, seed: u64) {
    let mut r = rng::seeded(seed);
    for e in offset..offset + count {
        if r.random_bool(EDGE_PROBABILITY) {
            bits[e / 64] |= 1 << (e % 64);
        }
    }
}

/// One subinstance: every client-center edge independently has length 1 with
/// probability 1/4.
pub fn gen_subinstance(n_clients: usize, n_centers: usize, z: u32, seed: u64) -> Result<DiscreteInstance> {
    if n_clients == 0 || n_centers == 0 || z == 0 {
        return Err(CoresetError::invalid("client count, center count and z must be positive"));
    }
    let edges = n_clients * n_centers;
    let mut bits = vec![0u64; edges.div_ceil(64)];
    fill_edges(&mut bits, 0, edges, rng::derive_seed(seed, &[0]));
    Ok(DiscreteInstance {
        n_clients,
        n_centers,
        z,
        seed,
        star: None,
        bits,
    })
}

/// Default clients per copy: `ceil(10 eps^-2 ln |C|)`.
pub fn default_clients_per_copy(eps: f64, n_centers: usize) -> usize {
    ((10.0 / (eps * eps)) * (n_centers.max(2) as f64).ln()).ceil() as usize
}

/// `k` independent subinstances glued by hub centers. `n_u` overrides the
/// default number of clients per copy.
pub fn gen_star_instance(
    k: usize,
    eps: f64,
    n_centers: usize,
    z: u32,
    seed: u64,
    n_u: Option<usize>,
) -> Result<DiscreteInstance> {
    if k == 0 || n_centers == 0 || z == 0 || !(eps > 0.0 && eps < 0.5) {
        return Err(CoresetError::invalid("need k, |C|, z >= 1 and 0 < eps < 1/2"));
    }
    let n_clients = n_u.unwrap_or_else(|| default_clients_per_copy(eps, n_centers));
    if n_clients == 0 {
        return Err(CoresetError::invalid("clients per copy must be positive"));
    }
    let per_copy = n_clients * n_centers;
    let mut bits = vec![0u64; (k * per_copy).div_ceil(64)];
    for copy in 0..k {
        fill_edges(&mut bits, copy * per_copy, per_copy, rng::derive_seed(seed, &[copy as u64]));
    }
    Ok(DiscreteInstance {
        n_clients,
        n_centers,
        z,
        seed,
        star: Some(StarParams {
            copies: k,
            eps,
            d_inf: n_clients as f64 * k as f64 / eps,
            default_size: n_u.is_none(),
        }),
        bits,
    })
}

impl DiscreteInstance {
    pub fn copies(&self) -> usize {
        self.star.map_or(1, |s| s.copies)
    }

    /// Total number of clients over all copies.
    pub fn total_clients(&self) -> usize {
        self.copies() * self.n_clients
    }

    pub fn raw_bits(&self) -> &[u64] {
        &self.bits
    }

    /// Rebuilds an instance from stored parts.
    pub fn from_parts(
        n_clients: usize,
        n_centers: usize,
        z: u32,
        seed: u64,
        star: Option<StarParams>,
        bits: Vec<u64>,
    ) -> Result<Self> {
        let copies = star.map_or(1, |s| s.copies);
        let edges = copies * n_clients * n_centers;
        if n_clients == 0 || n_centers == 0 || z == 0 || bits.len() != edges.div_ceil(64) {
            return Err(CoresetError::Format("edge matrix does not match the declared sizes".into()));
        }
        Ok(DiscreteInstance {
            n_clients,
            n_centers,
            z,
            seed,
            star,
            bits,
        })
    }

    /// Whether the edge between client `client` of `copy` and copy center `index` has length 1.
    pub fn is_short(&self, copy: usize, client: usize, index: usize) -> bool {
        let e = (copy * self.n_clients + client) * self.n_centers + index;
        self.bits[e / 64] >> (e % 64) & 1 == 1
    }

    /// Stored client-center length: `1` or `2^{1/z}`.
    pub fn edge_length(&self, copy: usize, client: usize, index: usize) -> f64 {
        if self.is_short(copy, client, index) {
            1.0
        } else {
            2f64.powf(1.0 / self.z as f64)
        }
    }

    /// Number of clients of `copy` at distance 1 from copy center `index`.
    pub fn n1(&self, copy: usize, index: usize) -> usize {
        (0..self.n_clients).filter(|&c| self.is_short(copy, c, index)).count()
    }

    pub fn validate_center(&self, c: &CenterId) -> Result<()> {
        let ok = match *c {
            CenterId::Copy { copy, index } => copy < self.copies() && index < self.n_centers,
            CenterId::Hub | CenterId::FarHub => self.star.is_some(),
            CenterId::Local(i) => self.star.is_some() && i < self.copies(),
        };
        if ok {
            Ok(())
        } else {
            Err(CoresetError::UnknownCenter(c.to_string()))
        }
    }

    /// Every candidate center: copy centers, then hubs and local centers.
    pub fn center_universe(&self) -> Vec<CenterId> {
        let mut all: Vec<CenterId> = (0..self.copies())
            .flat_map(|copy| (0..self.n_centers).map(move |index| CenterId::Copy { copy, index }))
            .collect();
        if self.star.is_some() {
            all.push(CenterId::Hub);
            all.push(CenterId::FarHub);
            all.extend((0..self.copies()).map(CenterId::Local));
        }
        all
    }

    /// Surrogate for the distance between different copies.
    pub fn cross_copy_distance(&self) -> f64 {
        self.star.map_or(f64::INFINITY, |s| 8.0 * s.d_inf)
    }

    /// `z`-th power of the distance from a client to a center, and whether
    /// the edge has length exactly 1.
    pub fn client_cost(&self, copy: usize, client: usize, c: &CenterId) -> (f64, bool) {
        let z = self.z as i32;
        match *c {
            CenterId::Copy { copy: b, index } if b == copy => {
                if self.is_short(copy, client, index) {
                    (1.0, true)
                } else {
                    (2.0, false)
                }
            }
            CenterId::Local(b) if b == copy => (2.0, false),
            CenterId::Copy { .. } | CenterId::Local(_) => (self.cross_copy_distance().powi(z), false),
            CenterId::Hub => (self.star.map_or(f64::INFINITY, |s| s.d_inf).powi(z), false),
            CenterId::FarHub => (self.star.map_or(f64::INFINITY, |s| 4.0 * s.d_inf).powi(z), false),
        }
    }

    /// Cost of the chosen centers. `omega` lists `(global client index, weight)`;
    /// `None` means every client with weight 1. `round_to` rounds each weight to
    /// the nearest multiple of the given step before use.
    pub fn discrete_cost(&self, s: &[CenterId], omega: Option<&[(usize, f64)]>, round_to: Option<f64>) -> Result<DiscreteCost> {
        if s.is_empty() {
            return Err(CoresetError::invalid("solution has no centers"));
        }
        for c in s {
            self.validate_center(c)?;
        }
        if let Some(step) = round_to {
            if !(step > 0.0) {
                return Err(CoresetError::invalid("rounding step must be positive"));
            }
        }
        let all: Vec<(usize, f64)>;
        let clients = match omega {
            Some(o) => o,
            None => {
                all = (0..self.total_clients()).map(|i| (i, 1.0)).collect();
                &all
            }
        };
        let mut out = DiscreteCost {
            cost: 0.0,
            weight: 0.0,
            n1: 0.0,
        };
        for &(g, w) in clients {
            if g >= self.total_clients() {
                return Err(CoresetError::invalid(format!("client {g} out of range")));
            }
            let w = match round_to {
                Some(step) => (w / step).round() * step,
                None => w,
            };
            let (copy, client) = (g / self.n_clients, g % self.n_clients);
            let (best, short) = s
                .iter()
                .map(|c| self.client_cost(copy, client, c))
                .fold((f64::INFINITY, false), |acc, x| if x.0 < acc.0 { x } else { acc });
            out.cost += w * best;
            out.weight += w;
            if short {
                out.n1 += w;
            }
        }
        Ok(out)
    }
}
