//! Monte Carlo estimate of the upper tail `Pr[sum w_i X_i - mu > eps mu]` for
//! independent Bernoulli(p) variables, `mu = p sum w_i`.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::{par, rng, stats};

/// Trials per independent substream.
const BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub m: usize,
    pub p: f64,
    pub eps: f64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    /// 95% Wilson interval.
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    /// `max w * eps * m / sum w`.
    pub gamma: f64,
    /// `-ln(estimate) / (eps^2 m p)`; `None` when no trial exceeded the threshold
    /// or `eps = 0`.
    pub fitted_rate: Option<f64>,
}

/// `weights = None` means unit weights, sampled as a binomial count.
pub fn anticoncentration_mc(m: usize, p: f64, eps: f64, weights: Option<&[f64]>, trials: u64, seed: u64) -> Result<TailEstimate> {
    if trials < 1 {
        return Err(CoresetError::invalid("trials must be at least 1"));
    }
    if m == 0 {
        return Err(CoresetError::invalid("m must be at least 1"));
    }
    if !(p > 0.0 && p <= 0.25) {
        return Err(CoresetError::invalid(format!("p = {p} must lie in (0, 1/4]")));
    }
    if !(eps >= 0.0) {
        return Err(CoresetError::invalid("eps must be non-negative"));
    }
    if let Some(w) = weights {
        if w.len() != m {
            return Err(CoresetError::invalid(format!("{} weights for m = {m}", w.len())));
        }
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(CoresetError::invalid("weights must be finite and non-negative"));
        }
    }
    let total: f64 = weights.map_or(m as f64, |w| w.iter().sum());
    if !(total > 0.0) {
        return Err(CoresetError::invalid("weights sum to zero"));
    }
    let max_w = weights.map_or(1.0, |w| w.iter().copied().fold(0.0, f64::max));
    let mu = p * total;
    let margin = eps * mu;

    let blocks: Vec<u64> = (0..trials.div_ceil(BLOCK)).collect();
    let hits: u64 = par::map(&blocks, |&b| {
        let n = BLOCK.min(trials - b * BLOCK);
        let mut r = rng::substream(seed, &[b]);
        match weights {
            None => {
                let bin = Binomial::new(m as u64, p).expect("valid binomial");
                (0..n).filter(|_| bin.sample(&mut r) as f64 - mu > margin).count() as u64
            }
            Some(w) => (0..n)
                .filter(|_| {
                    let s: f64 = w.iter().filter(|_| r.random_bool(p)).sum();
                    s - mu > margin
                })
                .count() as u64,
        }
    })
    .into_iter()
    .sum();

    let estimate = hits as f64 / trials as f64;
    let (lower, upper) = stats::wilson(hits, trials, stats::Z95);
    let denom = eps * eps * m as f64 * p;
    Ok(TailEstimate {
        m,
        p,
        eps,
        trials,
        hits,
        estimate,
        lower,
        upper,
        mu,
        gamma: max_w * eps * m as f64 / total,
        fitted_rate: (hits > 0 && denom > 0.0).then(|| -estimate.ln() / denom),
    })
}
