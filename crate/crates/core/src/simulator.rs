//! Monte-Carlo network simulator: samples station and user point
//! processes, forms k-nearest associations, applies a failure model, and
//! reports per-user capacity statistics.
//!
//! Bandwidth protocol: every station owns W_BS = w_tot_density/λ_bs Hz
//! and splits it equally over the links it serves. Without reallocation
//! the split uses the pre-failure degree, so bandwidth assigned to a
//! failed link idles; with reallocation it uses the count of surviving
//! links, so a station with at least one survivor always spends its full
//! budget. A user's capacity is the sum over its surviving links of
//! share · log₂(1+SNR), with SNR clamped at c inside one metre.

use crate::analytic::{NetworkParams, ParamError};
use crate::failures::{los_blockage_prob, rate_at, FailureModel};
use crate::metrics::{empirical_cdf, jain_index, MetricsError};
use crate::pointprocess::{k_nearest, sample_ppp, Association, Region, ShortfallError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the number of CDF points embedded in a report; the
/// full-resolution CDF is recoverable from `per_user_capacity`.
const CDF_POINT_BUDGET: usize = 1024;

/// One simulation experiment: scenario parameters, sampling window,
/// optional failure model, bandwidth policy, and replication control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: NetworkParams<f64>,
    pub region: Region,
    /// `None` simulates the failure-free network.
    pub failure: Option<FailureModel<f64>>,
    /// Re-split station bandwidth over surviving links only.
    pub reallocation: bool,
    /// Independent repetitions pooled into one report; at least 1.
    pub replications: u32,
    /// Master seed; each replication derives its own streams from it.
    pub seed: u64,
}

impl SimConfig {
    /// Re-runs every constructor check; configs often arrive
    /// deserialized, bypassing the validating constructors.
    pub fn validate(&self) -> Result<(), ParamError> {
        let p = &self.params;
        NetworkParams::new(p.lambda_bs, p.lambda_u, p.alpha, p.c, p.w_tot_density, p.k)?;
        Region::new(self.region.width, self.region.height, self.region.boundary)?;
        if let Some(f) = &self.failure {
            f.validate()?;
        }
        if self.replications == 0 {
            return Err(ParamError {
                name: "replications",
                value: 0.0,
                requirement: "at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ParamError),
    #[error(transparent)]
    Shortfall(#[from] ShortfallError),
    #[error("no users were sampled in any replication")]
    NoUsers,
    #[error("all sampled user capacities are zero; fairness is undefined")]
    AllZeroCapacities,
}

/// Pooled per-user results of all replications, in replication order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Capacity of each user, bit/s.
    pub per_user_capacity: Vec<f64>,
    /// Replication index of each entry.
    pub replication_id: Vec<u32>,
    /// User index within its replication.
    pub user_id: Vec<u32>,
    /// Surviving links of each user; 0 means outage.
    pub surviving_links: Vec<u32>,
    /// Fraction of users with no surviving link.
    pub outage_fraction: f64,
    /// Mean over all users, zero-capacity users included.
    pub mean_capacity: f64,
    /// Jain fairness index of `per_user_capacity`.
    pub jain_index: f64,
    /// Decimated empirical CDF, at most [`CDF_POINT_BUDGET`] points,
    /// always ending at quantile 1.
    pub cdf_samples: Vec<(f64, f64)>,
    /// The configuration that produced this report.
    pub metadata: SimConfig,
}

impl CapacityReport {
    /// One row per user: `replication,user_id,n_links_surviving,capacity_bps`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replication", "user_id", "n_links_surviving", "capacity_bps"])?;
        for i in 0..self.per_user_capacity.len() {
            w.write_record(&[
                self.replication_id[i].to_string(),
                self.user_id[i].to_string(),
                self.surviving_links[i].to_string(),
                format!("{:.6}", self.per_user_capacity[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Derives the (station, user, failure) sampling seeds of one
/// replication from the master seed, using disjoint cipher streams so
/// replications are independent yet reproducible in isolation.
fn replication_seeds(seed: u64, replication: u32) -> (u64, u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(replication) + 1);
    (rng.gen(), rng.gen(), rng.gen())
}

/// Draws which links survive. The mask is flat with `k` consecutive
/// entries per user, aligned with [`Association::links`].
///
/// Random: each link dies independently with probability `p`. Overload:
/// one draw per station — it fails with probability 1 − d^{−β} where d is
/// its degree, taking all its links down together (an unused station
/// never fails). Distance: deterministic, links longer than `r_max` die.
/// Line of sight: each link dies independently with the length-dependent
/// blockage probability g(r).
pub fn apply_failure(assoc: &Association, failure: &FailureModel<f64>, seed: u64) -> Vec<bool> {
    let k = assoc.k() as usize;
    let n_users = assoc.n_users();
    let mut mask = vec![true; n_users * k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *failure {
        FailureModel::Random { p } => {
            for m in mask.iter_mut() {
                if rng.gen::<f64>() < p {
                    *m = false;
                }
            }
        }
        FailureModel::Overload { beta } => {
            let survives: Vec<bool> = assoc
                .degrees()
                .iter()
                .map(|&d| d == 0 || rng.gen::<f64>() < f64::from(d).powf(-beta))
                .collect();
            for user in 0..n_users {
                for (slot, &(b, _)) in assoc.links(user).iter().enumerate() {
                    mask[user * k + slot] = survives[b as usize];
                }
            }
        }
        FailureModel::Distance { r_max } => {
            for user in 0..n_users {
                for (slot, &(_, r)) in assoc.links(user).iter().enumerate() {
                    mask[user * k + slot] = r <= r_max;
                }
            }
        }
        FailureModel::Los {
            r_los,
            blockage_constant,
        } => {
            for user in 0..n_users {
                for (slot, &(_, r)) in assoc.links(user).iter().enumerate() {
                    let g = los_blockage_prob(r, r_los, blockage_constant);
                    if rng.gen::<f64>() < g {
                        mask[user * k + slot] = false;
                    }
                }
            }
        }
    }
    mask
}

struct Replication {
    capacities: Vec<f64>,
    surviving: Vec<u32>,
}

/// Splits station bandwidth and sums surviving-link rates per user.
fn allocate(
    params: &NetworkParams<f64>,
    assoc: &Association,
    mask: &[bool],
    reallocation: bool,
) -> Replication {
    let k = assoc.k() as usize;
    let n_users = assoc.n_users();
    let w_bs = params.w_tot_density / params.lambda_bs;
    let divisor: Vec<u32> = if reallocation {
        let mut surviving = vec![0u32; assoc.degrees().len()];
        for user in 0..n_users {
            for (slot, &(b, _)) in assoc.links(user).iter().enumerate() {
                if mask[user * k + slot] {
                    surviving[b as usize] += 1;
                }
            }
        }
        surviving
    } else {
        assoc.degrees().to_vec()
    };
    let mut capacities = vec![0.0; n_users];
    let mut surviving = vec![0u32; n_users];
    for user in 0..n_users {
        for (slot, &(b, r)) in assoc.links(user).iter().enumerate() {
            if !mask[user * k + slot] {
                continue;
            }
            // The divisor is ≥ 1: this surviving link is counted in it.
            let share = w_bs / f64::from(divisor[b as usize]);
            capacities[user] += share * rate_at(r, params);
            surviving[user] += 1;
        }
    }
    Replication {
        capacities,
        surviving,
    }
}

fn replicate(cfg: &SimConfig, replication: u32) -> Result<Replication, ShortfallError> {
    let (bs_seed, user_seed, failure_seed) = replication_seeds(cfg.seed, replication);
    let stations = sample_ppp(cfg.params.lambda_bs, &cfg.region, bs_seed);
    let users = sample_ppp(cfg.params.lambda_u, &cfg.region, user_seed);
    if users.count() == 0 {
        return Ok(Replication {
            capacities: Vec::new(),
            surviving: Vec::new(),
        });
    }
    let assoc = k_nearest(&users, &stations, cfg.params.k, &cfg.region)?;
    let mask = match &cfg.failure {
        Some(model) => apply_failure(&assoc, model, failure_seed),
        None => vec![true; users.count() * cfg.params.k as usize],
    };
    Ok(allocate(&cfg.params, &assoc, &mask, cfg.reallocation))
}

/// Keeps at most `budget` CDF points, always the first and last.
fn decimate_cdf(cdf: Vec<(f64, f64)>, budget: usize) -> Vec<(f64, f64)> {
    if cdf.len() <= budget {
        return cdf;
    }
    let last = cdf.len() - 1;
    let mut out = Vec::with_capacity(budget);
    let mut prev = usize::MAX;
    for i in 0..budget {
        let idx = (i as f64 / (budget - 1) as f64 * last as f64).round() as usize;
        if idx != prev {
            out.push(cdf[idx]);
            prev = idx;
        }
    }
    out
}

/// Runs every replication (in parallel, deterministically: each draws
/// from its own seed-derived streams, and results are pooled in
/// replication order) and aggregates the pooled statistics.
///
/// Degenerate scenarios are reported as errors rather than silently
/// producing undefined statistics: no users sampled anywhere, or every
/// user at zero capacity (e.g. a failure model that kills all links).
pub fn run(cfg: &SimConfig) -> Result<CapacityReport, SimError> {
    cfg.validate()?;
    let reps: Vec<Result<Replication, ShortfallError>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| replicate(cfg, r))
        .collect();

    let mut per_user_capacity = Vec::new();
    let mut replication_id = Vec::new();
    let mut user_id = Vec::new();
    let mut surviving_links = Vec::new();
    for (r, rep) in reps.into_iter().enumerate() {
        let rep = rep?;
        for (u, (&c, &s)) in rep
            .capacities
            .iter()
            .zip(rep.surviving.iter())
            .enumerate()
        {
            per_user_capacity.push(c);
            replication_id.push(r as u32);
            user_id.push(u as u32);
            surviving_links.push(s);
        }
    }
    if per_user_capacity.is_empty() {
        return Err(SimError::NoUsers);
    }

    let n = per_user_capacity.len() as f64;
    let outage_fraction = surviving_links.iter().filter(|&&s| s == 0).count() as f64 / n;
    let mean_capacity = per_user_capacity.iter().sum::<f64>() / n;
    let jain = match jain_index(&per_user_capacity) {
        Ok(j) => j,
        Err(MetricsError::AllZeroSamples) => return Err(SimError::AllZeroCapacities),
        Err(MetricsError::EmptySamples) => unreachable!("emptiness handled above"),
    };
    let cdf = decimate_cdf(
        empirical_cdf(&per_user_capacity).expect("non-empty by construction"),
        CDF_POINT_BUDGET,
    );
    Ok(CapacityReport {
        per_user_capacity,
        replication_id,
        user_id,
        surviving_links,
        outage_fraction,
        mean_capacity,
        jain_index: jain,
        cdf_samples: cdf,
        metadata: cfg.clone(),
    })
}
