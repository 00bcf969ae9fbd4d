//! Cluster bootstrap over papers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::FitError;
use crate::regression::design::{check_tau, Design, DesignSpec};
use crate::regression::quantile::estimate;
use crate::scalar::Scalar;
use crate::stats::sample_std;
use crate::types::EstimateRecord;

pub const MIN_REPLICATES: usize = 100;
pub const DEFAULT_REPLICATES: usize = 1000;

/// Redraw budget: `ATTEMPT_FACTOR · n_boot` resamples in total.
const ATTEMPT_FACTOR: usize = 10;

/// Resamples whole clusters with replacement. Replicate `r` draws from its own
/// ChaCha stream (`seed`, stream `r`), so results do not depend on thread
/// scheduling. Resamples whose fit fails (rank deficiency, too few rows) are
/// redrawn from the same stream until `10 · n_boot` resamples have been spent.
///
/// Returns one coefficient vector per replicate.
pub fn bootstrap_draws<T, F>(design: &Design<T>, n_boot: usize, seed: u64, fit: F) -> Result<Vec<Vec<T>>, FitError>
where
    T: Scalar,
    F: Fn(&Design<T>) -> Result<Vec<T>, FitError> + Sync,
{
    if n_boot < MIN_REPLICATES {
        return Err(FitError::TooFewReplicates {
            min: MIN_REPLICATES,
            got: n_boot,
        });
    }
    let members = cluster_members(design);
    let g = members.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..n_boot)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            rng
        })
        .collect();
    let mut draws: Vec<Option<Vec<T>>> = vec![None; n_boot];
    let budget = ATTEMPT_FACTOR * n_boot;
    let mut spent = 0usize;
    loop {
        let pending: Vec<usize> = (0..n_boot).filter(|&r| draws[r].is_none()).collect();
        if pending.is_empty() {
            break;
        }
        let round: Vec<usize> = pending.into_iter().take(budget - spent).collect();
        if round.is_empty() {
            let ok = draws.iter().filter(|d| d.is_some()).count();
            return Err(FitError::BootstrapExhausted { attempts: spent, ok });
        }
        spent += round.len();
        let mut round_rngs: Vec<(usize, ChaCha8Rng)> = round.iter().map(|&r| (r, rngs[r].clone())).collect();
        let results: Vec<(usize, ChaCha8Rng, Option<Vec<T>>)> = round_rngs
            .par_iter_mut()
            .map(|(r, rng)| {
                let mut idx = Vec::with_capacity(design.n_obs());
                for _ in 0..g {
                    let c = rng.random_range(0..g);
                    idx.extend_from_slice(&members[c]);
                }
                let sample = design.subset(&idx);
                (*r, rng.clone(), fit(&sample).ok())
            })
            .collect();
        for (r, rng, d) in results {
            rngs[r] = rng;
            draws[r] = d;
        }
    }
    Ok(draws.into_iter().map(|d| d.expect("all replicates filled")).collect())
}

fn cluster_members<T>(design: &Design<T>) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); design.n_clusters];
    for (i, &c) in design.clusters.iter().enumerate() {
        members[c].push(i);
    }
    members.retain(|m| !m.is_empty());
    members
}

/// Per-coefficient standard deviation of bootstrap draws.
pub fn draws_std<T: Scalar>(draws: &[Vec<T>]) -> Vec<T> {
    let p = draws.first().map_or(0, Vec::len);
    (0..p)
        .map(|j| sample_std(&draws.iter().map(|d| d[j]).collect::<Vec<_>>()))
        .collect()
}

/// Cluster-bootstrap standard errors of the τ-quantile regression
/// coefficients (covariates then intercept). Deterministic in `seed`.
pub fn bootstrap_se<T: Scalar>(
    records: &[EstimateRecord<T>],
    spec: &DesignSpec<T>,
    tau: T,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<T>, FitError> {
    check_tau(tau)?;
    let design = Design::build(records, spec)?;
    bootstrap_se_design(&design, tau, spec.censor_bound, n_boot, seed, None)
}

pub(crate) fn bootstrap_se_design<T: Scalar>(
    design: &Design<T>,
    tau: T,
    censor_bound: Option<T>,
    n_boot: usize,
    seed: u64,
    point: Option<&[T]>,
) -> Result<Vec<T>, FitError> {
    let point = match point {
        Some(p) => p.to_vec(),
        None => estimate(design, tau, censor_bound, None)?,
    };
    let draws = bootstrap_draws(design, n_boot, seed, |d| estimate(d, tau, censor_bound, Some(&point)))?;
    Ok(draws_std(&draws))
}
