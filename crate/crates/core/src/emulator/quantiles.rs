use serde::{Deserialize, Serialize};

use crate::error::EmulationError;
use crate::scalar::Scalar;
use crate::stats::weighted_quantiles;
use crate::types::EstimateRecord;

/// Observed (weighted empirical) quantile of the estimates at one percentile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ObservedQuantile<T> {
    pub tau: T,
    pub scc: T,
}

/// Weighted quantiles of `scc`: for each τ the smallest value whose
/// cumulative normalized weight reaches τ. Zero-weight records are ignored.
pub fn empirical_quantiles<T: Scalar>(
    records: &[EstimateRecord<T>],
    tau_grid: &[T],
) -> Result<Vec<ObservedQuantile<T>>, EmulationError> {
    let values: Vec<T> = records.iter().map(|r| r.scc).collect();
    let weights: Vec<T> = records.iter().map(|r| r.weight).collect();
    let qs = weighted_quantiles(&values, &weights, tau_grid).ok_or(EmulationError::NoUsableRecords)?;
    Ok(tau_grid
        .iter()
        .zip(qs)
        .map(|(&tau, scc)| ObservedQuantile { tau, scc })
        .collect())
}
