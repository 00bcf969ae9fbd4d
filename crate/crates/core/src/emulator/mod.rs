//! Meta-emulation: how the observed quantiles of the estimate distribution
//! would move if the literature's assumption frequencies were replaced by an
//! alternative distribution, with standard errors and pooled biases.

mod cdf;
mod combine;
mod quantiles;
mod shift;

pub use cdf::{emulate_cdf, joint_bootstrap_se, Alteration, EmulationOptions, EmulationReport, VarianceModel};
pub use combine::{combine_biases, combine_emulations};
pub use quantiles::{empirical_quantiles, ObservedQuantile};
pub use shift::{disagreement_loadings, emulate_shift, shift_variance};
