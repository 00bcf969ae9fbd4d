use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::regression::bootstrap::{bootstrap_se_design, DEFAULT_REPLICATES};
use crate::regression::design::{Design, DesignSpec};
use crate::regression::quantile::fit_quantile_design;
use crate::regression::wls::fit_wls_design;
use crate::scalar::Scalar;
use crate::types::{EstimateRecord, QuantileFit, SeMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    /// Attach cluster-bootstrap standard errors to every quantile fit.
    pub bootstrap: Option<BootstrapConfig>,
    /// Also fit the mean column by weighted least squares.
    pub include_mean: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            bootstrap: Some(BootstrapConfig::default()),
            include_mean: true,
        }
    }
}

/// Per-tau outcome of a grid fit. A failing tau does not abort the others.
#[derive(Debug, Clone)]
pub struct GridFit<T> {
    pub quantiles: Vec<(T, Result<QuantileFit<T>, FitError>)>,
    pub mean: Option<Result<QuantileFit<T>, FitError>>,
}

impl<T: Scalar> GridFit<T> {
    /// Successful fits: quantiles in grid order, then the mean.
    pub fn successful(&self) -> Vec<QuantileFit<T>> {
        self.quantiles
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().cloned())
            .chain(self.mean.iter().filter_map(|r| r.as_ref().ok().cloned()))
            .collect()
    }

    pub fn failures(&self) -> Vec<(Option<T>, &FitError)> {
        self.quantiles
            .iter()
            .filter_map(|(t, r)| r.as_ref().err().map(|e| (Some(*t), e)))
            .chain(self.mean.iter().filter_map(|r| r.as_ref().err().map(|e| (None, e))))
            .collect()
    }
}

/// One independent fit per tau in `spec.tau_grid` (run in parallel), plus the
/// weighted-least-squares mean fit. Every tau shares the bootstrap seed, so a
/// single-tau grid reproduces a direct fit exactly.
pub fn fit_grid<T: Scalar>(
    records: &[EstimateRecord<T>],
    spec: &DesignSpec<T>,
    options: &GridOptions,
) -> Result<GridFit<T>, FitError> {
    spec.validate()?;
    if spec.tau_grid.is_empty() {
        return Err(FitError::InvalidDesign("empty tau grid".into()));
    }
    let design = Design::build(records, spec)?;
    let quantiles = spec
        .tau_grid
        .par_iter()
        .map(|&tau| (tau, fit_one(&design, tau, spec.censor_bound, options.bootstrap)))
        .collect();
    let mean = options.include_mean.then(|| fit_wls_design(&design));
    Ok(GridFit { quantiles, mean })
}

fn fit_one<T: Scalar>(
    design: &Design<T>,
    tau: T,
    censor_bound: Option<T>,
    bootstrap: Option<BootstrapConfig>,
) -> Result<QuantileFit<T>, FitError> {
    let fit = fit_quantile_design(design, tau, censor_bound)?;
    match bootstrap {
        None => Ok(fit),
        Some(cfg) => {
            let se = bootstrap_se_design(design, tau, censor_bound, cfg.replicates, cfg.seed, Some(&fit.beta))?;
            Ok(fit.with_standard_errors(
                se,
                SeMethod::Bootstrap {
                    replicates: cfg.replicates,
                    seed: cfg.seed,
                },
            ))
        }
    }
}
