//! Weighted quantile regression, weighted least squares and cluster-bootstrap
//! standard errors.

mod bootstrap;
mod design;
mod grid;
mod pinball;
mod quantile;
mod simplex;
mod wls;

pub use bootstrap::{bootstrap_draws, bootstrap_se, draws_std, DEFAULT_REPLICATES, MIN_REPLICATES};
pub use design::{default_tau_grid, Covariate, Design, DesignSpec};
pub use grid::{fit_grid, BootstrapConfig, GridFit, GridOptions};
pub use pinball::{check_loss, pinball_loss};
pub use quantile::{censored_loss, fit_quantile, fit_quantile_design, POWELL_MAX_ITER};
pub use wls::{fit_wls, fit_wls_design};

pub(crate) use quantile::estimate;
