//! Weighted quantile regression of published social-cost-of-carbon estimates
//! on their modelling assumptions, and meta-emulation of the estimate
//! distribution under alternative assumption distributions.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the command-line tool and the
//! service use.

// index loops read closer to the linear algebra; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod emulator;
pub mod error;
pub mod ingestion;
pub mod linalg;
pub mod regression;
pub mod scalar;
pub mod stats;
pub mod types;

pub use error::{DistributionError, EmulationError, Error, FitError, IngestError, RecordError, Result, RowError};
pub use scalar::Scalar;
pub use types::{
    validate_record, Assumption, AssumptionDistribution, BiasInput, BiasSummary, EmulationResult, EstimateRecord,
    FitTarget, ImpactKind, QuantileFit, SeMethod, INTERCEPT,
};

pub type Record = EstimateRecord<f64>;
pub type Distribution = AssumptionDistribution<f64>;
pub type Fit = QuantileFit<f64>;
pub type Emulation = EmulationResult<f64>;
pub type Bias = BiasSummary<f64>;
pub type Spec = regression::DesignSpec<f64>;

pub type Record32 = EstimateRecord<f32>;
pub type Distribution32 = AssumptionDistribution<f32>;
pub type Fit32 = QuantileFit<f32>;
