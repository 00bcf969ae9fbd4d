//! Reading and summarizing the estimates database, assumption distributions
//! and the fit/emulation artifacts written by the command-line tool.

mod artifact;
mod distribution;
mod estimates;

pub use artifact::{
    read_emulation_csv, write_emulation_csv, write_fits_csv, EmulationFile, FitArtifact, FitFailure, EMULATION_SCHEMA,
    FIT_SCHEMA,
};
pub use distribution::{
    bin_index, coarsen, empirical_frequency, load_distribution, parse_distribution, snap, snap_index,
    weighted_histogram, DISTRIBUTION_TOLERANCE,
};
pub use estimates::{
    load_estimates, read_estimates, summarize, AssumptionCoverage, DatasetSummary, ESTIMATE_COLUMNS, MANDATORY_COLUMNS,
};
