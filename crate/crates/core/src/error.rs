use std::path::PathBuf;

use thiserror::Error;

use crate::types::Assumption;

/// A single constraint violated by a raw estimate record.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("missing mandatory field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}`: cannot parse {value:?}")]
    Unparseable { field: &'static str, value: String },
    #[error("field `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("weight ≥ 0 violated (weight = {0})")]
    NegativeWeight(f64),
    #[error("year out of range: {0} not in [1980, 2035]")]
    YearOutOfRange(i64),
    #[error("impact_kind = growth requires growth_impact")]
    GrowthKindWithoutValue,
    #[error("unknown impact_kind {0:?} (expected level, growth or empty)")]
    UnknownImpactKind(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution has no support points")]
    Empty,
    #[error("support has {support} values but probability has {probability}")]
    LengthMismatch { support: usize, probability: usize },
    #[error("support must be strictly increasing (violated at index {index})")]
    NonMonotoneSupport { index: usize },
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("probabilities do not sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },
}

/// Validation errors collected for one data row (1-based, header excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub row: usize,
    pub errors: Vec<RecordError>,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: ", self.row)?;
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
    #[error("missing mandatory column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("{} invalid row(s):\n{}", .0.len(), display_rows(.0))]
    InvalidRows(Vec<RowError>),
    #[error("no records")]
    NoRecords,
    #[error("no samples to coarsen")]
    NoSamples,
    #[error("no usable records for assumption {0}")]
    NoUsableRecords(Assumption),
    #[error("invalid bin edges: {0}")]
    InvalidBins(String),
    #[error("sample value {0} lies outside the bin range")]
    SampleOutOfRange(f64),
    #[error("negative sample weight {0}")]
    NegativeSampleWeight(f64),
    #[error("all sample weights are zero")]
    ZeroTotalWeight,
    #[error("distribution is for {found} but {expected} was requested")]
    AssumptionMismatch { expected: Assumption, found: Assumption },
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

fn display_rows(rows: &[RowError]) -> String {
    rows.iter().map(|r| format!("  {r}")).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("tau {0} must lie strictly inside (0, 1)")]
    InvalidTau(f64),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("insufficient observations: {n_obs} usable for {n_params} parameters")]
    InsufficientObservations { n_obs: usize, n_params: usize },
    #[error("rank-deficient design (rank {rank} < {n_params}); check covariate(s): {}", .suspects.join(", "))]
    RankDeficient {
        rank: usize,
        n_params: usize,
        suspects: Vec<String>,
    },
    #[error("singular normal equations")]
    SingularNormalEquations,
    #[error("solver failed: {0}")]
    SolverFailure(String),
    #[error("bootstrap needs at least {min} replicates, got {got}")]
    TooFewReplicates { min: usize, got: usize },
    #[error("bootstrap exhausted {attempts} attempts with only {ok} usable replicates")]
    BootstrapExhausted { attempts: usize, ok: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmulationError {
    #[error("support mismatch for {assumption}: from {from:?}, to {to:?}")]
    SupportMismatch {
        assumption: Assumption,
        from: Vec<f64>,
        to: Vec<f64>,
    },
    #[error("distribution for {found} supplied where {expected} is altered")]
    AssumptionMismatch { expected: Assumption, found: Assumption },
    #[error("fit has no coefficient for `{0}`")]
    MissingCoefficient(String),
    #[error("no fit for tau {0}")]
    MissingFit(f64),
    #[error("sigma must be positive (input {label:?} has {sigma})")]
    InvalidSigma { label: String, sigma: f64 },
    #[error("at least one input is required")]
    EmptyInputs,
    #[error("confidence level {0} must lie strictly inside (0, 1)")]
    InvalidConfidenceLevel(f64),
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("tau grids differ between inputs")]
    GridMismatch,
    #[error("no usable records")]
    NoUsableRecords,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Umbrella error for callers that drive several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Emulation(#[from] EmulationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
