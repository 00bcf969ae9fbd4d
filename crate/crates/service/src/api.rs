//! Request and response payloads, and the request evaluation shared with the
//! command-line tool.

use axum::http::StatusCode;
use metaemu_core::emulator::{
    combine_emulations, disagreement_loadings, emulate_cdf, Alteration, EmulationOptions, ObservedQuantile,
    VarianceModel,
};
use metaemu_core::ingestion::{EmulationFile, DISTRIBUTION_TOLERANCE};
use metaemu_core::{
    Assumption, AssumptionDistribution, Bias, Distribution, DistributionError, Emulation, EmulationError, Fit,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::Preset;

pub const EMULATE_REQUEST_SCHEMA: &str = "metaemu.emulate_request.v1";
pub const COMBINE_REQUEST_SCHEMA: &str = "metaemu.combine_request.v1";
pub const COMBINE_SCHEMA: &str = "metaemu.combine.v1";
pub const PRESETS_SCHEMA: &str = "metaemu.presets.v1";
pub const HEALTH_SCHEMA: &str = "metaemu.health.v1";
pub const ERROR_SCHEMA: &str = "metaemu.error.v1";

pub const DEFAULT_LABEL: &str = "emulation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub schema: String,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthBody {
    pub schema: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetsBody {
    pub schema: String,
    pub presets: Vec<Preset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionBody {
    #[serde(default)]
    pub label: String,
    pub support: Vec<f64>,
    pub probability: Vec<f64>,
}

impl From<&Distribution> for DistributionBody {
    fn from(d: &Distribution) -> Self {
        Self {
            label: d.label().to_string(),
            support: d.support().to_vec(),
            probability: d.probability().to_vec(),
        }
    }
}

/// One assumption to alter: `from` holds the literature's frequencies (F),
/// `to` the alternative view (P).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlterationBody {
    pub assumption: String,
    #[serde(alias = "F")]
    pub from: DistributionBody,
    #[serde(alias = "P")]
    pub to: DistributionBody,
}

fn default_ci_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmulateRequest {
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub label: Option<String>,
    pub alterations: Vec<AlterationBody>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[serde(default)]
    pub rearrange: bool,
    /// Correlations between the alterations' shifts, in request order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
}

impl EmulateRequest {
    pub fn new(alterations: Vec<AlterationBody>) -> Self {
        Self {
            schema: Some(EMULATE_REQUEST_SCHEMA.to_string()),
            label: None,
            alterations,
            ci_level: default_ci_level(),
            rearrange: false,
            correlation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBody {
    pub label: String,
    pub results: Vec<Emulation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombineRequest {
    #[serde(default)]
    pub schema: Option<String>,
    pub sources: Vec<SourceBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombineResponse {
    pub schema: String,
    pub summaries: Vec<Bias>,
}

fn check_schema(found: &Option<String>, expected: &str) -> Result<(), ApiError> {
    match found {
        Some(s) if s != expected => {
            Err(ApiError::bad_request(format!("unsupported schema {s:?}, expected {expected:?}")).at("schema"))
        }
        _ => Ok(()),
    }
}

fn distribution_field(e: &DistributionError) -> &'static str {
    match e {
        DistributionError::NonMonotoneSupport { .. } | DistributionError::Empty => "support",
        DistributionError::LengthMismatch { .. } | DistributionError::NonFinite { .. } => "",
        DistributionError::NegativeProbability { .. } | DistributionError::NotNormalized { .. } => "probability",
    }
}

fn build_distribution(
    assumption: Assumption,
    body: &DistributionBody,
    field: String,
) -> Result<Distribution, ApiError> {
    AssumptionDistribution::with_tolerance(
        assumption,
        body.support.clone(),
        body.probability.clone(),
        body.label.clone(),
        DISTRIBUTION_TOLERANCE,
    )
    .map_err(|e| {
        let sub = distribution_field(&e);
        let path = if sub.is_empty() {
            field
        } else {
            format!("{field}.{sub}")
        };
        ApiError::bad_request(e.to_string()).at(path)
    })
}

/// Validates the request alterations field by field. Unknown assumptions are
/// 422; everything else is 400.
pub fn parse_alterations(bodies: &[AlterationBody]) -> Result<Vec<Alteration<f64>>, ApiError> {
    if bodies.is_empty() {
        return Err(ApiError::bad_request("at least one alteration is required").at("alterations"));
    }
    bodies
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let base = format!("alterations[{i}]");
            let assumption: Assumption =
                b.assumption
                    .parse()
                    .map_err(|e: metaemu_core::types::UnknownAssumption| {
                        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()).at(format!("{base}.assumption"))
                    })?;
            let from = build_distribution(assumption, &b.from, format!("{base}.from"))?;
            let to = build_distribution(assumption, &b.to, format!("{base}.to"))?;
            disagreement_loadings(assumption, &from, &to)
                .map_err(|e| ApiError::bad_request(e.to_string()).at(base.clone()))?;
            Ok(Alteration::new(assumption, from, to))
        })
        .collect()
}

fn emulation_error(e: EmulationError) -> ApiError {
    match e {
        EmulationError::InvalidConfidenceLevel(_) => ApiError::bad_request(e.to_string()).at("ci_level"),
        EmulationError::InvalidCorrelation(_) => ApiError::bad_request(e.to_string()).at("correlation"),
        EmulationError::MissingFit(_) | EmulationError::Fit(_) => {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
        _ => ApiError::bad_request(e.to_string()),
    }
}

/// The evaluation behind both `POST /emulate` and `metaemu emulate`.
pub fn run_emulation(
    fits: &[Fit],
    observed: &[ObservedQuantile<f64>],
    alterations: &[Alteration<f64>],
    options: &EmulationOptions<f64>,
    label: &str,
) -> Result<EmulationFile<f64>, ApiError> {
    let report = emulate_cdf(fits, observed, alterations, options).map_err(emulation_error)?;
    Ok(EmulationFile::new(label, report.results, report.crossings))
}

pub fn emulate(
    fits: &[Fit],
    observed: &[ObservedQuantile<f64>],
    request: &EmulateRequest,
) -> Result<EmulationFile<f64>, ApiError> {
    check_schema(&request.schema, EMULATE_REQUEST_SCHEMA)?;
    let alterations = parse_alterations(&request.alterations)?;
    let options = EmulationOptions {
        ci_level: request.ci_level,
        variance: match &request.correlation {
            Some(rho) => VarianceModel::Correlated(rho.clone()),
            None => VarianceModel::Independent,
        },
        rearrange: request.rearrange,
    };
    let label = request.label.as_deref().unwrap_or(DEFAULT_LABEL);
    run_emulation(fits, observed, &alterations, &options, label)
}

pub fn combine(request: &CombineRequest) -> Result<CombineResponse, ApiError> {
    check_schema(&request.schema, COMBINE_REQUEST_SCHEMA)?;
    let sources: Vec<(String, Vec<Emulation>)> = request
        .sources
        .iter()
        .map(|s| (s.label.clone(), s.results.clone()))
        .collect();
    let summaries = combine_emulations(&sources).map_err(|e| {
        let field = match e {
            EmulationError::EmptyInputs => "sources",
            _ => "sources[].results",
        };
        ApiError::bad_request(e.to_string()).at(field)
    })?;
    Ok(CombineResponse {
        schema: COMBINE_SCHEMA.to_string(),
        summaries,
    })
}
