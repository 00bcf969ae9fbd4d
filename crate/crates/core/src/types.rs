//! Domain types: estimate records, assumption distributions, fits and
//! emulation outputs.
//!
//! Every type here is immutable once built; constructors enforce the
//! invariants so downstream code never re-checks them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DistributionError, RecordError};
use crate::scalar::Scalar;

pub const YEAR_MIN: i64 = 1980;
pub const YEAR_MAX: i64 = 2035;

/// A modeling assumption the emulator can alter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// Pure rate of time preference, percent per year.
    Prtp,
    /// Inverse elasticity of intertemporal substitution.
    Emuc,
    /// Impact of 2.5°C warming, percent of GDP.
    Impact,
    /// Growth-rate effect per 1°C warming, percentage points.
    GrowthImpact,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [
        Assumption::Prtp,
        Assumption::Emuc,
        Assumption::Impact,
        Assumption::GrowthImpact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Assumption::Prtp => "prtp",
            Assumption::Emuc => "emuc",
            Assumption::Impact => "impact",
            Assumption::GrowthImpact => "growth_impact",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAssumption(pub String);

impl fmt::Display for UnknownAssumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown assumption {:?} (expected prtp, emuc, impact or growth_impact)",
            self.0
        )
    }
}

impl std::error::Error for UnknownAssumption {}

impl FromStr for Assumption {
    type Err = UnknownAssumption;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Assumption::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAssumption(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactKind {
    Level,
    Growth,
    #[default]
    Unspecified,
}

impl ImpactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImpactKind::Level => "level",
            ImpactKind::Growth => "growth",
            ImpactKind::Unspecified => "",
        }
    }
}

/// One published estimate of the social cost of carbon (2024 USD per tonne of
/// carbon, 2025 emissions) with the assumptions it was computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EstimateRecord<T> {
    pub scc: T,
    pub year: i32,
    pub prtp: Option<T>,
    pub emuc: Option<T>,
    pub impact: Option<T>,
    pub growth_impact: Option<T>,
    pub impact_kind: ImpactKind,
    pub weight: T,
    pub paper_id: String,
}

impl<T: Scalar> EstimateRecord<T> {
    pub fn assumption(&self, a: Assumption) -> Option<T> {
        match a {
            Assumption::Prtp => self.prtp,
            Assumption::Emuc => self.emuc,
            Assumption::Impact => self.impact,
            Assumption::GrowthImpact => self.growth_impact,
        }
    }

    /// Zero-weight records are kept in memory but never enter a fit.
    pub fn is_excluded(&self) -> bool {
        self.weight == T::zero()
    }
}

fn parse_opt<T: Scalar>(
    fields: &BTreeMap<String, String>,
    name: &'static str,
    errors: &mut Vec<RecordError>,
) -> Option<T> {
    let raw = fields.get(name).map(|s| s.trim()).unwrap_or("");
    if raw.is_empty() {
        return None;
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(T::lit(v)),
        Ok(_) => {
            errors.push(RecordError::NonFinite(name));
            None
        }
        Err(_) => {
            errors.push(RecordError::Unparseable {
                field: name,
                value: raw.to_string(),
            });
            None
        }
    }
}

fn parse_required<T: Scalar>(
    fields: &BTreeMap<String, String>,
    name: &'static str,
    errors: &mut Vec<RecordError>,
) -> Option<T> {
    let present = fields.get(name).is_some_and(|s| !s.trim().is_empty());
    if !present {
        errors.push(RecordError::MissingField(name));
        return None;
    }
    parse_opt(fields, name, errors)
}

/// Validates a raw field map (column name → text) into a typed record.
///
/// All violations are reported, not only the first. `impact_kind` may be
/// left empty; it is then classified from whichever impact field is present,
/// growth taking precedence when only `growth_impact` is given.
pub fn validate_record<T, K, V>(fields: impl IntoIterator<Item = (K, V)>) -> Result<EstimateRecord<T>, Vec<RecordError>>
where
    T: Scalar,
    K: Into<String>,
    V: Into<String>,
{
    let fields: BTreeMap<String, String> = fields.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
    let mut errors = Vec::new();

    let scc = parse_required::<T>(&fields, "scc", &mut errors);
    let weight = parse_required::<T>(&fields, "weight", &mut errors);
    if let Some(w) = weight {
        if w < T::zero() {
            errors.push(RecordError::NegativeWeight(w.as_f64()));
        }
    }

    let year = match fields.get("year").map(|s| s.trim()).filter(|s| !s.is_empty()) {
        None => {
            errors.push(RecordError::MissingField("year"));
            None
        }
        Some(raw) => {
            // accept "2020" and "2020.0"
            let parsed = raw
                .parse::<i64>()
                .ok()
                .or_else(|| raw.parse::<f64>().ok().filter(|v| v.fract() == 0.0).map(|v| v as i64));
            match parsed {
                None => {
                    errors.push(RecordError::Unparseable {
                        field: "year",
                        value: raw.to_string(),
                    });
                    None
                }
                Some(y) if !(YEAR_MIN..=YEAR_MAX).contains(&y) => {
                    errors.push(RecordError::YearOutOfRange(y));
                    None
                }
                Some(y) => Some(y as i32),
            }
        }
    };

    let prtp = parse_opt::<T>(&fields, "prtp", &mut errors);
    let emuc = parse_opt::<T>(&fields, "emuc", &mut errors);
    let impact = parse_opt::<T>(&fields, "impact", &mut errors);
    let growth_impact = parse_opt::<T>(&fields, "growth_impact", &mut errors);

    let kind_raw = fields
        .get("impact_kind")
        .map(|s| s.trim().to_ascii_lowercase())
        .unwrap_or_default();
    let impact_kind = match kind_raw.as_str() {
        "" => match (impact.is_some(), growth_impact.is_some()) {
            (false, true) => ImpactKind::Growth,
            (true, _) => ImpactKind::Level,
            (false, false) => ImpactKind::Unspecified,
        },
        "level" => ImpactKind::Level,
        "growth" => ImpactKind::Growth,
        "unspecified" => ImpactKind::Unspecified,
        other => {
            errors.push(RecordError::UnknownImpactKind(other.to_string()));
            ImpactKind::Unspecified
        }
    };
    if impact_kind == ImpactKind::Growth
        && growth_impact.is_none()
        && !errors.iter().any(|e| {
            matches!(
                e,
                RecordError::Unparseable {
                    field: "growth_impact",
                    ..
                }
            )
        })
    {
        errors.push(RecordError::GrowthKindWithoutValue);
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(EstimateRecord {
        scc: scc.expect("checked"),
        year: year.expect("checked"),
        prtp,
        emuc,
        impact,
        growth_impact,
        impact_kind,
        weight: weight.expect("checked"),
        paper_id: fields.get("paper_id").map(|s| s.trim().to_string()).unwrap_or_default(),
    })
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawDistribution<T> {
    assumption: Assumption,
    #[serde(default)]
    label: String,
    support: Vec<T>,
    probability: Vec<T>,
}

/// Discrete probability distribution over the support values of one
/// assumption. Used both for the literature's observed frequencies and for an
/// alternative view (survey, meta-analysis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawDistribution<T>")]
pub struct AssumptionDistribution<T> {
    assumption: Assumption,
    label: String,
    support: Vec<T>,
    probability: Vec<T>,
}

impl<T: Scalar> TryFrom<RawDistribution<T>> for AssumptionDistribution<T> {
    type Error = DistributionError;

    fn try_from(raw: RawDistribution<T>) -> Result<Self, Self::Error> {
        Self::new(raw.assumption, raw.support, raw.probability, raw.label)
    }
}

impl<T: Scalar> AssumptionDistribution<T> {
    /// Builds a distribution whose probabilities already sum to one within
    /// [`Scalar::normalization_tolerance`]; they are rescaled to remove the
    /// residual rounding.
    pub fn new(
        assumption: Assumption,
        support: Vec<T>,
        probability: Vec<T>,
        label: impl Into<String>,
    ) -> Result<Self, DistributionError> {
        Self::with_tolerance(assumption, support, probability, label, T::normalization_tolerance())
    }

    /// Like [`AssumptionDistribution::new`] but accepts a sum within `tolerance`
    /// of one before rescaling.
    pub fn with_tolerance(
        assumption: Assumption,
        support: Vec<T>,
        mut probability: Vec<T>,
        label: impl Into<String>,
        tolerance: T,
    ) -> Result<Self, DistributionError> {
        if support.is_empty() && probability.is_empty() {
            return Err(DistributionError::Empty);
        }
        if support.len() != probability.len() {
            return Err(DistributionError::LengthMismatch {
                support: support.len(),
                probability: probability.len(),
            });
        }
        for (index, (&x, &p)) in support.iter().zip(&probability).enumerate() {
            if !x.is_finite() || !p.is_finite() {
                return Err(DistributionError::NonFinite { index });
            }
        }
        if let Some(index) = (1..support.len()).find(|&i| support[i] <= support[i - 1]) {
            return Err(DistributionError::NonMonotoneSupport { index });
        }
        if let Some((index, &value)) = probability.iter().enumerate().find(|(_, &p)| p < T::zero()) {
            return Err(DistributionError::NegativeProbability {
                index,
                value: value.as_f64(),
            });
        }
        let sum: T = probability.iter().copied().sum();
        if !((sum - T::one()).abs() <= tolerance) {
            return Err(DistributionError::NotNormalized { sum: sum.as_f64() });
        }
        for p in &mut probability {
            *p /= sum;
        }
        Ok(Self {
            assumption,
            label: label.into(),
            support,
            probability,
        })
    }

    /// Builds a distribution from non-negative masses of any positive total.
    pub fn from_masses(
        assumption: Assumption,
        support: Vec<T>,
        masses: Vec<T>,
        label: impl Into<String>,
    ) -> Result<Self, DistributionError> {
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(DistributionError::NotNormalized { sum: total.as_f64() });
        }
        let probability = masses.into_iter().map(|m| m / total).collect();
        Self::new(assumption, support, probability, label)
    }

    pub fn assumption(&self) -> Assumption {
        self.assumption
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probability(&self) -> &[T] {
        &self.probability
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mean(&self) -> T {
        self.support.iter().zip(&self.probability).map(|(&x, &p)| x * p).sum()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Cumulative probabilities at each support point; the last entry is 1.
    pub fn cumulative(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out: Vec<T> = self
            .probability
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = T::one();
        }
        out
    }
}

/// Which statistic a fit targets: a conditional quantile or the conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum FitTarget<T> {
    Quantile(T),
    Mean(MeanTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeanTag {
    #[serde(rename = "mean")]
    Mean,
}

impl<T: Scalar> FitTarget<T> {
    pub const MEAN: FitTarget<T> = FitTarget::Mean(MeanTag::Mean);

    pub fn tau(&self) -> Option<T> {
        match *self {
            FitTarget::Quantile(t) => Some(t),
            FitTarget::Mean(_) => None,
        }
    }

    pub fn is_mean(&self) -> bool {
        matches!(self, FitTarget::Mean(_))
    }
}

impl<T: Scalar> fmt::Display for FitTarget<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitTarget::Quantile(t) => write!(f, "{t}"),
            FitTarget::Mean(_) => f.write_str("mean"),
        }
    }
}

/// How the standard errors of a fit were obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeMethod {
    /// Point estimate only; `se` holds zeros.
    #[default]
    None,
    /// Classical standard errors from the weighted normal equations.
    Classical,
    /// Cluster bootstrap over `paper_id`.
    Bootstrap { replicates: usize, seed: u64 },
}

/// Coefficients and standard errors for one percentile (or the mean).
///
/// `beta` and `se` carry one entry per covariate followed by the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct QuantileFit<T> {
    pub tau: FitTarget<T>,
    pub covariates: Vec<String>,
    pub beta: Vec<T>,
    pub se: Vec<T>,
    pub n_obs: usize,
    /// Records dropped for a missing covariate or zero weight.
    #[serde(default)]
    pub n_dropped: usize,
    pub loss: T,
    #[serde(default)]
    pub se_method: SeMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censor_bound: Option<T>,
}

pub const INTERCEPT: &str = "intercept";

impl<T: Scalar> QuantileFit<T> {
    pub fn intercept(&self) -> T {
        *self.beta.last().expect("fit has an intercept")
    }

    /// Index of a named covariate (`"intercept"` addresses the last slot).
    pub fn index_of(&self, name: &str) -> Option<usize> {
        if name == INTERCEPT {
            return self.beta.len().checked_sub(1);
        }
        self.covariates.iter().position(|c| c == name)
    }

    /// `(beta, se)` of the named coefficient.
    pub fn coefficient(&self, name: &str) -> Option<(T, T)> {
        self.index_of(name).map(|i| (self.beta[i], self.se[i]))
    }

    pub fn predict(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.covariates.len());
        x.iter()
            .zip(&self.beta)
            .fold(self.intercept(), |acc, (&xi, &b)| acc + xi * b)
    }

    pub fn with_standard_errors(mut self, se: Vec<T>, method: SeMethod) -> Self {
        assert_eq!(se.len(), self.beta.len(), "one standard error per coefficient");
        assert!(se.iter().all(|s| *s >= T::zero()), "standard errors are non-negative");
        self.se = se;
        self.se_method = method;
        self
    }
}

/// Observed and emulated quantile at one percentile.
///
/// `shift = Σ_s (F_s − P_s)·X_s·β`: positive when replacing the literature's
/// frequencies `F` by the alternative `P` would have lowered the quantile
/// under the fitted sensitivity, i.e. the literature sits above the
/// alternative by `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmulationResult<T> {
    pub tau: T,
    pub scc_observed: T,
    pub scc_emulated: T,
    pub shift: T,
    pub se: T,
    pub ci_low: T,
    pub ci_high: T,
}

impl<T: Scalar> EmulationResult<T> {
    /// Assembles a row; `z` is the two-sided normal critical value.
    pub fn new(tau: T, scc_observed: T, shift: T, se: T, z: T) -> Self {
        let half = z * se;
        Self {
            tau,
            scc_observed,
            scc_emulated: scc_observed + shift,
            shift,
            se,
            ci_low: shift - half,
            ci_high: shift + half,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BiasInput<T> {
    pub label: String,
    pub mu: T,
    pub sigma: T,
}

impl<T> BiasInput<T> {
    pub fn new(label: impl Into<String>, mu: T, sigma: T) -> Self {
        Self {
            label: label.into(),
            mu,
            sigma,
        }
    }
}

/// Precision-weighted combination of several bias estimates at one percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BiasSummary<T> {
    pub tau: T,
    pub mu_combined: T,
    pub sigma_combined: T,
    pub inputs: Vec<BiasInput<T>>,
}
