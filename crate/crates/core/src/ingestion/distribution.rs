use std::path::Path;

use serde::Deserialize;

use crate::error::{DistributionError, IngestError};
use crate::scalar::Scalar;
use crate::types::{Assumption, AssumptionDistribution, EstimateRecord};

/// Largest deviation of a distribution file's probability sum from one that
/// is silently rescaled away.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct DistributionFile<T> {
    assumption: Option<Assumption>,
    #[serde(default)]
    label: Option<String>,
    support: Vec<T>,
    probability: Vec<T>,
}

/// Reads a distribution from a JSON object
/// `{assumption, label, support, probability}` or a two-column CSV
/// `support,probability` (header optional). A CSV carries no assumption, so
/// `hint` is required for it; for JSON a given `hint` must agree with the
/// file. The label defaults to the file stem.
pub fn load_distribution<T: Scalar>(
    path: impl AsRef<Path>,
    hint: Option<Assumption>,
) -> Result<AssumptionDistribution<T>, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_distribution(&text, hint, &stem)
}

pub fn parse_distribution<T: Scalar>(
    text: &str,
    hint: Option<Assumption>,
    default_label: &str,
) -> Result<AssumptionDistribution<T>, IngestError> {
    let tol = T::lit(DISTRIBUTION_TOLERANCE);
    if text.trim_start().starts_with('{') {
        let raw: DistributionFile<T> = serde_json::from_str(text).map_err(|e| IngestError::Json(e.to_string()))?;
        let assumption = match (raw.assumption, hint) {
            (Some(found), Some(expected)) if found != expected => {
                return Err(IngestError::AssumptionMismatch { expected, found });
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(IngestError::Schema("distribution has no assumption".into())),
        };
        let label = raw.label.unwrap_or_else(|| default_label.to_string());
        return Ok(AssumptionDistribution::with_tolerance(
            assumption,
            raw.support,
            raw.probability,
            label,
            tol,
        )?);
    }

    let assumption = hint.ok_or_else(|| IngestError::Schema("a CSV distribution needs an assumption".into()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut support = Vec::new();
    let mut probability = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| IngestError::Csv(e.to_string()))?;
        if row.len() != 2 {
            return Err(IngestError::Csv(format!(
                "line {}: expected 2 columns (support, probability), found {}",
                i + 1,
                row.len()
            )));
        }
        match (row[0].parse::<f64>(), row[1].parse::<f64>()) {
            (Ok(x), Ok(p)) => {
                support.push(T::lit(x));
                probability.push(T::lit(p));
            }
            // header line
            _ if i == 0 => {}
            _ => {
                return Err(IngestError::Csv(format!(
                    "line {}: cannot parse {:?}",
                    i + 1,
                    row.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(AssumptionDistribution::with_tolerance(
        assumption,
        support,
        probability,
        default_label,
        tol,
    )?)
}

fn check_support<T: Scalar>(support: &[T]) -> Result<(), DistributionError> {
    if support.is_empty() {
        return Err(DistributionError::Empty);
    }
    if let Some(index) = support.iter().position(|x| !x.is_finite()) {
        return Err(DistributionError::NonFinite { index });
    }
    match (1..support.len()).find(|&i| support[i] <= support[i - 1]) {
        Some(index) => Err(DistributionError::NonMonotoneSupport { index }),
        None => Ok(()),
    }
}

/// Index of the support point nearest to `value`; an exact midpoint goes to
/// the lower point. `support` must be non-empty and increasing.
pub fn snap_index<T: Scalar>(value: T, support: &[T]) -> usize {
    let upper = support.partition_point(|&s| s < value);
    if upper == 0 {
        return 0;
    }
    if upper == support.len() {
        return support.len() - 1;
    }
    let below = value - support[upper - 1];
    let above = support[upper] - value;
    if above < below {
        upper
    } else {
        upper - 1
    }
}

pub fn snap<T: Scalar>(value: T, support: &[T]) -> T {
    support[snap_index(value, support)]
}

/// Observed frequency of each support point among the records that report
/// `assumption` and carry positive weight, each value snapped to its nearest
/// support point.
pub fn empirical_frequency<T: Scalar>(
    records: &[EstimateRecord<T>],
    assumption: Assumption,
    support: &[T],
) -> Result<AssumptionDistribution<T>, IngestError> {
    check_support(support)?;
    let mut masses = vec![T::zero(); support.len()];
    let mut used = false;
    for r in records.iter().filter(|r| r.weight > T::zero()) {
        if let Some(v) = r.assumption(assumption) {
            masses[snap_index(v, support)] += r.weight;
            used = true;
        }
    }
    if !used {
        return Err(IngestError::NoUsableRecords(assumption));
    }
    Ok(AssumptionDistribution::from_masses(
        assumption,
        support.to_vec(),
        masses,
        "literature",
    )?)
}

/// Bin of `value` under the convention `[e0, e1], (e1, e2], …`, or `None`
/// outside `[e0, e_last]`.
pub fn bin_index<T: Scalar>(value: T, edges: &[T]) -> Option<usize> {
    let (first, last) = (edges[0], edges[edges.len() - 1]);
    if value < first || value > last {
        return None;
    }
    // first edge ≥ value, counted from edges[1]
    Some(edges[1..].partition_point(|&e| e < value).min(edges.len() - 2))
}

fn check_edges<T: Scalar>(edges: &[T]) -> Result<(), IngestError> {
    if edges.len() < 2 {
        return Err(IngestError::InvalidBins("at least two edges are required".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(IngestError::InvalidBins("edges must be finite".into()));
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(IngestError::InvalidBins("edges must be strictly increasing".into()));
    }
    Ok(())
}

/// Weighted mass per bin. With `clip`, values outside the range count in
/// the first or last bin; otherwise they are an error.
pub fn weighted_histogram<T: Scalar>(samples: &[(T, T)], edges: &[T], clip: bool) -> Result<Vec<T>, IngestError> {
    check_edges(edges)?;
    let mut masses = vec![T::zero(); edges.len() - 1];
    for &(v, w) in samples {
        if !(w >= T::zero()) {
            return Err(IngestError::NegativeSampleWeight(w.as_f64()));
        }
        let k = match bin_index(v, edges) {
            Some(k) => k,
            None if clip && v < edges[0] => 0,
            None if clip && v.is_finite() => masses.len() - 1,
            None => return Err(IngestError::SampleOutOfRange(v.as_f64())),
        };
        masses[k] += w;
    }
    Ok(masses)
}

/// Coarsens weighted samples (e.g. survey answers) into a distribution on
/// the bin midpoints.
pub fn coarsen<T: Scalar>(
    assumption: Assumption,
    samples: &[(T, T)],
    edges: &[T],
    clip: bool,
) -> Result<AssumptionDistribution<T>, IngestError> {
    if samples.is_empty() {
        return Err(IngestError::NoSamples);
    }
    let masses = weighted_histogram(samples, edges, clip)?;
    if !(masses.iter().copied().sum::<T>() > T::zero()) {
        return Err(IngestError::ZeroTotalWeight);
    }
    let half = T::lit(0.5);
    let mids = edges.windows(2).map(|w| (w[0] + w[1]) * half).collect();
    Ok(AssumptionDistribution::from_masses(
        assumption,
        mids,
        masses,
        "coarsened",
    )?)
}
