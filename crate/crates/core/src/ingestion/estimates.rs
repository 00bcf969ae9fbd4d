use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emulator::{empirical_quantiles, ObservedQuantile};
use crate::error::{IngestError, RowError};
use crate::regression::default_tau_grid;
use crate::scalar::Scalar;
use crate::types::{validate_record, Assumption, EstimateRecord};

pub const ESTIMATE_COLUMNS: [&str; 9] = [
    "scc",
    "year",
    "prtp",
    "emuc",
    "impact",
    "growth_impact",
    "impact_kind",
    "weight",
    "paper_id",
];

pub const MANDATORY_COLUMNS: [&str; 3] = ["scc", "year", "weight"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCoverage {
    pub assumption: Assumption,
    /// Records (of any weight) that report this assumption.
    pub n_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DatasetSummary<T> {
    pub n_records: usize,
    /// Zero-weight records, kept but never fitted.
    pub n_excluded: usize,
    /// Distinct `paper_id`s; each record without one counts as its own paper.
    pub n_papers: usize,
    /// Weighted quantiles of `scc` at the default percentile grid.
    pub weighted_quantiles: Vec<ObservedQuantile<T>>,
    pub coverage: Vec<AssumptionCoverage>,
}

pub fn summarize<T: Scalar>(records: &[EstimateRecord<T>]) -> DatasetSummary<T> {
    let mut ids = HashSet::new();
    let mut anonymous = 0;
    for r in records {
        if r.paper_id.is_empty() {
            anonymous += 1;
        } else {
            ids.insert(r.paper_id.as_str());
        }
    }
    let grid: Vec<T> = default_tau_grid();
    DatasetSummary {
        n_records: records.len(),
        n_excluded: records.iter().filter(|r| r.is_excluded()).count(),
        n_papers: ids.len() + anonymous,
        weighted_quantiles: empirical_quantiles(records, &grid).unwrap_or_default(),
        coverage: Assumption::ALL
            .iter()
            .map(|&a| AssumptionCoverage {
                assumption: a,
                n_records: records.iter().filter(|r| r.assumption(a).is_some()).count(),
            })
            .collect(),
    }
}

/// Loads an estimates file (comma-delimited, lowercase header).
///
/// Every row is validated and all failures are returned together, each with
/// its line number in the file (the header is line 1).
pub fn load_estimates<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(Vec<EstimateRecord<T>>, DatasetSummary<T>), IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_estimates(file)
}

pub fn read_estimates<T: Scalar, R: Read>(
    reader: R,
) -> Result<(Vec<EstimateRecord<T>>, DatasetSummary<T>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();
    let missing: Vec<String> = MANDATORY_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::MissingColumns(missing));
    }

    let mut records = Vec::new();
    let mut bad = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| IngestError::Csv(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let fields = headers
            .iter()
            .zip(row.iter())
            .filter(|(h, _)| ESTIMATE_COLUMNS.contains(h));
        match validate_record::<T, _, _>(fields) {
            Ok(r) => records.push(r),
            Err(errors) => bad.push(RowError { row: line, errors }),
        }
    }
    if !bad.is_empty() {
        return Err(IngestError::InvalidRows(bad));
    }
    if records.is_empty() {
        return Err(IngestError::NoRecords);
    }
    let summary = summarize(&records);
    Ok((records, summary))
}
