use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emulator::ObservedQuantile;
use crate::error::IngestError;
use crate::regression::{BootstrapConfig, DesignSpec, GridFit};
use crate::scalar::Scalar;
use crate::types::{EmulationResult, QuantileFit};

pub const FIT_SCHEMA: &str = "metaemu.fit.v1";
pub const EMULATION_SCHEMA: &str = "metaemu.emulation.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitFailure<T> {
    /// `None` for the mean fit.
    pub tau: Option<T>,
    pub error: String,
}

/// Everything the emulator needs from an offline fit: the coefficient grid
/// and the observed quantiles of the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitArtifact<T> {
    pub schema: String,
    pub covariates: Vec<String>,
    #[serde(default)]
    pub censor_bound: Option<T>,
    pub tau_grid: Vec<T>,
    pub observed: Vec<ObservedQuantile<T>>,
    /// Quantile fits in grid order, then the mean fit if present.
    pub fits: Vec<QuantileFit<T>>,
    #[serde(default)]
    pub failures: Vec<FitFailure<T>>,
    #[serde(default)]
    pub bootstrap: Option<BootstrapConfig>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn check_schema(found: &str, expected: &str) -> Result<(), IngestError> {
    if found == expected {
        Ok(())
    } else {
        Err(IngestError::Schema(format!("expected {expected}, found {found}")))
    }
}

impl<T: Scalar> FitArtifact<T> {
    pub fn new(
        spec: &DesignSpec<T>,
        grid: &GridFit<T>,
        observed: Vec<ObservedQuantile<T>>,
        bootstrap: Option<BootstrapConfig>,
    ) -> Self {
        Self {
            schema: FIT_SCHEMA.to_string(),
            covariates: spec.coefficient_names(),
            censor_bound: spec.censor_bound,
            tau_grid: spec.tau_grid.clone(),
            observed,
            fits: grid.successful(),
            failures: grid
                .failures()
                .into_iter()
                .map(|(tau, e)| FitFailure {
                    tau,
                    error: e.to_string(),
                })
                .collect(),
            bootstrap,
        }
    }

    pub fn quantile_fits(&self) -> Vec<QuantileFit<T>> {
        self.fits.iter().filter(|f| !f.tau.is_mean()).cloned().collect()
    }

    pub fn mean_fit(&self) -> Option<&QuantileFit<T>> {
        self.fits.iter().find(|f| f.tau.is_mean())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit artifact serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let a: Self = serde_json::from_str(text).map_err(|e| IngestError::Json(e.to_string()))?;
        check_schema(&a.schema, FIT_SCHEMA)?;
        Ok(a)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }
}

/// A labelled emulation run, as written by `emulate` and read by `combine`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmulationFile<T> {
    pub schema: String,
    pub label: String,
    pub results: Vec<EmulationResult<T>>,
    #[serde(default)]
    pub crossings: Vec<T>,
}

impl<T: Scalar> EmulationFile<T> {
    pub fn new(label: impl Into<String>, results: Vec<EmulationResult<T>>, crossings: Vec<T>) -> Self {
        Self {
            schema: EMULATION_SCHEMA.to_string(),
            label: label.into(),
            results,
            crossings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("emulation serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let f: Self = serde_json::from_str(text).map_err(|e| IngestError::Json(e.to_string()))?;
        check_schema(&f.schema, EMULATION_SCHEMA)?;
        Ok(f)
    }

    /// Reads the JSON form or, for a `.csv` path, the CSV export (labelled
    /// with the file stem).
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            return Ok(Self::new(label, read_emulation_csv(text.as_bytes())?, Vec::new()));
        }
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }
}

fn csv_err(e: csv::Error) -> IngestError {
    IngestError::Csv(e.to_string())
}

/// Long format: one row per (tau, coefficient). The mean fit has tau `mean`.
pub fn write_fits_csv<T: Scalar, W: Write>(writer: W, fits: &[QuantileFit<T>]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau", "covariate", "beta", "se", "n_obs", "loss"])
        .map_err(csv_err)?;
    for f in fits {
        let names = f.covariates.iter().map(String::as_str).chain(["intercept"]);
        for (name, (b, s)) in names.zip(f.beta.iter().zip(&f.se)) {
            w.write_record([
                f.tau.to_string(),
                name.to_string(),
                b.to_string(),
                s.to_string(),
                f.n_obs.to_string(),
                f.loss.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| IngestError::Csv(e.to_string()))
}

pub fn write_emulation_csv<T: Scalar, W: Write>(writer: W, results: &[EmulationResult<T>]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in results {
        w.serialize(r).map_err(csv_err)?;
    }
    if results.is_empty() {
        w.write_record([
            "tau",
            "scc_observed",
            "scc_emulated",
            "shift",
            "se",
            "ci_low",
            "ci_high",
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| IngestError::Csv(e.to_string()))
}

pub fn read_emulation_csv<T: Scalar, R: Read>(reader: R) -> Result<Vec<EmulationResult<T>>, IngestError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
        .deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(csv_err)
}
