use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use metaemu_core::ingestion::{empirical_frequency, load_estimates, parse_distribution, FitArtifact};
use metaemu_core::{Assumption, Distribution, IngestError, Record};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Paths the model is (re)loaded from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServiceConfig {
    pub fit: PathBuf,
    /// Directory of preset distributions: `*.json` objects, or `*.csv` files
    /// whose name starts with the assumption (`prtp_drupp.csv`).
    pub presets_dir: Option<PathBuf>,
    /// Estimates database used to derive the literature presets.
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    /// `assumption/name`, unique within the model.
    pub id: String,
    #[serde(flatten)]
    pub distribution: Distribution,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("fit artifact: {0}")]
    Fit(IngestError),
    #[error("preset {path}: {source}")]
    Preset {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error("cannot read preset directory {path}: {source}")]
    PresetDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("preset file name {0:?} does not start with an assumption name")]
    PresetName(String),
    #[error("duplicate preset id {0}")]
    DuplicatePreset(String),
    #[error("estimates: {0}")]
    Data(IngestError),
}

/// Immutable snapshot served to requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub artifact: FitArtifact<f64>,
    pub presets: Vec<Preset>,
}

impl Model {
    pub fn new(artifact: FitArtifact<f64>, presets: Vec<Preset>) -> Self {
        Self { artifact, presets }
    }

    pub fn load(config: &ServiceConfig) -> Result<Self, LoadError> {
        let artifact = FitArtifact::load(&config.fit).map_err(LoadError::Fit)?;
        let mut presets = match &config.presets_dir {
            Some(dir) => load_presets(dir)?,
            None => Vec::new(),
        };
        if let Some(data) = &config.data {
            let (records, _) = load_estimates::<f64>(data).map_err(LoadError::Data)?;
            let literature = literature_presets(&records, &presets);
            presets.extend(literature);
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = presets.iter().find(|p| !seen.insert(p.id.as_str())) {
            return Err(LoadError::DuplicatePreset(dup.id.clone()));
        }
        Ok(Self::new(artifact, presets))
    }
}

fn assumption_prefix(stem: &str) -> Option<Assumption> {
    // longest match first so that growth_impact wins over a shorter name
    let mut all = Assumption::ALL;
    all.sort_by_key(|a| std::cmp::Reverse(a.as_str().len()));
    all.into_iter().find(|a| {
        stem.strip_prefix(a.as_str())
            .is_some_and(|rest| rest.is_empty() || rest.starts_with(['_', '-', '.']))
    })
}

/// Reads every `*.json` and `*.csv` distribution in `dir`, in file-name order.
pub fn load_presets(dir: &Path) -> Result<Vec<Preset>, LoadError> {
    let entries = std::fs::read_dir(dir).map_err(|source| LoadError::PresetDir {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json" || e == "csv"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let is_csv = path.extension().is_some_and(|e| e == "csv");
            let hint = assumption_prefix(&stem);
            if is_csv && hint.is_none() {
                return Err(LoadError::PresetName(stem));
            }
            let wrap = |source| LoadError::Preset {
                path: path.clone(),
                source,
            };
            let text = std::fs::read_to_string(&path).map_err(|source| {
                wrap(IngestError::Io {
                    path: path.clone(),
                    source,
                })
            })?;
            let distribution =
                parse_distribution::<f64>(&text, if is_csv { hint } else { None }, &stem).map_err(wrap)?;
            let name = match hint {
                Some(a) if a == distribution.assumption() => {
                    stem[a.as_str().len()..].trim_start_matches(['_', '-', '.']).to_string()
                }
                _ => stem.clone(),
            };
            let name = if name.is_empty() { stem } else { name };
            Ok(Preset {
                id: format!("{}/{}", distribution.assumption(), name),
                distribution,
            })
        })
        .collect()
}

/// Support used for the literature's PRTP frequencies when no external
/// preset fixes one: the values at which published estimates bunch.
const PRTP_SUPPORT: [f64; 4] = [0.0, 1.0, 1.5, 3.0];

/// Observed frequencies in the estimates database, one preset per assumption,
/// on the support of the first external preset for that assumption (or the
/// PRTP bunching points). Assumptions without a support or without usable
/// records get no literature preset.
pub fn literature_presets(records: &[Record], external: &[Preset]) -> Vec<Preset> {
    Assumption::ALL
        .iter()
        .filter_map(|&a| {
            let support: Vec<f64> = match external.iter().find(|p| p.distribution.assumption() == a) {
                Some(p) => p.distribution.support().to_vec(),
                None if a == Assumption::Prtp => PRTP_SUPPORT.to_vec(),
                None => return None,
            };
            let distribution = empirical_frequency(records, a, &support).ok()?;
            Some(Preset {
                id: format!("{a}/literature"),
                distribution,
            })
        })
        .collect()
}

/// Shared service state. Readers take a cheap `Arc` snapshot; a reload
/// builds a new model off to the side and swaps it in whole.
#[derive(Debug, Default)]
pub struct AppState {
    config: ServiceConfig,
    model: RwLock<Option<Arc<Model>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config,
            model: RwLock::new(None),
        }
    }

    pub fn with_model(config: ServiceConfig, model: Model) -> Self {
        let state = Self::new(config);
        state.replace(model);
        state
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn model(&self) -> Option<Arc<Model>> {
        self.model.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, model: Model) -> Arc<Model> {
        let model = Arc::new(model);
        *self.model.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::clone(&model));
        model
    }

    /// Reloads from the configured paths. On failure the current model stays.
    pub fn reload(&self) -> Result<Arc<Model>, LoadError> {
        Model::load(&self.config).map(|m| self.replace(m))
    }
}
