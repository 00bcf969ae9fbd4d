use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::linalg::{column_rank, Matrix};
use crate::scalar::Scalar;
use crate::types::{Assumption, EstimateRecord, ImpactKind, INTERCEPT};

/// A regressor that can be read off an [`EstimateRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Prtp,
    Emuc,
    Impact,
    GrowthImpact,
    /// Publication year, used as the raw calendar year.
    Year,
    LevelDummy,
    GrowthDummy,
}

impl Covariate {
    pub const ALL: [Covariate; 7] = [
        Covariate::Prtp,
        Covariate::Emuc,
        Covariate::Impact,
        Covariate::GrowthImpact,
        Covariate::Year,
        Covariate::LevelDummy,
        Covariate::GrowthDummy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::Prtp => "prtp",
            Covariate::Emuc => "emuc",
            Covariate::Impact => "impact",
            Covariate::GrowthImpact => "growth_impact",
            Covariate::Year => "year",
            Covariate::LevelDummy => "level_dummy",
            Covariate::GrowthDummy => "growth_dummy",
        }
    }

    pub fn value<T: Scalar>(self, r: &EstimateRecord<T>) -> Option<T> {
        let dummy = |b: bool| Some(if b { T::one() } else { T::zero() });
        match self {
            Covariate::Prtp => r.prtp,
            Covariate::Emuc => r.emuc,
            Covariate::Impact => r.impact,
            Covariate::GrowthImpact => r.growth_impact,
            Covariate::Year => Some(T::lit(r.year as f64)),
            Covariate::LevelDummy => dummy(r.impact_kind == ImpactKind::Level),
            Covariate::GrowthDummy => dummy(r.impact_kind == ImpactKind::Growth),
        }
    }
}

impl From<Assumption> for Covariate {
    fn from(a: Assumption) -> Self {
        match a {
            Assumption::Prtp => Covariate::Prtp,
            Assumption::Emuc => Covariate::Emuc,
            Assumption::Impact => Covariate::Impact,
            Assumption::GrowthImpact => Covariate::GrowthImpact,
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Covariate {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Covariate::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| FitError::InvalidDesign(format!("unknown covariate {s:?}")))
    }
}

/// The standard percentile grid 0.05, 0.10, …, 0.95.
pub fn default_tau_grid<T: Scalar>() -> Vec<T> {
    (1..=19).map(|k| T::lit(k as f64 / 20.0)).collect()
}

/// Regression design: covariates (an intercept is always appended last),
/// optional left-censoring bound on the response, and the percentile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DesignSpec<T> {
    pub covariates: Vec<Covariate>,
    #[serde(default)]
    pub censor_bound: Option<T>,
    pub tau_grid: Vec<T>,
}

impl<T: Scalar> DesignSpec<T> {
    pub fn new(covariates: Vec<Covariate>) -> Self {
        Self {
            covariates,
            censor_bound: None,
            tau_grid: default_tau_grid(),
        }
    }

    pub fn with_censor_bound(mut self, bound: T) -> Self {
        self.censor_bound = Some(bound);
        self
    }

    pub fn with_tau_grid(mut self, grid: Vec<T>) -> Self {
        self.tau_grid = grid;
        self
    }

    pub fn n_params(&self) -> usize {
        self.covariates.len() + 1
    }

    /// Covariate names followed by `"intercept"`.
    pub fn coefficient_names(&self) -> Vec<String> {
        self.covariates.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn validate(&self) -> Result<(), FitError> {
        for (i, c) in self.covariates.iter().enumerate() {
            if self.covariates[..i].contains(c) {
                return Err(FitError::InvalidDesign(format!("duplicate covariate {c}")));
            }
        }
        for &t in &self.tau_grid {
            check_tau(t)?;
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FitError::InvalidDesign("tau grid must be strictly increasing".into()));
        }
        if let Some(c) = self.censor_bound {
            if !c.is_finite() {
                return Err(FitError::InvalidDesign("censor bound must be finite".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_tau<T: Scalar>(tau: T) -> Result<(), FitError> {
    if tau > T::zero() && tau < T::one() {
        Ok(())
    } else {
        Err(FitError::InvalidTau(tau.as_f64()))
    }
}

/// Numeric design built from records: rows with all covariates present and
/// positive weight.
#[derive(Debug, Clone)]
pub struct Design<T> {
    /// `n × p`, intercept column last.
    pub x: Matrix<T>,
    pub y: Vec<T>,
    pub w: Vec<T>,
    /// Cluster (paper) index per row, in `0..n_clusters`.
    pub clusters: Vec<usize>,
    pub n_clusters: usize,
    pub n_dropped: usize,
    pub names: Vec<String>,
}

impl<T: Scalar> Design<T> {
    pub fn build(records: &[EstimateRecord<T>], spec: &DesignSpec<T>) -> Result<Self, FitError> {
        spec.validate()?;
        let p = spec.n_params();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut w = Vec::new();
        let mut clusters = Vec::new();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut n_dropped = 0;
        for (i, r) in records.iter().enumerate() {
            if r.is_excluded() {
                n_dropped += 1;
                continue;
            }
            let vals: Option<Vec<T>> = spec.covariates.iter().map(|c| c.value(r)).collect();
            let Some(mut row) = vals else {
                n_dropped += 1;
                continue;
            };
            row.push(T::one());
            rows.push(row);
            y.push(r.scc);
            w.push(r.weight);
            // records without a paper id form singleton clusters
            let next = ids.len();
            let cluster = if r.paper_id.is_empty() {
                usize::MAX - i
            } else {
                *ids.entry(r.paper_id.as_str()).or_insert(next)
            };
            clusters.push(cluster);
        }
        // compact cluster ids to 0..G in order of first appearance
        let mut remap: HashMap<usize, usize> = HashMap::new();
        for c in clusters.iter_mut() {
            let next = remap.len();
            *c = *remap.entry(*c).or_insert(next);
        }
        let n = y.len();
        if n <= p {
            return Err(FitError::InsufficientObservations { n_obs: n, n_params: p });
        }
        let mut names = spec.coefficient_names();
        names.push(INTERCEPT.to_string());
        Ok(Self {
            x: Matrix::from_rows(&rows),
            y,
            w,
            n_clusters: remap.len(),
            clusters,
            n_dropped,
            names,
        })
    }

    pub fn from_parts(x: Matrix<T>, y: Vec<T>, w: Vec<T>, names: Vec<String>) -> Self {
        let n = y.len();
        assert_eq!(x.rows(), n);
        assert_eq!(w.len(), n);
        assert_eq!(names.len(), x.cols());
        Self {
            x,
            y,
            w,
            clusters: (0..n).collect(),
            n_clusters: n,
            n_dropped: 0,
            names,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_params(&self) -> usize {
        self.x.cols()
    }

    /// Covariate names without the trailing intercept.
    pub fn covariate_names(&self) -> Vec<String> {
        self.names[..self.names.len() - 1].to_vec()
    }

    pub fn is_intercept_only(&self) -> bool {
        self.n_params() == 1
    }

    /// Rows `idx` (with repetition) as a new design; each pick keeps its cluster.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let rows: Vec<Vec<T>> = idx.iter().map(|&i| self.x.row(i).to_vec()).collect();
        Self {
            x: if rows.is_empty() {
                Matrix::zeros(0, self.n_params())
            } else {
                Matrix::from_rows(&rows)
            },
            y: idx.iter().map(|&i| self.y[i]).collect(),
            w: idx.iter().map(|&i| self.w[i]).collect(),
            clusters: idx.iter().map(|&i| self.clusters[i]).collect(),
            n_clusters: self.n_clusters,
            n_dropped: self.n_dropped,
            names: self.names.clone(),
        }
    }

    pub fn check_size(&self) -> Result<(), FitError> {
        if self.n_obs() <= self.n_params() {
            return Err(FitError::InsufficientObservations {
                n_obs: self.n_obs(),
                n_params: self.n_params(),
            });
        }
        Ok(())
    }

    pub fn check_rank(&self) -> Result<(), FitError> {
        self.check_size()?;
        let tol = T::epsilon().sqrt() * T::lit(0.01);
        let (rank, dependent) = column_rank(&self.x, tol);
        if rank < self.n_params() {
            return Err(FitError::RankDeficient {
                rank,
                n_params: self.n_params(),
                suspects: dependent.into_iter().map(|j| self.names[j].clone()).collect(),
            });
        }
        Ok(())
    }

    pub fn residuals(&self, beta: &[T]) -> Vec<T> {
        self.x
            .mul_vec(beta)
            .into_iter()
            .zip(&self.y)
            .map(|(fit, &y)| y - fit)
            .collect()
    }
}
