use crate::emulator::quantiles::ObservedQuantile;
use crate::emulator::shift::{disagreement_loadings, emulate_shift, shift_variance};
use crate::error::{EmulationError, FitError};
use crate::regression::{bootstrap_draws, estimate, Design, DesignSpec};
use crate::scalar::Scalar;
use crate::stats::{normal_critical_value, sample_std};
use crate::types::{Assumption, AssumptionDistribution, EmulationResult, EstimateRecord, QuantileFit};

/// Replace the literature's frequencies `from` (F) by `to` (P) for one assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct Alteration<T> {
    pub assumption: Assumption,
    pub from: AssumptionDistribution<T>,
    pub to: AssumptionDistribution<T>,
}

impl<T: Scalar> Alteration<T> {
    pub fn new(assumption: Assumption, from: AssumptionDistribution<T>, to: AssumptionDistribution<T>) -> Self {
        Self { assumption, from, to }
    }
}

/// How per-assumption shift variances combine when several assumptions are
/// altered at once.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum VarianceModel<T> {
    /// Sum of the per-assumption variances.
    #[default]
    Independent,
    /// `Σ_ab ρ_ab σ_a σ_b` with a user-supplied correlation matrix ordered
    /// like the alterations.
    Correlated(Vec<Vec<T>>),
    /// Externally computed standard errors, one per observed tau (e.g. from
    /// [`joint_bootstrap_se`]).
    Supplied(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationOptions<T> {
    pub ci_level: f64,
    pub variance: VarianceModel<T>,
    /// Sort the emulated quantiles so the emulated CDF is monotone.
    pub rearrange: bool,
}

impl<T> Default for EmulationOptions<T> {
    fn default() -> Self {
        Self {
            ci_level: 0.95,
            variance: VarianceModel::Independent,
            rearrange: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationReport<T> {
    pub results: Vec<EmulationResult<T>>,
    /// Taus at which the emulated quantile falls below the previous one
    /// (before any rearrangement).
    pub crossings: Vec<T>,
}

fn find_fit<T: Scalar>(fits: &[QuantileFit<T>], tau: T) -> Option<&QuantileFit<T>> {
    fits.iter()
        .find(|f| f.tau.tau().is_some_and(|t| (t - tau).abs() <= T::lit(1e-9)))
}

fn check_correlation<T: Scalar>(rho: &[Vec<T>], k: usize) -> Result<(), EmulationError> {
    let bad = |m: String| Err(EmulationError::InvalidCorrelation(m));
    if rho.len() != k || rho.iter().any(|r| r.len() != k) {
        return bad(format!("expected a {k}×{k} matrix"));
    }
    let tol = T::lit(1e-9);
    for i in 0..k {
        if (rho[i][i] - T::one()).abs() > tol {
            return bad(format!("diagonal entry {i} is not 1"));
        }
        for j in 0..k {
            if (rho[i][j] - rho[j][i]).abs() > tol {
                return bad("matrix is not symmetric".into());
            }
            if rho[i][j].abs() > T::one() + tol {
                return bad(format!("entry ({i}, {j}) outside [-1, 1]"));
            }
        }
    }
    Ok(())
}

/// Emulated quantile at every observed tau.
///
/// The total shift is the sum of the per-assumption shifts; its standard
/// error follows `options.variance`. With no alterations the emulated CDF is
/// the observed one with zero standard error.
pub fn emulate_cdf<T: Scalar>(
    fits: &[QuantileFit<T>],
    observed: &[ObservedQuantile<T>],
    alterations: &[Alteration<T>],
    options: &EmulationOptions<T>,
) -> Result<EmulationReport<T>, EmulationError> {
    if !(options.ci_level > 0.0 && options.ci_level < 1.0) {
        return Err(EmulationError::InvalidConfidenceLevel(options.ci_level));
    }
    let z = T::lit(normal_critical_value(options.ci_level));
    match &options.variance {
        VarianceModel::Correlated(rho) => check_correlation(rho, alterations.len())?,
        VarianceModel::Supplied(se) if se.len() != observed.len() => {
            return Err(EmulationError::GridMismatch);
        }
        _ => {}
    }

    let mut results = Vec::with_capacity(observed.len());
    for (i, obs) in observed.iter().enumerate() {
        let mut shift = T::zero();
        let mut sds = Vec::with_capacity(alterations.len());
        if !alterations.is_empty() {
            let fit = find_fit(fits, obs.tau).ok_or(EmulationError::MissingFit(obs.tau.as_f64()))?;
            for alt in alterations {
                shift += emulate_shift(fit, alt.assumption, &alt.from, &alt.to)?;
                sds.push(shift_variance(fit, alt.assumption, &alt.from, &alt.to)?.sqrt());
            }
        }
        let se = match &options.variance {
            VarianceModel::Independent => sds.iter().map(|&s| s * s).sum::<T>().sqrt(),
            VarianceModel::Correlated(rho) => {
                let mut v = T::zero();
                for a in 0..sds.len() {
                    for b in 0..sds.len() {
                        v += rho[a][b] * sds[a] * sds[b];
                    }
                }
                v.max(T::zero()).sqrt()
            }
            VarianceModel::Supplied(se) => se[i],
        };
        results.push(EmulationResult::new(obs.tau, obs.scc, shift, se, z));
    }

    let crossings: Vec<T> = results
        .windows(2)
        .filter(|w| w[1].scc_emulated < w[0].scc_emulated)
        .map(|w| w[1].tau)
        .collect();

    if options.rearrange && !crossings.is_empty() {
        let mut sorted: Vec<T> = results.iter().map(|r| r.scc_emulated).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite quantiles"));
        for (r, em) in results.iter_mut().zip(sorted) {
            *r = EmulationResult::new(r.tau, r.scc_observed, em - r.scc_observed, r.se, z);
        }
    }
    Ok(EmulationReport { results, crossings })
}

/// Joint-shift standard error per tau from the cluster bootstrap: each
/// replicate refits the quantile regression and evaluates the summed shift
/// of all alterations, so correlations between the coefficients are carried
/// through. Note this uses the squared total loading per assumption rather
/// than the per-support-point sum of squares of [`shift_variance`].
pub fn joint_bootstrap_se<T: Scalar>(
    records: &[EstimateRecord<T>],
    spec: &DesignSpec<T>,
    taus: &[T],
    alterations: &[Alteration<T>],
    n_boot: usize,
    seed: u64,
) -> Result<Vec<T>, EmulationError> {
    let design = Design::build(records, spec)?;
    let names = design.covariate_names();
    let mut loads = Vec::with_capacity(alterations.len());
    for alt in alterations {
        let idx = names
            .iter()
            .position(|n| n == alt.assumption.as_str())
            .ok_or_else(|| EmulationError::MissingCoefficient(alt.assumption.as_str().to_string()))?;
        let total: T = disagreement_loadings(alt.assumption, &alt.from, &alt.to)?
            .into_iter()
            .sum();
        loads.push((idx, total));
    }
    taus.iter()
        .map(|&tau| {
            let point = estimate(&design, tau, spec.censor_bound, None)?;
            let draws = bootstrap_draws(&design, n_boot, seed, |d| {
                estimate(d, tau, spec.censor_bound, Some(&point))
            })?;
            let shifts: Vec<T> = draws
                .iter()
                .map(|b| loads.iter().map(|&(j, g)| g * b[j]).sum())
                .collect();
            Ok::<_, FitError>(sample_std(&shifts))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(EmulationError::from)
}
