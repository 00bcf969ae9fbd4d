use crate::error::EmulationError;
use crate::scalar::Scalar;
use crate::types::{Assumption, AssumptionDistribution, QuantileFit};

fn same_support<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            let scale = T::one().max(x.abs()).max(y.abs());
            (x - y).abs() <= T::lit(1e-12) * scale
        })
}

fn check_pair<T: Scalar>(
    assumption: Assumption,
    from: &AssumptionDistribution<T>,
    to: &AssumptionDistribution<T>,
) -> Result<(), EmulationError> {
    for d in [from, to] {
        if d.assumption() != assumption {
            return Err(EmulationError::AssumptionMismatch {
                expected: assumption,
                found: d.assumption(),
            });
        }
    }
    if !same_support(from.support(), to.support()) {
        return Err(EmulationError::SupportMismatch {
            assumption,
            from: from.support().iter().map(|v| v.as_f64()).collect(),
            to: to.support().iter().map(|v| v.as_f64()).collect(),
        });
    }
    Ok(())
}

/// Per-support-point loadings `(F_s − P_s)·X_s`; the shift is their sum
/// times the coefficient.
pub fn disagreement_loadings<T: Scalar>(
    assumption: Assumption,
    from: &AssumptionDistribution<T>,
    to: &AssumptionDistribution<T>,
) -> Result<Vec<T>, EmulationError> {
    check_pair(assumption, from, to)?;
    Ok(from
        .probability()
        .iter()
        .zip(to.probability())
        .zip(from.support())
        .map(|((&f, &p), &x)| (f - p) * x)
        .collect())
}

fn coefficient<T: Scalar>(fit: &QuantileFit<T>, assumption: Assumption) -> Result<(T, T), EmulationError> {
    fit.coefficient(assumption.as_str())
        .ok_or_else(|| EmulationError::MissingCoefficient(assumption.as_str().to_string()))
}

/// `Σ_s (F_s − P_s)·X_s·β`, with `F` the literature's frequencies (`from`)
/// and `P` the alternative view (`to`).
pub fn emulate_shift<T: Scalar>(
    fit: &QuantileFit<T>,
    assumption: Assumption,
    from: &AssumptionDistribution<T>,
    to: &AssumptionDistribution<T>,
) -> Result<T, EmulationError> {
    let loadings = disagreement_loadings(assumption, from, to)?;
    let (beta, _) = coefficient(fit, assumption)?;
    Ok(loadings.into_iter().sum::<T>() * beta)
}

/// `σ² · Σ_s (F_s − P_s)²·X_s²`, σ being the standard error of the
/// assumption's coefficient. Each support term carries its own independent
/// coefficient error, hence the sum of squares rather than the square of the sum.
pub fn shift_variance<T: Scalar>(
    fit: &QuantileFit<T>,
    assumption: Assumption,
    from: &AssumptionDistribution<T>,
    to: &AssumptionDistribution<T>,
) -> Result<T, EmulationError> {
    let loadings = disagreement_loadings(assumption, from, to)?;
    let (_, se) = coefficient(fit, assumption)?;
    Ok(se * se * loadings.into_iter().map(|l| l * l).sum::<T>())
}
