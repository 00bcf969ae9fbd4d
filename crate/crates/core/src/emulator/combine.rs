use crate::error::EmulationError;
use crate::scalar::Scalar;
use crate::types::{BiasInput, BiasSummary, EmulationResult};

/// Inverse-variance pooling: `σ_c⁻² = Σ σ_i⁻²`, `μ_c = σ_c² Σ μ_i σ_i⁻²`.
pub fn combine_biases<T: Scalar>(inputs: &[BiasInput<T>], tau: T) -> Result<BiasSummary<T>, EmulationError> {
    if inputs.is_empty() {
        return Err(EmulationError::EmptyInputs);
    }
    if let Some(bad) = inputs.iter().find(|i| !(i.sigma > T::zero() && i.sigma.is_finite())) {
        return Err(EmulationError::InvalidSigma {
            label: bad.label.clone(),
            sigma: bad.sigma.as_f64(),
        });
    }
    if let [only] = inputs {
        return Ok(BiasSummary {
            tau,
            mu_combined: only.mu,
            sigma_combined: only.sigma,
            inputs: inputs.to_vec(),
        });
    }
    let precision: T = inputs.iter().map(|i| (i.sigma * i.sigma).recip()).sum();
    let var = precision.recip();
    let mu = var * inputs.iter().map(|i| i.mu / (i.sigma * i.sigma)).sum::<T>();
    Ok(BiasSummary {
        tau,
        mu_combined: mu,
        sigma_combined: var.sqrt(),
        inputs: inputs.to_vec(),
    })
}

/// Pools several labelled emulation runs tau by tau, using each run's shift
/// and standard error. All runs must share the same tau grid.
pub fn combine_emulations<T: Scalar>(
    sources: &[(String, Vec<EmulationResult<T>>)],
) -> Result<Vec<BiasSummary<T>>, EmulationError> {
    let (_, first) = sources.first().ok_or(EmulationError::EmptyInputs)?;
    let tol = T::lit(1e-12);
    for (_, rows) in sources {
        if rows.len() != first.len() || rows.iter().zip(first).any(|(a, b)| (a.tau - b.tau).abs() > tol) {
            return Err(EmulationError::GridMismatch);
        }
    }
    (0..first.len())
        .map(|k| {
            let inputs: Vec<BiasInput<T>> = sources
                .iter()
                .map(|(label, rows)| BiasInput::new(label.clone(), rows[k].shift, rows[k].se))
                .collect();
            combine_biases(&inputs, first[k].tau)
        })
        .collect()
}
