//! Weighted least squares for the mean column and the level/growth analysis.

use crate::error::FitError;
use crate::linalg::Qr;
use crate::regression::design::{Design, DesignSpec};
use crate::scalar::Scalar;
use crate::types::{EstimateRecord, FitTarget, QuantileFit, SeMethod};

/// `β = argmin Σ w_i (y_i − x_iᵀβ)²` with classical standard errors
/// `σ̂²(XᵀWX)⁻¹`, `σ̂² = Σ w_i e_i² / (n − p)`. The returned `loss` is the
/// weighted residual sum of squares.
pub fn fit_wls<T: Scalar>(records: &[EstimateRecord<T>], spec: &DesignSpec<T>) -> Result<QuantileFit<T>, FitError> {
    let design = Design::build(records, spec)?;
    fit_wls_design(&design)
}

pub fn fit_wls_design<T: Scalar>(design: &Design<T>) -> Result<QuantileFit<T>, FitError> {
    design.check_size()?;
    let (n, p) = (design.n_obs(), design.n_params());
    let mut xw = design.x.clone();
    let mut yw = design.y.clone();
    for i in 0..n {
        let s = design.w[i].sqrt();
        for j in 0..p {
            xw[(i, j)] *= s;
        }
        yw[i] *= s;
    }
    let qr = Qr::new(xw);
    if !qr.is_full_rank(T::epsilon().sqrt() * T::lit(0.01)) {
        return Err(FitError::SingularNormalEquations);
    }
    let beta = qr.solve(&yw);
    let resid = design.residuals(&beta);
    let ssr: T = resid.iter().zip(&design.w).map(|(&e, &w)| w * e * e).sum();
    let wsum: T = design.w.iter().copied().sum();
    let ybar = design.y.iter().zip(&design.w).map(|(&y, &w)| w * y).sum::<T>() / wsum;
    let sst: T = design
        .y
        .iter()
        .zip(&design.w)
        .map(|(&y, &w)| w * (y - ybar) * (y - ybar))
        .sum();
    let r2 = if sst > T::zero() {
        (T::one() - ssr / sst).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let sigma2 = ssr / T::from_usize_lossy(n - p);
    let cov = qr.gram_inverse();
    let se = (0..p).map(|j| (sigma2 * cov[(j, j)]).max(T::zero()).sqrt()).collect();
    Ok(QuantileFit {
        tau: FitTarget::MEAN,
        covariates: design.covariate_names(),
        beta,
        se,
        n_obs: n,
        n_dropped: design.n_dropped,
        loss: ssr,
        se_method: SeMethod::Classical,
        r_squared: Some(r2),
        censor_bound: None,
    })
}
