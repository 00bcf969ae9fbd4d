//! Weighted quantile regression by exact linear programming, with optional
//! Powell left-censoring.

use crate::error::FitError;
use crate::linalg::Qr;
use crate::regression::design::{check_tau, Design, DesignSpec};
use crate::regression::pinball::{check_loss, pinball_loss};
use crate::regression::simplex::{BoundedLp, LpError};
use crate::scalar::Scalar;
use crate::stats::weighted_quantile;
use crate::types::{EstimateRecord, FitTarget, QuantileFit, SeMethod};

/// Maximum active-set refits of the censored estimator.
pub const POWELL_MAX_ITER: usize = 50;

/// Fits the τ-quantile regression of `scc` on the covariates of `spec`.
///
/// Records with zero weight or a missing covariate are dropped and counted in
/// `n_dropped`. If `spec.censor_bound` is set the Powell objective
/// `Σ w_i ρ_τ(y_i − max(c, x_iᵀβ))` is minimized instead. Standard errors are
/// left at zero; see [`bootstrap_se`](crate::regression::bootstrap_se).
pub fn fit_quantile<T: Scalar>(
    records: &[EstimateRecord<T>],
    spec: &DesignSpec<T>,
    tau: T,
) -> Result<QuantileFit<T>, FitError> {
    check_tau(tau)?;
    let design = Design::build(records, spec)?;
    fit_quantile_design(&design, tau, spec.censor_bound)
}

pub fn fit_quantile_design<T: Scalar>(
    design: &Design<T>,
    tau: T,
    censor_bound: Option<T>,
) -> Result<QuantileFit<T>, FitError> {
    check_tau(tau)?;
    let (beta, loss) = match censor_bound {
        None => {
            let beta = solve_design(design, tau, None)?;
            let loss = pinball_loss(&design.residuals(&beta), tau, &design.w);
            (beta, loss)
        }
        Some(c) => solve_censored(design, tau, c, None)?,
    };
    let p = beta.len();
    Ok(QuantileFit {
        tau: FitTarget::Quantile(tau),
        covariates: design.covariate_names(),
        beta,
        se: vec![T::zero(); p],
        n_obs: design.n_obs(),
        n_dropped: design.n_dropped,
        loss,
        se_method: SeMethod::None,
        r_squared: None,
        censor_bound,
    })
}

/// Coefficients only; used by the bootstrap with the point estimate as `start`.
pub(crate) fn estimate<T: Scalar>(
    design: &Design<T>,
    tau: T,
    censor_bound: Option<T>,
    start: Option<&[T]>,
) -> Result<Vec<T>, FitError> {
    match censor_bound {
        None => solve_design(design, tau, start),
        Some(c) => solve_censored(design, tau, c, start).map(|(b, _)| b),
    }
}

/// Minimizes the uncensored weighted pinball loss.
///
/// Intercept-only designs return the weighted τ-quantile of `y`, which is the
/// lower endpoint of the optimal interval when the loss is flat (see
/// [`weighted_quantile`]). Larger designs solve the dual LP
///
/// ```text
///     max yᵀa  s.t.  Xᵀa = (1 − τ)Xᵀw,  0 ≤ a_i ≤ w_i
/// ```
///
/// whose multipliers are the coefficients; the solution is a basic one, so
/// it interpolates at least `p` observations.
pub(crate) fn solve_design<T: Scalar>(design: &Design<T>, tau: T, start: Option<&[T]>) -> Result<Vec<T>, FitError> {
    design.check_rank()?;
    if design.is_intercept_only() {
        let q = weighted_quantile(&design.y, &design.w, tau)
            .ok_or(FitError::InsufficientObservations { n_obs: 0, n_params: 1 })?;
        return Ok(vec![q]);
    }
    let rhs: Vec<T> = design
        .x
        .tr_mul_vec(&design.w)
        .into_iter()
        .map(|v| v * (T::one() - tau))
        .collect();
    let guess = match start {
        Some(b) => Some(b.to_vec()),
        None => least_squares_guess(design),
    };
    let at_upper: Option<Vec<bool>> = guess.map(|b| design.residuals(&b).into_iter().map(|r| r > T::zero()).collect());
    let lp = BoundedLp {
        columns: &design.x,
        cost: &design.y,
        upper: &design.w,
        rhs,
    };
    let sol = lp
        .solve(at_upper.as_deref())
        .map_err(|e: LpError| FitError::SolverFailure(e.to_string()))?;
    if sol.duals.iter().any(|b| !b.is_finite()) {
        return Err(FitError::SolverFailure("non-finite coefficients".into()));
    }
    Ok(sol.duals)
}

fn least_squares_guess<T: Scalar>(design: &Design<T>) -> Option<Vec<T>> {
    let mut xw = design.x.clone();
    let mut yw = design.y.clone();
    for i in 0..design.n_obs() {
        let s = design.w[i].sqrt();
        for j in 0..design.n_params() {
            xw[(i, j)] *= s;
        }
        yw[i] *= s;
    }
    let qr = Qr::new(xw);
    qr.is_full_rank(T::epsilon().sqrt())
        .then(|| qr.solve(&yw))
        .filter(|b| b.iter().all(|v| v.is_finite()))
}

/// Powell objective `Σ w_i ρ_τ(y_i − max(c, x_iᵀβ))`.
pub fn censored_loss<T: Scalar>(design: &Design<T>, beta: &[T], tau: T, bound: T) -> T {
    design
        .x
        .mul_vec(beta)
        .into_iter()
        .zip(design.y.iter().zip(&design.w))
        .map(|(fit, (&y, &w))| w * check_loss(y - fit.max(bound), tau))
        .sum()
}

fn active_set<T: Scalar>(design: &Design<T>, beta: &[T], bound: T) -> Vec<usize> {
    design
        .x
        .mul_vec(beta)
        .into_iter()
        .enumerate()
        .filter(|&(_, fit)| fit > bound)
        .map(|(i, _)| i)
        .collect()
}

/// Iterated linear programming for the censored estimator: refit on the
/// observations whose fitted value lies above the bound until that set stops
/// changing. Returns the visited iterate with the lowest Powell loss.
fn solve_censored<T: Scalar>(
    design: &Design<T>,
    tau: T,
    bound: T,
    start: Option<&[T]>,
) -> Result<(Vec<T>, T), FitError> {
    let mut beta = solve_design(design, tau, start)?;
    let mut best_loss = censored_loss(design, &beta, tau, bound);
    let mut best = beta.clone();
    let mut active = active_set(design, &beta, bound);
    for _ in 0..POWELL_MAX_ITER {
        if active.len() == design.n_obs() || active.len() <= design.n_params() {
            break;
        }
        let sub = design.subset(&active);
        let next = match solve_design(&sub, tau, Some(&beta)) {
            Ok(b) => b,
            Err(FitError::RankDeficient { .. }) | Err(FitError::InsufficientObservations { .. }) => break,
            Err(e) => return Err(e),
        };
        let loss = censored_loss(design, &next, tau, bound);
        if loss < best_loss {
            best_loss = loss;
            best = next.clone();
        }
        let next_active = active_set(design, &next, bound);
        beta = next;
        if next_active == active {
            break;
        }
        active = next_active;
    }
    Ok((best, best_loss))
}
