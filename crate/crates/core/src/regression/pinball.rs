use crate::scalar::Scalar;

/// Check function `ρ_τ(u) = u·(τ − 1[u < 0])`.
#[inline]
pub fn check_loss<T: Scalar>(u: T, tau: T) -> T {
    if u < T::zero() {
        u * (tau - T::one())
    } else {
        u * tau
    }
}

/// Weighted pinball loss `Σ w_i ρ_τ(r_i)`.
pub fn pinball_loss<T: Scalar>(residuals: &[T], tau: T, weights: &[T]) -> T {
    assert_eq!(residuals.len(), weights.len(), "residuals and weights differ in length");
    residuals
        .iter()
        .zip(weights)
        .map(|(&r, &w)| w * check_loss(r, tau))
        .sum()
}
