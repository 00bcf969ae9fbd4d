//! Small statistical helpers shared across modules.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::scalar::Scalar;

/// Weighted τ-quantile: the smallest `y` whose cumulative normalized weight
/// reaches `tau`.
///
/// When the cumulative weight hits `tau` exactly at some `y_k` (the pinball
/// loss is then flat on `[y_k, y_{k+1}]`) this returns the lower endpoint
/// `y_k`. Cumulative sums are compared with a relative slack of a few ulps so
/// that e.g. four equal weights at `tau = 0.5` land on the second value.
/// Zero-weight points are ignored. Returns `None` if no point carries weight.
pub fn weighted_quantile<T: Scalar>(values: &[T], weights: &[T], tau: T) -> Option<T> {
    assert_eq!(values.len(), weights.len());
    let mut pairs: Vec<(T, T)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, &w)| (v, w))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    Some(quantile_of_sorted(&pairs, tau))
}

pub(crate) fn quantile_of_sorted<T: Scalar>(sorted: &[(T, T)], tau: T) -> T {
    let total: T = sorted.iter().map(|p| p.1).sum();
    let target = tau * total;
    let slack = total * T::epsilon() * T::from_usize_lossy(4 * sorted.len().max(1));
    let mut acc = T::zero();
    for &(v, w) in sorted {
        acc += w;
        if acc >= target - slack {
            return v;
        }
    }
    sorted.last().expect("non-empty").0
}

/// Weighted τ-quantiles for each `tau`, sharing one sort.
pub fn weighted_quantiles<T: Scalar>(values: &[T], weights: &[T], taus: &[T]) -> Option<Vec<T>> {
    let mut pairs: Vec<(T, T)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, &w)| (v, w))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    Some(taus.iter().map(|&t| quantile_of_sorted(&pairs, t)).collect())
}

/// Weighted empirical CDF: one `(x, F(x))` row per distinct value carrying
/// weight, in increasing order. The last row is exactly 1.
pub fn weighted_ecdf<T: Scalar>(values: &[T], weights: &[T]) -> Vec<(T, T)> {
    assert_eq!(values.len(), weights.len());
    let mut pairs: Vec<(T, T)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, &w)| (v, w))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    let total: T = pairs.iter().map(|p| p.1).sum();
    let mut rows: Vec<(T, T)> = Vec::new();
    let mut acc = T::zero();
    for (v, w) in pairs {
        acc += w;
        match rows.last_mut() {
            Some(last) if last.0 == v => last.1 = acc / total,
            _ => rows.push((v, acc / total)),
        }
    }
    if let Some(last) = rows.last_mut() {
        last.1 = T::one();
    }
    rows
}

/// Two-sided standard-normal critical value for a confidence `level`
/// (1.959964 at 0.95).
pub fn normal_critical_value(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two values.
pub fn sample_std<T: Scalar>(values: &[T]) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let mean = values.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (ss / T::from_usize_lossy(n - 1)).sqrt()
}
