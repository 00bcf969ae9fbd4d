//! Regression and emulation results checked against independent computations.

use metaemu_core::emulator::{disagreement_loadings, emulate_shift, shift_variance};
use metaemu_core::linalg::Matrix;
use metaemu_core::regression::{fit_quantile_design, fit_wls_design, pinball_loss, Design};
use metaemu_core::stats::weighted_quantile;
use metaemu_core::{Assumption, AssumptionDistribution, FitTarget, QuantileFit, SeMethod};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn design(xs: &[Vec<f64>], y: &[f64], w: &[f64]) -> Design<f64> {
    let p = xs.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = xs.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    let mut names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    names.push("intercept".into());
    Design::from_parts(Matrix::from_rows(&rows), y.to_vec(), w.to_vec(), names)
}

/// Minimum weighted pinball loss over every basic solution (β through `p`
/// observations), for one slope plus intercept or intercept only.
fn vertex_minimum(x: Option<&[f64]>, y: &[f64], w: &[f64], tau: f64) -> f64 {
    let n = y.len();
    let loss = |f: &dyn Fn(usize) -> f64| {
        let r: Vec<f64> = (0..n).map(|i| y[i] - f(i)).collect();
        pinball_loss(&r, tau, w)
    };
    let mut best = f64::INFINITY;
    match x {
        None => {
            for &b in y {
                best = best.min(loss(&|_| b));
            }
        }
        Some(x) => {
            for i in 0..n {
                for j in i + 1..n {
                    if x[i] == x[j] {
                        continue;
                    }
                    let slope = (y[j] - y[i]) / (x[j] - x[i]);
                    let icpt = y[i] - slope * x[i];
                    best = best.min(loss(&|k| icpt + slope * x[k]));
                }
            }
        }
    }
    best
}

#[test]
fn pinball_fit_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let taus = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut checked = 0;
    while checked < 300 {
        let n = rng.random_range(3..=8);
        let with_slope = rng.random_bool(0.7);
        // coarse grids create ties in x and y, fine ones do not
        let coarse = rng.random_bool(0.3);
        let draw = |rng: &mut ChaCha8Rng| {
            if coarse {
                rng.random_range(-3..=3) as f64
            } else {
                rng.random_range(-10.0..10.0)
            }
        };
        let x: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let tau = taus[rng.random_range(0..taus.len())];
        let d = if with_slope {
            if x.iter().all(|&v| v == x[0]) {
                continue;
            }
            design(&x.iter().map(|&v| vec![v]).collect::<Vec<_>>(), &y, &w)
        } else {
            design(&vec![vec![]; n], &y, &w)
        };
        let fit = fit_quantile_design(&d, tau, None).unwrap();
        let brute = vertex_minimum(with_slope.then_some(&x[..]), &y, &w, tau);
        assert!(
            (fit.loss - brute).abs() <= 1e-8 * brute.max(1.0),
            "n={n} tau={tau} fit={} brute={brute}",
            fit.loss
        );
        checked += 1;
    }
}

#[test]
fn intercept_only_is_weighted_quantile() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(2..=15);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(1..4) as f64).collect();
        let tau = rng.random_range(1..20) as f64 / 20.0;
        let fit = fit_quantile_design(&design(&vec![vec![]; n], &y, &w), tau, None).unwrap();
        assert_eq!(fit.beta[0], weighted_quantile(&y, &w, tau).unwrap());
    }
}

#[test]
fn two_covariates_against_vertex_enumeration() {
    // three parameters: enumerate all triples
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(5..=9);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(0.0..4.0)])
            .collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|r| 1.0 + 2.0 * r[0] - r[1] + rng.random_range(-1.0..1.0))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let tau = 0.3;
        let d = design(&xs, &y, &w);
        let fit = fit_quantile_design(&d, tau, None).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let a = DMatrix::from_row_slice(
                        3,
                        3,
                        &[
                            xs[i][0], xs[i][1], 1.0, xs[j][0], xs[j][1], 1.0, xs[k][0], xs[k][1], 1.0,
                        ],
                    );
                    if let Some(b) = a.lu().solve(&DVector::from_vec(vec![y[i], y[j], y[k]])) {
                        let r = d.residuals(b.as_slice());
                        best = best.min(pinball_loss(&r, tau, &w));
                    }
                }
            }
        }
        assert!(
            (fit.loss - best).abs() <= 1e-8 * best.max(1.0),
            "{} vs {best}",
            fit.loss
        );
    }
}

#[test]
fn wls_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let n = rng.random_range(6..60);
        let p = rng.random_range(1..=4);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>() + rng.random_range(-2.0..2.0))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let fit = fit_wls_design(&design(&xs, &y, &w)).unwrap();

        let k = p + 1;
        let x = DMatrix::from_fn(n, k, |i, j| if j < p { xs[i][j] } else { 1.0 });
        let wm = DMatrix::from_diagonal(&DVector::from_vec(w.clone()));
        let yv = DVector::from_vec(y.clone());
        let xtwx = x.transpose() * &wm * &x;
        let inv = xtwx.clone().try_inverse().unwrap();
        let beta = &inv * (x.transpose() * &wm * &yv);
        let e = &yv - &x * &beta;
        let ssr: f64 = (0..n).map(|i| w[i] * e[i] * e[i]).sum();
        let sigma2 = ssr / (n - k) as f64;
        for j in 0..k {
            let se = (sigma2 * inv[(j, j)]).sqrt();
            assert!((fit.beta[j] - beta[j]).abs() <= 1e-8 * beta[j].abs().max(1.0));
            assert!((fit.se[j] - se).abs() <= 1e-8 * se.max(1.0));
        }
        assert!((fit.loss - ssr).abs() <= 1e-8 * ssr.max(1.0));
        let r2 = fit.r_squared.unwrap();
        assert!((0.0..=1.0).contains(&r2));
    }
}

fn fit_with(beta: f64, se: f64) -> QuantileFit<f64> {
    QuantileFit {
        tau: FitTarget::Quantile(0.5),
        covariates: vec!["prtp".into()],
        beta: vec![beta, 0.0],
        se: vec![se, 0.0],
        n_obs: 100,
        n_dropped: 0,
        loss: 0.0,
        se_method: SeMethod::None,
        r_squared: None,
        censor_bound: None,
    }
}

fn prtp(p: &[f64]) -> AssumptionDistribution<f64> {
    AssumptionDistribution::new(Assumption::Prtp, vec![0.0, 1.0, 3.0], p.to_vec(), "").unwrap()
}

#[test]
fn shift_variance_matches_simulation() {
    // one independent coefficient draw per support point
    let fit = fit_with(-66.0, 7.666);
    let (f, p) = (prtp(&[0.5, 0.3, 0.2]), prtp(&[0.2, 0.5, 0.3]));
    let loads = disagreement_loadings(Assumption::Prtp, &f, &p).unwrap();
    let analytic = shift_variance(&fit, Assumption::Prtp, &f, &p).unwrap();
    let normal = Normal::new(-66.0, 7.666).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| loads.iter().map(|l| l * normal.sample(&mut rng)).sum())
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    assert!(
        (var / analytic - 1.0).abs() < 0.02,
        "simulated {var}, analytic {analytic}"
    );
    assert!((mean - emulate_shift(&fit, Assumption::Prtp, &f, &p).unwrap()).abs() < 0.1);
}
