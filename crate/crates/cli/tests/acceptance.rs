//! Acceptance suite: one PASS/FAIL line per criterion, checked at the stated
//! tolerance. Run with `cargo test -p metaemu-cli --test acceptance -- --nocapture`
//! to see the report.

#![allow(clippy::needless_range_loop)]

mod common;

use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use metaemu_core::emulator::{combine_biases, disagreement_loadings, emulate_shift, shift_variance};
use metaemu_core::ingestion::{load_estimates, read_estimates, weighted_histogram, EmulationFile, FitArtifact};
use metaemu_core::linalg::Matrix;
use metaemu_core::regression::{
    fit_quantile, fit_quantile_design, fit_wls_design, pinball_loss, Covariate, Design, DesignSpec,
};
use metaemu_core::{Assumption, AssumptionDistribution, BiasInput, Emulation, Fit, FitTarget, SeMethod};
use metaemu_service::{router, AppState, Model, ServiceConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};
use tower::ServiceExt;

use common::*;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn design(xs: &[Vec<f64>], y: &[f64], w: &[f64]) -> Design<f64> {
    let p = xs.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = xs.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    let mut names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    names.push("intercept".into());
    Design::from_parts(Matrix::from_rows(&rows), y.to_vec(), w.to_vec(), names)
}

fn loss_at(xs: &[Vec<f64>], y: &[f64], w: &[f64], beta: &[f64], tau: f64) -> f64 {
    let r: Vec<f64> = xs
        .iter()
        .zip(y)
        .map(|(x, yi)| yi - x.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() - beta[x.len()])
        .collect();
    pinball_loss(&r, tau, w)
}

/// Brute-force minimum over every basic solution: lines through two points,
/// or the constant through one point.
fn vertex_minimum(x: Option<&[f64]>, y: &[f64], w: &[f64], tau: f64) -> f64 {
    let n = y.len();
    let rho = |u: f64| if u < 0.0 { u * (tau - 1.0) } else { u * tau };
    let loss = |f: &dyn Fn(usize) -> f64| (0..n).map(|i| w[i] * rho(y[i] - f(i))).sum::<f64>();
    let mut best = f64::INFINITY;
    match x {
        None => y.iter().for_each(|&b| best = best.min(loss(&|_| b))),
        Some(x) => {
            for i in 0..n {
                for j in i + 1..n {
                    if x[i] != x[j] {
                        let slope = (y[j] - y[i]) / (x[j] - x[i]);
                        let icpt = y[i] - slope * x[i];
                        best = best.min(loss(&|k| icpt + slope * x[k]));
                    }
                }
            }
        }
    }
    best
}

fn pinball_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let taus = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 200 {
        let with_slope = rng.random_bool(0.75);
        // a fit needs more observations than parameters
        let n = rng.random_range(if with_slope { 3 } else { 2 }..=8);
        let coarse = rng.random_bool(0.3);
        let mut draw = || {
            if coarse {
                rng.random_range(-3..=3) as f64
            } else {
                rng.random_range(-10.0..10.0)
            }
        };
        let x: Vec<f64> = (0..n).map(|_| draw()).collect();
        let y: Vec<f64> = (0..n).map(|_| draw()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let tau = taus[rng.random_range(0..taus.len())];
        if with_slope && x.iter().all(|&v| v == x[0]) {
            continue;
        }
        let rows: Vec<Vec<f64>> = if with_slope {
            x.iter().map(|&v| vec![v]).collect()
        } else {
            vec![vec![]; n]
        };
        let fit = fit_quantile_design(&design(&rows, &y, &w), tau, None).map_err(|e| e.to_string())?;
        let brute = vertex_minimum(with_slope.then_some(&x[..]), &y, &w, tau);
        let gap = (fit.loss - brute).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-8, || {
            format!("instance {done}: loss {} vs brute force {brute}", fit.loss)
        })?;
        done += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("200 instances, max |gap| {worst:.1e}, {secs:.2} s"))
}

fn weighted_median() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for case in 0..100 {
        let n = rng.random_range(2..=12);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let w: Vec<u32> = (0..n).map(|_| rng.random_range(1..=5)).collect();
        let k = rng.random_range(1..20u32);
        let tau = k as f64 / 20.0;
        // lower endpoint: smallest y whose cumulative weight reaches tau·W, in integers
        let total: u32 = w.iter().sum();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        let mut acc = 0;
        let mut expected = f64::NAN;
        for &i in &order {
            acc += w[i];
            if 20 * acc >= k * total {
                expected = y[i];
                break;
            }
        }
        let wf: Vec<f64> = w.iter().map(|&v| v as f64).collect();
        let fit = fit_quantile_design(&design(&vec![vec![]; n], &y, &wf), tau, None).map_err(|e| e.to_string())?;
        ensure(fit.beta[0] == expected, || {
            format!("case {case}: {} vs {expected}", fit.beta[0])
        })?;
        let brute = vertex_minimum(None, &y, &wf, tau);
        ensure((fit.loss - brute).abs() <= 1e-12, || {
            format!("case {case}: not a minimizer")
        })?;
    }
    Ok("100 instances, exact".into())
}

fn recovery() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let (alpha, beta, s0, s1) = (250.0, -66.0, 30.0, 10.0);
    let mut csv = String::from("scc,year,prtp,weight,paper_id\n");
    for i in 0..5000 {
        let prtp: f64 = rng.random_range(0.0..3.0);
        let e: f64 = normal.sample(&mut rng);
        let scc = alpha + beta * prtp + (s0 + s1 * prtp) * e;
        let weight = rng.random_range(1..=4) as f64 / 2.0;
        csv.push_str(&format!("{scc},2010,{prtp},{weight},p{}\n", i / 5));
    }
    let (records, _) = read_estimates::<f64, _>(Cursor::new(csv)).map_err(|e| e.to_string())?;
    let spec = DesignSpec::new(vec![Covariate::Prtp]);
    let slope = |tau: f64| {
        fit_quantile(&records, &spec, tau)
            .map(|f| f.beta[0])
            .map_err(|e| e.to_string())
    };
    let (lo, mid, hi) = (slope(0.05)?, slope(0.5)?, slope(0.95)?);
    let secs = start.elapsed().as_secs_f64();
    // conditional τ-quantile slope is β + s1·z_τ
    let z = 1.6448536269514722;
    let (lo_true, hi_true) = (beta - s1 * z, beta + s1 * z);
    let detail =
        format!("median {mid:.2}, 5% {lo:.2} (true {lo_true:.2}), 95% {hi:.2} (true {hi_true:.2}), {secs:.2} s");
    ensure((mid - beta).abs() <= 3.0, || detail.clone())?;
    ensure(lo < beta && beta < hi, || detail.clone())?;
    ensure((lo - lo_true).abs() <= 8.0 && (hi - hi_true).abs() <= 8.0, || {
        detail.clone()
    })?;
    ensure(secs < 30.0, || detail.clone())?;
    Ok(detail)
}

fn fit_with(beta: f64, se: f64) -> Fit {
    Fit {
        tau: FitTarget::Quantile(0.5),
        covariates: vec!["prtp".into()],
        beta: vec![beta, 250.0],
        se: vec![se, 10.0],
        n_obs: 100,
        n_dropped: 0,
        loss: 0.0,
        se_method: SeMethod::None,
        r_squared: None,
        censor_bound: None,
    }
}

fn prtp3(p: &[f64]) -> AssumptionDistribution<f64> {
    AssumptionDistribution::new(Assumption::Prtp, vec![0.0, 1.0, 3.0], p.to_vec(), "").unwrap()
}

fn eq_arithmetic() -> Check {
    let fit = fit_with(-66.0, 7.666);
    let (f, p) = (prtp3(&[0.5, 0.3, 0.2]), prtp3(&[0.2, 0.5, 0.3]));
    let shift = emulate_shift(&fit, Assumption::Prtp, &f, &p).map_err(|e| e.to_string())?;
    let se = shift_variance(&fit, Assumption::Prtp, &f, &p)
        .map_err(|e| e.to_string())?
        .sqrt();
    // loadings (0.3·0, −0.2·1, −0.1·3) sum to −0.5 with squares summing to 0.13
    let se_expected = 7.666 * 0.13f64.sqrt();
    ensure((shift - 33.0).abs() <= 1e-9, || format!("shift {shift}"))?;
    ensure((se - se_expected).abs() <= 1e-9, || format!("se {se} vs {se_expected}"))?;
    ensure((se - 2.7640).abs() < 5e-5, || {
        format!("se {se} does not round to 2.7640")
    })?;
    Ok(format!("shift {shift}, se {se:.10}"))
}

fn monte_carlo() -> Check {
    let fit = fit_with(-66.0, 7.666);
    let (f, p) = (prtp3(&[0.5, 0.3, 0.2]), prtp3(&[0.2, 0.5, 0.3]));
    let loads = disagreement_loadings(Assumption::Prtp, &f, &p).map_err(|e| e.to_string())?;
    let analytic = shift_variance(&fit, Assumption::Prtp, &f, &p).map_err(|e| e.to_string())?;
    // an independent coefficient draw at every support point
    let normal = Normal::new(-66.0, 7.666).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| loads.iter().map(|l| l * normal.sample(&mut rng)).sum())
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let rel = (var / analytic - 1.0).abs();
    ensure(rel < 0.02, || format!("simulated {var:.4}, analytic {analytic:.4}"))?;
    Ok(format!("simulated {var:.4}, analytic {analytic:.4}, rel err {rel:.4}"))
}

fn harmonic() -> Check {
    let inputs = [BiasInput::new("a", 10.0, 1.0), BiasInput::new("b", 30.0, 3.0)];
    let s = combine_biases::<f64>(&inputs, 0.5).map_err(|e| e.to_string())?;
    ensure((s.mu_combined - 12.0).abs() <= 1e-12, || {
        format!("mu {}", s.mu_combined)
    })?;
    ensure((s.sigma_combined - 0.9f64.sqrt()).abs() <= 1e-12, || {
        format!("sigma {}", s.sigma_combined)
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for case in 0..100 {
        let k = rng.random_range(1..=8);
        let inputs: Vec<BiasInput<f64>> = (0..k)
            .map(|i| {
                BiasInput::new(
                    format!("s{i}"),
                    rng.random_range(-100.0..100.0),
                    rng.random_range(0.01..50.0),
                )
            })
            .collect();
        let s = combine_biases::<f64>(&inputs, 0.5).map_err(|e| e.to_string())?;
        let min = inputs.iter().map(|i| i.sigma).fold(f64::INFINITY, f64::min);
        ensure(s.sigma_combined <= min * (1.0 + 1e-12), || {
            format!("case {case}: {} > {min}", s.sigma_combined)
        })?;
    }
    Ok(format!(
        "({}, {:.15}); 100 random sets",
        s.mu_combined, s.sigma_combined
    ))
}

fn wls_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(8..80);
        let p = rng.random_range(1..=4);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|r| {
                3.0 + r.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>() + rng.random_range(-2.0..2.0)
            })
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let fit = fit_wls_design(&design(&xs, &y, &w)).map_err(|e| e.to_string())?;

        let k = p + 1;
        let x = DMatrix::from_fn(n, k, |i, j| if j < p { xs[i][j] } else { 1.0 });
        let wm = DMatrix::from_diagonal(&DVector::from_vec(w.clone()));
        let yv = DVector::from_vec(y.clone());
        let inv = (x.transpose() * &wm * &x).try_inverse().ok_or("singular oracle")?;
        let beta = &inv * (x.transpose() * &wm * &yv);
        let e = &yv - &x * &beta;
        let ssr: f64 = (0..n).map(|i| w[i] * e[i] * e[i]).sum();
        let sigma2 = ssr / (n - k) as f64;
        for j in 0..k {
            let se = (sigma2 * inv[(j, j)]).sqrt();
            worst = worst.max(rel(fit.beta[j], beta[j])).max(rel(fit.se[j], se));
        }
        ensure(worst <= 1e-8, || format!("case {case}: relative gap {worst:.1e}"))?;
        let r2 = fit.r_squared.ok_or("no R²")?;
        ensure((0.0..=1.0).contains(&r2), || format!("case {case}: R² {r2}"))?;
    }
    Ok(format!("100 instances, max relative gap {worst:.1e}"))
}

fn equivariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0);
    let taus = [0.1, 0.25, 0.5, 0.75, 0.9];
    for case in 0..100 {
        let n = rng.random_range(10..40);
        let p = rng.random_range(1..=2);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(0.0..3.0)).collect())
            .collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|r| 100.0 - 40.0 * r[0] + rng.random_range(-30.0..30.0))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let tau = taus[rng.random_range(0..taus.len())];
        let c = rng.random_range(0.1..10.0);
        let gamma: Vec<f64> = (0..=p).map(|_| rng.random_range(-20.0..20.0)).collect();
        let k = rng.random_range(0.1..10.0);
        let err = |e: metaemu_core::FitError| e.to_string();

        let base = fit_quantile_design(&design(&xs, &y, &w), tau, None).map_err(err)?;
        let ys: Vec<f64> = y.iter().map(|v| c * v).collect();
        let yg: Vec<f64> = xs
            .iter()
            .zip(&y)
            .map(|(x, v)| v + x.iter().zip(&gamma).map(|(a, g)| a * g).sum::<f64>() + gamma[p])
            .collect();
        let wk: Vec<f64> = w.iter().map(|v| k * v).collect();
        let scaled = fit_quantile_design(&design(&xs, &ys, &w), tau, None).map_err(err)?;
        let shifted = fit_quantile_design(&design(&xs, &yg, &w), tau, None).map_err(err)?;
        let reweighted = fit_quantile_design(&design(&xs, &y, &wk), tau, None).map_err(err)?;
        // minimizers need not be unique, so compare the optimal losses and map
        // each transformed solution back onto the original problem
        let back_s: Vec<f64> = scaled.beta.iter().map(|b| b / c).collect();
        let back_g: Vec<f64> = shifted.beta.iter().zip(&gamma).map(|(b, g)| b - g).collect();
        ensure(close(scaled.loss, c * base.loss), || format!("case {case}: scale"))?;
        ensure(close(loss_at(&xs, &y, &w, &back_s, tau), base.loss), || {
            format!("case {case}: scale back")
        })?;
        ensure(close(shifted.loss, base.loss), || format!("case {case}: shift"))?;
        ensure(close(loss_at(&xs, &y, &w, &back_g, tau), base.loss), || {
            format!("case {case}: shift back")
        })?;
        ensure(close(reweighted.loss, k * base.loss), || {
            format!("case {case}: weights")
        })?;
        ensure(close(loss_at(&xs, &y, &w, &reweighted.beta, tau), base.loss), || {
            format!("case {case}: weights back")
        })?;

        let ols = fit_wls_design(&design(&xs, &y, &w)).map_err(err)?;
        let ols_s = fit_wls_design(&design(&xs, &ys, &w)).map_err(err)?;
        let ols_g = fit_wls_design(&design(&xs, &yg, &w)).map_err(err)?;
        let ols_k = fit_wls_design(&design(&xs, &y, &wk)).map_err(err)?;
        for j in 0..=p {
            ensure(close(ols_s.beta[j], c * ols.beta[j]), || {
                format!("case {case}: wls scale")
            })?;
            ensure(close(ols_g.beta[j], ols.beta[j] + gamma[j]), || {
                format!("case {case}: wls shift")
            })?;
            ensure(close(ols_k.beta[j], ols.beta[j]), || {
                format!("case {case}: wls weights")
            })?;
        }
    }
    Ok("100 instances: response scale, shift by Xγ, weight rescaling".into())
}

/// Assumption, support, literature and alternative probabilities.
type Alt = (&'static str, Vec<f64>, Vec<f64>, Vec<f64>);

struct Scenario {
    name: &'static str,
    alterations: Vec<Alt>,
    ci_level: Option<f64>,
    rearrange: bool,
    correlation: Option<&'static str>,
}

fn scenarios() -> Vec<Scenario> {
    let prtp = |f: [f64; 4], p: [f64; 4]| ("prtp", PRTP_SUPPORT.to_vec(), f.to_vec(), p.to_vec());
    let emuc = |f: [f64; 3], p: [f64; 3]| ("emuc", EMUC_SUPPORT.to_vec(), f.to_vec(), p.to_vec());
    let impact = |f: [f64; 3], p: [f64; 3]| ("impact", IMPACT_SUPPORT.to_vec(), f.to_vec(), p.to_vec());
    let lit = [0.2, 0.4, 0.25, 0.15];
    let alt = [0.05, 0.25, 0.3, 0.4];
    let plain = |name, alterations| Scenario {
        name,
        alterations,
        ci_level: None,
        rearrange: false,
        correlation: None,
    };
    vec![
        plain("prtp", vec![prtp(lit, alt)]),
        plain("prtp reversed", vec![prtp(alt, lit)]),
        plain("emuc", vec![emuc([0.3, 0.3, 0.4], [0.1, 0.2, 0.7])]),
        plain("impact", vec![impact([0.2, 0.5, 0.3], [0.5, 0.3, 0.2])]),
        plain("identical", vec![prtp(lit, lit)]),
        plain(
            "prtp+emuc",
            vec![prtp(lit, alt), emuc([0.3, 0.3, 0.4], [0.6, 0.3, 0.1])],
        ),
        plain(
            "all three",
            vec![
                prtp(lit, alt),
                emuc([0.3, 0.3, 0.4], [0.1, 0.2, 0.7]),
                impact([0.2, 0.5, 0.3], [0.1, 0.1, 0.8]),
            ],
        ),
        Scenario {
            ci_level: Some(0.9),
            ..plain("90% interval", vec![prtp(lit, [0.5, 0.3, 0.1, 0.1])])
        },
        Scenario {
            correlation: Some("1,0.3;0.3,1"),
            ..plain(
                "correlated",
                vec![prtp(lit, alt), emuc([0.3, 0.3, 0.4], [0.1, 0.2, 0.7])],
            )
        },
        Scenario {
            ci_level: Some(0.99),
            rearrange: true,
            ..plain("rearranged", vec![prtp(lit, [0.0, 0.0, 0.0, 1.0])])
        },
    ]
}

/// Every numeric column, one line per row, in shortest round-trip form.
fn numeric_columns(rows: &[Emulation]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
                r.tau, r.scc_observed, r.scc_emulated, r.shift, r.se, r.ci_low, r.ci_high
            )
        })
        .collect()
}

fn fixture_fit(dir: &Path) -> Result<PathBuf, String> {
    let data = dir.join("est.csv");
    std::fs::write(&data, synthetic_csv(400, 7)).map_err(|e| e.to_string())?;
    let fits = dir.join("fits.json");
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--replicates",
        "100",
        "--out",
        fits.to_str().unwrap(),
    ]);
    ensure(out.status.success(), || stderr(&out))?;
    Ok(fits)
}

fn parity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fits = fixture_fit(dir.path())?;
    let artifact = FitArtifact::<f64>::load(&fits).map_err(|e| e.to_string())?;
    let config = ServiceConfig {
        fit: fits.clone(),
        presets_dir: None,
        data: None,
    };
    let app = router(Arc::new(AppState::with_model(config, Model::new(artifact, vec![]))));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;

    let all = scenarios();
    for (i, sc) in all.iter().enumerate() {
        let mut args: Vec<String> = ["--format", "structured", "emulate", "--fit"]
            .map(String::from)
            .to_vec();
        args.push(fits.display().to_string());
        let mut bodies = Vec::new();
        for (j, (a, support, f, p)) in sc.alterations.iter().enumerate() {
            let from = dir.path().join(format!("s{i}_{j}_from.json"));
            let to = dir.path().join(format!("s{i}_{j}_to.json"));
            write_distribution(&from, a, support, f);
            write_distribution(&to, a, support, p);
            args.push("--assume".into());
            args.push(format!("{a}:{}:{}", from.display(), to.display()));
            bodies.push(json!({
                "assumption": a,
                "from": {"support": support, "probability": f},
                "to": {"support": support, "probability": p},
            }));
        }
        let mut request = json!({"alterations": bodies, "rearrange": sc.rearrange});
        if let Some(level) = sc.ci_level {
            args.push("--ci-level".into());
            args.push(level.to_string());
            request["ci_level"] = json!(level);
        }
        if sc.rearrange {
            args.push("--rearrange".into());
        }
        if let Some(m) = sc.correlation {
            args.push("--correlation".into());
            args.push(m.into());
            let rows: Vec<Vec<f64>> = m
                .split(';')
                .map(|r| r.split(',').map(|v| v.parse().unwrap()).collect())
                .collect();
            request["correlation"] = json!(rows);
        }

        let out = bin().args(&args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("{}: {}", sc.name, stderr(&out)))?;
        let cli = EmulationFile::<f64>::from_json(&stdout(&out)).map_err(|e| e.to_string())?;

        let (status, body) = rt.block_on(async {
            let req = Request::builder()
                .method(Method::POST)
                .uri("/emulate")
                .header("content-type", "application/json")
                .body(Body::from(request.to_string()))
                .unwrap();
            let resp = app.clone().oneshot(req).await.unwrap();
            let status = resp.status();
            (status, resp.into_body().collect().await.unwrap().to_bytes())
        });
        ensure(status == StatusCode::OK, || format!("{}: HTTP {status}", sc.name))?;
        let svc: Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        let svc = EmulationFile::<f64>::from_json(&svc.to_string()).map_err(|e| e.to_string())?;
        let (a, b) = (numeric_columns(&cli.results), numeric_columns(&svc.results));
        ensure(!cli.results.is_empty() && a == b, || {
            format!("{}: columns differ", sc.name)
        })?;
        ensure(cli.crossings == svc.crossings, || {
            format!("{}: crossings differ", sc.name)
        })?;
    }
    Ok(format!("{} scenarios byte-identical", all.len()))
}

fn published_database() -> Verdict {
    let Ok(path) = std::env::var("METAEMU_DATABASE") else {
        return Verdict::Skip("set METAEMU_DATABASE to the published estimates CSV".into());
    };
    let check = || -> Check {
        let (records, summary) = load_estimates::<f64>(&path).map_err(|e| e.to_string())?;
        let spec = DesignSpec::new(vec![
            Covariate::Prtp,
            Covariate::Emuc,
            Covariate::Impact,
            Covariate::Year,
        ]);
        let fit = fit_quantile(&records, &spec, 0.5).map_err(|e| e.to_string())?;
        let (beta, _) = fit.coefficient("prtp").ok_or("no prtp coefficient")?;
        let samples: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.weight > 0.0)
            .map(|r| (r.scc, r.weight))
            .collect();
        let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let edges: Vec<f64> = ((lo / 25.0).floor() as i64..=(hi / 25.0).ceil() as i64 + 1)
            .map(|k| k as f64 * 25.0)
            .collect();
        let masses = weighted_histogram(&samples, &edges, false).map_err(|e| e.to_string())?;
        let mode = masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| (edges[i], edges[i + 1]))
            .ok_or("empty histogram")?;
        let detail = format!(
            "n_records {}, n_papers {}, median prtp {beta:.2}, mode bin [{}, {})",
            summary.n_records, summary.n_papers, mode.0, mode.1
        );
        ensure(summary.n_records == 14_152 && summary.n_papers == 446, || {
            detail.clone()
        })?;
        ensure((-130.0..=-30.0).contains(&beta), || detail.clone())?;
        ensure(mode.0 >= 75.0 && mode.1 <= 100.0, || detail.clone())?;
        Ok(detail)
    };
    match check() {
        Ok(d) => Verdict::Pass(d),
        Err(d) => Verdict::Fail(d),
    }
}

#[test]
fn acceptance() {
    let checks: Vec<(&str, Criterion)> = vec![
        ("pinball oracle equivalence", pinball_oracle),
        ("weighted-median property", weighted_median),
        ("synthetic recovery", recovery),
        ("shift and variance arithmetic", eq_arithmetic),
        ("shift variance vs Monte Carlo", monte_carlo),
        ("harmonic combination", harmonic),
        ("WLS vs normal equations", wls_oracle),
        ("equivariance suite", equivariance),
        ("CLI/service parity", parity),
    ];
    let mut verdicts: Vec<(&str, Verdict)> = checks
        .into_iter()
        .map(|(name, f)| {
            let v = match std::panic::catch_unwind(f) {
                Ok(Ok(d)) => Verdict::Pass(d),
                Ok(Err(d)) => Verdict::Fail(d),
                Err(_) => Verdict::Fail("panicked".into()),
            };
            (name, v)
        })
        .collect();
    verdicts.push(("published database (optional)", published_database()));

    let mut failed = 0;
    println!();
    for (name, v) in &verdicts {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name}: {detail}");
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
