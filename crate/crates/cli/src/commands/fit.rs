use metaemu_core::emulator::empirical_quantiles;
use metaemu_core::ingestion::{load_estimates, write_fits_csv, FitArtifact};
use metaemu_core::regression::{fit_grid, BootstrapConfig, Covariate, DesignSpec, GridOptions};
use metaemu_core::Fit;

use crate::args::{FitArgs, Format};
use crate::error::CliError;
use crate::output::{create, emit, table};

pub fn run(args: &FitArgs, format: Format) -> Result<(), CliError> {
    let (records, summary) = load_estimates::<f64>(&args.data)?;
    let covariates = args
        .covariates
        .iter()
        .map(|c| c.trim().parse::<Covariate>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = DesignSpec::new(covariates).with_tau_grid(args.taus.0.clone());
    if let Some(c) = args.censor_at {
        spec = spec.with_censor_bound(c);
    }
    let bootstrap = (!args.no_bootstrap).then_some(BootstrapConfig {
        replicates: args.replicates,
        seed: args.seed,
    });
    let options = GridOptions {
        bootstrap,
        include_mean: !args.no_mean,
    };
    let grid = fit_grid(&records, &spec, &options)?;
    let observed = empirical_quantiles(&records, &spec.tau_grid)?;
    let artifact = FitArtifact::new(&spec, &grid, observed, bootstrap);

    if let Some(p) = &args.out {
        artifact.save(p)?;
    }
    if let Some(p) = &args.csv {
        write_fits_csv(create(p)?, &artifact.fits)?;
    }
    match format {
        Format::Structured => emit(&artifact.to_json(), None)?,
        Format::Text => {
            let mut text = format!(
                "{} records from {} papers ({} with zero weight)\n",
                summary.n_records, summary.n_papers, summary.n_excluded
            );
            if let Some(c) = args.censor_at {
                text.push_str(&format!("left-censored at {c}\n"));
            }
            text.push('\n');
            text.push_str(&coefficient_table(&artifact.fits));
            emit(&text, None)?;
        }
    }
    if artifact.failures.is_empty() {
        return Ok(());
    }
    for f in &artifact.failures {
        let tau = f.tau.map_or("mean".to_string(), |t| t.to_string());
        eprintln!("fit at tau {tau} failed: {}", f.error);
    }
    Err(CliError::Numerical(format!(
        "{} of the fits failed",
        artifact.failures.len()
    )))
}

/// Coefficients in rows with standard errors in parentheses below, one
/// column per percentile and the mean last.
pub fn coefficient_table(fits: &[Fit]) -> String {
    let Some(first) = fits.first() else {
        return String::new();
    };
    let mut header = vec![String::new()];
    header.extend(fits.iter().map(|f| match f.tau.tau() {
        Some(t) => format!("{t:.2}"),
        None => "mean".to_string(),
    }));
    let names: Vec<&str> = first
        .covariates
        .iter()
        .map(String::as_str)
        .chain(["intercept"])
        .collect();
    let mut rows = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let mut beta = vec![name.to_string()];
        let mut se = vec![String::new()];
        for f in fits {
            beta.push(format!("{:.3}", f.beta[j]));
            se.push(format!("({:.3})", f.se[j]));
        }
        rows.push(beta);
        rows.push(se);
    }
    let mut n = vec!["n_obs".to_string()];
    n.extend(fits.iter().map(|f| f.n_obs.to_string()));
    rows.push(n);
    if fits.iter().any(|f| f.r_squared.is_some()) {
        let mut r2 = vec!["r_squared".to_string()];
        r2.extend(
            fits.iter()
                .map(|f| f.r_squared.map_or(String::new(), |r| format!("{r:.3}"))),
        );
        rows.push(r2);
    }
    table(&header, &rows)
}
