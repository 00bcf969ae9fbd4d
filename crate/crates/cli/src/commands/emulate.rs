use metaemu_core::emulator::{empirical_quantiles, joint_bootstrap_se, Alteration, EmulationOptions, VarianceModel};
use metaemu_core::ingestion::{
    empirical_frequency, load_distribution, load_estimates, write_emulation_csv, EmulationFile, FitArtifact,
};
use metaemu_core::regression::{Covariate, DesignSpec};
use metaemu_core::Record;
use metaemu_service::api::{run_emulation, DEFAULT_LABEL};

use crate::args::{EmulateArgs, Format, Source};
use crate::error::CliError;
use crate::output::{create, emit, table};

pub fn run(args: &EmulateArgs, format: Format) -> Result<(), CliError> {
    let artifact = FitArtifact::<f64>::load(&args.fit)?;
    let records: Option<Vec<Record>> = match &args.data {
        Some(p) => Some(load_estimates::<f64>(p)?.0),
        None => None,
    };
    let observed = match &records {
        Some(r) => empirical_quantiles(r, &artifact.tau_grid)?,
        None => artifact.observed.clone(),
    };

    let mut alterations = Vec::with_capacity(args.assume.len());
    for spec in &args.assume {
        let a = spec.assumption;
        let to = load_distribution::<f64>(&spec.to, Some(a))?;
        let from = match &spec.from {
            Source::File(p) => load_distribution::<f64>(p, Some(a))?,
            Source::Literature => {
                let r = records
                    .as_deref()
                    .ok_or_else(|| CliError::Input("the `literature` source needs --data".into()))?;
                empirical_frequency(r, a, to.support())?
            }
        };
        alterations.push(Alteration::new(a, from, to));
    }

    let variance = if let Some(m) = &args.correlation {
        VarianceModel::Correlated(m.0.clone())
    } else if args.joint_bootstrap {
        let records = records.as_deref().expect("clap requires --data");
        let covariates = artifact
            .covariates
            .iter()
            .map(|c| c.parse::<Covariate>())
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = DesignSpec::new(covariates).with_tau_grid(artifact.tau_grid.clone());
        spec.censor_bound = artifact.censor_bound;
        let taus: Vec<f64> = observed.iter().map(|o| o.tau).collect();
        VarianceModel::Supplied(joint_bootstrap_se(
            records,
            &spec,
            &taus,
            &alterations,
            args.replicates,
            args.seed,
        )?)
    } else {
        VarianceModel::Independent
    };
    let options = EmulationOptions {
        ci_level: args.ci_level,
        variance,
        rearrange: args.rearrange,
    };
    let label = args.label.as_deref().unwrap_or(DEFAULT_LABEL);
    let file = run_emulation(&artifact.quantile_fits(), &observed, &alterations, &options, label)?;

    if !file.crossings.is_empty() {
        let taus: Vec<String> = file.crossings.iter().map(|t| t.to_string()).collect();
        let note = if args.rearrange { " (rearranged)" } else { "" };
        eprintln!("warning: emulated quantiles cross at tau {}{note}", taus.join(", "));
    }
    if let Some(p) = &args.out {
        file.save(p)?;
    }
    if let Some(p) = &args.csv {
        write_emulation_csv(create(p)?, &file.results)?;
    }
    match format {
        Format::Structured => emit(&file.to_json(), None),
        Format::Text => emit(&results_table(&file, args.ci_level), None),
    }
}

pub fn results_table(file: &EmulationFile<f64>, ci_level: f64) -> String {
    let pct = format!("{:.0}%", ci_level * 100.0);
    let header: Vec<String> = [
        "tau",
        "observed",
        "emulated",
        "shift",
        "se",
        &format!("{pct} low"),
        &format!("{pct} high"),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = file
        .results
        .iter()
        .map(|r| {
            vec![
                format!("{:.2}", r.tau),
                format!("{:.2}", r.scc_observed),
                format!("{:.2}", r.scc_emulated),
                format!("{:.2}", r.shift),
                format!("{:.3}", r.se),
                format!("{:.2}", r.ci_low),
                format!("{:.2}", r.ci_high),
            ]
        })
        .collect();
    format!(
        "{}\nshift = emulated − observed; positive means the literature's frequencies sit above the alternative view\n",
        table(&header, &rows)
    )
}
