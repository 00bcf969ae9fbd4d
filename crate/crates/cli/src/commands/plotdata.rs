use metaemu_core::ingestion::{load_distribution, load_estimates, weighted_histogram};
use metaemu_core::stats::weighted_ecdf;
use metaemu_core::Assumption;
use serde::Serialize;

use crate::args::{Format, PlotArgs, PlotKind};
use crate::error::CliError;
use crate::output::emit;

pub const PLOTDATA_SCHEMA: &str = "metaemu.plotdata.v1";

#[derive(Serialize)]
#[serde(untagged)]
enum Row {
    Bin { bin_low: f64, bin_high: f64, mass: f64 },
    Point { x: f64, cumulative: f64 },
}

#[derive(Serialize)]
struct PlotData<'a> {
    schema: &'static str,
    kind: &'static str,
    field: &'a str,
    rows: Vec<Row>,
}

fn samples(args: &PlotArgs) -> Result<(String, Vec<(f64, f64)>), CliError> {
    if let Some(path) = &args.distribution {
        let d = load_distribution::<f64>(path, args.assumption)?;
        let pairs = d
            .support()
            .iter()
            .copied()
            .zip(d.probability().iter().copied())
            .collect();
        return Ok((d.assumption().to_string(), pairs));
    }
    let path = args.data.as_ref().expect("clap requires --data or --distribution");
    let (records, _) = load_estimates::<f64>(path)?;
    let field: Option<Assumption> = match args.field.as_str() {
        "scc" => None,
        other => Some(
            other
                .parse()
                .map_err(|e: metaemu_core::types::UnknownAssumption| CliError::Input(e.to_string()))?,
        ),
    };
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.weight > 0.0)
        .filter(|r| args.min_year.is_none_or(|y| r.year >= y))
        .filter(|r| args.max_year.is_none_or(|y| r.year <= y))
        .filter(|r| args.censor_at.is_none_or(|c| r.scc >= c))
        .filter_map(|r| {
            let v = match field {
                None => Some(r.scc),
                Some(a) => r.assumption(a),
            };
            v.map(|v| (v, if args.unweighted { 1.0 } else { r.weight }))
        })
        .collect();
    Ok((args.field.clone(), pairs))
}

fn edges(args: &PlotArgs, values: &[(f64, f64)]) -> Result<Vec<f64>, CliError> {
    if let Some(e) = &args.edges {
        return Ok(e.clone());
    }
    let w = args
        .bin_width
        .ok_or_else(|| CliError::Input("histogram needs --bin-width or --edges".into()))?;
    if !(w > 0.0) {
        return Err(CliError::Input("--bin-width must be positive".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| {
            (lo.min(v), hi.max(v))
        });
    let first = (lo / w).floor();
    let last = ((hi / w).ceil()).max(first + 1.0);
    Ok((first as i64..=last as i64).map(|k| k as f64 * w).collect())
}

pub fn run(args: &PlotArgs, format: Format) -> Result<(), CliError> {
    let (field, pairs) = samples(args)?;
    if pairs.is_empty() {
        return Err(CliError::Input("no records".into()));
    }
    let rows: Vec<Row> = match args.kind {
        PlotKind::Histogram => {
            let edges = edges(args, &pairs)?;
            let masses = weighted_histogram(&pairs, &edges, args.clip)?;
            let total: f64 = masses.iter().sum();
            edges
                .windows(2)
                .zip(masses)
                .map(|(e, m)| Row::Bin {
                    bin_low: e[0],
                    bin_high: e[1],
                    mass: m / total,
                })
                .collect()
        }
        PlotKind::Cdf => {
            let (v, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            weighted_ecdf(&v, &w)
                .into_iter()
                .map(|(x, cumulative)| Row::Point { x, cumulative })
                .collect()
        }
    };
    let kind = match args.kind {
        PlotKind::Histogram => "histogram",
        PlotKind::Cdf => "cdf",
    };
    let text = match format {
        Format::Structured => {
            let data = PlotData {
                schema: PLOTDATA_SCHEMA,
                kind,
                field: &field,
                rows,
            };
            serde_json::to_string_pretty(&data).expect("plot data serializes") + "\n"
        }
        Format::Text => {
            let mut out = match args.kind {
                PlotKind::Histogram => "bin_low,bin_high,mass\n".to_string(),
                PlotKind::Cdf => "x,cumulative\n".to_string(),
            };
            for r in rows {
                match r {
                    Row::Bin {
                        bin_low,
                        bin_high,
                        mass,
                    } => out.push_str(&format!("{bin_low},{bin_high},{mass}\n")),
                    Row::Point { x, cumulative } => out.push_str(&format!("{x},{cumulative}\n")),
                }
            }
            out
        }
    };
    emit(&text, args.out.as_deref())
}
