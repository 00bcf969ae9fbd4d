use std::net::IpAddr;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metaemu_core::Assumption;

#[derive(Debug, Parser)]
#[command(
    name = "metaemu",
    version,
    about = "Quantile regression and meta-emulation of social cost of carbon estimates"
)]
pub struct Cli {
    /// Output style: human-readable tables or JSON.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the quantile regression grid and the mean (WLS) column.
    Fit(FitArgs),
    /// Emulate the quantiles under alternative assumption distributions.
    Emulate(EmulateArgs),
    /// Pool the shifts of several emulation runs by inverse variance.
    Combine(CombineArgs),
    /// Export histogram or CDF rows for plotting.
    Plotdata(PlotArgs),
    /// Serve a fitted model over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Estimates file (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated covariates: prtp, emuc, impact, growth_impact, year, level_dummy, growth_dummy.
    #[arg(long, value_delimiter = ',', default_value = "prtp,emuc,impact,year")]
    pub covariates: Vec<String>,
    /// Percentile grid as start:stop:step or a comma list.
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub taus: TauGrid,
    /// Left-censor the response at this value (Powell estimator).
    #[arg(long, allow_negative_numbers = true)]
    pub censor_at: Option<f64>,
    /// Cluster-bootstrap replicates per percentile.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Skip standard errors.
    #[arg(long)]
    pub no_bootstrap: bool,
    /// Skip the mean (WLS) column.
    #[arg(long)]
    pub no_mean: bool,
    #[arg(long, env = "METAEMU_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the fit artifact (JSON) here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the coefficients in long CSV form.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    /// Fit artifact written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Estimates file: recomputes the observed quantiles and enables the
    /// `literature` source and the joint bootstrap.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// assumption:FROM:TO, with FROM the literature's distribution (a file or
    /// `literature`) and TO the alternative view. Repeatable.
    #[arg(long = "assume", required = true)]
    pub assume: Vec<AssumeSpec>,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Sort the emulated quantiles when they cross.
    #[arg(long)]
    pub rearrange: bool,
    /// Correlation matrix between the alterations' shifts, rows separated by `;`.
    #[arg(long, conflicts_with = "joint_bootstrap")]
    pub correlation: Option<Matrix>,
    /// Standard errors from a cluster bootstrap of the joint shift (needs --data).
    #[arg(long, requires = "data")]
    pub joint_bootstrap: bool,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, env = "METAEMU_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub label: Option<String>,
    /// Write the emulation (JSON) here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Emulation files (JSON, or CSV exports).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Histogram,
    Cdf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(value_enum)]
    pub kind: PlotKind,
    /// Estimates file.
    #[arg(long, conflicts_with = "distribution", required_unless_present = "distribution")]
    pub data: Option<PathBuf>,
    /// Distribution file; needs --assumption when it is a CSV.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    #[arg(long)]
    pub assumption: Option<Assumption>,
    /// Column to plot from the estimates: scc or an assumption.
    #[arg(long, default_value = "scc")]
    pub field: String,
    #[arg(long, conflicts_with = "edges")]
    pub bin_width: Option<f64>,
    /// Explicit bin edges, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub edges: Option<Vec<f64>>,
    /// Count values outside the edges in the first or last bin.
    #[arg(long)]
    pub clip: bool,
    /// Ignore the quality weights.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long)]
    pub min_year: Option<i32>,
    #[arg(long)]
    pub max_year: Option<i32>,
    /// Keep only estimates at or above this value (the database's lower
    /// censoring point, for instance).
    #[arg(long, allow_negative_numbers = true)]
    pub censor_at: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub presets_dir: Option<PathBuf>,
    /// Estimates file used to derive the literature presets.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid(pub Vec<f64>);

/// Snap grid arithmetic to 12 decimals so that 0.05:0.95:0.05 yields 0.15,
/// not 0.15000000000000002.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl FromStr for TauGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse {t:?} as a number"))
        };
        let taus: Vec<f64> = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err("expected start:stop:step".into());
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err("need step > 0 and stop ≥ start".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| tidy(start + i as f64 * step)).collect()
        } else {
            s.split(',').map(num).collect::<Result<_, _>>()?
        };
        if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(format!("tau {t} is outside (0, 1)"));
        }
        if taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err("taus must be strictly increasing".into());
        }
        Ok(TauGrid(taus))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Literature,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumeSpec {
    pub assumption: Assumption,
    pub from: Source,
    pub to: PathBuf,
}

impl FromStr for AssumeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, ':');
        let (Some(a), Some(from), Some(to)) = (parts.next(), parts.next(), parts.next()) else {
            return Err("expected assumption:FROM:TO".into());
        };
        let assumption = a.parse::<Assumption>().map_err(|e| e.to_string())?;
        let from = match from {
            "literature" => Source::Literature,
            f => Source::File(f.into()),
        };
        Ok(AssumeSpec {
            assumption,
            from,
            to: to.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(pub Vec<Vec<f64>>);

impl FromStr for Matrix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(';')
            .map(|row| {
                row.split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| format!("cannot parse {v:?}")))
                    .collect()
            })
            .collect::<Result<_, _>>()
            .map(Matrix)
    }
}
