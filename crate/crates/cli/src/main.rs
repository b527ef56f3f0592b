use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rffa::run::{self, PredictTarget, RunConfig};
use rffa::Error;

/// Bayesian hierarchical GEV regression for regional flood frequency analysis.
#[derive(Debug, Parser)]
#[command(name = "rffa", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true, env = "RFFA_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, env = "RFFA_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, env = "RFFA_ITERATIONS")]
    iterations: Option<usize>,
    #[arg(long, global = true, env = "RFFA_BURNIN")]
    burnin: Option<usize>,
    /// Comma-separated return periods in years.
    #[arg(long, global = true, env = "RFFA_RETURN_PERIODS", value_delimiter = ',')]
    return_periods: Option<Vec<f64>>,
    /// Output root directory.
    #[arg(long, global = true, env = "RFFA_OUTPUT")]
    output: Option<PathBuf>,
    /// Annual maxima CSV (station_id,year,value).
    #[arg(long, global = true, env = "RFFA_MAXIMA")]
    maxima: Option<PathBuf>,
    /// Covariates CSV (station_id plus one column per covariate).
    #[arg(long, global = true, env = "RFFA_COVARIATES")]
    covariates: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the regional model and write posterior summaries.
    Fit {
        /// Resume from a checkpoint.json written by an interrupted fit with the same configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Return levels at a training station or an ungauged site.
    Predict {
        /// Directory of a completed fit.
        #[arg(long)]
        fit_dir: PathBuf,
        #[arg(long, conflicts_with = "site")]
        station: Option<String>,
        /// Raw covariate values of an ungauged site, comma-separated in training order.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "station")]
        site: Option<Vec<f64>>,
    },
    /// Leave-one-station-out cross-validation.
    Cv {
        /// Comma-separated validation station ids.
        #[arg(long, env = "RFFA_FOLDS", value_delimiter = ',')]
        folds: Option<Vec<String>>,
        /// Number of stratified validation stations when no ids are given.
        #[arg(long)]
        n_folds: Option<usize>,
    },
    /// In-sample PIT, PP and quantile-score report.
    Validate {
        /// Reuse the samples of a completed fit instead of refitting.
        #[arg(long)]
        fit_dir: Option<PathBuf>,
    },
    /// Simulate a synthetic dataset from the configured generator.
    Simulate {
        #[arg(long)]
        stations: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::TomlDe(_)
        | Error::TomlSer(_)
        | Error::Domain(_)
        | Error::Dimension { .. }
        | Error::UnknownStation(_) => 2,
        Error::Data { .. } | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
        Error::Numeric(_) | Error::OutOfSupport(_) => 4,
    }
}

fn configure(cli: &Cli) -> rffa::Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.iterations {
        cfg.chain.n_iterations = n;
    }
    if let Some(n) = c.burnin {
        cfg.chain.n_burnin = n;
    }
    if let Some(t) = &c.return_periods {
        cfg.prediction.return_periods = t.clone();
    }
    if let Some(o) = &c.output {
        cfg.output.dir = o.clone();
    }
    if let Some(m) = &c.maxima {
        cfg.data.maxima = Some(m.clone());
    }
    if let Some(v) = &c.covariates {
        cfg.data.covariates = Some(v.clone());
    }
    match &cli.command {
        Command::Cv { folds, n_folds } => {
            if let Some(f) = folds {
                cfg.cv.folds = f.clone();
            }
            if let Some(n) = n_folds {
                cfg.cv.n_folds = *n;
            }
        }
        Command::Simulate { stations: Some(n) } => cfg.simulate.n_stations = *n,
        _ => {}
    }
    cfg.resolve()
}

fn execute(cli: &Cli) -> rffa::Result<()> {
    let cfg = configure(cli)?;
    match &cli.command {
        Command::Fit { resume } => {
            let out = run::fit_command(&cfg, resume.as_deref())?;
            for w in &out.manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", out.dir.display());
        }
        Command::Predict { fit_dir, station, site } => {
            let target = match (station, site) {
                (Some(id), _) => PredictTarget::Station(id.clone()),
                (None, Some(x)) => PredictTarget::Site(x.clone()),
                (None, None) => return Err(Error::Config("give --station or --site".into())),
            };
            let (out, rows) = run::predict_command(&cfg, fit_dir, &target)?;
            println!("station_id,return_period,posterior_median,credible_lo,credible_hi,predictive_quantile");
            for r in rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.station_id, r.return_period, r.posterior_median, r.credible_lo, r.credible_hi, r.predictive_quantile
                );
            }
            eprintln!("written to {}", out.dir.display());
        }
        Command::Cv { .. } => {
            let (out, report) = run::cv_command(&cfg)?;
            for s in &report.scores {
                println!(
                    "{:<24} T={:<6} score={:.4} [{:.4}, {:.4}]",
                    s.model_name, s.return_period, s.mean_score, s.ci_lo, s.ci_hi
                );
            }
            println!("{}", out.dir.display());
        }
        Command::Validate { fit_dir } => {
            let (out, report) = run::validate_command(&cfg, fit_dir.as_deref())?;
            println!(
                "PIT n={} KS={:.4} (1% critical {:.4}) PP max gap={:.4}",
                report.pit.n, report.pit.ks_statistic, report.pit.ks_critical_01, report.pit.pp_max_gap
            );
            println!("{}", out.dir.display());
        }
        Command::Simulate { .. } => {
            let (out, sim) = run::simulate_command(&cfg)?;
            println!(
                "{} stations, {} station-years",
                sim.dataset.n_stations(),
                sim.dataset.n_observations()
            );
            println!("{}", out.dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
