//! Run configuration and the end-to-end commands behind the CLI.
//!
//! Every command writes into a run directory named after the command, the
//! master seed and a hash of the resolved configuration, so identical
//! configurations map to identical directories and identical bytes.
//!
//! Seed derivation from the master seed `s`: the chain uses `s`, predictive
//! simulation uses stream 1, bootstrap resampling stream 2 and the choice of
//! default validation stations stream 3 (see [`derive_seed`]). Fold `k` of a
//! cross-validation run uses [`fold_seed`] of the chain and prediction seeds.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gev;
use crate::io::{self, LoadedData};
use crate::local::LocalPriors;
use crate::model::{Dataset, GevParam, HierState, Priors};
use crate::prediction::{self, PredictionConfig, ReturnLevelSummary};
use crate::sampler::{Chain, ChainConfig, Checkpoint, PosteriorSamples};
use crate::simulate::{benchmark_spec, simulate_dataset, SimulatedData, SimulationSpec};
use crate::special::{empirical_quantile, ks_critical, ks_uniform};
use crate::validation::{
    self, chi_square_uniformity, default_validation_stations, loo_cross_validate, pp_plot_data, station_pits,
    stability_table, BootstrapConfig, CvConfig, HoldoutPrediction, PitRecord,
};

pub use crate::validation::fold_seed;

pub const CONFIG_SCHEMA: &str = "rffa-config/1";
pub const MANIFEST_SCHEMA: &str = "rffa-manifest/1";
pub const RESUME_SCHEMA: &str = "rffa-resume/1";
pub const TABLE_SCHEMA: &str = "rffa-table/1";
pub const TRUTH_SCHEMA: &str = "rffa-truth/1";
pub const REPORT_SCHEMA: &str = "rffa-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub maxima: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    /// Generating parameters written by `simulate`; enables the recovery report.
    pub truth: Option<PathBuf>,
    pub min_years: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            maxima: None,
            covariates: None,
            truth: None,
            min_years: crate::local::MIN_YEARS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write into a run-stamped subdirectory of `dir`.
    pub stamp: bool,
    /// Write a resumable checkpoint every this many iterations (0: only at the end).
    pub checkpoint_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
            stamp: true,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictionSettings {
    pub credible_level: f64,
    pub sims_per_component: usize,
    pub return_periods: Vec<f64>,
}

impl Default for PredictionSettings {
    fn default() -> Self {
        Self {
            credible_level: 0.8,
            sims_per_component: 50,
            return_periods: vec![10.0, 50.0, 100.0, 1000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    /// Validation stations; when empty, `n_folds` stations are drawn stratified by record length.
    pub folds: Vec<String>,
    pub n_folds: usize,
    pub bootstrap_resamples: usize,
    pub bootstrap_level: f64,
    pub bootstrap_by_station: bool,
    pub local: bool,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            folds: vec![],
            n_folds: 27,
            bootstrap_resamples: 1000,
            bootstrap_level: 0.9,
            bootstrap_by_station: false,
            local: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub n_stations: usize,
    pub spec: SimulationSpec,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        Self {
            n_stations: 50,
            spec: benchmark_spec(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: String,
    /// Master seed; must fit in 63 bits.
    pub seed: u64,
    pub data: DataConfig,
    pub output: OutputConfig,
    pub priors: Priors,
    pub chain: ChainConfig,
    pub prediction: PredictionSettings,
    pub cv: CvSettings,
    pub local: LocalPriors,
    pub simulate: SimulateSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA.into(),
            seed: 1,
            data: DataConfig::default(),
            output: OutputConfig::default(),
            priors: Priors::default(),
            chain: ChainConfig {
                max_retained: Some(4000),
                ..ChainConfig::default()
            },
            prediction: PredictionSettings::default(),
            cv: CvSettings::default(),
            local: LocalPriors::default(),
            simulate: SimulateSettings::default(),
        }
    }
}

/// SplitMix64 finalizer of `master` offset by `stream`, truncated to 63 bits.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) >> 1
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Propagates the master seed and validates every section.
    pub fn resolve(mut self) -> Result<Self> {
        if self.schema_version != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported config schema '{}', expected '{CONFIG_SCHEMA}'",
                self.schema_version
            )));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must be below 2^63".into()));
        }
        self.chain.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        self.chain.validate()?;
        self.local.validate()?;
        self.prediction_config().validate()?;
        for &t in &self.prediction.return_periods {
            gev::prob_of_return_period(t).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.prediction.return_periods.is_empty() {
            return Err(Error::Config("at least one return period is required".into()));
        }
        if !(self.cv.bootstrap_level > 0.0 && self.cv.bootstrap_level < 1.0) || self.cv.bootstrap_resamples == 0 {
            return Err(Error::Config("bootstrap needs a level in (0,1) and at least one resample".into()));
        }
        if self.cv.n_folds == 0 && self.cv.folds.is_empty() {
            return Err(Error::Config("cross-validation needs at least one fold".into()));
        }
        Ok(())
    }

    pub fn prediction_config(&self) -> PredictionConfig {
        PredictionConfig {
            credible_level: self.prediction.credible_level,
            sims_per_component: self.prediction.sims_per_component,
            seed: derive_seed(self.seed, 1),
        }
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            n_resamples: self.cv.bootstrap_resamples,
            level: self.cv.bootstrap_level,
            seed: derive_seed(self.seed, 2),
            by_station: self.cv.bootstrap_by_station,
        }
    }

    fn data_paths(&self) -> Result<(&Path, &Path)> {
        match (&self.data.maxima, &self.data.covariates) {
            (Some(m), Some(c)) => Ok((m, c)),
            _ => Err(Error::Config("data.maxima and data.covariates must both be set".into())),
        }
    }

    pub fn load_data(&self) -> Result<LoadedData> {
        let (m, c) = self.data_paths()?;
        io::load_dataset(m, c, self.data.min_years)
    }

    /// Hex SHA-256 of the command name, the resolved configuration and any extra key material.
    pub fn digest(&self, command: &str, extra: &str) -> Result<String> {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(self.to_toml_string()?.as_bytes());
        h.update([0]);
        h.update(extra.as_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn run_dir(&self, command: &str, extra: &str) -> Result<PathBuf> {
        if !self.output.stamp {
            return Ok(self.output.dir.clone());
        }
        let d = self.digest(command, extra)?;
        Ok(self.output.dir.join(format!("{command}-s{}-{}", self.seed, &d[..12])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub command: String,
    pub package_version: String,
    pub seed: u64,
    pub config_digest: String,
    /// File name → schema identifier.
    pub files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// Collects the files of one run directory and writes the manifest last.
pub struct RunWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl RunWriter {
    pub fn create(cfg: &RunConfig, command: &str, extra: &str) -> Result<Self> {
        let dir = cfg.run_dir(command, extra)?;
        fs::create_dir_all(&dir)?;
        let mut w = Self {
            manifest: Manifest {
                schema_version: MANIFEST_SCHEMA.into(),
                command: command.into(),
                package_version: env!("CARGO_PKG_VERSION").into(),
                seed: cfg.seed,
                config_digest: cfg.digest(command, extra)?,
                files: BTreeMap::new(),
                warnings: vec![],
            },
            dir,
        };
        let path = w.path("config.resolved.toml", CONFIG_SCHEMA);
        fs::write(path, cfg.to_toml_string()?)?;
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Registers `name` and returns its full path.
    pub fn path(&mut self, name: &str, schema: &str) -> PathBuf {
        self.manifest.files.insert(name.to_string(), schema.to_string());
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            let _ = fs::create_dir_all(parent);
        }
        p
    }

    pub fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name, TABLE_SCHEMA);
        io::write_rows(&p, rows)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, schema: &str, value: &T) -> Result<()> {
        let p = self.path(name, schema);
        io::write_json(&p, value)
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.manifest.warnings.push(w.into());
    }

    pub fn finish(self) -> Result<RunOutcome> {
        io::write_json(&self.dir.join("manifest.json"), &self.manifest)?;
        Ok(RunOutcome {
            dir: self.dir,
            manifest: self.manifest,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Checkpoint plus the draws retained so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResumeState {
    pub schema_version: String,
    pub checkpoint: Checkpoint,
    pub draws: Vec<HierState>,
}

const CONSTANT: &str = "(constant)";

fn coefficient_names(design_names: &[String]) -> Vec<String> {
    std::iter::once(CONSTANT.to_string()).chain(design_names.iter().cloned()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummaryRow {
    pub block: String,
    pub coefficient: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub inclusion: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

pub fn theta_summary(samples: &PosteriorSamples) -> Vec<ThetaSummaryRow> {
    let names = coefficient_names(&samples.design.covariate_names);
    let mut rows = Vec::new();
    for b in GevParam::ALL {
        let inc = samples.inclusion_probabilities(b);
        for (i, name) in names.iter().enumerate() {
            let mut t = samples.theta_trace(b, i);
            let (mean, sd) = mean_sd(&t);
            t.sort_by(f64::total_cmp);
            rows.push(ThetaSummaryRow {
                block: b.symbol().into(),
                coefficient: name.clone(),
                mean,
                sd,
                q05: empirical_quantile(&t, 0.05),
                q50: empirical_quantile(&t, 0.5),
                q95: empirical_quantile(&t, 0.95),
                inclusion: inc[i],
            });
        }
    }
    rows
}

/// Inclusion probability in percent, one row per coefficient and one column per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionRow {
    pub coefficient: String,
    pub mu: f64,
    pub kappa: f64,
    pub xi: f64,
}

pub fn inclusion_table(samples: &PosteriorSamples) -> Vec<InclusionRow> {
    let [m, k, x] = GevParam::ALL.map(|b| samples.inclusion_probabilities(b));
    coefficient_names(&samples.design.covariate_names)
        .into_iter()
        .enumerate()
        .map(|(i, coefficient)| InclusionRow {
            coefficient,
            mu: 100.0 * m[i],
            kappa: 100.0 * k[i],
            xi: 100.0 * x[i],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationParamRow {
    pub station_id: String,
    pub n_years: usize,
    pub mu_mean: f64,
    pub mu_sd: f64,
    pub kappa_mean: f64,
    pub kappa_sd: f64,
    pub xi_mean: f64,
    pub xi_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevelRow {
    pub station_id: String,
    pub return_period: f64,
    pub prob: f64,
    pub posterior_median: f64,
    pub posterior_mean: f64,
    pub credible_lo: f64,
    pub credible_hi: f64,
    pub predictive_quantile: f64,
}

impl ReturnLevelRow {
    pub fn new(station_id: &str, r: &ReturnLevelSummary) -> Self {
        Self {
            station_id: station_id.into(),
            return_period: r.return_period,
            prob: r.prob,
            posterior_median: r.posterior_median,
            posterior_mean: r.posterior_mean,
            credible_lo: r.credible_lo,
            credible_hi: r.credible_hi,
            predictive_quantile: r.predictive_quantile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub block: String,
    pub coefficient: String,
    pub true_value: f64,
    pub posterior_mean: f64,
    pub q05: f64,
    pub q95: f64,
    pub covered: bool,
    pub inclusion: f64,
}

pub fn recovery_report(samples: &PosteriorSamples, truth: &HierState) -> Vec<RecoveryRow> {
    theta_summary(samples)
        .into_iter()
        .map(|r| {
            let b = GevParam::from_symbol(&r.block).expect("summary rows use block symbols");
            let i = if r.coefficient == CONSTANT {
                0
            } else {
                1 + samples
                    .design
                    .covariate_names
                    .iter()
                    .position(|n| *n == r.coefficient)
                    .expect("coefficient from the design")
            };
            let tv = truth.block(b).theta.get(i).copied().unwrap_or(f64::NAN);
            RecoveryRow {
                block: r.block,
                coefficient: r.coefficient,
                true_value: tv,
                posterior_mean: r.mean,
                q05: r.q05,
                q95: r.q95,
                covered: r.q05 <= tv && tv <= r.q95,
                inclusion: r.inclusion,
            }
        })
        .collect()
}

/// Runs (or resumes) the chain for `cfg`, checkpointing as configured.
pub fn fit_samples(cfg: &RunConfig, data: &Dataset, resume_from: Option<&Path>, writer: &mut RunWriter) -> Result<PosteriorSamples> {
    let (mut chain, mut draws) = match resume_from {
        Some(p) => {
            let rs: ResumeState = io::read_json(p)?;
            if rs.schema_version != RESUME_SCHEMA {
                return Err(Error::Config(format!("unsupported resume schema '{}'", rs.schema_version)));
            }
            if rs.checkpoint.config != cfg.chain || rs.checkpoint.priors != cfg.priors {
                return Err(Error::Config("checkpoint was written with different chain settings or priors".into()));
            }
            (Chain::from_checkpoint(data, rs.checkpoint)?, rs.draws)
        }
        None => (Chain::with_default_start(data, cfg.priors.clone(), cfg.chain.clone())?, Vec::new()),
    };
    let n = cfg.chain.n_iterations;
    let every = if cfg.output.checkpoint_every == 0 { n } else { cfg.output.checkpoint_every };
    let cp_path = writer.path("checkpoint.json", RESUME_SCHEMA);
    while chain.iteration() < n {
        let until = (chain.iteration() / every + 1) * every;
        chain.advance(until.min(n), &mut draws);
        let rs = ResumeState {
            schema_version: RESUME_SCHEMA.into(),
            checkpoint: chain.checkpoint(),
            draws: draws.clone(),
        };
        io::write_json(&cp_path, &rs)?;
    }
    let samples = chain.into_samples(draws);
    if samples.draws.is_empty() {
        return Err(Error::Numeric("chain retained no draws".into()));
    }
    Ok(samples)
}

/// Fits the regional model and writes the posterior summaries.
pub fn fit_command(cfg: &RunConfig, resume_from: Option<&Path>) -> Result<RunOutcome> {
    let loaded = cfg.load_data()?;
    let mut w = RunWriter::create(cfg, "fit", "")?;
    for warning in &loaded.warnings {
        w.warn(warning.clone());
    }
    let data = &loaded.dataset;
    let samples = fit_samples(cfg, data, resume_from, &mut w)?;
    w.json("samples.json", crate::sampler::SAMPLES_SCHEMA, &samples)?;
    w.rows("theta_summary.csv", &theta_summary(&samples))?;
    w.rows("inclusion.csv", &inclusion_table(&samples))?;
    let acc: Vec<(String, f64)> = samples.acceptance_rates.clone().into_iter().collect();
    w.rows("acceptance.csv", &acc.iter().map(|(k, v)| AcceptanceRow { update: k.clone(), rate: *v }).collect::<Vec<_>>())?;

    let pcfg = cfg.prediction_config();
    let mut rng = pcfg.rng();
    let mut params = Vec::new();
    let mut levels = Vec::new();
    for (s, st) in data.stations.iter().enumerate() {
        let comps = samples.site_components(s)?;
        let (mu, kappa, xi): (Vec<f64>, Vec<f64>, Vec<f64>) =
            (comps.iter().map(|c| c.mu()).collect(), comps.iter().map(|c| c.kappa()).collect(), comps.iter().map(|c| c.xi()).collect());
        let ((mm, ms), (km, ks), (xm, xs)) = (mean_sd(&mu), mean_sd(&kappa), mean_sd(&xi));
        params.push(StationParamRow {
            station_id: st.id.clone(),
            n_years: st.n_years(),
            mu_mean: mm,
            mu_sd: ms,
            kappa_mean: km,
            kappa_sd: ks,
            xi_mean: xm,
            xi_sd: xs,
        });
        for &t in &cfg.prediction.return_periods {
            let r = prediction::summarize_return_period(&comps, t, &pcfg, &mut rng)?;
            levels.push(ReturnLevelRow::new(&st.id, &r));
        }
    }
    w.rows("station_params.csv", &params)?;
    w.rows("return_levels.csv", &levels)?;
    if let Some(tp) = &cfg.data.truth {
        let truth: TruthFile = io::read_json(tp)?;
        w.rows("recovery.csv", &recovery_report(&samples, &truth.truth))?;
    }
    w.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AcceptanceRow {
    update: String,
    rate: f64,
}

/// Where to predict.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictTarget {
    /// A training station, using its sampled random effects.
    Station(String),
    /// An ungauged site given by raw (unstandardized) covariate values.
    Site(Vec<f64>),
}

/// Return levels from a fitted run directory.
pub fn predict_command(cfg: &RunConfig, fit_dir: &Path, target: &PredictTarget) -> Result<(RunOutcome, Vec<ReturnLevelRow>)> {
    let samples: PosteriorSamples = io::read_json(&fit_dir.join("samples.json"))?;
    if samples.schema_version != crate::sampler::SAMPLES_SCHEMA {
        return Err(Error::Config(format!("unsupported samples schema '{}'", samples.schema_version)));
    }
    let pcfg = cfg.prediction_config();
    let mut rng = pcfg.rng();
    let (label, comps) = match target {
        PredictTarget::Station(id) => (id.clone(), samples.site_components(samples.design.station_index(id)?)?),
        PredictTarget::Site(raw) => {
            let x = samples.design.standardize(raw)?;
            ("new_site".to_string(), prediction::new_site_components(&samples, &x, &mut rng)?)
        }
    };
    let rows = cfg
        .prediction
        .return_periods
        .iter()
        .map(|&t| {
            let r = prediction::summarize_return_period(&comps, t, &pcfg, &mut rng)?;
            Ok(ReturnLevelRow::new(&label, &r))
        })
        .collect::<Result<Vec<_>>>()?;
    let extra = format!("{}|{:?}", fit_dir.display(), target);
    let mut w = RunWriter::create(cfg, "predict", &extra)?;
    w.rows("predictions.csv", &rows)?;
    Ok((w.finish()?, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitSummary {
    pub model_name: String,
    pub n: usize,
    pub ks_statistic: f64,
    pub ks_critical_01: f64,
    pub pp_max_gap: f64,
    pub chi_square_10_bins: f64,
}

impl PitSummary {
    pub fn new(model_name: &str, pits: &[f64]) -> Result<Self> {
        Ok(Self {
            model_name: model_name.into(),
            n: pits.len(),
            ks_statistic: ks_uniform(pits),
            ks_critical_01: ks_critical(pits.len(), 0.01),
            pp_max_gap: pp_plot_data(pits)?.max_gap,
            chi_square_10_bins: chi_square_uniformity(pits, 10),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PitRow {
    model: String,
    station_id: String,
    year_index: usize,
    pit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PpRow {
    model: String,
    theoretical: f64,
    empirical: f64,
}

fn pit_rows(model: &str, pits: &[PitRecord]) -> Vec<PitRow> {
    pits.iter()
        .map(|p| PitRow {
            model: model.into(),
            station_id: p.station_id.clone(),
            year_index: p.year_index,
            pit: p.pit,
        })
        .collect()
}

fn pp_rows(model: &str, pits: &[f64]) -> Result<Vec<PpRow>> {
    Ok(pp_plot_data(pits)?
        .points
        .into_iter()
        .map(|p| PpRow {
            model: model.into(),
            theoretical: p.theoretical,
            empirical: p.empirical,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema_version: String,
    pub pit: PitSummary,
    pub scores: Vec<validation::ScoreReport>,
}

/// In-sample reliability of a fit: PIT values of every station-year under the
/// station's mixture predictive, PP data and quantile scores.
pub fn validate_command(cfg: &RunConfig, fit_dir: Option<&Path>) -> Result<(RunOutcome, ValidationReport)> {
    let loaded = cfg.load_data()?;
    let data = &loaded.dataset;
    let extra = fit_dir.map(|p| p.display().to_string()).unwrap_or_default();
    let mut w = RunWriter::create(cfg, "validate", &extra)?;
    let samples = match fit_dir {
        Some(d) => {
            let s: PosteriorSamples = io::read_json(&d.join("samples.json"))?;
            if s.design.station_ids != data.stations.iter().map(|s| s.id.clone()).collect::<Vec<_>>() {
                return Err(Error::Config("fitted samples do not match the configured dataset".into()));
            }
            s
        }
        None => fit_samples(cfg, data, None, &mut w)?,
    };
    let report = in_sample_validation(cfg, data, &samples, &mut w)?;
    w.json("validation.json", REPORT_SCHEMA, &report)?;
    Ok((w.finish()?, report))
}

fn in_sample_validation(cfg: &RunConfig, data: &Dataset, samples: &PosteriorSamples, w: &mut RunWriter) -> Result<ValidationReport> {
    let pcfg = cfg.prediction_config();
    let mut rng = pcfg.rng();
    let mut pits = Vec::new();
    let mut preds: Vec<Vec<HoldoutPrediction>> = vec![vec![]; cfg.prediction.return_periods.len()];
    for (s, st) in data.stations.iter().enumerate() {
        let comps = samples.site_components(s)?;
        pits.extend(station_pits(&st.id, &comps, &st.annual_maxima));
        for (j, &t) in cfg.prediction.return_periods.iter().enumerate() {
            let q = prediction::mixture_quantile(&comps, gev::prob_of_return_period(t)?, pcfg.sims_per_component, &mut rng)?;
            preds[j].push(HoldoutPrediction {
                station_id: st.id.clone(),
                quantile: q,
                observations: st.annual_maxima.clone(),
            });
        }
    }
    let boot = cfg.bootstrap_config();
    let scores = cfg
        .prediction
        .return_periods
        .iter()
        .zip(&preds)
        .map(|(&t, p)| validation::mean_quantile_score(validation::IN_SAMPLE, p, t, &boot))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = pits.iter().map(|p| p.pit).collect();
    w.rows("pits.csv", &pit_rows(validation::IN_SAMPLE, &pits))?;
    w.rows("pp.csv", &pp_rows(validation::IN_SAMPLE, &values)?)?;
    w.rows("scores.csv", &scores)?;
    Ok(ValidationReport {
        schema_version: REPORT_SCHEMA.into(),
        pit: PitSummary::new(validation::IN_SAMPLE, &values)?,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub schema_version: String,
    pub folds: Vec<String>,
    pub pit: Vec<PitSummary>,
    pub scores: Vec<validation::ScoreReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StabilityCsvRow {
    block: String,
    coefficient: String,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ModelLevelRow {
    model: String,
    station_id: String,
    return_period: f64,
    prob: f64,
    posterior_median: f64,
    posterior_mean: f64,
    credible_lo: f64,
    credible_hi: f64,
    predictive_quantile: f64,
}

impl ModelLevelRow {
    fn new(model: &str, station_id: &str, r: &ReturnLevelSummary) -> Self {
        Self {
            model: model.into(),
            station_id: station_id.into(),
            return_period: r.return_period,
            prob: r.prob,
            posterior_median: r.posterior_median,
            posterior_mean: r.posterior_mean,
            credible_lo: r.credible_lo,
            credible_hi: r.credible_hi,
            predictive_quantile: r.predictive_quantile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FoldThetaRow {
    block: String,
    coefficient: String,
    posterior_mean: f64,
    inclusion: f64,
}

/// Leave-one-station-out validation with one directory per fold.
pub fn cv_command(cfg: &RunConfig) -> Result<(RunOutcome, CvReport)> {
    let loaded = cfg.load_data()?;
    let data = &loaded.dataset;
    let folds = if cfg.cv.folds.is_empty() {
        default_validation_stations(data, cfg.cv.n_folds.min(data.n_stations()), derive_seed(cfg.seed, 3))?
    } else {
        cfg.cv.folds.clone()
    };
    let mut w = RunWriter::create(cfg, "cv", "")?;
    for warning in &loaded.warnings {
        w.warn(warning.clone());
    }
    let cv = CvConfig {
        chain: cfg.chain.clone(),
        prediction: cfg.prediction_config(),
        return_periods: cfg.prediction.return_periods.clone(),
        bootstrap: cfg.bootstrap_config(),
        local: cfg.cv.local.then(|| cfg.local.clone()),
        keep_samples: false,
    };
    let res = loo_cross_validate(data, &folds, &cfg.priors, &cv)?;
    let names = coefficient_names(&data.covariate_names);
    for f in &res.folds {
        let dir = format!("folds/{}", f.station_id);
        let rows: Vec<ReturnLevelRow> = f.return_levels.iter().map(|r| ReturnLevelRow::new(&f.station_id, r)).collect();
        w.rows(&format!("{dir}/return_levels.csv"), &rows)?;
        w.rows(&format!("{dir}/pits.csv"), &pit_rows(validation::OUT_OF_SAMPLE, &f.pits))?;
        let mut theta = Vec::new();
        for b in GevParam::ALL {
            for (i, n) in names.iter().enumerate() {
                theta.push(FoldThetaRow {
                    block: b.symbol().into(),
                    coefficient: n.clone(),
                    posterior_mean: f.theta_mean[b.index()][i],
                    inclusion: f.inclusion[b.index()][i],
                });
            }
        }
        w.rows(&format!("{dir}/theta.csv"), &theta)?;
    }
    let mut all_pits = Vec::new();
    let mut pp = Vec::new();
    let mut summaries = Vec::new();
    let mut levels = Vec::new();
    for m in &res.models {
        all_pits.extend(pit_rows(&m.model_name, &m.pits));
        let values: Vec<f64> = m.pits.iter().map(|p| p.pit).collect();
        if !values.is_empty() {
            pp.extend(pp_rows(&m.model_name, &values)?);
            summaries.push(PitSummary::new(&m.model_name, &values)?);
        }
        for (id, lv) in m.station_ids.iter().zip(&m.return_levels) {
            for r in lv {
                levels.push(ModelLevelRow::new(&m.model_name, id, r));
            }
        }
    }
    w.rows("pits.csv", &all_pits)?;
    w.rows("pp.csv", &pp)?;
    w.rows("return_levels.csv", &levels)?;
    w.rows("scores.csv", &res.scores)?;
    if res.folds.len() >= 2 {
        let rows: Vec<StabilityCsvRow> = stability_table(&res.folds, &data.covariate_names)?
            .into_iter()
            .map(|r| StabilityCsvRow {
                block: r.block.symbol().into(),
                coefficient: r.coefficient,
                min: r.summary.min,
                q1: r.summary.q1,
                median: r.summary.median,
                q3: r.summary.q3,
                max: r.summary.max,
            })
            .collect();
        w.rows("stability.csv", &rows)?;
    }
    let report = CvReport {
        schema_version: REPORT_SCHEMA.into(),
        folds,
        pit: summaries,
        scores: res.scores,
    };
    w.json("cv.json", REPORT_SCHEMA, &report)?;
    Ok((w.finish()?, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub schema_version: String,
    pub seed: u64,
    pub spec: SimulationSpec,
    pub truth: HierState,
    pub site_params: Vec<crate::gev::GevParams<f64>>,
}

/// Simulates a dataset from `cfg.simulate` and writes it with its generating
/// parameters and a ready-to-run fit configuration.
pub fn simulate_command(cfg: &RunConfig) -> Result<(RunOutcome, SimulatedData)> {
    let sim = simulate_dataset(&cfg.simulate.spec, cfg.simulate.n_stations, cfg.seed)?;
    let mut w = RunWriter::create(cfg, "simulate", "")?;
    let years: Vec<Vec<i64>> = sim
        .dataset
        .stations
        .iter()
        .map(|s| (0..s.n_years() as i64).map(|t| 1901 + t).collect())
        .collect();
    let mp = w.path("maxima.csv", TABLE_SCHEMA);
    io::write_maxima_csv(&mp, &sim.dataset, &years)?;
    let cp = w.path("covariates.csv", TABLE_SCHEMA);
    io::write_covariates_csv(&cp, &sim.dataset)?;
    let tp = w.path("truth.json", TRUTH_SCHEMA);
    io::write_json(
        &tp,
        &TruthFile {
            schema_version: TRUTH_SCHEMA.into(),
            seed: sim.seed,
            spec: sim.spec.clone(),
            truth: sim.truth.clone(),
            site_params: sim.site_params.clone(),
        },
    )?;
    let mut fit = cfg.clone();
    fit.data.maxima = Some(mp);
    fit.data.covariates = Some(cp);
    fit.data.truth = Some(tp);
    let fp = w.path("fit.toml", CONFIG_SCHEMA);
    fs::write(fp, fit.to_toml_string()?)?;
    Ok((w.finish()?, sim))
}
