//! Reliability, scoring and stability assessment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{self, GevParams};
use crate::local::{fit_local, LocalPriors, MIN_YEARS};
use crate::model::{Dataset, GevParam, Priors};
use crate::prediction::{
    mixture_cdf, new_site_components, summarize_return_period, PredictionConfig, ReturnLevelSummary,
};
use crate::sampler::{run_chain, ChainConfig, PosteriorSamples};
use crate::special::empirical_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitRecord {
    pub station_id: String,
    pub year_index: usize,
    pub pit: f64,
}

/// Mixture predictive CDF at `y`.
pub fn pit_value(components: &[GevParams<f64>], y: f64) -> f64 {
    mixture_cdf(components, y).clamp(0.0, 1.0)
}

pub fn station_pits(station_id: &str, components: &[GevParams<f64>], ys: &[f64]) -> Vec<PitRecord> {
    ys.iter()
        .enumerate()
        .map(|(t, &y)| PitRecord {
            station_id: station_id.to_string(),
            year_index: t,
            pit: pit_value(components, y),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpPoint {
    pub empirical: f64,
    pub theoretical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpData {
    pub points: Vec<PpPoint>,
    pub max_gap: f64,
}

/// Sorted PIT values against plotting positions `i/(n+1)`.
pub fn pp_plot_data(pits: &[f64]) -> Result<PpData> {
    if pits.is_empty() {
        return Err(Error::Domain("PP plot needs at least one PIT value".into()));
    }
    let mut sorted = pits.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let points: Vec<PpPoint> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| PpPoint {
            empirical: e,
            theoretical: (i + 1) as f64 / (n + 1.0),
        })
        .collect();
    let max_gap = points
        .iter()
        .map(|p| (p.empirical - p.theoretical).abs())
        .fold(0.0, f64::max);
    Ok(PpData { points, max_gap })
}

/// Pearson statistic of PIT counts in `bins` equal-width bins against uniform.
pub fn chi_square_uniformity(pits: &[f64], bins: usize) -> f64 {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &p in pits {
        let k = ((p * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let expected = pits.len() as f64 / bins as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Pinball loss `(y − q)(τ − 1{y ≤ q})`.
pub fn quantile_score(q: f64, y: f64, tau: f64) -> f64 {
    let ind = if y <= q { 1.0 } else { 0.0 };
    (y - q) * (tau - ind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
    /// Resample whole stations instead of single observations.
    pub by_station: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_resamples: 1000,
            level: 0.9,
            seed: 1,
            by_station: false,
        }
    }
}

/// Predicted return level at one station and the observations it is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutPrediction {
    pub station_id: String,
    pub quantile: f64,
    pub observations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub model_name: String,
    pub return_period: f64,
    pub mean_score: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ScoreReport {
    pub fn ci_width(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }
}

/// Mean quantile score over all station-years at `τ = 1 − 1/T`, with a
/// percentile bootstrap interval.
pub fn mean_quantile_score(
    model_name: &str,
    predictions: &[HoldoutPrediction],
    return_period: f64,
    boot: &BootstrapConfig,
) -> Result<ScoreReport> {
    let tau = gev::prob_of_return_period(return_period)?;
    if !(boot.level > 0.0 && boot.level < 1.0) || boot.n_resamples == 0 {
        return Err(Error::Config("bootstrap needs a level in (0,1) and at least one resample".into()));
    }
    let per_station: Vec<Vec<f64>> = predictions
        .iter()
        .map(|p| p.observations.iter().map(|&y| quantile_score(p.quantile, y, tau)).collect())
        .collect();
    let scores: Vec<f64> = per_station.iter().flatten().copied().collect();
    if scores.is_empty() {
        return Err(Error::Domain("no holdout observations to score".into()));
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(boot.seed);
    let mut stats: Vec<f64> = (0..boot.n_resamples)
        .map(|_| {
            if boot.by_station {
                let (mut sum, mut n) = (0.0, 0usize);
                for _ in 0..per_station.len() {
                    let s = &per_station[rng.gen_range(0..per_station.len())];
                    sum += s.iter().sum::<f64>();
                    n += s.len();
                }
                if n == 0 {
                    mean
                } else {
                    sum / n as f64
                }
            } else {
                (0..scores.len()).map(|_| scores[rng.gen_range(0..scores.len())]).sum::<f64>()
                    / scores.len() as f64
            }
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - boot.level) / 2.0;
    Ok(ScoreReport {
        model_name: model_name.to_string(),
        return_period,
        mean_score: mean,
        ci_lo: empirical_quantile(&stats, tail).min(mean),
        ci_hi: empirical_quantile(&stats, 1.0 - tail).max(mean),
    })
}

/// One station per record-length stratum, chosen at random.
pub fn default_validation_stations(data: &Dataset, k: usize, seed: u64) -> Result<Vec<String>> {
    let n = data.n_stations();
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot pick {k} validation stations from {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&data.stations[a], &data.stations[b]);
        sa.n_years().cmp(&sb.n_years()).then_with(|| sa.id.cmp(&sb.id))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k)
        .map(|j| {
            let (lo, hi) = (j * n / k, (j + 1) * n / k);
            data.stations[order[rng.gen_range(lo..hi)]].id.clone()
        })
        .collect())
}

/// Chain seed for fold `k`, derived from the master seed.
pub fn fold_seed(master: u64, k: usize) -> u64 {
    master.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub chain: ChainConfig,
    pub prediction: PredictionConfig,
    pub return_periods: Vec<f64>,
    pub bootstrap: BootstrapConfig,
    /// Also fit the single-station model to every validation station.
    pub local: Option<LocalPriors>,
    pub keep_samples: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            chain: ChainConfig::default(),
            prediction: PredictionConfig::default(),
            return_periods: vec![10.0, 50.0, 100.0],
            bootstrap: BootstrapConfig::default(),
            local: Some(LocalPriors::default()),
            keep_samples: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub station_id: String,
    pub n_training: usize,
    pub theta_mean: [Vec<f64>; 3],
    pub inclusion: [Vec<f64>; 3],
    /// One summary per configured return period.
    pub return_levels: Vec<ReturnLevelSummary>,
    pub pits: Vec<PitRecord>,
    pub samples: Option<PosteriorSamples>,
}

/// Predictions of one model at the validation stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPredictions {
    pub model_name: String,
    pub station_ids: Vec<String>,
    /// `return_levels[i][j]`: station `i`, return period `j`.
    pub return_levels: Vec<Vec<ReturnLevelSummary>>,
    pub pits: Vec<PitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub models: Vec<ModelPredictions>,
    pub scores: Vec<ScoreReport>,
}

pub const OUT_OF_SAMPLE: &str = "regional_out_of_sample";
pub const IN_SAMPLE: &str = "regional_in_sample";
pub const LOCAL: &str = "local";

fn summaries(
    comps: &[GevParams<f64>],
    periods: &[f64],
    cfg: &PredictionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ReturnLevelSummary>> {
    periods
        .iter()
        .map(|&t| summarize_return_period(comps, t, cfg, rng))
        .collect()
}

fn block_summary(samples: &PosteriorSamples, f: impl Fn(&PosteriorSamples, GevParam) -> Vec<f64>) -> [Vec<f64>; 3] {
    GevParam::ALL.map(|b| f(samples, b))
}

/// Leave-one-station-out validation.
///
/// Each fold refits the regional model without the held-out station
/// (re-standardizing covariates on the remaining stations) and predicts it as
/// an ungauged site. In-sample predictions come from one fit to all stations
/// using the chain's random effects; local fits, if enabled, use only the
/// station's own record.
pub fn loo_cross_validate(data: &Dataset, fold_ids: &[String], priors: &Priors, cfg: &CvConfig) -> Result<CvResult> {
    if fold_ids.is_empty() {
        return Err(Error::Config("no validation stations given".into()));
    }
    let idx = fold_ids
        .iter()
        .map(|id| data.station_index(id))
        .collect::<Result<Vec<_>>>()?;
    let periods = &cfg.return_periods;

    let mut folds = Vec::with_capacity(fold_ids.len());
    let mut oos = ModelPredictions {
        model_name: OUT_OF_SAMPLE.into(),
        station_ids: fold_ids.to_vec(),
        return_levels: vec![],
        pits: vec![],
    };
    for (k, (id, &s)) in fold_ids.iter().zip(&idx).enumerate() {
        let training = data.without(&[id.as_str()])?;
        assert!(
            training.stations.iter().all(|st| &st.id != id),
            "held-out station {id} present in its training set"
        );
        let chain = ChainConfig {
            seed: fold_seed(cfg.chain.seed, k),
            ..cfg.chain.clone()
        };
        let samples = run_chain(&training, priors, &chain)?;
        let station = &data.stations[s];
        let x = samples.design.standardize(&station.raw_covariates)?;
        let pcfg = PredictionConfig {
            seed: fold_seed(cfg.prediction.seed, k),
            ..cfg.prediction.clone()
        };
        let mut rng = pcfg.rng();
        let comps = new_site_components(&samples, &x, &mut rng)?;
        let levels = summaries(&comps, periods, &pcfg, &mut rng)?;
        let pits = station_pits(id, &comps, &station.annual_maxima);
        oos.return_levels.push(levels.clone());
        oos.pits.extend(pits.iter().cloned());
        folds.push(FoldResult {
            station_id: id.clone(),
            n_training: training.n_stations(),
            theta_mean: block_summary(&samples, |sm, b| (0..sm.design.covariate_names.len() + 1).map(|i| sm.theta_mean(b, i)).collect()),
            inclusion: block_summary(&samples, PosteriorSamples::inclusion_probabilities),
            return_levels: levels,
            pits,
            samples: cfg.keep_samples.then_some(samples),
        });
    }

    let full = run_chain(data, priors, &cfg.chain)?;
    let mut ins = ModelPredictions {
        model_name: IN_SAMPLE.into(),
        station_ids: fold_ids.to_vec(),
        return_levels: vec![],
        pits: vec![],
    };
    let mut rng = cfg.prediction.rng();
    for (id, &s) in fold_ids.iter().zip(&idx) {
        let comps = full.site_components(s)?;
        ins.return_levels.push(summaries(&comps, periods, &cfg.prediction, &mut rng)?);
        ins.pits.extend(station_pits(id, &comps, &data.stations[s].annual_maxima));
    }
    let mut models = vec![oos, ins];

    if let Some(lp) = &cfg.local {
        let mut local = ModelPredictions {
            model_name: LOCAL.into(),
            station_ids: vec![],
            return_levels: vec![],
            pits: vec![],
        };
        for (id, &s) in fold_ids.iter().zip(&idx) {
            let station = &data.stations[s];
            if station.n_years() < MIN_YEARS {
                continue;
            }
            let fit = fit_local(station, &cfg.chain, lp)?;
            local.station_ids.push(id.clone());
            local.return_levels.push(summaries(&fit.draws, periods, &cfg.prediction, &mut rng)?);
            local.pits.extend(station_pits(id, &fit.draws, &station.annual_maxima));
        }
        models.push(local);
    }

    let mut scores = Vec::new();
    for m in &models {
        for (j, &t) in periods.iter().enumerate() {
            let preds: Vec<HoldoutPrediction> = m
                .station_ids
                .iter()
                .zip(&m.return_levels)
                .map(|(id, lv)| HoldoutPrediction {
                    station_id: id.clone(),
                    quantile: lv[j].predictive_quantile,
                    observations: data.stations[data.station_index(id).expect("validated id")].annual_maxima.clone(),
                })
                .collect();
            if !preds.is_empty() {
                scores.push(mean_quantile_score(&m.model_name, &preds, t, &cfg.bootstrap)?);
            }
        }
    }
    Ok(CvResult { folds, models, scores })
}

/// Box-plot summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxSummary {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Distribution of fold-wise posterior means of one coefficient.
pub fn stability_stats(fold_means: &[f64]) -> Result<BoxSummary> {
    if fold_means.len() < 2 {
        return Err(Error::Domain("stability statistics need at least two folds".into()));
    }
    let mut v = fold_means.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(BoxSummary {
        min: v[0],
        q1: empirical_quantile(&v, 0.25),
        median: empirical_quantile(&v, 0.5),
        q3: empirical_quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub block: GevParam,
    pub coefficient: String,
    pub summary: BoxSummary,
}

/// Stability summary for every non-constant coefficient of every block.
pub fn stability_table(folds: &[FoldResult], covariate_names: &[String]) -> Result<Vec<StabilityRow>> {
    let mut rows = Vec::new();
    for b in GevParam::ALL {
        for (j, name) in covariate_names.iter().enumerate() {
            let means: Vec<f64> = folds.iter().map(|f| f.theta_mean[b.index()][j + 1]).collect();
            rows.push(StabilityRow {
                block: b,
                coefficient: name.clone(),
                summary: stability_stats(&means)?,
            });
        }
    }
    Ok(rows)
}
