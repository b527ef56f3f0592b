//! Return levels from posterior draws: per-draw quantiles, the mixture
//! predictive distribution and prediction at ungauged sites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{self, GevParams};
use crate::model::GevParam;
use crate::sampler::PosteriorSamples;
use crate::special::empirical_quantile;

/// Standardized covariates beyond this magnitude are taken to be raw values.
pub const MAX_STANDARDIZED: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictionConfig {
    pub credible_level: f64,
    pub sims_per_component: usize,
    pub seed: u64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            credible_level: 0.8,
            sims_per_component: 50,
            seed: 1,
        }
    }
}

impl PredictionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.credible_level > 0.0 && self.credible_level < 1.0) {
            return Err(Error::Config(format!(
                "credible level must lie in (0,1), got {}",
                self.credible_level
            )));
        }
        if self.sims_per_component == 0 {
            return Err(Error::Config("sims_per_component must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevelSummary {
    pub prob: f64,
    pub return_period: f64,
    pub posterior_median: f64,
    pub posterior_mean: f64,
    pub credible_lo: f64,
    pub credible_hi: f64,
    pub predictive_quantile: f64,
}

impl ReturnLevelSummary {
    pub fn credible_width(&self) -> f64 {
        self.credible_hi - self.credible_lo
    }
}

/// Per-draw return levels.
pub fn component_quantiles(components: &[GevParams<f64>], prob: f64) -> Result<Vec<f64>> {
    components.iter().map(|c| gev::quantile(prob, c)).collect()
}

/// Summary of per-draw quantiles plus the mixture predictive quantile.
pub fn summarize_components<R: Rng + ?Sized>(
    components: &[GevParams<f64>],
    prob: f64,
    cfg: &PredictionConfig,
    rng: &mut R,
) -> Result<ReturnLevelSummary> {
    cfg.validate()?;
    if components.is_empty() {
        return Err(Error::Domain("no posterior draws to summarize".into()));
    }
    let mut q = component_quantiles(components, prob)?;
    q.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.credible_level) / 2.0;
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    Ok(ReturnLevelSummary {
        prob,
        return_period: gev::return_period_of(prob)?,
        posterior_median: empirical_quantile(&q, 0.5),
        posterior_mean: mean,
        credible_lo: empirical_quantile(&q, tail),
        credible_hi: empirical_quantile(&q, 1.0 - tail),
        predictive_quantile: mixture_quantile(components, prob, cfg.sims_per_component, rng)?,
    })
}

/// As [`summarize_components`] for the return period `t`, reported exactly as given.
pub fn summarize_return_period<R: Rng + ?Sized>(
    components: &[GevParams<f64>],
    t: f64,
    cfg: &PredictionConfig,
    rng: &mut R,
) -> Result<ReturnLevelSummary> {
    let mut r = summarize_components(components, gev::prob_of_return_period(t)?, cfg, rng)?;
    r.return_period = t;
    Ok(r)
}

/// Empirical `prob`-quantile of `m` simulated observations from every component, pooled.
pub fn mixture_quantile<R: Rng + ?Sized>(
    components: &[GevParams<f64>],
    prob: f64,
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut pooled = mixture_sample(components, m, rng)?;
    gev::return_period_of(prob)?;
    pooled.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&pooled, prob))
}

pub fn mixture_sample<R: Rng + ?Sized>(components: &[GevParams<f64>], m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Domain("sims_per_component must be at least 1".into()));
    }
    if components.is_empty() {
        return Err(Error::Domain("empty mixture".into()));
    }
    let mut out = Vec::with_capacity(components.len() * m);
    for c in components {
        out.extend(gev::sample(c, m, rng));
    }
    Ok(out)
}

/// Equally weighted mixture CDF.
pub fn mixture_cdf(components: &[GevParams<f64>], y: f64) -> f64 {
    let n = components.len().max(1) as f64;
    components
        .iter()
        .map(|c| gev::cdf_raw(y, c.mu(), c.kappa(), c.xi()))
        .sum::<f64>()
        / n
}

/// Posterior return level at a training station, using its sampled random effects.
pub fn return_level_posterior(
    samples: &PosteriorSamples,
    station: usize,
    prob: f64,
    cfg: &PredictionConfig,
) -> Result<ReturnLevelSummary> {
    let comps = samples.site_components(station)?;
    summarize_components(&comps, prob, cfg, &mut cfg.rng())
}

/// Mixture predictive quantile at a training station.
pub fn predictive_quantile(
    samples: &PosteriorSamples,
    station: usize,
    prob: f64,
    sims_per_component: usize,
    seed: u64,
) -> Result<f64> {
    let comps = samples.site_components(station)?;
    mixture_quantile(&comps, prob, sims_per_component, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Site parameters for an ungauged site: fixed effects from each draw plus a
/// fresh random effect `τ ~ N(0, 1/α)` per block, drawn in location,
/// inverse-scale, shape order.
pub fn new_site_components<R: Rng + ?Sized>(
    samples: &PosteriorSamples,
    x_new: &[f64],
    rng: &mut R,
) -> Result<Vec<GevParams<f64>>> {
    let p = samples.design.covariate_names.len() + 1;
    if x_new.len() != p {
        return Err(Error::Dimension {
            expected: p,
            found: x_new.len(),
        });
    }
    if x_new[0] != 1.0 {
        return Err(Error::Domain("design vector must start with the constant 1".into()));
    }
    if let Some((j, v)) = x_new[1..].iter().enumerate().find(|(_, v)| !v.is_finite() || v.abs() > MAX_STANDARDIZED) {
        let name = &samples.design.covariate_names[j];
        return Err(Error::Domain(format!(
            "covariate {name} = {v} is not on the standardized scale of the training data"
        )));
    }
    samples
        .draws
        .iter()
        .map(|d| {
            let mut lin = [0.0; 3];
            for b in GevParam::ALL {
                let block = d.block(b);
                let z: f64 = rng.sample(StandardNormal);
                lin[b.index()] = block.fixed_effect(x_new) + z / block.alpha.sqrt();
            }
            GevParams::new(lin[0], lin[1].exp(), lin[2])
        })
        .collect()
}

/// Return level at an ungauged site with standardized design vector `x_new`.
pub fn predict_new_site(
    samples: &PosteriorSamples,
    x_new: &[f64],
    prob: f64,
    cfg: &PredictionConfig,
) -> Result<ReturnLevelSummary> {
    let mut rng = cfg.rng();
    let comps = new_site_components(samples, x_new, &mut rng)?;
    summarize_components(&comps, prob, cfg, &mut rng)
}

/// As [`predict_new_site`], taking raw covariate values.
pub fn predict_new_site_raw(
    samples: &PosteriorSamples,
    raw: &[f64],
    prob: f64,
    cfg: &PredictionConfig,
) -> Result<ReturnLevelSummary> {
    let x = samples.design.standardize(raw)?;
    predict_new_site(samples, &x, prob, cfg)
}
