//! Single-station Bayesian GEV/Gumbel fit without covariates.
//!
//! Records of at least [`GEV_MIN_YEARS`] years get the three-parameter GEV;
//! shorter records (down to [`MIN_YEARS`]) get a Gumbel fit with `ξ = 0`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::model::{series_log_likelihood, Station};
use crate::prediction::{summarize_components, PredictionConfig, ReturnLevelSummary};
use crate::proposal::{
    gaussian_approx_proposal, numeric_approx, scalar_mh_step, series_loglik_and_kappa_derivs, Expansion,
};
use crate::sampler::{ChainConfig, Counter};
use crate::special::normal_log_pdf;

pub const MIN_YEARS: usize = 20;
pub const GEV_MIN_YEARS: usize = 50;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Independent normal priors on `μ`, `η = ln κ` and `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalPriors {
    pub mu_mean: f64,
    pub mu_sd: f64,
    pub eta_mean: f64,
    pub eta_sd: f64,
    pub xi_mean: f64,
    pub xi_sd: f64,
}

impl Default for LocalPriors {
    fn default() -> Self {
        Self {
            mu_mean: 0.0,
            mu_sd: 1e4,
            eta_mean: 0.0,
            eta_sd: 10.0,
            xi_mean: 0.0,
            xi_sd: 0.25,
        }
    }
}

impl LocalPriors {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [("mu_sd", self.mu_sd), ("eta_sd", self.eta_sd), ("xi_sd", self.xi_sd)] {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalFamily {
    Gev,
    Gumbel,
}

impl LocalFamily {
    pub fn for_record_length(n_years: usize) -> Result<Self> {
        if n_years < MIN_YEARS {
            Err(Error::Domain(format!(
                "local analysis needs at least {MIN_YEARS} years of data, station has {n_years}"
            )))
        } else if n_years < GEV_MIN_YEARS {
            Ok(Self::Gumbel)
        } else {
            Ok(Self::Gev)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSamples {
    pub station_id: String,
    pub family: LocalFamily,
    pub config: ChainConfig,
    pub priors: LocalPriors,
    pub acceptance_rates: BTreeMap<String, f64>,
    pub draws: Vec<GevParams<f64>>,
}

impl LocalSamples {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }
}

struct LocalTarget<'a> {
    ys: &'a [f64],
    priors: &'a LocalPriors,
    xi_bound: f64,
}

impl LocalTarget<'_> {
    fn ll(&self, [mu, eta, xi]: [f64; 3]) -> f64 {
        if xi.abs() >= self.xi_bound {
            return f64::NEG_INFINITY;
        }
        series_log_likelihood(self.ys, mu, eta, xi)
    }

    fn prior(&self, i: usize, v: f64) -> f64 {
        let p = self.priors;
        match i {
            0 => normal_log_pdf(v, p.mu_mean, p.mu_sd),
            1 => normal_log_pdf(v, p.eta_mean, p.eta_sd),
            _ => normal_log_pdf(v, p.xi_mean, p.xi_sd),
        }
    }

    /// Log conditional of component `i` at `v` with the others held at `at`.
    fn expansion(&self, at: [f64; 3], i: usize, v: f64) -> Expansion {
        let mut x = at;
        x[i] = v;
        let value = self.ll(x) + self.prior(i, v);
        if value == f64::NEG_INFINITY || value.is_nan() {
            return Expansion {
                value: f64::NEG_INFINITY,
                approx: None,
            };
        }
        if i == 1 {
            let (_, d1, d2) = series_loglik_and_kappa_derivs(self.ys, x[0], v, x[2]);
            let s2 = self.priors.eta_sd * self.priors.eta_sd;
            let approx = gaussian_approx_proposal(d1 - (v - self.priors.eta_mean) / s2, d2 - 1.0 / s2, v);
            return Expansion { value, approx };
        }
        let mut f = |t: f64| {
            let mut y = x;
            y[i] = t;
            self.ll(y) + self.prior(i, t)
        };
        Expansion {
            value,
            approx: numeric_approx(&mut f, v, value),
        }
    }
}

/// Gumbel method-of-moments starting point `(μ, ln κ)`.
fn moment_start(ys: &[f64]) -> Result<[f64; 2]> {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::Data {
            message: "annual maxima are constant".into(),
            line: None,
        });
    }
    let kappa = std::f64::consts::PI / (var * 6.0).sqrt();
    Ok([mean - EULER_GAMMA / kappa, kappa.ln()])
}

/// Fits the local model, updating `μ`, `ln κ` and (GEV only) `ξ` in turn.
pub fn fit_local(station: &Station, config: &ChainConfig, priors: &LocalPriors) -> Result<LocalSamples> {
    config.validate()?;
    priors.validate()?;
    let family = LocalFamily::for_record_length(station.n_years())?;
    let ys = &station.annual_maxima;
    let [mu0, eta0] = moment_start(ys)?;
    let target = LocalTarget {
        ys,
        priors,
        xi_bound: config.xi_bound,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = [mu0, eta0, 0.0];
    let active: &[usize] = match family {
        LocalFamily::Gev => &[0, 1, 2],
        LocalFamily::Gumbel => &[0, 1],
    };
    let names = ["mu", "kappa", "xi"];
    let mut counters = [Counter::default(); 3];
    let thin = config.effective_thin();
    let mut draws = Vec::with_capacity(config.n_retained());
    for it in 1..=config.n_iterations {
        for &i in active {
            let at = target.expansion(x, i, x[i]);
            let out = scalar_mh_step(x[i], at, config.fallback_step[i], &mut rng, |v| target.expansion(x, i, v));
            counters[i].attempts += 1;
            counters[i].accepts += u64::from(out.accepted);
            x[i] = out.value;
        }
        if it > config.n_burnin && (it - config.n_burnin) % thin == 0 {
            draws.push(GevParams::new(x[0], x[1].exp(), x[2])?);
        }
    }
    let acceptance_rates = active
        .iter()
        .map(|&i| (names[i].to_string(), counters[i].accepts as f64 / counters[i].attempts as f64))
        .collect();
    Ok(LocalSamples {
        station_id: station.id.clone(),
        family,
        config: config.clone(),
        priors: priors.clone(),
        acceptance_rates,
        draws,
    })
}

pub fn local_return_level(samples: &LocalSamples, prob: f64, cfg: &PredictionConfig) -> Result<ReturnLevelSummary> {
    summarize_components(&samples.draws, prob, cfg, &mut cfg.rng())
}
