//! Metropolis–Hastings-within-Gibbs sampler for the hierarchical GEV model.
//!
//! One sweep visits the location, log inverse scale and shape blocks in that
//! order, and within each block updates the included coefficients, the model
//! indicators (birth/death moves), the station random effects and finally the
//! random-effect precision (conjugate Gibbs draw).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::GevParams;
use crate::model::{series_log_likelihood, Dataset, GevParam, HierState, Priors, RegressionBlock, Standardization};
use crate::proposal::{
    gaussian_approx_proposal, mh_accept, numeric_approx, proposal_log_density, scalar_mh_step,
    series_loglik_and_kappa_derivs, Expansion,
};
use crate::special::{normal_log_pdf, normal_log_pdf_prec};

pub const SAMPLES_SCHEMA: &str = "rffa-posterior/1";
pub const CHECKPOINT_SCHEMA: &str = "rffa-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub n_iterations: usize,
    pub n_burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Random-walk standard deviations (location, log inverse scale, shape)
    /// used when the Gaussian approximation is unavailable.
    pub fallback_step: [f64; 3],
    /// Proposals giving any station `|ξ| ≥ xi_bound` are rejected.
    pub xi_bound: f64,
    /// Upper bound on stored draws; the thinning interval grows to respect it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_retained: Option<usize>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iterations: 100_000,
            n_burnin: 20_000,
            thin: 1,
            seed: 1,
            fallback_step: [0.1, 0.1, 0.05],
            xi_bound: 1.0,
            max_retained: None,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burnin >= self.n_iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.n_burnin, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning interval must be at least 1".into()));
        }
        if self.fallback_step.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("fallback steps must be positive".into()));
        }
        if !(self.xi_bound > 0.0) {
            return Err(Error::Config("xi_bound must be positive".into()));
        }
        if self.max_retained == Some(0) {
            return Err(Error::Config("max_retained must be positive".into()));
        }
        Ok(())
    }

    /// Thinning interval after applying `max_retained`.
    pub fn effective_thin(&self) -> usize {
        let kept = self.n_iterations.saturating_sub(self.n_burnin);
        match self.max_retained {
            Some(cap) if kept / self.thin > cap => kept.div_ceil(cap).max(self.thin),
            _ => self.thin,
        }
    }

    pub fn n_retained(&self) -> usize {
        self.n_iterations.saturating_sub(self.n_burnin) / self.effective_thin()
    }
}

/// Covariate design of the training stations, carried with the draws so that
/// predictions do not need the original dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub station_ids: Vec<String>,
    pub covariates: Vec<Vec<f64>>,
    pub covariate_names: Vec<String>,
    pub standardization: Vec<Standardization>,
}

impl Design {
    pub fn from_dataset(data: &Dataset) -> Self {
        Self {
            station_ids: data.stations.iter().map(|s| s.id.clone()).collect(),
            covariates: data.stations.iter().map(|s| s.covariates.clone()).collect(),
            covariate_names: data.covariate_names.clone(),
            standardization: data.standardization.clone(),
        }
    }

    pub fn station_index(&self, id: &str) -> Result<usize> {
        self.station_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownStation(id.to_string()))
    }

    /// Design vector (with leading 1) for raw covariate values.
    pub fn standardize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.covariate_names.len() {
            return Err(Error::Dimension {
                expected: self.covariate_names.len(),
                found: raw.len(),
            });
        }
        let mut x = vec![1.0];
        x.extend(raw.iter().zip(&self.standardization).map(|(&v, s)| s.apply(v)));
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counter {
    pub attempts: u64,
    pub accepts: u64,
}

impl Counter {
    fn record(&mut self, accepted: bool) {
        self.attempts += 1;
        self.accepts += u64::from(accepted);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub schema_version: String,
    pub config: ChainConfig,
    pub priors: Priors,
    pub design: Design,
    /// Acceptance rate per update type, e.g. `theta.mu` or `tau.kappa`.
    pub acceptance_rates: BTreeMap<String, f64>,
    pub draws: Vec<HierState>,
}

impl PosteriorSamples {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    /// Per-draw GEV parameters of a training station, using the sampled random effects.
    pub fn site_components(&self, station: usize) -> Result<Vec<GevParams<f64>>> {
        let x = self
            .design
            .covariates
            .get(station)
            .ok_or_else(|| Error::UnknownStation(format!("index {station}")))?;
        self.draws
            .iter()
            .map(|d| {
                let [mu, eta, xi] = d.linear_predictors(x, station);
                GevParams::new(mu, eta.exp(), xi)
            })
            .collect()
    }

    /// Posterior inclusion frequency of every coefficient of one block.
    pub fn inclusion_probabilities(&self, block: GevParam) -> Vec<f64> {
        let p = self.design.covariate_names.len() + 1;
        let n = self.draws.len().max(1) as f64;
        (0..p)
            .map(|i| {
                self.draws.iter().filter(|d| d.block(block).inclusion[i]).count() as f64 / n
            })
            .collect()
    }

    pub fn theta_trace(&self, block: GevParam, i: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d.block(block).theta[i]).collect()
    }

    pub fn theta_mean(&self, block: GevParam, i: usize) -> f64 {
        let t = self.theta_trace(block, i);
        t.iter().sum::<f64>() / t.len().max(1) as f64
    }
}

/// Resumable chain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: String,
    pub iteration: usize,
    pub state: HierState,
    pub rng: ChaCha8Rng,
    pub counters: BTreeMap<String, Counter>,
    pub priors: Priors,
    pub config: ChainConfig,
}

/// Starting point from per-station Gumbel moment estimates.
///
/// Intercepts are the averages of the station estimates, random effects the
/// deviations from them, and precisions the inverse spread of the estimates.
pub fn initial_state(data: &Dataset) -> HierState {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let n = data.n_stations();
    let p = data.n_coefficients();
    let pooled: Vec<f64> = data.stations.iter().flat_map(|s| s.annual_maxima.iter().copied()).collect();
    let pooled_sd = sample_sd(&pooled).max(1e-8);
    let (mut mus, mut etas) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for s in &data.stations {
        let sd = if s.n_years() > 2 { sample_sd(&s.annual_maxima) } else { pooled_sd };
        let sd = if sd > 0.0 { sd } else { pooled_sd };
        let kappa = std::f64::consts::PI / (sd * 6f64.sqrt());
        mus.push(s.mean_annual_maximum() - EULER / kappa);
        etas.push(kappa.ln());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mu0, eta0) = (mean(&mus), mean(&etas));
    let precision = |v: &[f64]| {
        let sd = sample_sd(v);
        if sd > 0.0 {
            (1.0 / (sd * sd)).clamp(1e-6, 1e6)
        } else {
            1.0
        }
    };
    let mut location = RegressionBlock::intercept_only(p, n, mu0, precision(&mus));
    let mut scale = RegressionBlock::intercept_only(p, n, eta0, precision(&etas));
    let shape = RegressionBlock::intercept_only(p, n, 0.0, 100.0);
    for s in 0..n {
        location.tau[s] = mus[s] - mu0;
        scale.tau[s] = etas[s] - eta0;
    }
    HierState {
        blocks: [location, scale, shape],
    }
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Expansion of the τ^κ conditional for one station: series log-likelihood
/// plus the `N(0, 1/α)` prior, with analytic derivatives.
pub(crate) fn kappa_tau_expansion(ys: &[f64], mu: f64, eta_fixed: f64, xi: f64, tau: f64, alpha: f64) -> Expansion {
    let (ll, d1, d2) = series_loglik_and_kappa_derivs(ys, mu, eta_fixed + tau, xi);
    let value = ll + normal_log_pdf_prec(tau, alpha);
    if value == f64::NEG_INFINITY {
        return Expansion { value, approx: None };
    }
    Expansion {
        value,
        approx: gaussian_approx_proposal(d1 - alpha * tau, d2 - alpha, tau),
    }
}

/// Immutable model context plus the mutable state and its caches.
struct Ctx<'a> {
    data: &'a Dataset,
    priors: Priors,
    config: ChainConfig,
    state: HierState,
    /// Current linear predictors (μ_s, η_s, ξ_s) including random effects.
    lin: [Vec<f64>; 3],
    /// Current per-station log-likelihoods.
    ll: Vec<f64>,
}

impl Ctx<'_> {
    fn refresh(&mut self) {
        for s in 0..self.data.n_stations() {
            let p = self.state.linear_predictors(&self.data.stations[s].covariates, s);
            for b in 0..3 {
                self.lin[b][s] = p[b];
            }
            self.ll[s] = self.station_ll(s, p);
        }
    }

    fn params(&self, s: usize) -> [f64; 3] {
        [self.lin[0][s], self.lin[1][s], self.lin[2][s]]
    }

    #[inline]
    fn station_ll(&self, s: usize, p: [f64; 3]) -> f64 {
        if p[2].abs() >= self.config.xi_bound {
            return f64::NEG_INFINITY;
        }
        series_log_likelihood(&self.data.stations[s].annual_maxima, p[0], p[1], p[2])
    }

    fn total_ll(&self) -> f64 {
        self.ll.iter().sum()
    }

    /// Log-likelihood after shifting coefficient `i` of block `b` by `delta`.
    fn shifted_ll(&self, b: usize, i: usize, delta: f64, mut out: Option<&mut Vec<f64>>) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.data.n_stations() {
            let x = self.data.stations[s].covariates[i];
            let l = if x == 0.0 {
                self.ll[s]
            } else {
                let mut p = self.params(s);
                p[b] += x * delta;
                self.station_ll(s, p)
            };
            if l == f64::NEG_INFINITY {
                return l;
            }
            acc += l;
            if let Some(o) = out.as_deref_mut() {
                o[s] = l;
            }
        }
        acc
    }

    /// Log-likelihood and chain-rule derivatives for a shift of a log-inverse-scale coefficient.
    fn shifted_ll_kappa(&self, i: usize, delta: f64, mut out: Option<&mut Vec<f64>>) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for s in 0..self.data.n_stations() {
            let x = self.data.stations[s].covariates[i];
            let [mu, eta, xi] = self.params(s);
            if xi.abs() >= self.config.xi_bound {
                return (f64::NEG_INFINITY, 0.0, 0.0);
            }
            let (l, a, c) =
                series_loglik_and_kappa_derivs(&self.data.stations[s].annual_maxima, mu, eta + x * delta, xi);
            if l == f64::NEG_INFINITY {
                return (l, 0.0, 0.0);
            }
            v += l;
            d1 += x * a;
            d2 += x * x * c;
            if let Some(o) = out.as_deref_mut() {
                o[s] = l;
            }
        }
        (v, d1, d2)
    }

    /// Log-target of coefficient `i` of block `b` at `value` (likelihood plus
    /// its normal prior), with the proposal built there.
    fn theta_expansion(&self, b: usize, i: usize, value: f64, out: Option<&mut Vec<f64>>) -> Expansion {
        let sd = self.priors.theta_sd;
        let delta = value - self.state.blocks[b].theta[i];
        let prior = |t: f64| normal_log_pdf(t, 0.0, sd);
        if b == GevParam::InverseScale.index() {
            let (ll, d1, d2) = self.shifted_ll_kappa(i, delta, out);
            let v = ll + prior(value);
            if v == f64::NEG_INFINITY {
                return Expansion { value: v, approx: None };
            }
            let approx = gaussian_approx_proposal(d1 - value / (sd * sd), d2 - 1.0 / (sd * sd), value);
            return Expansion { value: v, approx };
        }
        let v = self.shifted_ll(b, i, delta, out) + prior(value);
        if v == f64::NEG_INFINITY {
            return Expansion { value: v, approx: None };
        }
        let base = self.state.blocks[b].theta[i];
        let mut f = |t: f64| self.shifted_ll(b, i, t - base, None) + prior(t);
        Expansion {
            value: v,
            approx: numeric_approx(&mut f, value, v),
        }
    }

    fn tau_expansion(&self, b: usize, s: usize, tau: f64) -> Expansion {
        let alpha = self.state.blocks[b].alpha;
        let current_tau = self.state.blocks[b].tau[s];
        let mut p = self.params(s);
        let fixed = p[b] - current_tau;
        if b == GevParam::InverseScale.index() {
            if p[2].abs() >= self.config.xi_bound {
                return Expansion {
                    value: f64::NEG_INFINITY,
                    approx: None,
                };
            }
            return kappa_tau_expansion(&self.data.stations[s].annual_maxima, p[0], fixed, p[2], tau, alpha);
        }
        let mut f = |t: f64| {
            p[b] = fixed + t;
            self.station_ll(s, p) + normal_log_pdf_prec(t, alpha)
        };
        let value = f(tau);
        if value == f64::NEG_INFINITY {
            return Expansion { value, approx: None };
        }
        Expansion {
            value,
            approx: numeric_approx(&mut f, tau, value),
        }
    }

    fn commit_theta(&mut self, b: usize, i: usize, value: f64, ll: &[f64]) {
        let delta = value - self.state.blocks[b].theta[i];
        self.state.blocks[b].theta[i] = value;
        for s in 0..self.data.n_stations() {
            self.lin[b][s] += self.data.stations[s].covariates[i] * delta;
        }
        self.ll.copy_from_slice(ll);
    }
}

/// A running Markov chain over [`HierState`].
pub struct Chain<'a> {
    ctx: Ctx<'a>,
    rng: ChaCha8Rng,
    iteration: usize,
    counters: BTreeMap<String, Counter>,
    buf: Vec<f64>,
}

impl<'a> Chain<'a> {
    pub fn new(data: &'a Dataset, priors: Priors, config: ChainConfig, init: HierState) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::assemble(data, priors, config, init, rng, 0, BTreeMap::new())
    }

    pub fn with_default_start(data: &'a Dataset, priors: Priors, config: ChainConfig) -> Result<Self> {
        let init = initial_state(data);
        Self::new(data, priors, config, init)
    }

    pub fn from_checkpoint(data: &'a Dataset, cp: Checkpoint) -> Result<Self> {
        if cp.schema_version != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported checkpoint schema '{}'",
                cp.schema_version
            )));
        }
        Self::assemble(data, cp.priors, cp.config, cp.state, cp.rng, cp.iteration, cp.counters)
    }

    fn assemble(
        data: &'a Dataset,
        priors: Priors,
        config: ChainConfig,
        state: HierState,
        rng: ChaCha8Rng,
        iteration: usize,
        counters: BTreeMap<String, Counter>,
    ) -> Result<Self> {
        if data.n_stations() == 0 {
            return Err(Error::Config("dataset has no stations".into()));
        }
        config.validate()?;
        priors.validate()?;
        state.validate(data)?;
        let n = data.n_stations();
        let mut ctx = Ctx {
            data,
            priors,
            config,
            state,
            lin: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            ll: vec![0.0; n],
        };
        ctx.refresh();
        if ctx.total_ll() == f64::NEG_INFINITY {
            return Err(Error::Numeric(
                "initial state assigns zero likelihood to the data (support or shape bound violated)".into(),
            ));
        }
        Ok(Self {
            ctx,
            rng,
            iteration,
            counters,
            buf: vec![0.0; n],
        })
    }

    pub fn state(&self) -> &HierState {
        &self.ctx.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn config(&self) -> &ChainConfig {
        &self.ctx.config
    }

    fn count(&mut self, kind: &str, block: usize, accepted: bool) {
        let key = format!("{kind}.{}", GevParam::ALL[block].symbol());
        self.counters.entry(key).or_default().record(accepted);
    }

    /// MH update of every included coefficient of one block.
    pub fn update_theta(&mut self, block: GevParam) {
        let b = block.index();
        let step = self.ctx.config.fallback_step[b];
        for i in 0..self.ctx.state.blocks[b].theta.len() {
            if !self.ctx.state.blocks[b].inclusion[i] {
                continue;
            }
            let current = self.ctx.state.blocks[b].theta[i];
            let ctx = &self.ctx;
            let buf = &mut self.buf;
            let at_current = ctx.theta_expansion(b, i, current, None);
            let out = scalar_mh_step(current, at_current, step, &mut self.rng, |v| {
                ctx.theta_expansion(b, i, v, Some(buf))
            });
            if out.accepted {
                let ll = std::mem::take(&mut self.buf);
                self.ctx.commit_theta(b, i, out.value, &ll);
                self.buf = ll;
            }
            self.count("theta", b, out.accepted);
        }
    }

    /// Birth/death moves on the model indicators of one block. The constant is never toggled.
    ///
    /// A birth draws the new coefficient from the Gaussian approximation of its
    /// conditional at zero; a death sets it to zero. The reverse move is
    /// deterministic, so only the birth proposal density enters the ratio.
    pub fn update_inclusion(&mut self, block: GevParam) {
        let b = block.index();
        let step = self.ctx.config.fallback_step[b];
        let pi = self.ctx.priors.inclusion_prob;
        let (log_in, log_out) = (pi.ln(), (1.0 - pi).ln());
        for i in 1..self.ctx.state.blocks[b].theta.len() {
            let included = self.ctx.state.blocks[b].inclusion[i];
            let current = self.ctx.state.blocks[b].theta[i];
            let ctx = &self.ctx;
            let buf = &mut self.buf;
            let (accepted, new_value) = if !included {
                let at_zero = ctx.theta_expansion(b, i, 0.0, None);
                let proposed = crate::proposal::draw_proposal(0.0, at_zero.approx, step, &mut self.rng);
                let at_new = ctx.theta_expansion(b, i, proposed, Some(buf));
                let q = proposal_log_density(proposed, 0.0, at_zero.approx, step);
                let excluded = ctx.total_ll() + log_out;
                let ok = mh_accept(at_new.value + log_in, excluded, 0.0, q, &mut self.rng);
                (ok, proposed)
            } else {
                let at_zero = ctx.theta_expansion(b, i, 0.0, Some(buf));
                let q = proposal_log_density(current, 0.0, at_zero.approx, step);
                let prior_zero = normal_log_pdf(0.0, 0.0, ctx.priors.theta_sd);
                let excluded = at_zero.value - prior_zero + log_out;
                let kept = ctx.total_ll() + normal_log_pdf(current, 0.0, ctx.priors.theta_sd) + log_in;
                let ok = mh_accept(excluded, kept, q, 0.0, &mut self.rng);
                (ok, 0.0)
            };
            if accepted {
                let ll = std::mem::take(&mut self.buf);
                self.ctx.commit_theta(b, i, new_value, &ll);
                self.buf = ll;
                self.ctx.state.blocks[b].inclusion[i] = !included;
            }
            self.count("inclusion", b, accepted);
        }
    }

    /// MH update of every station's random effect in one block.
    pub fn update_tau(&mut self, block: GevParam) {
        let b = block.index();
        let step = self.ctx.config.fallback_step[b];
        for s in 0..self.ctx.data.n_stations() {
            let current = self.ctx.state.blocks[b].tau[s];
            let ctx = &self.ctx;
            let at_current = ctx.tau_expansion(b, s, current);
            let out = scalar_mh_step(current, at_current, step, &mut self.rng, |t| ctx.tau_expansion(b, s, t));
            if out.accepted {
                let alpha = self.ctx.state.blocks[b].alpha;
                self.ctx.lin[b][s] += out.value - current;
                self.ctx.state.blocks[b].tau[s] = out.value;
                self.ctx.ll[s] = out.expansion.value - normal_log_pdf_prec(out.value, alpha);
            }
            self.count("tau", b, out.accepted);
        }
    }

    /// Conjugate draw `α ~ Gamma(shape + S/2, rate + Σ τ²/2)`.
    pub fn update_alpha(&mut self, block: GevParam) {
        let b = block.index();
        let blk = &self.ctx.state.blocks[b];
        let shape = self.ctx.priors.alpha_shape + blk.tau.len() as f64 / 2.0;
        let rate = self.ctx.priors.alpha_rate + blk.tau.iter().map(|t| t * t).sum::<f64>() / 2.0;
        let draw = Gamma::new(shape, 1.0 / rate)
            .expect("gamma parameters are positive")
            .sample(&mut self.rng);
        // guard against underflow to exactly zero for extremely diffuse effects
        self.ctx.state.blocks[b].alpha = draw.max(f64::MIN_POSITIVE);
        self.count("alpha", b, true);
    }

    /// One full sweep over all blocks.
    pub fn sweep(&mut self) {
        self.ctx.refresh();
        for block in GevParam::ALL {
            self.update_theta(block);
            self.update_inclusion(block);
            self.update_tau(block);
            self.update_alpha(block);
        }
        self.iteration += 1;
    }

    /// Runs sweeps until `until` iterations are done, appending retained draws.
    pub fn advance(&mut self, until: usize, sink: &mut Vec<HierState>) {
        let burnin = self.ctx.config.n_burnin;
        let thin = self.ctx.config.effective_thin();
        while self.iteration < until {
            self.sweep();
            if self.iteration > burnin && (self.iteration - burnin) % thin == 0 {
                sink.push(self.ctx.state.clone());
            }
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA.to_string(),
            iteration: self.iteration,
            state: self.ctx.state.clone(),
            rng: self.rng.clone(),
            counters: self.counters.clone(),
            priors: self.ctx.priors.clone(),
            config: self.ctx.config.clone(),
        }
    }

    pub fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        self.counters
            .iter()
            .filter(|(_, c)| c.attempts > 0)
            .map(|(k, c)| (k.clone(), c.accepts as f64 / c.attempts as f64))
            .collect()
    }

    /// Packages retained draws with the chain's metadata.
    pub fn into_samples(self, draws: Vec<HierState>) -> PosteriorSamples {
        PosteriorSamples {
            schema_version: SAMPLES_SCHEMA.to_string(),
            acceptance_rates: self.acceptance_rates(),
            config: self.ctx.config.clone(),
            priors: self.ctx.priors.clone(),
            design: Design::from_dataset(self.ctx.data),
            draws,
        }
    }

    pub fn rng_mut(&mut self) -> &mut impl Rng {
        &mut self.rng
    }
}

/// Runs a full chain from the default starting point.
pub fn run_chain(data: &Dataset, priors: &Priors, config: &ChainConfig) -> Result<PosteriorSamples> {
    let chain = Chain::with_default_start(data, priors.clone(), config.clone())?;
    Ok(finish(chain))
}

/// Runs a full chain from a supplied starting state.
pub fn run_chain_from(
    data: &Dataset,
    priors: &Priors,
    config: &ChainConfig,
    init: HierState,
) -> Result<PosteriorSamples> {
    let chain = Chain::new(data, priors.clone(), config.clone(), init)?;
    Ok(finish(chain))
}

fn finish(mut chain: Chain<'_>) -> PosteriorSamples {
    let mut draws = Vec::with_capacity(chain.config().n_retained());
    let n = chain.config().n_iterations;
    chain.advance(n, &mut draws);
    chain.into_samples(draws)
}
