//! Data model and log-posterior of the hierarchical GEV regression.
//!
//! Every station `s` has site parameters composed from a shared regression and
//! a station random effect:
//!
//! ```text
//! μ_s = x_s·θ^μ + τ^μ_s
//! κ_s = exp(x_s·θ^κ + τ^κ_s)
//! ξ_s = x_s·θ^ξ + τ^ξ_s
//! τ^ν_s ~ N(0, 1/α^ν)
//! ```
//!
//! The covariate vector `x_s` starts with a constant 1, and the remaining
//! entries are z-scored with statistics computed on the training stations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{self, GevParams};
use crate::special::{gamma_log_pdf, normal_log_pdf, normal_log_pdf_prec};

/// The three GEV parameters, each driven by its own regression block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GevParam {
    /// Location μ.
    Location,
    /// Inverse scale κ, regressed on the log scale.
    InverseScale,
    /// Shape ξ.
    Shape,
}

impl GevParam {
    pub const ALL: [GevParam; 3] = [GevParam::Location, GevParam::InverseScale, GevParam::Shape];

    pub fn index(self) -> usize {
        match self {
            GevParam::Location => 0,
            GevParam::InverseScale => 1,
            GevParam::Shape => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            GevParam::Location => "mu",
            GevParam::InverseScale => "kappa",
            GevParam::Shape => "xi",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        GevParam::ALL.into_iter().find(|p| p.symbol() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

impl Standardization {
    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.sd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: String,
    pub annual_maxima: Vec<f64>,
    /// Standardized covariates; element 0 is the constant 1.
    pub covariates: Vec<f64>,
    /// Covariates as supplied, without the constant.
    pub raw_covariates: Vec<f64>,
}

impl Station {
    pub fn n_years(&self) -> usize {
        self.annual_maxima.len()
    }

    pub fn mean_annual_maximum(&self) -> f64 {
        self.annual_maxima.iter().sum::<f64>() / self.n_years() as f64
    }
}

/// Station input before standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct StationRecord {
    pub id: String,
    pub annual_maxima: Vec<f64>,
    pub raw_covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub stations: Vec<Station>,
    /// Names of the non-constant covariates.
    pub covariate_names: Vec<String>,
    pub standardization: Vec<Standardization>,
}

impl Dataset {
    /// Builds a dataset, z-scoring every covariate with statistics of these stations.
    pub fn from_records(records: Vec<StationRecord>, covariate_names: Vec<String>) -> Result<Self> {
        let k = covariate_names.len();
        let n = records.len();
        let mut standardization = Vec::with_capacity(k);
        for j in 0..k {
            let col: Vec<f64> = records
                .iter()
                .map(|r| r.raw_covariates.get(j).copied().unwrap_or(f64::NAN))
                .collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            let sd = var.sqrt();
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::data(
                    format!(
                        "covariate '{}' is constant across stations (sd = {sd}); cannot standardize",
                        covariate_names[j]
                    ),
                    None,
                ));
            }
            standardization.push(Standardization { mean, sd });
        }
        Self::with_standardization(records, covariate_names, standardization)
    }

    /// Builds a dataset using externally supplied standardization statistics.
    pub fn with_standardization(
        records: Vec<StationRecord>,
        covariate_names: Vec<String>,
        standardization: Vec<Standardization>,
    ) -> Result<Self> {
        let k = covariate_names.len();
        if standardization.len() != k {
            return Err(Error::Dimension {
                expected: k,
                found: standardization.len(),
            });
        }
        let mut stations = Vec::with_capacity(records.len());
        for r in records {
            if r.raw_covariates.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    found: r.raw_covariates.len(),
                });
            }
            if r.annual_maxima.is_empty() {
                return Err(Error::data(format!("station '{}' has no observations", r.id), None));
            }
            if let Some(v) = r.annual_maxima.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(
                    format!("station '{}' has a non-finite annual maximum {v}", r.id),
                    None,
                ));
            }
            let mut covariates = Vec::with_capacity(k + 1);
            covariates.push(1.0);
            covariates.extend(
                r.raw_covariates
                    .iter()
                    .zip(&standardization)
                    .map(|(&v, st)| st.apply(v)),
            );
            stations.push(Station {
                id: r.id,
                annual_maxima: r.annual_maxima,
                covariates,
                raw_covariates: r.raw_covariates,
            });
        }
        Ok(Self {
            stations,
            covariate_names,
            standardization,
        })
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    /// Length of the design vector, including the constant.
    pub fn n_coefficients(&self) -> usize {
        self.covariate_names.len() + 1
    }

    pub fn n_observations(&self) -> usize {
        self.stations.iter().map(Station::n_years).sum()
    }

    pub fn station_index(&self, id: &str) -> Result<usize> {
        self.stations
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownStation(id.to_string()))
    }

    /// Design vector for raw covariates under this dataset's standardization.
    pub fn standardize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.covariate_names.len() {
            return Err(Error::Dimension {
                expected: self.covariate_names.len(),
                found: raw.len(),
            });
        }
        let mut x = Vec::with_capacity(raw.len() + 1);
        x.push(1.0);
        x.extend(raw.iter().zip(&self.standardization).map(|(&v, s)| s.apply(v)));
        Ok(x)
    }

    pub fn records(&self) -> Vec<StationRecord> {
        self.stations
            .iter()
            .map(|s| StationRecord {
                id: s.id.clone(),
                annual_maxima: s.annual_maxima.clone(),
                raw_covariates: s.raw_covariates.clone(),
            })
            .collect()
    }

    /// Dataset without the listed stations, re-standardized on the remaining ones.
    pub fn without(&self, ids: &[&str]) -> Result<Self> {
        for id in ids {
            self.station_index(id)?;
        }
        let kept = self
            .records()
            .into_iter()
            .filter(|r| !ids.contains(&r.id.as_str()))
            .collect();
        Self::from_records(kept, self.covariate_names.clone())
    }

    /// Dataset restricted to a subset of covariates (by position among the non-constant ones).
    pub fn select_covariates(&self, keep: &[usize]) -> Result<Self> {
        let names = keep
            .iter()
            .map(|&j| {
                self.covariate_names
                    .get(j)
                    .cloned()
                    .ok_or(Error::Dimension {
                        expected: self.covariate_names.len(),
                        found: j + 1,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let std = keep.iter().map(|&j| self.standardization[j].clone()).collect();
        let records = self
            .records()
            .into_iter()
            .map(|mut r| {
                r.raw_covariates = keep.iter().map(|&j| r.raw_covariates[j]).collect();
                r
            })
            .collect();
        Self::with_standardization(records, names, std)
    }
}

/// Regression coefficients, model indicators and random effects of one GEV parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionBlock {
    pub theta: Vec<f64>,
    pub inclusion: Vec<bool>,
    /// Precision of the station random effects.
    pub alpha: f64,
    pub tau: Vec<f64>,
}

impl RegressionBlock {
    /// Intercept-only block with zero random effects.
    pub fn intercept_only(n_coefficients: usize, n_stations: usize, intercept: f64, alpha: f64) -> Self {
        let mut theta = vec![0.0; n_coefficients];
        let mut inclusion = vec![false; n_coefficients];
        theta[0] = intercept;
        inclusion[0] = true;
        Self {
            theta,
            inclusion,
            alpha,
            tau: vec![0.0; n_stations],
        }
    }

    /// Fixed-effect part `x·θ` of the linear predictor.
    pub fn fixed_effect(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.theta).map(|(a, b)| a * b).sum()
    }

    pub fn validate(&self, n_coefficients: usize, n_stations: usize) -> Result<()> {
        if self.theta.len() != n_coefficients || self.inclusion.len() != n_coefficients {
            return Err(Error::Dimension {
                expected: n_coefficients,
                found: self.theta.len().min(self.inclusion.len()),
            });
        }
        if self.tau.len() != n_stations {
            return Err(Error::Dimension {
                expected: n_stations,
                found: self.tau.len(),
            });
        }
        if !self.inclusion[0] {
            return Err(Error::Domain("intercept must always be included".into()));
        }
        if let Some(i) = (0..n_coefficients).find(|&i| !self.inclusion[i] && self.theta[i] != 0.0) {
            return Err(Error::Domain(format!("coefficient {i} is excluded but nonzero")));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("precision must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierState {
    pub blocks: [RegressionBlock; 3],
}

impl HierState {
    pub fn block(&self, p: GevParam) -> &RegressionBlock {
        &self.blocks[p.index()]
    }

    pub fn block_mut(&mut self, p: GevParam) -> &mut RegressionBlock {
        &mut self.blocks[p.index()]
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        self.blocks
            .iter()
            .try_for_each(|b| b.validate(data.n_coefficients(), data.n_stations()))
    }

    /// Linear predictors `(μ_s, η_s, ξ_s)` of station `s`, with `η = log κ`.
    pub fn linear_predictors(&self, x: &[f64], s: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, b) in out.iter_mut().zip(&self.blocks) {
            *o = b.fixed_effect(x) + b.tau[s];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Priors {
    /// Standard deviation of the normal prior on every included coefficient.
    pub theta_sd: f64,
    pub alpha_shape: f64,
    pub alpha_rate: f64,
    /// Prior probability that a non-constant covariate enters a regression.
    pub inclusion_prob: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            theta_sd: 1.0,
            alpha_shape: 0.1,
            alpha_rate: 0.1,
            inclusion_prob: 0.5,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("prior {name} must be positive, got {v}")))
            }
        };
        positive(self.theta_sd, "theta_sd")?;
        positive(self.alpha_shape, "alpha_shape")?;
        positive(self.alpha_rate, "alpha_rate")?;
        if !(self.inclusion_prob > 0.0 && self.inclusion_prob <= 1.0) {
            return Err(Error::Config(format!(
                "inclusion_prob must lie in (0,1], got {}",
                self.inclusion_prob
            )));
        }
        Ok(())
    }
}

fn check_dims(state: &HierState, data: &Dataset, s: usize) -> Result<()> {
    if s >= data.n_stations() {
        return Err(Error::UnknownStation(format!("index {s}")));
    }
    for b in &state.blocks {
        if b.theta.len() != data.n_coefficients() {
            return Err(Error::Dimension {
                expected: data.n_coefficients(),
                found: b.theta.len(),
            });
        }
        if b.tau.len() != data.n_stations() {
            return Err(Error::Dimension {
                expected: data.n_stations(),
                found: b.tau.len(),
            });
        }
    }
    Ok(())
}

/// GEV parameters of station `s` under `state`.
pub fn site_params(state: &HierState, data: &Dataset, s: usize) -> Result<GevParams<f64>> {
    check_dims(state, data, s)?;
    let [mu, eta, xi] = state.linear_predictors(&data.stations[s].covariates, s);
    GevParams::new(mu, eta.exp(), xi)
}

/// Log-likelihood of annual maxima under `(μ, η = log κ, ξ)`.
#[inline]
pub fn series_log_likelihood(ys: &[f64], mu: f64, eta: f64, xi: f64) -> f64 {
    let kappa = eta.exp();
    let mut acc = 0.0;
    for &y in ys {
        acc += gev::log_density_raw(y, mu, kappa, xi);
        if acc == f64::NEG_INFINITY {
            break;
        }
    }
    acc
}

pub fn station_log_likelihood(state: &HierState, data: &Dataset, s: usize) -> Result<f64> {
    check_dims(state, data, s)?;
    let [mu, eta, xi] = state.linear_predictors(&data.stations[s].covariates, s);
    Ok(series_log_likelihood(&data.stations[s].annual_maxima, mu, eta, xi))
}

/// Log-prior of one block, given its model indicators.
pub fn block_log_prior(block: &RegressionBlock, priors: &Priors) -> f64 {
    let theta: f64 = block
        .theta
        .iter()
        .zip(&block.inclusion)
        .filter(|(_, &inc)| inc)
        .map(|(&t, _)| normal_log_pdf(t, 0.0, priors.theta_sd))
        .sum();
    let tau: f64 = block.tau.iter().map(|&t| normal_log_pdf_prec(t, block.alpha)).sum();
    theta + tau + gamma_log_pdf(block.alpha, priors.alpha_shape, priors.alpha_rate)
}

/// Log-posterior density conditional on the model indicators, up to a constant.
///
/// Stations are summed in index order, so the result is bit-reproducible.
pub fn log_posterior(state: &HierState, data: &Dataset, priors: &Priors) -> Result<f64> {
    let mut total = 0.0;
    for s in 0..data.n_stations() {
        total += station_log_likelihood(state, data, s)?;
    }
    for b in &state.blocks {
        total += block_log_prior(b, priors);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_log_pdf;

    fn toy() -> Dataset {
        let recs = vec![
            StationRecord {
                id: "a".into(),
                annual_maxima: vec![1.0, 2.0, 1.5],
                raw_covariates: vec![10.0, 3.0],
            },
            StationRecord {
                id: "b".into(),
                annual_maxima: vec![0.5, 2.5],
                raw_covariates: vec![20.0, 1.0],
            },
        ];
        Dataset::from_records(recs, vec!["area".into(), "rain".into()]).unwrap()
    }

    fn toy_state(data: &Dataset) -> HierState {
        HierState {
            blocks: [
                RegressionBlock {
                    theta: vec![1.2, 0.3, 0.0],
                    inclusion: vec![true, true, false],
                    alpha: 4.0,
                    tau: vec![0.1, -0.2],
                },
                RegressionBlock {
                    theta: vec![0.2, 0.0, -0.1],
                    inclusion: vec![true, false, true],
                    alpha: 2.0,
                    tau: vec![0.05, 0.0],
                },
                RegressionBlock {
                    theta: vec![0.1, 0.0, 0.0],
                    inclusion: vec![true, false, false],
                    alpha: 50.0,
                    tau: vec![0.01, -0.02],
                },
            ],
        }
        .tap_validate(data)
    }

    trait TapValidate {
        fn tap_validate(self, d: &Dataset) -> Self;
    }
    impl TapValidate for HierState {
        fn tap_validate(self, d: &Dataset) -> Self {
            self.validate(d).unwrap();
            self
        }
    }

    #[test]
    fn standardized_design_has_constant_first() {
        let d = toy();
        for s in &d.stations {
            assert_eq!(s.covariates[0], 1.0);
        }
        // two stations: z-scores are ±1/√2
        let z = d.stations[0].covariates[1];
        assert!((z + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn constant_covariate_rejected() {
        let recs = vec![
            StationRecord {
                id: "a".into(),
                annual_maxima: vec![1.0],
                raw_covariates: vec![5.0],
            },
            StationRecord {
                id: "b".into(),
                annual_maxima: vec![1.0],
                raw_covariates: vec![5.0],
            },
        ];
        assert!(Dataset::from_records(recs, vec!["c".into()]).is_err());
    }

    #[test]
    fn standardization_is_idempotent() {
        let d = toy();
        let recs = d
            .stations
            .iter()
            .map(|s| StationRecord {
                id: s.id.clone(),
                annual_maxima: s.annual_maxima.clone(),
                raw_covariates: s.covariates[1..].to_vec(),
            })
            .collect();
        let again = Dataset::from_records(recs, d.covariate_names.clone()).unwrap();
        for (a, b) in d.stations.iter().zip(&again.stations) {
            for (x, y) in a.covariates.iter().zip(&b.covariates) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn intercept_only_site_params() {
        let d = toy();
        let state = HierState {
            blocks: [
                RegressionBlock::intercept_only(3, 2, 5.0, 1.0),
                RegressionBlock::intercept_only(3, 2, 0.7, 1.0),
                RegressionBlock::intercept_only(3, 2, -0.1, 1.0),
            ],
        };
        let p = site_params(&state, &d, 1).unwrap();
        assert_eq!(p.mu(), 5.0);
        assert!((p.kappa() - 0.7f64.exp()).abs() < 1e-15);
        assert_eq!(p.xi(), -0.1);

        let mut shifted = state.clone();
        shifted.block_mut(GevParam::InverseScale).tau[1] = 0.4;
        let q = site_params(&shifted, &d, 1).unwrap();
        assert!((q.kappa() / p.kappa() - 0.4f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn site_params_match_dot_products() {
        let d = toy();
        let st = toy_state(&d);
        for s in 0..2 {
            let x = &d.stations[s].covariates;
            let dot = |b: &RegressionBlock| x[0] * b.theta[0] + x[1] * b.theta[1] + x[2] * b.theta[2] + b.tau[s];
            let p = site_params(&st, &d, s).unwrap();
            assert!((p.mu() - dot(&st.blocks[0])).abs() < 1e-14);
            assert!((p.kappa() - dot(&st.blocks[1]).exp()).abs() < 1e-14);
            assert!((p.xi() - dot(&st.blocks[2])).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_reported() {
        let d = toy();
        let mut st = toy_state(&d);
        st.blocks[0].theta.push(0.0);
        assert!(matches!(site_params(&st, &d, 0), Err(Error::Dimension { .. })));
        assert!(site_params(&toy_state(&d), &d, 9).is_err());
    }

    #[test]
    fn single_observation_at_location() {
        let recs = vec![StationRecord {
            id: "a".into(),
            annual_maxima: vec![3.0],
            raw_covariates: vec![],
        }];
        let d = Dataset::from_records(recs, vec![]).unwrap();
        let st = HierState {
            blocks: [
                RegressionBlock::intercept_only(1, 1, 3.0, 1.0),
                RegressionBlock::intercept_only(1, 1, 0.5, 1.0),
                RegressionBlock::intercept_only(1, 1, 0.2, 1.0),
            ],
        };
        let ll = station_log_likelihood(&st, &d, 0).unwrap();
        assert!((ll - (0.5 - 1.0)).abs() < 1e-15);

        let mut below = st.clone();
        below.blocks[0].theta[0] = 20.0; // lower endpoint 20 − 1/(0.2·e^0.5) > 3
        assert_eq!(station_log_likelihood(&below, &d, 0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn likelihood_is_sum_of_point_densities() {
        let d = toy();
        let st = toy_state(&d);
        for s in 0..2 {
            let p = site_params(&st, &d, s).unwrap();
            let oracle: f64 = d.stations[s]
                .annual_maxima
                .iter()
                .map(|&y| gev::log_density(y, &p).unwrap())
                .sum();
            let ll = station_log_likelihood(&st, &d, s).unwrap();
            assert!((ll - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn log_posterior_hand_assembled() {
        let d = toy();
        let st = toy_state(&d);
        let pr = Priors::default();
        let mut oracle = 0.0;
        for s in 0..2 {
            oracle += station_log_likelihood(&st, &d, s).unwrap();
        }
        for b in &st.blocks {
            for i in 0..3 {
                if b.inclusion[i] {
                    oracle += normal_log_pdf(b.theta[i], 0.0, 1.0);
                }
            }
            for &t in &b.tau {
                oracle += normal_log_pdf(t, 0.0, 1.0 / b.alpha.sqrt());
            }
            oracle += gamma_log_pdf(b.alpha, 0.1, 0.1);
        }
        let lp = log_posterior(&st, &d, &pr).unwrap();
        assert!((lp - oracle).abs() < 1e-10);
    }

    #[test]
    fn prior_terms_isolate() {
        let d = toy();
        let mut st = toy_state(&d);
        for b in &mut st.blocks {
            b.tau.iter_mut().for_each(|t| *t = 0.0);
            b.alpha = 1.0;
        }
        let re: f64 = st.blocks[0].tau.iter().map(|&t| normal_log_pdf_prec(t, 1.0)).sum();
        assert!((re - 2.0 * normal_log_pdf(0.0, 0.0, 1.0)).abs() < 1e-15);

        let base = Priors::default();
        let wide = Priors {
            theta_sd: 2.0,
            ..base.clone()
        };
        let diff = log_posterior(&st, &d, &wide).unwrap() - log_posterior(&st, &d, &base).unwrap();
        let expected: f64 = st
            .blocks
            .iter()
            .flat_map(|b| b.theta.iter().zip(&b.inclusion))
            .filter(|(_, &inc)| inc)
            .map(|(&t, _)| normal_log_pdf(t, 0.0, 2.0) - normal_log_pdf(t, 0.0, 1.0))
            .sum();
        assert!((diff - expected).abs() < 1e-12);
    }

    #[test]
    fn changing_one_station_changes_one_term() {
        let d = toy();
        let st = toy_state(&d);
        let pr = Priors::default();
        let mut d2 = d.clone();
        d2.stations[1].annual_maxima[0] = 0.9;
        let delta = log_posterior(&st, &d2, &pr).unwrap() - log_posterior(&st, &d, &pr).unwrap();
        let local = station_log_likelihood(&st, &d2, 1).unwrap() - station_log_likelihood(&st, &d, 1).unwrap();
        assert!((delta - local).abs() < 1e-12);
        assert_eq!(
            station_log_likelihood(&st, &d2, 0).unwrap(),
            station_log_likelihood(&st, &d, 0).unwrap()
        );
    }

    #[test]
    fn dropping_a_coefficient_changes_prior_and_likelihood_only() {
        let d = toy();
        let st = toy_state(&d);
        let pr = Priors::default();
        let mut dropped = st.clone();
        dropped.blocks[0].inclusion[1] = false;
        dropped.blocks[0].theta[1] = 0.0;
        let lp0 = log_posterior(&st, &d, &pr).unwrap();
        let lp1 = log_posterior(&dropped, &d, &pr).unwrap();
        let ll = |s: &HierState| -> f64 { (0..2).map(|i| station_log_likelihood(s, &d, i).unwrap()).sum() };
        let expected = (ll(&dropped) - ll(&st)) - normal_log_pdf(0.3, 0.0, 1.0);
        assert!((lp1 - lp0 - expected).abs() < 1e-12);
    }

    #[test]
    fn without_restandardizes() {
        let recs = (0..4)
            .map(|i| StationRecord {
                id: format!("s{i}"),
                annual_maxima: vec![1.0],
                raw_covariates: vec![i as f64],
            })
            .collect();
        let d = Dataset::from_records(recs, vec!["c".into()]).unwrap();
        let sub = d.without(&["s3"]).unwrap();
        assert_eq!(sub.n_stations(), 3);
        assert!((sub.standardization[0].mean - 1.0).abs() < 1e-15);
        assert!(d.without(&["nope"]).is_err());
    }
}
