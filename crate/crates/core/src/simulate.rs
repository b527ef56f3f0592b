//! Synthetic datasets drawn from the hierarchical model itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{self, GevParams};
use crate::model::{Dataset, GevParam, HierState, RegressionBlock, StationRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordLength {
    Fixed { years: usize },
    /// Uniform on `min..=max`.
    Uniform { min: usize, max: usize },
}

/// Generating parameters. Coefficient vectors include the constant and apply
/// to standardized covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub theta: [Vec<f64>; 3],
    /// Random-effect precisions; `f64::INFINITY` disables a block's random effects.
    pub alpha: [f64; 3],
    pub record_length: RecordLength,
    #[serde(default = "default_prefix")]
    pub id_prefix: String,
}

fn default_prefix() -> String {
    "sim".into()
}

impl SimulationSpec {
    pub fn n_covariates(&self) -> usize {
        self.theta[0].len().saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        let p = self.theta[0].len();
        if p == 0 || self.theta.iter().any(|t| t.len() != p) {
            return Err(Error::Config("coefficient vectors must share a nonzero length".into()));
        }
        if self.alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("random-effect precisions must be positive".into()));
        }
        match self.record_length {
            RecordLength::Fixed { years } if years == 0 => {
                Err(Error::Config("record length must be positive".into()))
            }
            RecordLength::Uniform { min, max } if min == 0 || min > max => {
                Err(Error::Config(format!("invalid record length range {min}..={max}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedData {
    pub dataset: Dataset,
    /// Generating state. Blocks without random effects carry `alpha = f64::MAX`.
    pub truth: HierState,
    pub site_params: Vec<GevParams<f64>>,
    pub spec: SimulationSpec,
    pub seed: u64,
}

/// Draws `n_stations` stations: standard-normal covariates (z-scored on the
/// sample), site parameters from the regression plus random effects, and
/// annual maxima by inverse-transform sampling.
pub fn simulate_dataset(spec: &SimulationSpec, n_stations: usize, seed: u64) -> Result<SimulatedData> {
    spec.validate()?;
    if n_stations < 2 {
        return Err(Error::Config("simulation needs at least two stations".into()));
    }
    let k = spec.n_covariates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> = (0..n_stations)
        .map(|_| (0..k).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let lengths: Vec<usize> = (0..n_stations)
        .map(|_| match spec.record_length {
            RecordLength::Fixed { years } => years,
            RecordLength::Uniform { min, max } => rng.gen_range(min..=max),
        })
        .collect();
    let mut tau = [vec![0.0; n_stations], vec![0.0; n_stations], vec![0.0; n_stations]];
    for (b, t) in tau.iter_mut().enumerate() {
        let sd = 1.0 / spec.alpha[b].sqrt();
        for v in t.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * sd;
        }
    }
    let names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    let placeholder = raw
        .iter()
        .enumerate()
        .map(|(s, r)| StationRecord {
            id: format!("{}{:03}", spec.id_prefix, s),
            annual_maxima: vec![0.0],
            raw_covariates: r.clone(),
        })
        .collect();
    let design = Dataset::from_records(placeholder, names.clone())?;

    let blocks: [RegressionBlock; 3] = std::array::from_fn(|b| RegressionBlock {
        theta: spec.theta[b].clone(),
        inclusion: spec.theta[b].iter().enumerate().map(|(i, &t)| i == 0 || t != 0.0).collect(),
        alpha: spec.alpha[b].min(f64::MAX),
        tau: tau[b].clone(),
    });
    let truth = HierState { blocks };

    let mut records = Vec::with_capacity(n_stations);
    let mut site_params = Vec::with_capacity(n_stations);
    for s in 0..n_stations {
        let [mu, eta, xi] = truth.linear_predictors(&design.stations[s].covariates, s);
        let params = GevParams::new(mu, eta.exp(), xi)?;
        records.push(StationRecord {
            id: design.stations[s].id.clone(),
            annual_maxima: gev::sample(&params, lengths[s], &mut rng),
            raw_covariates: raw[s].clone(),
        });
        site_params.push(params);
    }
    let dataset = Dataset::with_standardization(records, names, design.standardization.clone())?;
    Ok(SimulatedData {
        dataset,
        truth,
        site_params,
        spec: spec.clone(),
        seed,
    })
}

/// Number of covariates in [`benchmark_spec`].
pub const BENCHMARK_COVARIATES: usize = 13;

/// Reference generator used by the recovery benchmarks: thirteen covariates,
/// four location effects and one log-inverse-scale effect.
pub fn benchmark_spec(years: usize) -> SimulationSpec {
    let p = BENCHMARK_COVARIATES + 1;
    let mut mu = vec![0.0; p];
    mu[..5].copy_from_slice(&[3.0, 1.0, -0.8, 0.6, -0.5]);
    let mut eta = vec![0.0; p];
    eta[0] = 2f64.ln();
    eta[5] = 0.3;
    let mut xi = vec![0.0; p];
    xi[0] = 0.1;
    SimulationSpec {
        theta: [mu, eta, xi],
        alpha: [25.0, 100.0, 400.0],
        record_length: RecordLength::Fixed { years },
        id_prefix: default_prefix(),
    }
}

impl SimulatedData {
    pub fn true_theta(&self, block: GevParam) -> &[f64] {
        &self.truth.block(block).theta
    }
}
