//! Covariate pre-selection by bidirectional stepwise least squares on AIC.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Index-flood response: mean annual maximum per station, optionally log-transformed.
pub fn index_flood_response(data: &Dataset, log: bool) -> Vec<f64> {
    data.stations
        .iter()
        .map(|s| {
            let m = s.mean_annual_maximum();
            if log {
                m.ln()
            } else {
                m
            }
        })
        .collect()
}

fn residual_sum_of_squares(x: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> f64 {
    let sub = x.select_columns(cols);
    let svd = sub.clone().svd(true, true);
    match svd.solve(y, 1e-12) {
        Ok(beta) => (y - sub * beta).norm_squared(),
        Err(_) => f64::INFINITY,
    }
}

/// `n·log(RSS/n) + 2k`, with the RSS floored relative to the total sum of
/// squares so that exact fits compare on parameter count alone.
fn aic(rss: f64, tss: f64, n: usize, k: usize) -> f64 {
    let floor = (tss * 1e-20).max(f64::MIN_POSITIVE);
    let n = n as f64;
    n * (rss.max(floor) / n).ln() + 2.0 * k as f64
}

/// Bidirectional stepwise search starting from the intercept-only model.
///
/// Returns inclusion flags over the full design (element 0 is the constant and
/// is always `true`). At each step every single addition or removal is scored
/// and the best strict AIC improvement is taken; ties go to the lowest index.
pub fn stepwise_aic_selection(data: &Dataset, response: &[f64]) -> Result<Vec<bool>> {
    let n = data.n_stations();
    let p = data.n_coefficients();
    if response.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: response.len(),
        });
    }
    if n < p + 1 {
        return Err(Error::Domain(format!(
            "stepwise selection needs at least {} stations for {} candidate covariates, got {n}",
            p + 1,
            p - 1
        )));
    }
    let x = DMatrix::from_fn(n, p, |i, j| data.stations[i].covariates[j]);
    let y = DVector::from_column_slice(response);
    let mean = y.mean();
    let tss = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();

    let mut included = vec![false; p];
    included[0] = true;
    let score = |inc: &[bool]| {
        let cols: Vec<usize> = (0..p).filter(|&j| inc[j]).collect();
        aic(residual_sum_of_squares(&x, &y, &cols), tss, n, cols.len())
    };
    let mut current = score(&included);
    loop {
        let mut best: Option<(f64, usize)> = None;
        for j in 1..p {
            let mut trial = included.clone();
            trial[j] = !trial[j];
            let s = score(&trial);
            if s < current && best.map_or(true, |(b, _)| s < b) {
                best = Some((s, j));
            }
        }
        match best {
            Some((s, j)) => {
                included[j] = !included[j];
                current = s;
            }
            None => return Ok(included),
        }
    }
}
