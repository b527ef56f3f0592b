//! Generalized extreme value distribution in the (location, inverse scale, shape)
//! parametrization.
//!
//! With `h(y) = 1 + ξ·κ·(y − μ)` the density is
//! `κ · h^{−(ξ+1)/ξ} · exp(−h^{−1/ξ})` on `h > 0`, and the CDF is
//! `exp(−h^{−1/ξ})`. For `|ξ| < XI_EPS` the Gumbel limit
//! `κ · exp(−κ(y−μ)) · exp(−exp(−κ(y−μ)))` is used instead.

use rand::distributions::{Distribution, Open01};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special;

/// Shape magnitude below which the Gumbel formulas are used.
pub const XI_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams<T> {
    mu: T,
    kappa: T,
    xi: T,
}

impl<T: Real> GevParams<T> {
    pub fn new(mu: T, kappa: T, xi: T) -> Result<Self> {
        if !mu.is_finite() || !kappa.is_finite() || !xi.is_finite() {
            return Err(Error::Domain(format!(
                "GEV parameters must be finite (mu={mu}, kappa={kappa}, xi={xi})"
            )));
        }
        if kappa <= T::zero() {
            return Err(Error::Domain(format!("inverse scale must be positive, got {kappa}")));
        }
        Ok(Self { mu, kappa, xi })
    }

    /// Gumbel distribution (`ξ = 0`).
    pub fn gumbel(mu: T, kappa: T) -> Result<Self> {
        Self::new(mu, kappa, T::zero())
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn xi(&self) -> T {
        self.xi
    }

    /// Conventional scale `σ = 1/κ`.
    pub fn scale(&self) -> T {
        self.kappa.recip()
    }

    pub fn is_gumbel(&self) -> bool {
        self.xi.abs() < T::lit(XI_EPS)
    }

    pub fn in_support(&self, y: T) -> bool {
        self.is_gumbel() || self.xi * self.kappa * (y - self.mu) > -T::one()
    }

    /// Lower and upper endpoints of the support (possibly infinite).
    pub fn support(&self) -> (T, T) {
        if self.is_gumbel() {
            (T::neg_infinity(), T::infinity())
        } else {
            let end = self.mu - (self.kappa * self.xi).recip();
            if self.xi > T::zero() {
                (end, T::infinity())
            } else {
                (T::neg_infinity(), end)
            }
        }
    }

    /// Mean of the distribution, finite only for `ξ < 1`.
    pub fn mean(&self) -> Option<T> {
        if self.is_gumbel() {
            let euler = T::lit(0.577_215_664_901_532_9);
            return Some(self.mu + euler / self.kappa);
        }
        if self.xi >= T::one() {
            return None;
        }
        let g = T::lit(special::gamma((T::one() - self.xi).to_f64()?));
        Some(self.mu + (g - T::one()) / (self.kappa * self.xi))
    }
}

fn check_finite<T: Real>(y: T, what: &str) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {y}")))
    }
}

/// Log-density without argument checks. Returns `−∞` outside the support.
#[inline]
pub fn log_density_raw<T: Real>(y: T, mu: T, kappa: T, xi: T) -> T {
    if xi.abs() < T::lit(XI_EPS) {
        let u = kappa * (y - mu);
        return kappa.ln() - u - (-u).exp();
    }
    let z = xi * kappa * (y - mu);
    if z <= -T::one() {
        return T::neg_infinity();
    }
    let log_h = z.ln_1p();
    kappa.ln() - (xi.recip() + T::one()) * log_h - (-log_h / xi).exp()
}

/// Log-density at `y`; `−∞` outside the support.
pub fn log_density<T: Real>(y: T, p: &GevParams<T>) -> Result<T> {
    check_finite(y, "observation")?;
    Ok(log_density_raw(y, p.mu, p.kappa, p.xi))
}

#[inline]
pub fn cdf_raw<T: Real>(y: T, mu: T, kappa: T, xi: T) -> T {
    if xi.abs() < T::lit(XI_EPS) {
        let u = kappa * (y - mu);
        return (-(-u).exp()).exp();
    }
    let z = xi * kappa * (y - mu);
    if z <= -T::one() {
        return if xi > T::zero() { T::zero() } else { T::one() };
    }
    let log_h = z.ln_1p();
    (-(-log_h / xi).exp()).exp()
}

pub fn cdf<T: Real>(y: T, p: &GevParams<T>) -> Result<T> {
    check_finite(y, "observation")?;
    Ok(cdf_raw(y, p.mu, p.kappa, p.xi))
}

/// Quantile without argument checks; `prob` must lie in (0, 1).
#[inline]
pub fn quantile_raw<T: Real>(prob: T, mu: T, kappa: T, xi: T) -> T {
    let log_neg_log = (-prob.ln()).ln();
    if xi.abs() < T::lit(XI_EPS) {
        mu - log_neg_log / kappa
    } else {
        // μ − (1 − (−log p)^{−ξ}) / (κξ), written with expm1 for small ξ.
        mu + (-xi * log_neg_log).exp_m1() / (kappa * xi)
    }
}

pub fn quantile<T: Real>(prob: T, p: &GevParams<T>) -> Result<T> {
    if !(prob > T::zero() && prob < T::one()) {
        return Err(Error::Domain(format!("probability must lie in (0,1), got {prob}")));
    }
    Ok(quantile_raw(prob, p.mu, p.kappa, p.xi))
}

/// Inverse-transform draws through the quantile function.
pub fn sample<T: Real, R: Rng + ?Sized>(p: &GevParams<T>, n: usize, rng: &mut R) -> Vec<T>
where
    Open01: Distribution<T>,
{
    (0..n)
        .map(|_| {
            let u: T = Open01.sample(rng);
            quantile_raw(u, p.mu, p.kappa, p.xi)
        })
        .collect()
}

/// Return period `T = 1/(1 − p)` of the non-exceedance probability `p`.
pub fn return_period_of<T: Real>(prob: T) -> Result<T> {
    if !(prob > T::zero() && prob < T::one()) {
        return Err(Error::Domain(format!("probability must lie in (0,1), got {prob}")));
    }
    Ok((T::one() - prob).recip())
}

/// Non-exceedance probability `1 − 1/T` of a return period `T > 1`.
pub fn prob_of_return_period<T: Real>(period: T) -> Result<T> {
    if !(period > T::one()) || !period.is_finite() {
        return Err(Error::Domain(format!("return period must exceed 1, got {period}")));
    }
    Ok(T::one() - period.recip())
}
