//! Metropolis–Hastings building blocks: Gaussian-approximation proposals built
//! from a quadratic Taylor expansion of the log-target, the acceptance test,
//! and derivatives of the GEV log-likelihood with respect to the log inverse
//! scale.

use rand::distributions::{Distribution, Open01};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gev::XI_EPS;
use crate::scalar::Real;
use crate::special::normal_log_pdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianApprox<T> {
    pub mean: T,
    pub variance: T,
}

/// Gaussian approximation `N(b/c, 1/c)` of a log-target with first and second
/// derivatives `f1`, `f2` at `current`, where `b = f1 − f2·current` and
/// `c = −f2`.
///
/// Returns `None` when the curvature is not strictly negative (or the inputs
/// are not finite); the caller then falls back to a random-walk proposal.
pub fn gaussian_approx_proposal<T: Real>(f1: T, f2: T, current: T) -> Option<GaussianApprox<T>> {
    let c = -f2;
    let b = f1 - f2 * current;
    if !(c > T::zero()) || !c.is_finite() || !b.is_finite() {
        return None;
    }
    let out = GaussianApprox {
        mean: b / c,
        variance: c.recip(),
    };
    (out.mean.is_finite() && out.variance.is_finite() && out.variance > T::zero()).then_some(out)
}

/// Metropolis–Hastings acceptance with probability `min(r, 1)`, where
/// `log r = log_target_new − log_target_old + log_q_old_given_new − log_q_new_given_old`.
///
/// Exactly one uniform is drawn per call.
pub fn mh_accept<R: Rng + ?Sized>(
    log_target_new: f64,
    log_target_old: f64,
    log_q_old_given_new: f64,
    log_q_new_given_old: f64,
    rng: &mut R,
) -> bool {
    let u: f64 = Open01.sample(rng);
    if log_target_new == f64::NEG_INFINITY {
        return false;
    }
    let log_r = (log_target_new - log_target_old) + (log_q_old_given_new - log_q_new_given_old);
    if log_r.is_nan() {
        return false;
    }
    log_r >= 0.0 || u.ln() < log_r
}

/// First and second derivatives of one observation's GEV log-likelihood with
/// respect to the random effect `τ` of the log inverse scale, where
/// `κ = exp(η̂ + τ)`.
///
/// For `ξ ≠ 0`, with `ε = y − μ`, `u = ε·κ`, `h = 1 + ξu` and `a = h^{−1/ξ}`,
/// `∂h/∂τ = h − 1` and
///
/// ```text
/// ∂ℓ/∂τ   = 1 − (ξ+1)/ξ · (h−1)/h + ξ⁻¹·h^{−1/ξ} − ξ⁻¹·h^{−1/ξ−1}
///         = 1 − u(ξ + 1 − a)/h
/// ∂²ℓ/∂τ² = −u(ξ + 1 − a)/h − u²(a − ξ(ξ + 1 − a))/h²
/// ```
///
/// The second forms are used; they do not cancel catastrophically as ξ → 0.
/// For `ξ = 0`, with `g = exp(−κε)` and `∂g/∂τ = g·log g`,
/// `∂ℓ/∂τ = 1 + log g − g·log g` and
/// `∂²ℓ/∂τ² = log g − g·(log g)² − g·log g`.
pub fn dloglik_dtau_kappa<T: Real>(y: T, mu: T, xi: T, eta_hat: T, tau: T) -> Result<(T, T)> {
    let kappa = (eta_hat + tau).exp();
    let u = (y - mu) * kappa;
    if xi.abs() < T::lit(XI_EPS) {
        let log_g = -u;
        let g = log_g.exp();
        let first = T::one() + log_g - g * log_g;
        let second = log_g - g * log_g * log_g - g * log_g;
        return Ok((first, second));
    }
    let h = T::one() + xi * u;
    if !(h > T::zero()) {
        return Err(Error::OutOfSupport(format!(
            "1 + xi*(y-mu)*kappa = {h} is not positive"
        )));
    }
    let a = (-h.ln() / xi).exp();
    let k = xi + T::one() - a;
    let first = T::one() - u * k / h;
    let second = -u * k / h - u * u * (a - xi * k) / (h * h);
    Ok((first, second))
}

/// Value and τ-derivatives of a whole series' log-likelihood at `κ = exp(eta)`.
/// The value is `−∞` (and the derivatives zero) when any observation falls
/// outside the support.
pub(crate) fn series_loglik_and_kappa_derivs(ys: &[f64], mu: f64, eta: f64, xi: f64) -> (f64, f64, f64) {
    let kappa = eta.exp();
    let log_kappa = eta;
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    if xi.abs() < XI_EPS {
        for &y in ys {
            let u = (y - mu) * kappa;
            let g = (-u).exp();
            v += log_kappa - u - g;
            d1 += 1.0 - u + g * u;
            d2 += -u - g * u * u + g * u;
        }
        return (v, d1, d2);
    }
    for &y in ys {
        let u = (y - mu) * kappa;
        let z = xi * u;
        if z <= -1.0 {
            return (f64::NEG_INFINITY, 0.0, 0.0);
        }
        let h = 1.0 + z;
        let log_h = z.ln_1p();
        let a = (-log_h / xi).exp();
        let k = xi + 1.0 - a;
        v += log_kappa - (1.0 / xi + 1.0) * log_h - a;
        d1 += 1.0 - u * k / h;
        d2 += -u * k / h - u * u * (a - xi * k) / (h * h);
    }
    (v, d1, d2)
}

/// Central-difference step used for numerically differentiated proposals.
pub(crate) fn fd_step(value: f64) -> f64 {
    1e-5 * value.abs().max(1.0)
}

/// Gaussian approximation from central differences of `f` around `x`, given `f(x)`.
pub(crate) fn numeric_approx(f: &mut dyn FnMut(f64) -> f64, x: f64, fx: f64) -> Option<GaussianApprox<f64>> {
    let h = fd_step(x);
    let fp = f(x + h);
    if !fp.is_finite() {
        return None;
    }
    let fm = f(x - h);
    if !fm.is_finite() {
        return None;
    }
    let f1 = (fp - fm) / (2.0 * h);
    let f2 = (fp - 2.0 * fx + fm) / (h * h);
    gaussian_approx_proposal(f1, f2, x)
}

/// Log-target value at a point together with the proposal that would be used from it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Expansion {
    pub value: f64,
    pub approx: Option<GaussianApprox<f64>>,
}

/// Proposal kernel: the Gaussian approximation at the current point if one
/// exists, otherwise a symmetric random walk with standard deviation `step`.
pub(crate) fn proposal_log_density(to: f64, from: f64, approx: Option<GaussianApprox<f64>>, step: f64) -> f64 {
    match approx {
        Some(a) => normal_log_pdf(to, a.mean, a.variance.sqrt()),
        None => normal_log_pdf(to, from, step),
    }
}

pub(crate) fn draw_proposal<R: Rng + ?Sized>(
    from: f64,
    approx: Option<GaussianApprox<f64>>,
    step: f64,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    match approx {
        Some(a) => a.mean + a.variance.sqrt() * z,
        None => from + step * z,
    }
}

/// Outcome of a scalar Metropolis–Hastings step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepOutcome {
    pub accepted: bool,
    pub value: f64,
    pub expansion: Expansion,
}

/// One MH step on a scalar with the Gaussian-approximation kernel.
///
/// `expand` evaluates the log-target at a point; it may return early with
/// `approx: None` when the value is `−∞`.
pub(crate) fn scalar_mh_step<R: Rng + ?Sized>(
    current: f64,
    at_current: Expansion,
    step: f64,
    rng: &mut R,
    mut expand: impl FnMut(f64) -> Expansion,
) -> StepOutcome {
    let proposed = draw_proposal(current, at_current.approx, step, rng);
    let at_proposed = expand(proposed);
    let q_fwd = proposal_log_density(proposed, current, at_current.approx, step);
    let q_rev = if at_proposed.value == f64::NEG_INFINITY {
        0.0
    } else {
        proposal_log_density(current, proposed, at_proposed.approx, step)
    };
    if mh_accept(at_proposed.value, at_current.value, q_rev, q_fwd, rng) {
        StepOutcome {
            accepted: true,
            value: proposed,
            expansion: at_proposed,
        }
    } else {
        StepOutcome {
            accepted: false,
            value: current,
            expansion: at_current,
        }
    }
}
