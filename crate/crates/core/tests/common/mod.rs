use rffa::gev;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-12, 50)
}

/// Integral of the density over the support, split at points geometric in the scale.
pub fn total_mass(mu: f64, kappa: f64, xi: f64) -> f64 {
    let f = |y: f64| gev::log_density_raw(y, mu, kappa, xi).exp();
    let s = 1.0 / kappa;
    let lo = if xi > 0.0 { mu - s / xi } else if xi < 0.0 { mu - 200.0 * s } else { mu - 6.0 * s };
    let hi_end = if xi < 0.0 { Some(mu - s / xi) } else { None };
    let mut cuts = vec![lo, mu - 0.5 * s, mu, mu + s, mu + 3.0 * s, mu + 10.0 * s];
    match hi_end {
        Some(h) => {
            cuts.retain(|&c| c < h);
            cuts.push(h);
        }
        None if xi > 0.0 => {
            let mut k = 100.0;
            while k <= 1e8 {
                cuts.push(mu + k * s);
                k *= 10.0;
            }
        }
        None => cuts.push(mu + 60.0 * s),
    }
    cuts.windows(2).map(|w| integrate(&f, w[0], w[1])).sum()
}
