//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` still print FAIL but do not fail the
//! process; everything else must pass. Criterion ids given as arguments
//! restrict the run, e.g. `cargo test --test acceptance -- C1 C2`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rffa::gev::{self, GevParams};
use rffa::local::LocalPriors;
use rffa::model::{log_posterior, HierState, RegressionBlock, StationRecord};
use rffa::prediction::{predict_new_site, return_level_posterior, PredictionConfig};
use rffa::proposal::dloglik_dtau_kappa;
use rffa::run::{self, RunConfig};
use rffa::sampler::{run_chain, Chain, ChainConfig, PosteriorSamples};
use rffa::simulate::{benchmark_spec, simulate_dataset, SimulatedData, BENCHMARK_COVARIATES};
use rffa::special::{empirical_quantile, ks_critical, ks_uniform};
use rffa::validation::{
    loo_cross_validate, mean_quantile_score, station_pits, BootstrapConfig, CvConfig, CvResult, HoldoutPrediction,
    IN_SAMPLE, LOCAL, OUT_OF_SAMPLE,
};
use rffa::{io, Dataset, GevParam, Priors};

mod common;
use common::total_mass;

const DENSITY_TOL: f64 = 1e-6;
const ROUNDTRIP_TOL: f64 = 1e-10;
const BRIDGE_TOL: f64 = 1e-5;
const DERIV_TOL: f64 = 1e-6;
const DERIV_POINTS: usize = 200;
const SPOT_ULPS: f64 = 4.0;
const MCSE_MULTIPLE: f64 = 3.0;
const REFERENCE_STEPS: usize = 1_000_000;
const GAUSSIAN_STEPS: usize = 200_000;
const RECOVERY_STATIONS: usize = 50;
const RECOVERY_YEARS: usize = 60;
const RECOVERY_ITERATIONS: usize = 30_000;
const RECOVERY_BURNIN: usize = 5_000;
const INCLUSION_HIGH: f64 = 0.8;
const NONZERO_SHARE: f64 = 0.9;
const NULL_MEDIAN: f64 = 0.5;
const COVERAGE_LEVEL: f64 = 0.9;
const MIN_COVERED: usize = 10;
const CALIBRATION_STATIONS: usize = 100;
const MIN_STATION_YEARS: usize = 5000;
const KS_LEVEL: f64 = 0.01;
const SCORE_PERIODS: [f64; 3] = [10.0, 50.0, 100.0];
const WIDENING_SHARE: f64 = 0.9;
const WIDENING_PERIOD: f64 = 100.0;

const KNOWN_FAILURES: [(&str, &str); 1] = [(
    "C2",
    "the stated second-derivative spot value omits the (h-1) factor; the exact value at h=1 is 0",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("C1", "distribution correctness", c1_distribution),
        ("C2", "derivative verification", c2_derivatives),
        ("C3", "toy sampler vs random-walk reference", c3_toy_sampler),
        ("C4", "synthetic recovery", c4_recovery),
        ("C5", "in-sample PIT calibration", c5_calibration),
        ("C6", "score ordering vs intercept model", c6_score_ordering),
        ("C7", "new-site interval widening", c7_widening),
        ("C8", "byte-identical reruns", c8_determinism),
        ("C9", "supplementary station data", c9_supplementary),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        let verdict = if o.detail.starts_with("SKIP") {
            "SKIP"
        } else if o.pass {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{id} {verdict} {name} ({secs:.1}s): {}", o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("{id}   known failure: {why}"),
            (false, None) => unexpected += 1,
            _ => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}

fn c1_distribution() -> Outcome {
    let (mut mass_err, mut rt_err, mut bridge_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut probs = vec![1e-4, 1e-3];
    probs.extend((1..100).map(|i| i as f64 / 100.0));
    probs.extend([0.999, 1.0 - 1e-4]);
    for xi in [-0.4, -0.1, 0.0, 0.1, 0.4] {
        for kappa in [0.5, 1.0, 5.0] {
            for mu in [0.0, 100.0] {
                mass_err = mass_err.max((total_mass(mu, kappa, xi) - 1.0).abs());
                let g = GevParams::new(mu, kappa, xi).unwrap();
                for &p in &probs {
                    let back = gev::cdf(gev::quantile(p, &g).unwrap(), &g).unwrap();
                    rt_err = rt_err.max((back - p).abs());
                }
            }
        }
    }
    for p in [0.5, 0.9, 0.99] {
        let gumbel: f64 = gev::quantile_raw(p, 3.0, 0.7, 0.0);
        for xi in [1e-9, -1e-9] {
            let q = gev::quantile_raw(p, 3.0, 0.7, xi);
            bridge_err = bridge_err.max(((q - gumbel) / gumbel).abs());
        }
    }
    outcome(
        mass_err < DENSITY_TOL && rt_err < ROUNDTRIP_TOL && bridge_err < BRIDGE_TOL,
        format!("max |mass-1| {mass_err:.2e}, max roundtrip {rt_err:.2e}, max bridge {bridge_err:.2e}"),
    )
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn c2_derivatives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for branch in 0..2 {
        for _ in 0..DERIV_POINTS {
            let mu = rng.gen_range(-5.0..5.0);
            let eta = rng.gen_range(-1.0..1.0);
            let tau = rng.gen_range(-0.5..0.5);
            let kappa = f64::exp(eta + tau);
            let (xi, u) = if branch == 0 {
                let xi = rng.gen_range(0.05..0.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let h: f64 = rng.gen_range(0.2..5.0);
                (xi, (h - 1.0) / xi)
            } else {
                (0.0, rng.gen_range(-2.0..8.0))
            };
            let y = mu + u / kappa;
            let ll = |t: f64| gev::log_density_raw(y, mu, f64::exp(eta + t), xi);
            let (d1, d2) = dloglik_dtau_kappa(y, mu, xi, eta, tau).unwrap();
            let step = 1e-5;
            let fd1 = (ll(tau + step) - ll(tau - step)) / (2.0 * step);
            let first = |t: f64| dloglik_dtau_kappa(y, mu, xi, eta, t).unwrap().0;
            let fd2 = (first(tau + step) - first(tau - step)) / (2.0 * step);
            worst1 = worst1.max(rel_err(d1, fd1));
            worst2 = worst2.max(rel_err(d2, fd2));
        }
    }
    let (mut first_ok, mut second_ok) = (true, true);
    let mut second_seen = Vec::new();
    for xi in [-0.4f64, -0.1, 0.1, 0.25, 0.5] {
        let (d1, d2) = dloglik_dtau_kappa(2.0, 2.0, xi, 0.3, 0.0).unwrap();
        first_ok &= d1 == 1.0;
        let stated = -(xi + 1.0) / xi;
        second_ok &= (d2 - stated).abs() <= SPOT_ULPS * f64::EPSILON * stated.abs();
        second_seen.push(format!("xi={xi}: {d2} vs {stated:.4}"));
    }
    outcome(
        worst1 < DERIV_TOL && worst2 < DERIV_TOL && first_ok && second_ok,
        format!(
            "FD rel err first {worst1:.2e}, second {worst2:.2e}; spot first=1 {}; spot second=-(xi+1)/xi {} ({})",
            if first_ok { "holds" } else { "fails" },
            if second_ok { "holds" } else { "fails" },
            second_seen.join(", ")
        ),
    )
}

/// Mean and variance with batch-means Monte Carlo standard errors.
fn batch_moments(xs: &[f64], batches: usize) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let len = xs.len() / batches;
    let (mut bm, mut bv) = (Vec::new(), Vec::new());
    for c in xs.chunks_exact(len) {
        bm.push(c.iter().sum::<f64>() / len as f64);
        bv.push(c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / len as f64);
    }
    let se = |v: &[f64], centre: f64| {
        let b = v.len() as f64;
        (v.iter().map(|x| (x - centre).powi(2)).sum::<f64>() / (b - 1.0) / b).sqrt()
    };
    (mean, var, se(&bm, mean), se(&bv, var))
}

fn c3_toy_sampler() -> Outcome {
    let truth = GevParams::new(3.0, 2.0 * 0.2f64.exp(), 0.1).unwrap();
    let ys = gev::sample(&truth, 60, &mut ChaCha8Rng::seed_from_u64(33));
    let data = Dataset::from_records(
        vec![StationRecord { id: "toy".into(), annual_maxima: ys, raw_covariates: vec![] }],
        vec![],
    )
    .unwrap();
    let priors = Priors::default();
    let init = HierState {
        blocks: [
            RegressionBlock::intercept_only(1, 1, 3.0, 100.0),
            RegressionBlock::intercept_only(1, 1, 2f64.ln(), 4.0),
            RegressionBlock::intercept_only(1, 1, 0.1, 100.0),
        ],
    };
    let cfg = ChainConfig { n_iterations: 2, n_burnin: 1, seed: 3, ..Default::default() };
    let mut chain = Chain::new(&data, priors.clone(), cfg, init.clone()).unwrap();
    let mut gauss = Vec::with_capacity(GAUSSIAN_STEPS);
    for _ in 0..GAUSSIAN_STEPS {
        chain.update_tau(GevParam::InverseScale);
        gauss.push(chain.state().block(GevParam::InverseScale).tau[0]);
    }

    let mut state = init;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cur = log_posterior(&state, &data, &priors).unwrap();
    let mut reference = Vec::with_capacity(REFERENCE_STEPS);
    for _ in 0..REFERENCE_STEPS {
        let old = state.blocks[1].tau[0];
        state.blocks[1].tau[0] = old + 0.3 * rng.gen_range(-1.0..1.0);
        let prop = log_posterior(&state, &data, &priors).unwrap();
        if rng.gen::<f64>().ln() < prop - cur {
            cur = prop;
        } else {
            state.blocks[1].tau[0] = old;
        }
        reference.push(state.blocks[1].tau[0]);
    }
    let (gm, gv, gsm, gsv) = batch_moments(&gauss, 100);
    let (rm, rv, rsm, rsv) = batch_moments(&reference, 100);
    let z_mean = (gm - rm).abs() / gsm.hypot(rsm);
    let z_var = (gv - rv).abs() / gsv.hypot(rsv);
    outcome(
        z_mean < MCSE_MULTIPLE && z_var < MCSE_MULTIPLE,
        format!(
            "mean {gm:.5} vs {rm:.5} ({z_mean:.2} MCSE), variance {gv:.3e} vs {rv:.3e} ({z_var:.2} MCSE)"
        ),
    )
}

struct RecoveryFit {
    sim: SimulatedData,
    samples: PosteriorSamples,
}

fn recovery_fit() -> &'static RecoveryFit {
    static FIT: std::sync::OnceLock<RecoveryFit> = std::sync::OnceLock::new();
    FIT.get_or_init(|| {
        let sim = simulate_dataset(&benchmark_spec(RECOVERY_YEARS), RECOVERY_STATIONS, 40).unwrap();
        let cfg = ChainConfig {
            n_iterations: RECOVERY_ITERATIONS,
            n_burnin: RECOVERY_BURNIN,
            seed: 41,
            ..Default::default()
        };
        let samples = run_chain(&sim.dataset, &Priors::default(), &cfg).unwrap();
        RecoveryFit { sim, samples }
    })
}

fn c4_recovery() -> Outcome {
    let RecoveryFit { sim, samples } = recovery_fit();
    let (mut nonzero, mut null) = (Vec::new(), Vec::new());
    for b in GevParam::ALL {
        let inc = samples.inclusion_probabilities(b);
        for j in 1..=BENCHMARK_COVARIATES {
            if sim.true_theta(b)[j] != 0.0 {
                nonzero.push(inc[j]);
            } else {
                null.push(inc[j]);
            }
        }
    }
    let high = nonzero.iter().filter(|&&p| p > INCLUSION_HIGH).count();
    let a = high as f64 >= NONZERO_SHARE * nonzero.len() as f64;
    let mut sorted = null.clone();
    sorted.sort_by(f64::total_cmp);
    let median = empirical_quantile(&sorted, 0.5);
    let b = median < NULL_MEDIAN;
    let tail = (1.0 - COVERAGE_LEVEL) / 2.0;
    let covered = (1..=BENCHMARK_COVARIATES)
        .filter(|&j| {
            let mut tr = samples.theta_trace(GevParam::Location, j);
            tr.sort_by(f64::total_cmp);
            let t = sim.true_theta(GevParam::Location)[j];
            empirical_quantile(&tr, tail) <= t && t <= empirical_quantile(&tr, 1.0 - tail)
        })
        .count();
    let c = covered >= MIN_COVERED;
    outcome(
        a && b && c,
        format!(
            "(a) {high}/{} nonzero effects with inclusion > {INCLUSION_HIGH}; (b) median null inclusion {median:.3} over {}; (c) {covered}/{BENCHMARK_COVARIATES} mu coefficients covered",
            nonzero.len(),
            null.len()
        ),
    )
}

fn c5_calibration() -> Outcome {
    let sim = simulate_dataset(&benchmark_spec(RECOVERY_YEARS), CALIBRATION_STATIONS, 50).unwrap();
    let cfg = ChainConfig {
        n_iterations: 6000,
        n_burnin: 1500,
        seed: 51,
        max_retained: Some(1500),
        ..Default::default()
    };
    let samples = run_chain(&sim.dataset, &Priors::default(), &cfg).unwrap();
    let mut pits = Vec::new();
    for (s, st) in sim.dataset.stations.iter().enumerate() {
        let comps = samples.site_components(s).unwrap();
        pits.extend(station_pits(&st.id, &comps, &st.annual_maxima).into_iter().map(|p| p.pit));
    }
    let ks = ks_uniform(&pits);
    let crit = ks_critical(pits.len(), KS_LEVEL);
    outcome(
        pits.len() >= MIN_STATION_YEARS && ks < crit,
        format!("n = {}, KS = {ks:.4}, critical value at {KS_LEVEL} = {crit:.4}", pits.len()),
    )
}

fn c6_score_ordering() -> Outcome {
    let n_train = 50;
    let n_hold = 20;
    let sim = simulate_dataset(&benchmark_spec(RECOVERY_YEARS), n_train + n_hold, 60).unwrap();
    let hold: Vec<usize> = (n_train..n_train + n_hold).collect();
    let hold_ids: Vec<&str> = hold.iter().map(|&s| sim.dataset.stations[s].id.as_str()).collect();
    let train = sim.dataset.without(&hold_ids).unwrap().select_covariates(&[]).unwrap();
    let cfg = ChainConfig { n_iterations: 6000, n_burnin: 1000, seed: 61, ..Default::default() };
    let samples = run_chain(&train, &Priors::default(), &cfg).unwrap();
    let pred = PredictionConfig { seed: 62, ..Default::default() };
    let boot = BootstrapConfig { seed: 63, ..Default::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    for t in SCORE_PERIODS {
        let p = gev::prob_of_return_period(t).unwrap();
        let mut truth = Vec::new();
        let mut intercept = Vec::new();
        for &s in &hold {
            let st = &sim.dataset.stations[s];
            truth.push(HoldoutPrediction {
                station_id: st.id.clone(),
                quantile: gev::quantile(p, &sim.site_params[s]).unwrap(),
                observations: st.annual_maxima.clone(),
            });
            intercept.push(HoldoutPrediction {
                station_id: st.id.clone(),
                quantile: predict_new_site(&samples, &[1.0], p, &pred).unwrap().predictive_quantile,
                observations: st.annual_maxima.clone(),
            });
        }
        let a = mean_quantile_score("true", &truth, t, &boot).unwrap();
        let b = mean_quantile_score("intercept", &intercept, t, &boot).unwrap();
        let gap = b.mean_score - a.mean_score;
        let width = a.ci_width().max(b.ci_width());
        pass &= gap > width;
        parts.push(format!(
            "T={t}: true {:.4} vs intercept {:.4}, gap {gap:.4} vs width {width:.4}",
            a.mean_score, b.mean_score
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c7_widening() -> Outcome {
    let RecoveryFit { sim, samples } = recovery_fit();
    let prob = gev::prob_of_return_period(WIDENING_PERIOD).unwrap();
    let cfg = PredictionConfig { seed: 70, ..Default::default() };
    let wider = sim
        .dataset
        .stations
        .iter()
        .enumerate()
        .filter(|(s, st)| {
            let inside = return_level_posterior(samples, *s, prob, &cfg).unwrap();
            let outside = predict_new_site(samples, &st.covariates, prob, &cfg).unwrap();
            outside.credible_width() >= inside.credible_width()
        })
        .count();
    let n = sim.dataset.n_stations();
    outcome(
        wider as f64 >= WIDENING_SHARE * n as f64,
        format!("new-site 80% interval at least as wide in {wider}/{n} stations (T={WIDENING_PERIOD})"),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.output.dir = tmp.path().join("runs");
    cfg.chain.n_iterations = 400;
    cfg.chain.n_burnin = 100;
    cfg.simulate.n_stations = 12;
    cfg.simulate.spec = benchmark_spec(30);
    cfg.cv.folds = vec!["sim003".into()];
    cfg.cv.bootstrap_resamples = 200;
    let cfg = cfg.resolve().unwrap();

    let mut compared = 0;
    let mut mismatched = Vec::new();
    let mut check = |label: &str, run: &dyn Fn() -> PathBuf| {
        let dir = run();
        let first = snapshot(&dir);
        fs::remove_dir_all(&dir).unwrap();
        let again = run();
        let second = snapshot(&again);
        compared += first.len();
        if again != dir || first != second {
            mismatched.push(label.to_string());
        }
    };
    let (sim_out, _) = run::simulate_command(&cfg).unwrap();
    let fit_cfg = RunConfig::load(&sim_out.dir.join("fit.toml")).unwrap();
    check("simulate", &|| run::simulate_command(&cfg).unwrap().0.dir);
    check("fit", &|| run::fit_command(&fit_cfg, None).unwrap().dir);
    let fit_dir = fit_cfg.run_dir("fit", "").unwrap();
    if !fit_dir.exists() {
        run::fit_command(&fit_cfg, None).unwrap();
    }
    check("validate", &|| run::validate_command(&fit_cfg, Some(&fit_dir)).unwrap().0.dir);
    check("cv", &|| run::cv_command(&fit_cfg).unwrap().0.dir);
    outcome(
        mismatched.is_empty(),
        format!("{compared} files over simulate, fit, validate and cv; mismatched: {mismatched:?}"),
    )
}

fn scores_at(res: &CvResult, model: &str, t: f64) -> f64 {
    res.scores
        .iter()
        .find(|s| s.model_name == model && s.return_period == t)
        .map(|s| s.mean_score)
        .unwrap()
}

fn c9_supplementary() -> Outcome {
    let Some(dir) = std::env::var_os("RFFA_SUPPLEMENTARY_DIR").map(PathBuf::from) else {
        return outcome(true, "SKIP RFFA_SUPPLEMENTARY_DIR not set".into());
    };
    let loaded = io::load_dataset_default(&dir.join("maxima.csv"), &dir.join("covariates.csv")).unwrap();
    let data = loaded.dataset;
    let folds = rffa::validation::default_validation_stations(&data, 27, 90).unwrap();
    let cfg = CvConfig {
        chain: ChainConfig { n_iterations: RECOVERY_ITERATIONS, n_burnin: RECOVERY_BURNIN, seed: 91, ..Default::default() },
        return_periods: SCORE_PERIODS.to_vec(),
        local: Some(LocalPriors::default()),
        ..Default::default()
    };
    let full = loo_cross_validate(&data, &folds, &Priors::default(), &cfg).unwrap();
    let bare = loo_cross_validate(&data.select_covariates(&[]).unwrap(), &folds, &Priors::default(), &cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in SCORE_PERIODS {
        let (reg, base, local) = (
            scores_at(&full, OUT_OF_SAMPLE, t),
            scores_at(&bare, OUT_OF_SAMPLE, t),
            scores_at(&full, LOCAL, t),
        );
        pass &= reg < base && local < reg;
        parts.push(format!(
            "T={t}: local {local:.3}, regional {reg:.3} (in-sample {:.3}), intercept {base:.3}",
            scores_at(&full, IN_SAMPLE, t)
        ));
    }
    outcome(pass, parts.join("; "))
}
