//! Data-generating process, misspecification scenarios, and the Monte Carlo
//! driver.
//!
//! Each generated dataset carries two covariate blocks: the raw uniform
//! draws `z1..z12` and the standardized nonlinear transforms `x1..x12`.
//! Correctly specified models regress on the `x` block, misspecified models
//! on the raw `z` block. Both potential outcomes share the same linear mean
//! in the standardized transforms, so the true average effect is zero by
//! construction.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap, coverage};
use crate::data::{Dataset, EstimandKind, EstimatorKind, ModelSpec, OutcomeFamily};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimateOptions, KPolicy};
use crate::kselect::compute_b_term;
use crate::nuisance::{fit_nuisance, FitOptions};
use crate::seed::{child_seed, rng_for};

/// Signs of the coefficient pattern shared by the treatment and outcome
/// models.
pub const COEF_PATTERN: [f64; 12] = [
    1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0,
];

/// Treatment-coefficient scale producing an extreme propensity
/// distribution.
pub const EXTREME_C: f64 = 1.0;
/// Treatment-coefficient scale producing a standard propensity
/// distribution.
pub const STANDARD_C: f64 = 0.3;

/// Configuration of the simulated data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    /// Treatment-coefficient scale; 1.0 is the extreme regime, 0.3 the
    /// standard one.
    pub c: f64,
    /// Outcome coefficients on the standardized transforms.
    pub beta: Vec<f64>,
    /// Control-arm noise standard deviation.
    pub noise_sd0: f64,
    /// Treated-arm noise standard deviation.
    pub noise_sd1: f64,
    pub seed: u64,
}

impl DgpConfig {
    fn with_scale(c: f64, seed: u64) -> Self {
        DgpConfig {
            n: 1000,
            c,
            beta: COEF_PATTERN.iter().map(|s| 0.2 * s).collect(),
            noise_sd0: 4.0,
            noise_sd1: 1.0,
            seed,
        }
    }

    pub fn standard(seed: u64) -> Self {
        Self::with_scale(STANDARD_C, seed)
    }

    pub fn extreme(seed: u64) -> Self {
        Self::with_scale(EXTREME_C, seed)
    }

    pub fn setting_label(&self) -> String {
        if (self.c - EXTREME_C).abs() < 1e-12 {
            "extreme".into()
        } else if (self.c - STANDARD_C).abs() < 1e-12 {
            "standard".into()
        } else {
            format!("c={}", self.c)
        }
    }
}

/// Misspecification scenario: first digit is the propensity model, second
/// the outcome model; 1 = correctly specified, 0 = misspecified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub propensity_correct: bool,
    pub outcome_correct: bool,
}

impl Scenario {
    pub fn from_code(code: &str) -> Result<Scenario> {
        match code {
            "00" => Ok(Scenario {
                propensity_correct: false,
                outcome_correct: false,
            }),
            "01" => Ok(Scenario {
                propensity_correct: false,
                outcome_correct: true,
            }),
            "10" => Ok(Scenario {
                propensity_correct: true,
                outcome_correct: false,
            }),
            "11" => Ok(Scenario {
                propensity_correct: true,
                outcome_correct: true,
            }),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario `{other}`; expected 00, 01, 10, or 11"
            ))),
        }
    }

    pub fn code(&self) -> &'static str {
        match (self.propensity_correct, self.outcome_correct) {
            (false, false) => "00",
            (false, true) => "01",
            (true, false) => "10",
            (true, true) => "11",
        }
    }

    /// Model columns implied by the scenario: the standardized transforms
    /// when correct, the raw draws when misspecified.
    pub fn model_spec(&self) -> ModelSpec {
        let block = |correct: bool| -> Vec<String> {
            let prefix = if correct { "x" } else { "z" };
            (1..=12).map(|j| format!("{prefix}{j}")).collect()
        };
        ModelSpec {
            propensity_columns: block(self.propensity_correct),
            propensity_intercept: true,
            outcome_columns: block(self.outcome_correct),
            outcome_intercept: true,
            outcome_family: OutcomeFamily::Linear,
        }
    }
}

/// A generated dataset with its true estimand value.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    pub true_tau: f64,
    /// Regenerations needed because a treatment arm came up empty.
    pub redraws: u32,
}

/// Draw one dataset from the simulation design.
pub fn generate_dataset(cfg: &DgpConfig) -> Generated {
    let mut redraws = 0u32;
    loop {
        match try_generate(cfg, redraws) {
            Some(dataset) => {
                return Generated {
                    dataset,
                    true_tau: 0.0,
                    redraws,
                }
            }
            None => {
                redraws += 1;
                assert!(
                    redraws < 10_000,
                    "treatment arm persistently empty; check the configuration"
                );
            }
        }
    }
}

// column-major math; index loops are the clear form here
#[allow(clippy::needless_range_loop)]
fn try_generate(cfg: &DgpConfig, attempt: u32) -> Option<Dataset> {
    let n = cfg.n;
    let mut rng = rng_for(cfg.seed, attempt as u64);
    let half_width = 3.0_f64.sqrt();
    // raw block, column-major
    let mut z = vec![vec![0.0f64; n]; 12];
    for i in 0..n {
        for col in z.iter_mut() {
            col[i] = 1.0 + half_width * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    // nonlinear transforms of the raw block
    let mut x = vec![vec![0.0f64; n]; 12];
    for i in 0..n {
        x[0][i] = z[0][i].exp();
        x[1][i] = z[1][i].exp();
        x[2][i] = (z[2][i] + 1.0).ln().powi(2);
        x[3][i] = (z[3][i] + 1.0).ln().powi(2);
        x[4][i] = (z[4][i] - z[5][i]).sin();
        x[5][i] = (z[4][i] + z[5][i]).cos();
        x[6][i] = z[6][i].sin();
        x[7][i] = (z[6][i] - 1.0).cos();
        x[8][i] = f64::from(z[7][i] > 0.4);
        x[9][i] = f64::from(z[7][i] > -0.4);
        x[10][i] = f64::from(z[8][i] > 0.3);
        x[11][i] = f64::from(z[9][i] > -0.3);
    }
    let (x_std, _, _) = crate::data::standardize_columns(&x).ok()?;

    let noise0 = Normal::new(0.0, cfg.noise_sd0).expect("valid sd");
    let noise1 = Normal::new(0.0, cfg.noise_sd1).expect("valid sd");
    let mut y = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for i in 0..n {
        let mean: f64 = (0..12).map(|j| cfg.beta[j] * x_std[j][i]).sum();
        let y0 = mean + noise0.sample(&mut rng);
        let y1 = mean + noise1.sample(&mut rng);
        let eta: f64 = (0..12).map(|j| cfg.c * COEF_PATTERN[j] * x_std[j][i]).sum();
        let e = crate::nuisance::expit(eta);
        let treated = rng.random::<f64>() < e;
        a.push(u8::from(treated));
        y.push(if treated { y1 } else { y0 });
    }

    let mut columns = Vec::with_capacity(24);
    let mut names = Vec::with_capacity(24);
    for (j, col) in z.into_iter().enumerate() {
        columns.push(col);
        names.push(format!("z{}", j + 1));
    }
    for (j, col) in x_std.into_iter().enumerate() {
        columns.push(col);
        names.push(format!("x{}", j + 1));
    }
    Dataset::new(y, a, columns, names).ok()
}

/// Per-estimator Monte Carlo summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub setting: String,
    pub estimator: EstimatorKind,
    pub mean: f64,
    pub sd: f64,
    /// Average bootstrap standard error; absent when the run skipped
    /// bootstrapping.
    pub bootsd: Option<f64>,
    pub mse: f64,
    /// Coverage of the 95% percentile intervals; absent without bootstrap.
    pub cr: Option<f64>,
    pub n_reps: usize,
    pub n_failed: usize,
}

/// One estimator outcome on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub estimator: EstimatorKind,
    pub estimate: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub k_used: Option<usize>,
}

/// Full output of a scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub summaries: Vec<ScenarioSummary>,
    pub replicates: Vec<ReplicateOutcome>,
    pub n_failed: usize,
}

/// Options for the Monte Carlo driver.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Bootstrap replicates per Monte Carlo replicate; 0 skips bootstrap
    /// inference (no bootsd/coverage columns).
    pub boot_b: usize,
    /// K policy for the AMW estimator; fixed-K estimators ignore it.
    pub k_policy: KPolicy,
    pub candidates: Option<Vec<usize>>,
    pub cv_boot: usize,
    pub cv_splits: usize,
    pub fit: FitOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            boot_b: 100,
            k_policy: KPolicy::Auto,
            candidates: None,
            cv_boot: 100,
            cv_splits: 25,
            fit: FitOptions::default(),
        }
    }
}

const CI_ALPHA: f64 = 0.05;

fn eval_replicate(
    gen: &Generated,
    spec: &ModelSpec,
    estimators: &[EstimatorKind],
    opts: &SimOptions,
    rep_seed: u64,
) -> Result<Vec<ReplicateOutcome>> {
    let mut out = Vec::with_capacity(estimators.len());
    for (e_idx, &kind) in estimators.iter().enumerate() {
        let policy = match kind {
            EstimatorKind::Amw => opts.k_policy,
            _ => KPolicy::Auto, // fixed-K estimators default to K = 1
        };
        let est_opts = EstimateOptions {
            fit: opts.fit.clone(),
            candidates: opts.candidates.clone(),
            cv_splits: opts.cv_splits,
            cv_boot: opts.cv_boot,
            seed: child_seed(rep_seed, 1_000 + e_idx as u64),
        };
        let est = estimate(
            &gen.dataset,
            spec,
            kind,
            EstimandKind::Ate,
            policy,
            &est_opts,
        )?;
        let boot = if opts.boot_b > 0 {
            Some(bootstrap(
                &gen.dataset,
                spec,
                kind,
                EstimandKind::Ate,
                est.point.k_used,
                opts.boot_b,
                CI_ALPHA,
                &opts.fit,
                child_seed(rep_seed, 2_000 + e_idx as u64),
            )?)
        } else {
            None
        };
        out.push(ReplicateOutcome {
            replicate: 0, // filled by the driver
            estimator: kind,
            estimate: est.point.value,
            se: boot.as_ref().map(|b| b.se),
            ci_lower: boot.as_ref().map(|b| b.ci_lower),
            ci_upper: boot.as_ref().map(|b| b.ci_upper),
            k_used: est.point.k_used,
        });
    }
    Ok(out)
}

/// Run one scenario: `n_reps` generated datasets, each evaluated by every
/// requested estimator, with optional bootstrap inference per replicate.
///
/// Replicates whose generation or fits fail are regenerated under a fresh
/// child seed up to 3 attempts and then counted as failed. The run is
/// deterministic given the seed, independent of thread count.
pub fn run_scenario(
    cfg: &DgpConfig,
    scenario: Scenario,
    estimators: &[EstimatorKind],
    n_reps: usize,
    opts: &SimOptions,
    seed: u64,
) -> Result<ScenarioRun> {
    if n_reps < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    if estimators.is_empty() {
        return Err(Error::InvalidArgument("no estimators requested".into()));
    }
    let spec = scenario.model_spec();
    let one = |r: usize| -> Option<Vec<ReplicateOutcome>> {
        let rep_seed = child_seed(seed, r as u64);
        for attempt in 0..3u64 {
            let mut cfg_r = cfg.clone();
            cfg_r.seed = child_seed(rep_seed, attempt);
            let gen = generate_dataset(&cfg_r);
            match eval_replicate(&gen, &spec, estimators, opts, rep_seed) {
                Ok(mut rows) => {
                    for row in &mut rows {
                        row.replicate = r;
                    }
                    return Some(rows);
                }
                Err(_) => continue,
            }
        }
        None
    };
    let raw: Vec<Option<Vec<ReplicateOutcome>>> = (0..n_reps).into_par_iter().map(one).collect();
    let n_failed = raw.iter().filter(|r| r.is_none()).count();
    if n_failed > n_reps / 2 {
        return Err(Error::TooManyFailures {
            failed: n_failed,
            requested: n_reps,
        });
    }
    let replicates: Vec<ReplicateOutcome> = raw.into_iter().flatten().flatten().collect();

    let mut summaries = Vec::with_capacity(estimators.len());
    for &kind in estimators {
        let rows: Vec<&ReplicateOutcome> = replicates
            .iter()
            .filter(|row| row.estimator == kind)
            .collect();
        let m = rows.len();
        let estimates: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
        let mean = estimates.iter().sum::<f64>() / m as f64;
        let sd = (estimates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (m - 1) as f64)
            .sqrt();
        let mse = estimates
            .iter()
            .map(|v| (v - cfg_true_tau()) * (v - cfg_true_tau()))
            .sum::<f64>()
            / m as f64;
        let bootsd = if opts.boot_b > 0 {
            Some(rows.iter().filter_map(|r| r.se).sum::<f64>() / m as f64)
        } else {
            None
        };
        let cr = if opts.boot_b > 0 {
            let cis: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| r.ci_lower.zip(r.ci_upper))
                .collect();
            Some(coverage(&cis, cfg_true_tau()))
        } else {
            None
        };
        summaries.push(ScenarioSummary {
            scenario: scenario.code().into(),
            setting: cfg.setting_label(),
            estimator: kind,
            mean,
            sd,
            bootsd,
            mse,
            cr,
            n_reps: m,
            n_failed,
        });
    }
    Ok(ScenarioRun {
        summaries,
        replicates,
        n_failed,
    })
}

// The design centers both potential outcomes on the same mean function.
fn cfg_true_tau() -> f64 {
    0.0
}

/// Monte Carlo profile of the K-dependent term: per-K variance and the
/// mean shift against K = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KProfile {
    pub ks: Vec<usize>,
    /// Monte Carlo variance of B(K) per grid point.
    pub var_b: Vec<f64>,
    /// Monte Carlo mean of B(K) minus the mean of B(1).
    pub bias_proxy: Vec<f64>,
    pub n_reps: usize,
}

/// Empirical counterpart of the variance/bias trends of the K-dependent
/// term: simulate, fit, and record B(K) across a K grid.
pub fn k_profile(
    cfg: &DgpConfig,
    scenario: Scenario,
    k_grid: &[usize],
    n_reps: usize,
    seed: u64,
) -> Result<KProfile> {
    if n_reps < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    if k_grid.is_empty() || k_grid.contains(&0) {
        return Err(Error::InvalidArgument("invalid K grid".into()));
    }
    let mut ks: Vec<usize> = k_grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks[0] != 1 {
        ks.insert(0, 1);
    }
    let spec = scenario.model_spec();
    let fit = FitOptions::default();
    let one = |r: usize| -> Option<Vec<f64>> {
        let rep_seed = child_seed(seed, r as u64);
        for attempt in 0..3u64 {
            let mut cfg_r = cfg.clone();
            cfg_r.seed = child_seed(rep_seed, attempt);
            let gen = generate_dataset(&cfg_r);
            let res = fit_nuisance(&gen.dataset, &spec, &fit).and_then(|nuis| {
                ks.iter()
                    .map(|&k| compute_b_term(&gen.dataset, &nuis, k).map(|b| b.value))
                    .collect::<Result<Vec<f64>>>()
            });
            if let Ok(v) = res {
                return Some(v);
            }
        }
        None
    };
    let raw: Vec<Option<Vec<f64>>> = (0..n_reps).into_par_iter().map(one).collect();
    let rows: Vec<&Vec<f64>> = raw.iter().flatten().collect();
    if rows.len() < 2 {
        return Err(Error::TooManyFailures {
            failed: n_reps - rows.len(),
            requested: n_reps,
        });
    }
    let m = rows.len() as f64;
    let mut var_b = Vec::with_capacity(ks.len());
    let mut means = Vec::with_capacity(ks.len());
    for j in 0..ks.len() {
        let mean = rows.iter().map(|v| v[j]).sum::<f64>() / m;
        let var = rows.iter().map(|v| (v[j] - mean) * (v[j] - mean)).sum::<f64>() / (m - 1.0);
        means.push(mean);
        var_b.push(var);
    }
    let bias_proxy: Vec<f64> = means.iter().map(|mu| mu - means[0]).collect();
    Ok(KProfile {
        ks,
        var_b,
        bias_proxy,
        n_reps: rows.len(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Tabular summary export.
pub fn summaries_to_csv(rows: &[ScenarioSummary]) -> String {
    let mut out = String::from("scenario,setting,estimator,mean,sd,bootsd,mse,cr,n_reps,n_failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.setting,
            r.estimator.label(),
            r.mean,
            r.sd,
            fmt_opt(r.bootsd),
            r.mse,
            fmt_opt(r.cr),
            r.n_reps,
            r.n_failed
        ));
    }
    out
}

/// Per-replicate estimate export (box-plot data).
pub fn replicates_to_csv(rows: &[ReplicateOutcome]) -> String {
    let mut out = String::from("replicate,estimator,estimate,se,ci_lower,ci_upper,k_used\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.replicate,
            r.estimator.label(),
            r.estimate,
            fmt_opt(r.se),
            fmt_opt(r.ci_lower),
            fmt_opt(r.ci_upper),
            r.k_used.map(|k| k.to_string()).unwrap_or_default()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_codes_round_trip() {
        for code in ["00", "01", "10", "11"] {
            assert_eq!(Scenario::from_code(code).unwrap().code(), code);
        }
        assert!(Scenario::from_code("12").is_err());
        let s = Scenario::from_code("01").unwrap();
        assert_eq!(s.model_spec().propensity_columns[0], "z1");
        assert_eq!(s.model_spec().outcome_columns[0], "x1");
    }

    #[test]
    fn generated_dataset_shape_and_standardization() {
        let cfg = DgpConfig {
            n: 400,
            ..DgpConfig::standard(5)
        };
        let gen = generate_dataset(&cfg);
        let d = &gen.dataset;
        assert_eq!(d.n(), 400);
        assert_eq!(d.column_names().len(), 24);
        assert_eq!(gen.true_tau, 0.0);
        for j in 1..=12 {
            let col = d.column(&format!("x{j}")).unwrap();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (col.len() - 1) as f64;
            assert!(mean.abs() < 1e-10, "x{j} mean {mean}");
            assert!((var - 1.0).abs() < 1e-10, "x{j} var {var}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = DgpConfig {
            n: 120,
            ..DgpConfig::standard(77)
        };
        let g1 = generate_dataset(&cfg);
        let g2 = generate_dataset(&cfg);
        assert_eq!(g1.dataset, g2.dataset);
    }

    #[test]
    fn dummy_frequency_matches_uniform_cdf() {
        let cfg = DgpConfig {
            n: 100_000,
            ..DgpConfig::standard(11)
        };
        let gen = generate_dataset(&cfg);
        let z8 = gen.dataset.column("z8").unwrap();
        let freq = z8.iter().filter(|&&v| v > 0.4).count() as f64 / z8.len() as f64;
        let expect = (1.0 + 3.0_f64.sqrt() - 0.4) / (2.0 * 3.0_f64.sqrt());
        assert!((freq - expect).abs() < 0.01, "freq {freq} vs {expect}");
    }

    #[test]
    fn extreme_setting_has_heavier_propensity_tails() {
        let count_extreme = |cfg: &DgpConfig| -> f64 {
            let gen = generate_dataset(cfg);
            let d = &gen.dataset;
            let n = d.n();
            let mut outside = 0usize;
            let x_cols: Vec<&[f64]> = (1..=12)
                .map(|j| d.column(&format!("x{j}")).unwrap())
                .collect();
            for i in 0..n {
                let mut eta = 0.0;
                for (col, sign) in x_cols.iter().zip(COEF_PATTERN) {
                    eta += cfg.c * sign * col[i];
                }
                let e = crate::nuisance::expit(eta);
                if !(0.05..=0.95).contains(&e) {
                    outside += 1;
                }
            }
            outside as f64 / n as f64
        };
        let frac_ext = count_extreme(&DgpConfig {
            n: 10_000,
            ..DgpConfig::extreme(3)
        });
        let frac_std = count_extreme(&DgpConfig {
            n: 10_000,
            ..DgpConfig::standard(3)
        });
        assert!(
            frac_ext > frac_std + 0.2,
            "extreme {frac_ext} vs standard {frac_std}"
        );
    }

    #[test]
    fn small_run_is_deterministic_and_consistent() {
        let cfg = DgpConfig {
            n: 150,
            ..DgpConfig::standard(2)
        };
        let opts = SimOptions {
            boot_b: 10,
            k_policy: KPolicy::Fixed(2),
            cv_boot: 8,
            cv_splits: 2,
            ..SimOptions::default()
        };
        let scenario = Scenario::from_code("11").unwrap();
        let estimators = [EstimatorKind::Reg, EstimatorKind::Amw];
        let r1 = run_scenario(&cfg, scenario, &estimators, 4, &opts, 9).unwrap();
        let r2 = run_scenario(&cfg, scenario, &estimators, 4, &opts, 9).unwrap();
        assert_eq!(r1.summaries, r2.summaries);
        assert_eq!(r1.replicates, r2.replicates);
        assert_eq!(r1.summaries[0].n_reps, 4);

        // mse/sd/mean identity and an independent recomputation
        for summary in &r1.summaries {
            let est: Vec<f64> = r1
                .replicates
                .iter()
                .filter(|row| row.estimator == summary.estimator)
                .map(|row| row.estimate)
                .collect();
            let m = est.len() as f64;
            let mean = est.iter().sum::<f64>() / m;
            let sd =
                (est.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt();
            let mse = est.iter().map(|v| v * v).sum::<f64>() / m;
            assert!((summary.mean - mean).abs() < 1e-12);
            assert!((summary.sd - sd).abs() < 1e-12);
            assert!((summary.mse - mse).abs() < 1e-12);
            let identity = (m - 1.0) / m * sd * sd + mean * mean;
            assert!((summary.mse - identity).abs() < 1e-9);
        }
    }

    #[test]
    fn run_without_bootstrap_skips_inference_columns() {
        let cfg = DgpConfig {
            n: 120,
            ..DgpConfig::standard(4)
        };
        let opts = SimOptions {
            boot_b: 0,
            k_policy: KPolicy::Fixed(1),
            ..SimOptions::default()
        };
        let run = run_scenario(
            &cfg,
            Scenario::from_code("11").unwrap(),
            &[EstimatorKind::Aipw],
            3,
            &opts,
            5,
        )
        .unwrap();
        assert!(run.summaries[0].bootsd.is_none());
        assert!(run.summaries[0].cr.is_none());
        let csv = summaries_to_csv(&run.summaries);
        assert!(csv.lines().count() == 2);
        assert!(csv.contains(",,")); // empty bootsd column
    }

    #[test]
    fn k_profile_anchors_bias_at_one() {
        let cfg = DgpConfig {
            n: 200,
            ..DgpConfig::standard(6)
        };
        let prof = k_profile(&cfg, Scenario::from_code("11").unwrap(), &[1, 2, 4], 6, 3).unwrap();
        assert_eq!(prof.ks, vec![1, 2, 4]);
        assert_eq!(prof.bias_proxy[0], 0.0);
        assert_eq!(prof.var_b.len(), 3);
        // grid without 1 gets it prepended
        let prof2 = k_profile(&cfg, Scenario::from_code("11").unwrap(), &[2, 4], 4, 3).unwrap();
        assert_eq!(prof2.ks, vec![1, 2, 4]);
    }
}
