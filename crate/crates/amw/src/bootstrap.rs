//! Naive nonparametric bootstrap: resample rows with replacement, refit the
//! whole pipeline per replicate with K held fixed, and summarize the spread
//! of the replicate estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EstimandKind, EstimatorKind, ModelSpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimateOptions, KPolicy, PointEstimate};
use crate::kselect::{resample_indices, KCandidateReport};
use crate::nuisance::FitOptions;
use crate::seed::rng_for;

/// Replicate estimates with their standard error and percentile interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Successful replicate estimates, in replicate order.
    pub estimates: Vec<f64>,
    /// Sample standard deviation (n-1) of the replicates.
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub alpha: f64,
    pub b_requested: usize,
    pub b_failed: usize,
    pub seed: u64,
}

/// A point estimate together with its bootstrap inference.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub point: PointEstimate,
    pub boot: Option<BootstrapResult>,
    pub k_used: Option<usize>,
    pub k_candidates: Option<Vec<KCandidateReport>>,
}

// keeps the report bootstrap stream clear of the replicate streams
const REPORT_BOOT_STREAM: u64 = u64::MAX / 2;

/// Full pipeline plus inference: estimate once (selecting K where asked),
/// then bootstrap the same spec with that K held fixed. `b = 0` skips the
/// bootstrap.
#[allow(clippy::too_many_arguments)]
pub fn estimate_with_bootstrap(
    d: &Dataset,
    spec: &ModelSpec,
    kind: EstimatorKind,
    estimand: EstimandKind,
    k: KPolicy,
    b: usize,
    alpha: f64,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    let est = estimate(d, spec, kind, estimand, k, opts)?;
    let boot = if b > 0 {
        Some(bootstrap(
            d,
            spec,
            kind,
            estimand,
            est.point.k_used,
            b,
            alpha,
            &opts.fit,
            crate::seed::child_seed(opts.seed, REPORT_BOOT_STREAM),
        )?)
    } else {
        None
    };
    Ok(EstimateReport {
        k_used: est.point.k_used,
        point: est.point,
        boot,
        k_candidates: est.k_reports,
    })
}

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= m {
        return sorted[m - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Naive bootstrap for one estimator at a fixed K.
///
/// Each replicate draws `n` rows with replacement under its own child seed
/// and reruns the full pipeline (models, matching, combination). A replicate
/// whose resample degenerates or whose fit fails is redrawn once from the
/// same stream, then counted as failed.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap(
    d: &Dataset,
    spec: &ModelSpec,
    kind: EstimatorKind,
    estimand: EstimandKind,
    k_fixed: Option<usize>,
    b: usize,
    alpha: f64,
    fit: &FitOptions,
    seed: u64,
) -> Result<BootstrapResult> {
    if b < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("alpha must be in (0, 1)".into()));
    }
    let opts = EstimateOptions {
        fit: fit.clone(),
        ..EstimateOptions::default()
    };
    let policy = match k_fixed {
        Some(k) => KPolicy::Fixed(k),
        None => KPolicy::Fixed(1),
    };
    let n = d.n();
    let one = |r: usize| -> Option<f64> {
        let mut rng = rng_for(seed, r as u64);
        for _attempt in 0..2 {
            let idx = resample_indices(&mut rng, n);
            let res = d
                .select_rows(&idx)
                .and_then(|ds| estimate(&ds, spec, kind, estimand, policy, &opts));
            if let Ok(est) = res {
                return Some(est.point.value);
            }
        }
        None
    };
    let draws: Vec<Option<f64>> = (0..b).into_par_iter().map(one).collect();
    let estimates: Vec<f64> = draws.iter().copied().flatten().collect();
    let b_failed = b - estimates.len();
    if b_failed > b / 2 || estimates.len() < 2 {
        return Err(Error::TooManyFailures {
            failed: b_failed,
            requested: b,
        });
    }
    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let se = (estimates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt();
    let mut sorted = estimates.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite estimates"));
    let ci_lower = percentile(&sorted, alpha / 2.0);
    let ci_upper = percentile(&sorted, 1.0 - alpha / 2.0);
    Ok(BootstrapResult {
        estimates,
        se,
        ci_lower,
        ci_upper,
        alpha,
        b_requested: b,
        b_failed,
        seed,
    })
}

/// Fraction of intervals containing `truth`.
pub fn coverage(cis: &[(f64, f64)], truth: f64) -> f64 {
    assert!(!cis.is_empty(), "coverage of an empty interval list");
    let hits = cis
        .iter()
        .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
        .count();
    hits as f64 / cis.len() as f64
}
