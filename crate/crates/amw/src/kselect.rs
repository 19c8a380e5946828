//! Cross-validated selection of the number of matches K.
//!
//! The match-weighted estimator splits into a K-free constant `C` and a
//! K-dependent term `B(K)`; the variance of `B(K)` falls in K while its
//! bias grows, so K is chosen to minimize an estimated mean squared error.
//! The variance of each candidate comes from a naive bootstrap; the bias is
//! anchored at K = 1, which is treated as unbiased: repeated stratified
//! half-splits compare the candidate estimator on one half against the
//! K = 1 estimator on the other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EstimandKind, ModelSpec};
use crate::error::{Error, Result};
use crate::estimators::{amw_att_value, amw_value, reg_value};
use crate::matching::{knn_match, MatchDirection};
use crate::nuisance::{fit_nuisance, FitOptions, FittedNuisance};
use crate::seed::{rng_for, Rng};

const SPLIT_STREAM: u64 = 1 << 32;

/// The K-dependent part of the match-weighted ATE estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BTerm {
    pub k: usize,
    pub value: f64,
}

/// Diagnostics for one candidate K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCandidateReport {
    pub k: usize,
    pub var_hat: f64,
    pub bias_hat: f64,
    pub mse_hat: f64,
    pub n_splits: usize,
}

/// The K-free remainder: `amw(k) = c_term + b_term(k)` for every valid k.
pub fn c_term(d: &Dataset, nuis: &FittedNuisance) -> f64 {
    let aug = d
        .a()
        .iter()
        .zip(&nuis.residual)
        .map(|(&a, &r)| (2.0 * a as f64 - 1.0) * r)
        .sum::<f64>()
        / d.n() as f64;
    reg_value(d, nuis, EstimandKind::Ate) + aug
}

/// `B(K)`: the match-count-weighted residual contrast. Saturated neighbor
/// lists (K beyond an arm) use the per-list size as divisor, which keeps
/// the decomposition exact.
pub fn compute_b_term(d: &Dataset, nuis: &FittedNuisance, k: usize) -> Result<BTerm> {
    let limit = d.n1().max(d.n0());
    if k == 0 || k > limit {
        return Err(Error::KTooLarge { k, limit });
    }
    let m = knn_match(&nuis.e_hat, d.a(), k, MatchDirection::Both)?;
    let w = m.fractional_weight();
    let value = d
        .a()
        .iter()
        .enumerate()
        .map(|(i, &a)| (2.0 * a as f64 - 1.0) * w[i] * nuis.residual[i])
        .sum::<f64>()
        / d.n() as f64;
    Ok(BTerm { k, value })
}

fn amw_for(d: &Dataset, nuis: &FittedNuisance, estimand: EstimandKind, k: usize) -> Result<f64> {
    match estimand {
        EstimandKind::Ate => amw_value(d, nuis, k),
        EstimandKind::Att => amw_att_value(d, nuis, k),
    }
}

/// Match-weighted estimates for every candidate K from a single matching
/// pass at the largest K.
///
/// Under the (distance, index) tie-break the K-nearest lists are prefix
/// nested, so the match counts for a smaller k come from the first k
/// positions of each neighbor list; positional prefix sums of the signed
/// neighbor residuals then give every B(k) in one sweep.
fn amw_candidates(
    d: &Dataset,
    nuis: &FittedNuisance,
    estimand: EstimandKind,
    ks: &[usize],
) -> Result<Vec<f64>> {
    debug_assert!(ks.windows(2).all(|w| w[0] < w[1]));
    let kmax = *ks.last().expect("non-empty candidate list");
    let limit = match estimand {
        EstimandKind::Ate => d.n1().min(d.n0()),
        EstimandKind::Att => d.n0(),
    };
    if kmax == 0 || kmax > limit {
        return Err(Error::KTooLarge { k: kmax, limit });
    }
    let direction = match estimand {
        EstimandKind::Ate => MatchDirection::Both,
        EstimandKind::Att => MatchDirection::TreatedToControl,
    };
    let m = knn_match(&nuis.e_hat, d.a(), kmax, direction)?;
    let a = d.a();
    let r = &nuis.residual;
    let mut positional = vec![0.0f64; kmax];
    for js in &m.neighbors {
        for (pos, &j) in js.iter().enumerate() {
            let term = match estimand {
                EstimandKind::Ate => (2.0 * a[j] as f64 - 1.0) * r[j],
                EstimandKind::Att => r[j],
            };
            positional[pos] += term;
        }
    }
    let (constant, denom, sign) = match estimand {
        EstimandKind::Ate => (c_term(d, nuis), d.n() as f64, 1.0),
        EstimandKind::Att => {
            let base = a
                .iter()
                .zip(r)
                .map(|(&ai, &ri)| if ai == 1 { ri } else { -ri })
                .sum::<f64>()
                / d.n1() as f64;
            (
                reg_value(d, nuis, EstimandKind::Att) + base,
                d.n1() as f64,
                -1.0,
            )
        }
    };
    let mut out = Vec::with_capacity(ks.len());
    let mut prefix = 0.0;
    let mut next = 0;
    for (pos, t) in positional.iter().enumerate() {
        prefix += t;
        if next < ks.len() && pos + 1 == ks[next] {
            out.push(constant + sign * prefix / (ks[next] as f64 * denom));
            next += 1;
        }
    }
    debug_assert_eq!(out.len(), ks.len());
    Ok(out)
}

/// Stratified half-split: both halves keep both treatment arms. Returns
/// sorted row index lists.
fn stratified_split(d: &Dataset, rng: &mut Rng) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut treated: Vec<usize> = (0..d.n()).filter(|&i| d.a()[i] == 1).collect();
    let mut control: Vec<usize> = (0..d.n()).filter(|&i| d.a()[i] == 0).collect();
    treated.shuffle(rng);
    control.shuffle(rng);
    let ht = treated.len() / 2;
    let hc = control.len() / 2;
    let mut h1: Vec<usize> = treated[..ht].iter().chain(&control[..hc]).copied().collect();
    let mut h2: Vec<usize> = treated[ht..].iter().chain(&control[hc..]).copied().collect();
    h1.sort_unstable();
    h2.sort_unstable();
    (h1, h2)
}

/// One split evaluation: candidate estimates on half 1 minus the K = 1
/// estimate on half 2. Both halves are refit from scratch.
fn split_biases(
    d: &Dataset,
    spec: &ModelSpec,
    estimand: EstimandKind,
    ks: &[usize],
    fit: &FitOptions,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let (h1, h2) = stratified_split(d, rng);
    let d1 = d.select_rows(&h1)?;
    let d2 = d.select_rows(&h2)?;
    let n1 = fit_nuisance(&d1, spec, fit)?;
    let n2 = fit_nuisance(&d2, spec, fit)?;
    let anchor = amw_for(&d2, &n2, estimand, 1)?;
    let values = amw_candidates(&d1, &n1, estimand, ks)?;
    Ok(values.into_iter().map(|v| v - anchor).collect())
}

/// Split-half bias estimate for one candidate K, averaged over `n_splits`
/// repetitions. K = 1 is the anchor and returns exactly zero.
pub fn cv_bias(
    d: &Dataset,
    spec: &ModelSpec,
    estimand: EstimandKind,
    k: usize,
    n_splits: usize,
    fit: &FitOptions,
    seed: u64,
) -> Result<f64> {
    if k == 1 {
        return Ok(0.0);
    }
    if n_splits == 0 {
        return Err(Error::InvalidArgument("n_splits must be at least 1".into()));
    }
    check_splittable(d)?;
    let mut acc = 0.0;
    for s in 0..n_splits {
        acc += split_bias_once(d, spec, estimand, &[k], fit, seed, s)?[0];
    }
    Ok(acc / n_splits as f64)
}

fn check_splittable(d: &Dataset) -> Result<()> {
    if d.n1() < 2 || d.n0() < 2 {
        return Err(Error::SplitTooSmall { n: d.n() });
    }
    Ok(())
}

/// A single seeded split evaluation, retried once on a fitting failure.
fn split_bias_once(
    d: &Dataset,
    spec: &ModelSpec,
    estimand: EstimandKind,
    ks: &[usize],
    fit: &FitOptions,
    seed: u64,
    split_index: usize,
) -> Result<Vec<f64>> {
    let mut rng = rng_for(seed, SPLIT_STREAM + split_index as u64);
    match split_biases(d, spec, estimand, ks, fit, &mut rng) {
        Ok(v) => Ok(v),
        Err(_) => split_biases(d, spec, estimand, ks, fit, &mut rng),
    }
}

pub(crate) fn resample_indices(rng: &mut Rng, n: usize) -> Vec<usize> {
    use rand::Rng as _;
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Cross-validated choice of K.
///
/// For each candidate, the variance is estimated by a naive bootstrap
/// (every resample refits the models; all candidates share the resamples
/// through the C + B(K) decomposition) and the bias by averaged half-split
/// contrasts against the K = 1 anchor. The candidate minimizing
/// `var + bias^2` wins; ties go to the smaller K.
#[allow(clippy::too_many_arguments)]
pub fn select_k(
    d: &Dataset,
    spec: &ModelSpec,
    estimand: EstimandKind,
    candidates: &[usize],
    boot_b: usize,
    n_splits: usize,
    fit: &FitOptions,
    seed: u64,
) -> Result<(usize, Vec<KCandidateReport>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate grid".into()));
    }
    if candidates.contains(&0) {
        return Err(Error::InvalidArgument("candidates must be >= 1".into()));
    }
    if boot_b < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    check_splittable(d)?;
    let mut ks: Vec<usize> = candidates.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks[0] != 1 {
        ks.insert(0, 1);
    }
    let limit = match estimand {
        EstimandKind::Ate => d.n1().min(d.n0()),
        EstimandKind::Att => d.n0(),
    };
    if let Some(&too_big) = ks.iter().find(|&&k| k > limit) {
        return Err(Error::KTooLarge { k: too_big, limit });
    }

    // variance by shared-resample naive bootstrap
    let n = d.n();
    let replicate = |b: usize| -> Option<Vec<f64>> {
        let mut rng = rng_for(seed, b as u64);
        for _attempt in 0..2 {
            let idx = resample_indices(&mut rng, n);
            let res = d
                .select_rows(&idx)
                .and_then(|ds| fit_nuisance(&ds, spec, fit).map(|nu| (ds, nu)))
                .and_then(|(ds, nu)| amw_candidates(&ds, &nu, estimand, &ks));
            if let Ok(v) = res {
                return Some(v);
            }
        }
        None
    };
    let draws: Vec<Option<Vec<f64>>> = (0..boot_b).into_par_iter().map(replicate).collect();
    let failed = draws.iter().filter(|v| v.is_none()).count();
    if failed > boot_b / 2 || boot_b - failed < 2 {
        return Err(Error::TooManyFailures {
            failed,
            requested: boot_b,
        });
    }
    let mut var_hat = vec![0.0; ks.len()];
    for (j, var) in var_hat.iter_mut().enumerate() {
        let vals: Vec<f64> = draws
            .iter()
            .filter_map(|v| v.as_ref().map(|v| v[j]))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        *var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() - 1) as f64;
    }

    // bias by shared half-splits for every candidate beyond the anchor
    let tail: Vec<usize> = ks.iter().copied().filter(|&k| k != 1).collect();
    let mut bias_hat = vec![0.0; ks.len()];
    if !tail.is_empty() && n_splits > 0 {
        let split_values: Vec<Vec<f64>> = (0..n_splits)
            .into_par_iter()
            .map(|s| split_bias_once(d, spec, estimand, &tail, fit, seed, s))
            .collect::<Result<_>>()?;
        for (pos, &k) in tail.iter().enumerate() {
            let j = ks.iter().position(|&v| v == k).expect("candidate present");
            bias_hat[j] = split_values.iter().map(|v| v[pos]).sum::<f64>() / n_splits as f64;
        }
    }

    let reports: Vec<KCandidateReport> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| KCandidateReport {
            k,
            var_hat: var_hat[j],
            bias_hat: bias_hat[j],
            mse_hat: var_hat[j] + bias_hat[j] * bias_hat[j],
            n_splits: if k == 1 { 0 } else { n_splits },
        })
        .collect();
    let mut best = 0;
    for (j, rep) in reports.iter().enumerate() {
        if rep.mse_hat < reports[best].mse_hat {
            best = j;
        }
    }
    Ok((reports[best].k, reports))
}
