//! K-nearest-neighbor matching with replacement, match counts, and the
//! classical matching estimators.
//!
//! Units are matched into the opposite treatment arm on a scalar matching
//! variable (typically the estimated propensity score) or on the full
//! standardized covariate vector. Ties at the K-th smallest distance are
//! broken toward the lowest original index, which makes every match result
//! a deterministic function of its inputs.

use crate::data::{Dataset, EstimandKind};
use crate::error::{Error, Result};
use crate::nuisance::{fit_linear, Design, FitOptions, FittedNuisance};

/// Which units get matched.
///
/// `Both` matches every unit into the opposite arm (ATE-style); the
/// treated-only direction matches treated units to controls (ATT-style).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchDirection {
    Both,
    TreatedToControl,
}

/// Matching variable for the bias-corrected estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchVariable {
    /// Euclidean distance on standardized covariates.
    Covariates,
    /// Absolute distance on the estimated propensity score.
    Propensity,
}

/// Neighbor sets and match counts for one matching pass.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub k: usize,
    pub direction: MatchDirection,
    /// Per unit, the neighbor indices ordered by (distance, index).
    /// Unmatched units (controls under `TreatedToControl`) have an empty
    /// list.
    pub neighbors: Vec<Vec<usize>>,
    /// `M_i`: how many times unit `i` appears in another unit's neighbor
    /// list.
    pub match_count: Vec<u32>,
    /// Distance to the farthest selected neighbor; NaN for unmatched units.
    pub max_distance: Vec<f64>,
}

impl MatchResult {
    pub fn is_matched(&self, i: usize, a: &[u8]) -> bool {
        match self.direction {
            MatchDirection::Both => true,
            MatchDirection::TreatedToControl => a[i] == 1,
        }
    }

    /// Weighted match count `W_i = sum over l with i in J(l) of 1/|J(l)|`.
    /// Equals `M_i / K` whenever no neighbor list is saturated below `K`,
    /// and keeps the estimator identities exact when `K` exceeds an arm.
    pub fn fractional_weight(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.neighbors.len()];
        for js in &self.neighbors {
            if js.is_empty() {
                continue;
            }
            let share = 1.0 / js.len() as f64;
            for &j in js {
                w[j] += share;
            }
        }
        w
    }
}

/// Pick the `k` nearest candidates by (distance, original index).
/// `cands` holds (index, distance) pairs; order does not matter.
fn select_nearest(cands: &mut [(usize, f64)], k: usize) -> (Vec<usize>, f64) {
    cands.sort_unstable_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite distances")
            .then(a.0.cmp(&b.0))
    });
    let take = k.min(cands.len());
    let chosen: Vec<usize> = cands[..take].iter().map(|c| c.0).collect();
    let max_d = cands[take - 1].1;
    (chosen, max_d)
}

/// K-nearest-neighbor matching on a scalar matching variable.
///
/// For each matched unit the neighbor list holds the `min(k, opposite arm)`
/// opposite-arm units with the smallest absolute score difference, ties
/// broken by lowest original index.
pub fn knn_match(
    scores: &[f64],
    a: &[u8],
    k: usize,
    direction: MatchDirection,
) -> Result<MatchResult> {
    let n = scores.len();
    if a.len() != n {
        return Err(Error::InvalidArgument(
            "scores and treatment lengths differ".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "matching scores must be finite".into(),
        ));
    }
    // per-arm index lists sorted by (score, index)
    let mut sorted: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &t) in a.iter().enumerate() {
        sorted[t as usize].push(i);
    }
    for arm in &mut sorted {
        arm.sort_unstable_by(|&i, &j| {
            scores[i]
                .partial_cmp(&scores[j])
                .expect("finite scores")
                .then(i.cmp(&j))
        });
    }

    let mut neighbors = vec![Vec::new(); n];
    let mut match_count = vec![0u32; n];
    let mut max_distance = vec![f64::NAN; n];
    for i in 0..n {
        let matched = match direction {
            MatchDirection::Both => true,
            MatchDirection::TreatedToControl => a[i] == 1,
        };
        if !matched {
            continue;
        }
        let pool = &sorted[1 - a[i] as usize];
        if pool.is_empty() {
            return Err(Error::EmptyOppositeArm);
        }
        let (js, max_d) = nearest_in_sorted(scores, pool, scores[i], k);
        for &j in &js {
            match_count[j] += 1;
        }
        max_distance[i] = max_d;
        neighbors[i] = js;
    }
    Ok(MatchResult {
        k,
        direction,
        neighbors,
        match_count,
        max_distance,
    })
}

/// Nearest neighbors of `target` within `pool` (sorted by score), using a
/// two-pointer sweep to find the k-th distance, then an exact tie-break by
/// original index among candidates at that distance.
fn nearest_in_sorted(scores: &[f64], pool: &[usize], target: f64, k: usize) -> (Vec<usize>, f64) {
    let m = pool.len();
    let k_eff = k.min(m);
    let pos = pool.partition_point(|&j| scores[j] < target);
    // two-pointer pass for the k-th smallest distance
    let mut left = pos;
    let mut right = pos;
    let mut radius = 0.0_f64;
    for _ in 0..k_eff {
        let dl = if left > 0 {
            (scores[pool[left - 1]] - target).abs()
        } else {
            f64::INFINITY
        };
        let dr = if right < m {
            (scores[pool[right]] - target).abs()
        } else {
            f64::INFINITY
        };
        if dl <= dr {
            radius = dl;
            left -= 1;
        } else {
            radius = dr;
            right += 1;
        }
    }
    // collect everything within the radius (includes all ties)
    let mut lo = pos;
    while lo > 0 && (scores[pool[lo - 1]] - target).abs() <= radius {
        lo -= 1;
    }
    let mut hi = pos;
    while hi < m && (scores[pool[hi]] - target).abs() <= radius {
        hi += 1;
    }
    let mut cands: Vec<(usize, f64)> = pool[lo..hi]
        .iter()
        .map(|&j| (j, (scores[j] - target).abs()))
        .collect();
    select_nearest(&mut cands, k_eff)
}

/// Brute-force K-nearest-neighbor matching with Euclidean distance on the
/// given columns (standardize them first when scales differ).
pub fn knn_match_euclidean(
    columns: &[Vec<f64>],
    a: &[u8],
    k: usize,
    direction: MatchDirection,
) -> Result<MatchResult> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one matching column".into(),
        ));
    }
    let n = a.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "matching columns and treatment lengths differ".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matching values must be finite".into(),
        ));
    }
    let arm: [Vec<usize>; 2] = {
        let mut arm = [Vec::new(), Vec::new()];
        for (i, &t) in a.iter().enumerate() {
            arm[t as usize].push(i);
        }
        arm
    };
    let dist2 = |i: usize, j: usize| -> f64 {
        columns
            .iter()
            .map(|c| {
                let d = c[i] - c[j];
                d * d
            })
            .sum()
    };
    let mut neighbors = vec![Vec::new(); n];
    let mut match_count = vec![0u32; n];
    let mut max_distance = vec![f64::NAN; n];
    for i in 0..n {
        let matched = match direction {
            MatchDirection::Both => true,
            MatchDirection::TreatedToControl => a[i] == 1,
        };
        if !matched {
            continue;
        }
        let pool = &arm[1 - a[i] as usize];
        if pool.is_empty() {
            return Err(Error::EmptyOppositeArm);
        }
        let mut cands: Vec<(usize, f64)> = pool.iter().map(|&j| (j, dist2(i, j))).collect();
        let (js, max_d2) = select_nearest(&mut cands, k);
        for &j in &js {
            match_count[j] += 1;
        }
        max_distance[i] = max_d2.sqrt();
        neighbors[i] = js;
    }
    Ok(MatchResult {
        k,
        direction,
        neighbors,
        match_count,
        max_distance,
    })
}

/// Per-unit imputed potential outcomes.
#[derive(Debug, Clone)]
pub struct ImputedOutcomes {
    /// Imputed Y(1); NaN for units the direction leaves unmatched.
    pub yhat1: Vec<f64>,
    /// Imputed Y(0); NaN for units the direction leaves unmatched.
    pub yhat0: Vec<f64>,
}

/// Simple imputation: the observed arm keeps its outcome, the counterfactual
/// is the average outcome of the matched neighbors.
pub fn impute_simple(d: &Dataset, m: &MatchResult) -> ImputedOutcomes {
    impute_with_correction(d, m, None)
}

/// Bias-corrected imputation: neighbor outcomes are shifted by the
/// regression difference `u_a(v_i) - u_a(v_j)` before averaging. `u` holds
/// the per-unit regression predictions (u0, u1).
pub fn impute_bias_corrected(
    d: &Dataset,
    m: &MatchResult,
    u0: &[f64],
    u1: &[f64],
) -> ImputedOutcomes {
    impute_with_correction(d, m, Some((u0, u1)))
}

fn impute_with_correction(
    d: &Dataset,
    m: &MatchResult,
    u: Option<(&[f64], &[f64])>,
) -> ImputedOutcomes {
    let n = d.n();
    let a = d.a();
    let y = d.y();
    let mut yhat1 = vec![f64::NAN; n];
    let mut yhat0 = vec![f64::NAN; n];
    for i in 0..n {
        if a[i] == 1 {
            yhat1[i] = y[i];
        } else {
            yhat0[i] = y[i];
        }
        let js = &m.neighbors[i];
        if js.is_empty() {
            continue;
        }
        let mut acc = 0.0;
        for &j in js {
            acc += y[j];
            if let Some((u0, u1)) = u {
                // counterfactual arm is 1 - a_i
                let (ui, uj) = if a[i] == 1 {
                    (u0[i], u0[j])
                } else {
                    (u1[i], u1[j])
                };
                acc += ui - uj;
            }
        }
        let avg = acc / js.len() as f64;
        if a[i] == 1 {
            yhat0[i] = avg;
        } else {
            yhat1[i] = avg;
        }
    }
    ImputedOutcomes { yhat1, yhat0 }
}

/// Simple matching estimator: mean imputed contrast (ATE) or the treated
/// mean of `y - yhat0` (ATT).
pub fn match_estimate_simple(d: &Dataset, m: &MatchResult, estimand: EstimandKind) -> Result<f64> {
    check_direction(m, estimand)?;
    let imp = impute_simple(d, m);
    Ok(contrast(d, &imp, estimand))
}

fn check_direction(m: &MatchResult, estimand: EstimandKind) -> Result<()> {
    let ok = match estimand {
        EstimandKind::Ate => m.direction == MatchDirection::Both,
        EstimandKind::Att => m.direction == MatchDirection::TreatedToControl,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "match direction does not fit the estimand".into(),
        ))
    }
}

fn contrast(d: &Dataset, imp: &ImputedOutcomes, estimand: EstimandKind) -> f64 {
    match estimand {
        EstimandKind::Ate => {
            let n = d.n() as f64;
            imp.yhat1
                .iter()
                .zip(&imp.yhat0)
                .map(|(y1, y0)| y1 - y0)
                .sum::<f64>()
                / n
        }
        EstimandKind::Att => {
            let n1 = d.n1() as f64;
            d.a()
                .iter()
                .enumerate()
                .filter(|(_, &t)| t == 1)
                .map(|(i, _)| imp.yhat1[i] - imp.yhat0[i])
                .sum::<f64>()
                / n1
        }
    }
}

/// Bias-corrected matching estimator.
///
/// With `MatchVariable::Covariates` the correction uses the fitted outcome
/// models on X. With `MatchVariable::Propensity` the regression functions
/// are re-estimated on the propensity score: a within-arm linear fit of the
/// outcome on the score (intercept-only when the score is constant).
pub fn match_estimate_bias_corrected(
    d: &Dataset,
    m: &MatchResult,
    nuisance: &FittedNuisance,
    estimand: EstimandKind,
    variable: MatchVariable,
) -> Result<f64> {
    check_direction(m, estimand)?;
    let (u0, u1) = match variable {
        MatchVariable::Covariates => (nuisance.u0_hat.clone(), nuisance.u1_hat.clone()),
        MatchVariable::Propensity => {
            let (u0, u1) = score_regressions(d, &nuisance.e_hat)?;
            (u0, u1)
        }
    };
    let imp = impute_bias_corrected(d, m, &u0, &u1);
    Ok(contrast(d, &imp, estimand))
}

/// Within-arm linear regressions of the outcome on a scalar score,
/// predicted for every unit. Falls back to the arm mean when the score is
/// constant (matching on a constant is degenerate but well-defined).
pub(crate) fn score_regressions(d: &Dataset, score: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.n();
    let a = d.a();
    let y = d.y();
    let opts = FitOptions::default();
    let mut out = Vec::with_capacity(2);
    for arm in [0u8, 1u8] {
        let idx: Vec<usize> = (0..n).filter(|&i| a[i] == arm).collect();
        let s_arm: Vec<f64> = idx.iter().map(|&i| score[i]).collect();
        let y_arm: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let constant = s_arm.iter().all(|&v| v == s_arm[0]);
        let pred: Vec<f64> = if constant || idx.len() < 3 {
            let mean = y_arm.iter().sum::<f64>() / y_arm.len() as f64;
            vec![mean; n]
        } else {
            let design = Design::from_columns(&[&s_arm], true)?;
            let (coef, _) = fit_linear(&design, &y_arm, &opts)?;
            score.iter().map(|&s| coef[0] + coef[1] * s).collect()
        };
        out.push(pred);
    }
    let u1 = out.pop().expect("two arms");
    let u0 = out.pop().expect("two arms");
    Ok((u0, u1))
}
