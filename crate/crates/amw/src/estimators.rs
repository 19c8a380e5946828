//! The estimator family: outcome regression, inverse propensity weighting,
//! its augmented variant, matching with bias correction, and the augmented
//! match weighted estimators that replace inverse-propensity weights with
//! match-count weights.

use serde::{Deserialize, Serialize};

use crate::data::{standardize_columns, Dataset, EstimandKind, EstimatorKind, ModelSpec};
use crate::error::{Error, Result};
use crate::kselect::{select_k, KCandidateReport};
use crate::matching::{
    knn_match, knn_match_euclidean, match_estimate_bias_corrected, MatchDirection, MatchVariable,
};
use crate::nuisance::{fit_nuisance, FitOptions, FittedNuisance};

/// A single point estimate with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub value: f64,
    pub estimator: EstimatorKind,
    pub estimand: EstimandKind,
    /// Number of matches, present only for matching-based estimators.
    pub k_used: Option<usize>,
    pub n_used: usize,
}

/// How the number of matches is chosen for matching-based estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KPolicy {
    /// Cross-validated selection (AMW only; other matching estimators fall
    /// back to their fixed default of 1).
    Auto,
    Fixed(usize),
}

/// Options threaded through the full estimation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub fit: FitOptions,
    /// Candidate grid for cross-validated K; `None` uses the default
    /// geometric grid capped at half the smaller arm.
    pub candidates: Option<Vec<usize>>,
    /// Split repetitions for the cross-validation bias estimate.
    pub cv_splits: usize,
    /// Bootstrap replicates for the cross-validation variance estimate.
    pub cv_boot: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            fit: FitOptions::default(),
            candidates: None,
            cv_splits: 25,
            cv_boot: 100,
            seed: 0,
        }
    }
}

/// Result of the estimation pipeline; carries per-candidate reports when
/// K was selected by cross-validation.
#[derive(Debug, Clone)]
pub struct Estimated {
    pub point: PointEstimate,
    pub k_reports: Option<Vec<KCandidateReport>>,
}

pub(crate) fn reg_value(d: &Dataset, nuis: &FittedNuisance, estimand: EstimandKind) -> f64 {
    match estimand {
        EstimandKind::Ate => {
            nuis.u1_hat
                .iter()
                .zip(&nuis.u0_hat)
                .map(|(u1, u0)| u1 - u0)
                .sum::<f64>()
                / d.n() as f64
        }
        EstimandKind::Att => {
            d.a()
                .iter()
                .enumerate()
                .filter(|(_, &t)| t == 1)
                .map(|(i, _)| nuis.u1_hat[i] - nuis.u0_hat[i])
                .sum::<f64>()
                / d.n1() as f64
        }
    }
}

/// Outcome regression estimator.
pub fn reg_estimate(d: &Dataset, nuis: &FittedNuisance, estimand: EstimandKind) -> PointEstimate {
    PointEstimate {
        value: reg_value(d, nuis, estimand),
        estimator: EstimatorKind::Reg,
        estimand,
        k_used: None,
        n_used: d.n(),
    }
}

fn check_propensity(nuis: &FittedNuisance) -> Result<()> {
    for (i, &e) in nuis.e_hat.iter().enumerate() {
        if e <= 0.0 || e >= 1.0 {
            return Err(Error::DegeneratePropensity { unit: i });
        }
    }
    Ok(())
}

/// Inverse propensity weighting (Horvitz-Thompson form).
pub fn ipw_estimate(
    d: &Dataset,
    nuis: &FittedNuisance,
    estimand: EstimandKind,
) -> Result<PointEstimate> {
    check_propensity(nuis)?;
    let a = d.a();
    let y = d.y();
    let e = &nuis.e_hat;
    let value = match estimand {
        EstimandKind::Ate => {
            (0..d.n())
                .map(|i| {
                    if a[i] == 1 {
                        y[i] / e[i]
                    } else {
                        -y[i] / (1.0 - e[i])
                    }
                })
                .sum::<f64>()
                / d.n() as f64
        }
        EstimandKind::Att => {
            (0..d.n())
                .map(|i| {
                    if a[i] == 1 {
                        y[i]
                    } else {
                        -y[i] * e[i] / (1.0 - e[i])
                    }
                })
                .sum::<f64>()
                / d.n1() as f64
        }
    };
    Ok(PointEstimate {
        value,
        estimator: EstimatorKind::Ipw,
        estimand,
        k_used: None,
        n_used: d.n(),
    })
}

/// Augmented inverse propensity weighting: the regression estimator plus an
/// inverse-propensity-weighted residual correction.
pub fn aipw_estimate(
    d: &Dataset,
    nuis: &FittedNuisance,
    estimand: EstimandKind,
) -> Result<PointEstimate> {
    check_propensity(nuis)?;
    let a = d.a();
    let r = &nuis.residual;
    let e = &nuis.e_hat;
    let value = match estimand {
        EstimandKind::Ate => {
            let aug = (0..d.n())
                .map(|i| {
                    if a[i] == 1 {
                        r[i] / e[i]
                    } else {
                        -r[i] / (1.0 - e[i])
                    }
                })
                .sum::<f64>()
                / d.n() as f64;
            reg_value(d, nuis, estimand) + aug
        }
        EstimandKind::Att => {
            let aug = (0..d.n())
                .map(|i| {
                    if a[i] == 1 {
                        r[i]
                    } else {
                        -r[i] * e[i] / (1.0 - e[i])
                    }
                })
                .sum::<f64>()
                / d.n1() as f64;
            reg_value(d, nuis, estimand) + aug
        }
    };
    Ok(PointEstimate {
        value,
        estimator: EstimatorKind::Aipw,
        estimand,
        k_used: None,
        n_used: d.n(),
    })
}

pub(crate) fn amw_value(d: &Dataset, nuis: &FittedNuisance, k: usize) -> Result<f64> {
    let limit = d.n1().min(d.n0());
    if k == 0 || k > limit {
        return Err(Error::KTooLarge { k, limit });
    }
    let m = knn_match(&nuis.e_hat, d.a(), k, MatchDirection::Both)?;
    let a = d.a();
    let kf = k as f64;
    let aug = (0..d.n())
        .map(|i| {
            let sign = 2.0 * a[i] as f64 - 1.0;
            sign * (1.0 + m.match_count[i] as f64 / kf) * nuis.residual[i]
        })
        .sum::<f64>()
        / d.n() as f64;
    Ok(reg_value(d, nuis, EstimandKind::Ate) + aug)
}

/// Augmented match weighted estimator of the ATE: the regression estimator
/// plus a residual correction weighted by `1 + M_i/K` from propensity-score
/// matching in both directions. Never divides by the propensity score.
pub fn amw_estimate(d: &Dataset, nuis: &FittedNuisance, k: usize) -> Result<PointEstimate> {
    Ok(PointEstimate {
        value: amw_value(d, nuis, k)?,
        estimator: EstimatorKind::Amw,
        estimand: EstimandKind::Ate,
        k_used: Some(k),
        n_used: d.n(),
    })
}

pub(crate) fn amw_att_value(d: &Dataset, nuis: &FittedNuisance, k: usize) -> Result<f64> {
    let limit = d.n0();
    if k == 0 || k > limit {
        return Err(Error::KTooLarge { k, limit });
    }
    let m = knn_match(&nuis.e_hat, d.a(), k, MatchDirection::TreatedToControl)?;
    let a = d.a();
    let kf = k as f64;
    let aug = (0..d.n())
        .map(|i| {
            if a[i] == 1 {
                nuis.residual[i]
            } else {
                -(1.0 + m.match_count[i] as f64 / kf) * nuis.residual[i]
            }
        })
        .sum::<f64>()
        / d.n1() as f64;
    Ok(reg_value(d, nuis, EstimandKind::Att) + aug)
}

/// Augmented match weighted estimator of the ATT; only treated units are
/// matched and control residuals carry the match-count weights.
pub fn amw_att_estimate(d: &Dataset, nuis: &FittedNuisance, k: usize) -> Result<PointEstimate> {
    Ok(PointEstimate {
        value: amw_att_value(d, nuis, k)?,
        estimator: EstimatorKind::Amw,
        estimand: EstimandKind::Att,
        k_used: Some(k),
        n_used: d.n(),
    })
}

fn direction_for(estimand: EstimandKind) -> MatchDirection {
    match estimand {
        EstimandKind::Ate => MatchDirection::Both,
        EstimandKind::Att => MatchDirection::TreatedToControl,
    }
}

/// Full estimation pipeline: fit the nuisance models, resolve K, match where
/// needed, and combine.
pub fn estimate(
    d: &Dataset,
    spec: &ModelSpec,
    kind: EstimatorKind,
    estimand: EstimandKind,
    k: KPolicy,
    opts: &EstimateOptions,
) -> Result<Estimated> {
    let nuis = fit_nuisance(d, spec, &opts.fit)?;
    let fixed_k = |default: usize| match k {
        KPolicy::Fixed(v) => v,
        KPolicy::Auto => default,
    };
    let mut k_reports = None;
    let point = match kind {
        EstimatorKind::Reg => reg_estimate(d, &nuis, estimand),
        EstimatorKind::Ipw => ipw_estimate(d, &nuis, estimand)?,
        EstimatorKind::Aipw => aipw_estimate(d, &nuis, estimand)?,
        EstimatorKind::Amw | EstimatorKind::Amwf => {
            let k_used = match (kind, k) {
                (EstimatorKind::Amw, KPolicy::Auto) => {
                    let grid = match &opts.candidates {
                        Some(g) => g.clone(),
                        None => default_candidates(d),
                    };
                    let (k_star, reports) = select_k(
                        d,
                        spec,
                        estimand,
                        &grid,
                        opts.cv_boot,
                        opts.cv_splits,
                        &opts.fit,
                        opts.seed,
                    )?;
                    k_reports = Some(reports);
                    k_star
                }
                _ => fixed_k(1),
            };
            let value = match estimand {
                EstimandKind::Ate => amw_value(d, &nuis, k_used)?,
                EstimandKind::Att => amw_att_value(d, &nuis, k_used)?,
            };
            PointEstimate {
                value,
                estimator: kind,
                estimand,
                k_used: Some(k_used),
                n_used: d.n(),
            }
        }
        EstimatorKind::Psm => {
            let k_used = fixed_k(1);
            let m = knn_match(&nuis.e_hat, d.a(), k_used, direction_for(estimand))?;
            let value =
                match_estimate_bias_corrected(d, &m, &nuis, estimand, MatchVariable::Propensity)?;
            PointEstimate {
                value,
                estimator: kind,
                estimand,
                k_used: Some(k_used),
                n_used: d.n(),
            }
        }
        EstimatorKind::MatchX => {
            if estimand != EstimandKind::Ate {
                return Err(Error::InvalidArgument(
                    "covariate matching supports the ATE only".into(),
                ));
            }
            let k_used = fixed_k(1);
            let cols: Vec<Vec<f64>> = spec
                .outcome_columns
                .iter()
                .map(|c| d.column(c).map(<[f64]>::to_vec))
                .collect::<Result<_>>()?;
            let (std_cols, _, _) = standardize_columns(&cols)?;
            let m = knn_match_euclidean(&std_cols, d.a(), k_used, MatchDirection::Both)?;
            let value =
                match_estimate_bias_corrected(d, &m, &nuis, estimand, MatchVariable::Covariates)?;
            PointEstimate {
                value,
                estimator: kind,
                estimand,
                k_used: Some(k_used),
                n_used: d.n(),
            }
        }
    };
    Ok(Estimated { point, k_reports })
}

/// Default candidate grid for cross-validated K: powers of two up to 64,
/// capped at half the smaller arm.
pub fn default_candidates(d: &Dataset) -> Vec<usize> {
    let cap = (d.n1().min(d.n0()) / 2).max(1);
    [1usize, 2, 4, 8, 16, 32, 64]
        .into_iter()
        .filter(|&k| k <= cap)
        .collect()
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::nuisance::FitInfo;

    /// Hand-built nuisance with the given scores and zero outcome
    /// predictions (residuals equal the outcomes).
    pub(crate) fn nuisance_zero_u(d: &Dataset, e: Vec<f64>) -> FittedNuisance {
        let zero = vec![0.0; d.n()];
        let done = FitInfo {
            converged: true,
            iterations: 0,
        };
        FittedNuisance {
            e_hat: e,
            u0_hat: zero.clone(),
            u1_hat: zero,
            residual: d.y().to_vec(),
            alpha: vec![],
            beta0: vec![],
            beta1: vec![],
            propensity_fit: done,
            outcome0_fit: done,
            outcome1_fit: done,
        }
    }
}
