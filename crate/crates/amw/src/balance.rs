//! Covariate balance diagnostics: standardized differences before and after
//! matching.
//!
//! The denominator is always the unweighted pre-matching pooled-arm spread
//! `sqrt((s1^2 + s0^2)/2)`, so the before and after columns are directly
//! comparable. "After" weights come from the match counts: `1 + M_i/K` for
//! the ATE, `A_i + (1 - A_i) M_i/K` for the ATT.

use serde::Serialize;

use crate::data::{Dataset, EstimandKind};
use crate::error::{Error, Result};
use crate::matching::MatchResult;

/// Balance of one covariate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRow {
    pub name: String,
    pub before: f64,
    pub after: f64,
}

/// Standardized differences for a covariate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceTable {
    pub rows: Vec<BalanceRow>,
    pub estimand: EstimandKind,
    pub k_used: usize,
    /// How the "after" weights were built from the match counts.
    pub weight_convention: String,
}

impl BalanceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("covariate,before,after\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.name, r.before, r.after));
        }
        out
    }
}

/// Weighted standardized difference of one covariate.
///
/// The numerator uses the weighted arm means; the denominator is the
/// unweighted within-arm spread of the same sample, so re-weighting moves
/// only the numerator.
pub fn std_diff(x: &[f64], a: &[u8], w: &[f64]) -> Result<f64> {
    let n = x.len();
    if a.len() != n || w.len() != n {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    let mut sum = [0.0f64; 2];
    let mut wsum = [0.0f64; 2];
    for i in 0..n {
        let arm = a[i] as usize;
        sum[arm] += w[i] * x[i];
        wsum[arm] += w[i];
    }
    if wsum[0] <= 0.0 || wsum[1] <= 0.0 {
        return Err(Error::InvalidArgument(
            "each arm needs positive total weight".into(),
        ));
    }
    let mean1 = sum[1] / wsum[1];
    let mean0 = sum[0] / wsum[0];
    // unweighted within-arm variances (n-1) of the full sample
    let mut raw_mean = [0.0f64; 2];
    let mut count = [0usize; 2];
    for i in 0..n {
        raw_mean[a[i] as usize] += x[i];
        count[a[i] as usize] += 1;
    }
    if count[0] < 2 || count[1] < 2 {
        return Err(Error::InvalidArgument(
            "each arm needs at least two units for a spread".into(),
        ));
    }
    raw_mean[0] /= count[0] as f64;
    raw_mean[1] /= count[1] as f64;
    let mut ss = [0.0f64; 2];
    for i in 0..n {
        let arm = a[i] as usize;
        let dv = x[i] - raw_mean[arm];
        ss[arm] += dv * dv;
    }
    let var1 = ss[1] / (count[1] - 1) as f64;
    let var0 = ss[0] / (count[0] - 1) as f64;
    let denom = ((var1 + var0) / 2.0).sqrt();
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((mean1 - mean0) / denom)
}

/// Standardized differences before (unit weights) and after matching
/// (match-count weights) for the given covariates.
pub fn balance_table(
    d: &Dataset,
    columns: &[String],
    m: &MatchResult,
    estimand: EstimandKind,
) -> Result<BalanceTable> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument("no covariates requested".into()));
    }
    let n = d.n();
    let a = d.a();
    let kf = m.k as f64;
    let after_w: Vec<f64> = (0..n)
        .map(|i| {
            let share = m.match_count[i] as f64 / kf;
            match estimand {
                EstimandKind::Ate => 1.0 + share,
                EstimandKind::Att => {
                    if a[i] == 1 {
                        1.0
                    } else {
                        share
                    }
                }
            }
        })
        .collect();
    let unit_w = vec![1.0; n];
    let mut rows = Vec::with_capacity(columns.len());
    for name in columns {
        let x = d.column(name)?;
        rows.push(BalanceRow {
            name: name.clone(),
            before: std_diff(x, a, &unit_w)?,
            after: std_diff(x, a, &after_w)?,
        });
    }
    let weight_convention = match estimand {
        EstimandKind::Ate => "1 + M_i/K".into(),
        EstimandKind::Att => "A_i + (1 - A_i) * M_i/K".into(),
    };
    Ok(BalanceTable {
        rows,
        estimand,
        k_used: m.k,
        weight_convention,
    })
}
