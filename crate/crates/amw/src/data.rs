//! Core record types, validation, and CSV ingestion.
//!
//! A [`Dataset`] holds one outcome, one binary treatment indicator, and a
//! named covariate matrix. It is immutable after construction and validated
//! eagerly: treatments are exactly 0 or 1, all numeric values are finite,
//! and both treatment arms are non-empty.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Causal estimand: population average effect or average effect on the
/// treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimandKind {
    Ate,
    Att,
}

impl std::fmt::Display for EstimandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimandKind::Ate => write!(f, "ATE"),
            EstimandKind::Att => write!(f, "ATT"),
        }
    }
}

/// The estimator family implemented by this crate.
///
/// `Amwf` is the match-weighted estimator with the number of matches held
/// fixed (conventionally 1) instead of selected by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "REG")]
    Reg,
    #[serde(rename = "IPW")]
    Ipw,
    #[serde(rename = "AIPW")]
    Aipw,
    #[serde(rename = "PSM")]
    Psm,
    #[serde(rename = "MATCH_X")]
    MatchX,
    #[serde(rename = "AMW")]
    Amw,
    #[serde(rename = "AMWF")]
    Amwf,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Reg => "REG",
            EstimatorKind::Ipw => "IPW",
            EstimatorKind::Aipw => "AIPW",
            EstimatorKind::Psm => "PSM",
            EstimatorKind::MatchX => "MATCH_X",
            EstimatorKind::Amw => "AMW",
            EstimatorKind::Amwf => "AMWF",
        }
    }

    /// Whether the estimator performs matching and therefore reports a
    /// number of matches.
    pub fn uses_matching(&self) -> bool {
        matches!(
            self,
            EstimatorKind::Psm | EstimatorKind::MatchX | EstimatorKind::Amw | EstimatorKind::Amwf
        )
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "REG" => Ok(EstimatorKind::Reg),
            "IPW" => Ok(EstimatorKind::Ipw),
            "AIPW" => Ok(EstimatorKind::Aipw),
            "PSM" => Ok(EstimatorKind::Psm),
            "MATCH_X" | "MATCH-X" | "MATCHX" => Ok(EstimatorKind::MatchX),
            "AMW" => Ok(EstimatorKind::Amw),
            "AMWF" => Ok(EstimatorKind::Amwf),
            other => Err(Error::InvalidArgument(format!(
                "unknown estimator `{other}`"
            ))),
        }
    }
}

/// Outcome-model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeFamily {
    Linear,
    Logistic,
}

/// Which covariates enter the propensity and outcome models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub propensity_columns: Vec<String>,
    pub propensity_intercept: bool,
    pub outcome_columns: Vec<String>,
    pub outcome_intercept: bool,
    pub outcome_family: OutcomeFamily,
}

impl ModelSpec {
    /// Linear models with intercepts on a shared column set.
    pub fn linear(columns: Vec<String>) -> Self {
        ModelSpec {
            propensity_columns: columns.clone(),
            propensity_intercept: true,
            outcome_columns: columns,
            outcome_intercept: true,
            outcome_family: OutcomeFamily::Linear,
        }
    }

    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if self.propensity_columns.is_empty() && !self.propensity_intercept {
            return Err(Error::InvalidArgument(
                "propensity model needs at least one regressor".into(),
            ));
        }
        if self.outcome_columns.is_empty() && !self.outcome_intercept {
            return Err(Error::InvalidArgument(
                "outcome model needs at least one regressor".into(),
            ));
        }
        for name in self.propensity_columns.iter().chain(&self.outcome_columns) {
            d.column(name)?;
        }
        Ok(())
    }
}

/// Immutable sample of `(outcome, treatment, covariates)` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    a: Vec<u8>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    n1: usize,
}

impl Dataset {
    /// Validates and assembles a dataset. Covariates are column-major and
    /// must align with `names`. Data rows are reported 1-based in errors.
    pub fn new(
        y: Vec<f64>,
        a: Vec<u8>,
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset has no rows".into()));
        }
        if a.len() != n {
            return Err(Error::InvalidArgument(
                "treatment and outcome lengths differ".into(),
            ));
        }
        if columns.len() != names.len() {
            return Err(Error::InvalidArgument(
                "covariate matrix and names differ in width".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate column name `{name}`"
                )));
            }
        }
        for (row, &v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    column: "y".into(),
                    row: row + 1,
                });
            }
        }
        for (row, &t) in a.iter().enumerate() {
            if t > 1 {
                return Err(Error::NonBinaryTreatment { row: row + 1 });
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` length differs from n"
                )));
            }
            for (row, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        column: name.clone(),
                        row: row + 1,
                    });
                }
            }
        }
        let n1 = a.iter().filter(|&&t| t == 1).count();
        if n1 == 0 || n1 == n {
            return Err(Error::EmptyArm);
        }
        Ok(Dataset {
            y,
            a,
            columns,
            names,
            n1,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n0(&self) -> usize {
        self.n() - self.n1
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn a(&self) -> &[u8] {
        &self.a
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|c| c == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::MissingColumn { name: name.into() })
    }

    /// New dataset made of the given row indices, in order. Indices may
    /// repeat (bootstrap resampling). Fails with `EmptyArm` when the
    /// selection drops a treatment arm.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Dataset> {
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let a = idx.iter().map(|&i| self.a[i]).collect();
        let columns = self
            .columns
            .iter()
            .map(|col| idx.iter().map(|&i| col[i]).collect())
            .collect();
        Dataset::new(y, a, columns, self.names.clone())
    }
}

/// Standardized columns with the per-column means and sds that produced
/// them.
pub type Standardized = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

/// Column-wise standardization to mean 0, sample standard deviation 1
/// (n-1 denominator). Returns the standardized columns together with the
/// means and sds so the same transform can be applied to held-out rows.
pub fn standardize_columns(columns: &[Vec<f64>]) -> Result<Standardized> {
    let mut out = Vec::with_capacity(columns.len());
    let mut means = Vec::with_capacity(columns.len());
    let mut sds = Vec::with_capacity(columns.len());
    for (j, col) in columns.iter().enumerate() {
        let (std, mean, sd) = standardize_one(col, &j.to_string())?;
        out.push(std);
        means.push(mean);
        sds.push(sd);
    }
    Ok((out, means, sds))
}

pub(crate) fn standardize_one(col: &[f64], label: &str) -> Result<(Vec<f64>, f64, f64)> {
    let n = col.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "standardization needs at least two rows".into(),
        ));
    }
    let mean = col.iter().sum::<f64>() / n as f64;
    let ss = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Err(Error::ZeroVariance {
            column: label.into(),
        });
    }
    let std = col.iter().map(|&v| (v - mean) / sd).collect();
    Ok((std, mean, sd))
}

/// Load a dataset from an RFC-4180 style CSV file with a header row.
///
/// `y_col` is the outcome, `a_col` the 0/1 treatment, `x_cols` the covariate
/// columns to retain, in the given order. Row order is preserved.
pub fn load_csv<P: AsRef<Path>>(
    path: P,
    y_col: &str,
    a_col: &str,
    x_cols: &[String],
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| Error::Csv(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { name: name.into() })
    };
    let y_idx = find(y_col)?;
    let a_idx = find(a_col)?;
    let x_idx: Vec<usize> = x_cols.iter().map(|c| find(c)).collect::<Result<_>>()?;

    let mut y = Vec::new();
    let mut a = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); x_cols.len()];
    for (row0, record) in reader.records().enumerate() {
        let row = row0 + 1; // 1-based data row
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let field = |idx: usize, column: &str| -> Result<f64> {
            let raw = record.get(idx).ok_or_else(|| Error::ParseValue {
                column: column.into(),
                row,
            })?;
            raw.parse::<f64>().map_err(|_| Error::ParseValue {
                column: column.into(),
                row,
            })
        };
        let yv = field(y_idx, y_col)?;
        if !yv.is_finite() {
            return Err(Error::NonFiniteValue {
                column: y_col.into(),
                row,
            });
        }
        y.push(yv);
        let av = field(a_idx, a_col)?;
        if av == 0.0 {
            a.push(0);
        } else if av == 1.0 {
            a.push(1);
        } else {
            return Err(Error::NonBinaryTreatment { row });
        }
        for (slot, (&idx, name)) in x_idx.iter().zip(x_cols).enumerate() {
            let v = field(idx, name)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    column: name.clone(),
                    row,
                });
            }
            columns[slot].push(v);
        }
    }
    Dataset::new(y, a, columns, x_cols.to_vec())
}
