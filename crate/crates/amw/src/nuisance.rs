//! Propensity-score and outcome-model fitting.
//!
//! The treatment model is a logistic regression solved by iteratively
//! reweighted least squares; outcome models are ordinary least squares
//! (linear family) or logistic regressions (binary outcomes), fit within
//! each treatment arm and predicted for every unit. Design columns are
//! rescaled internally for conditioning and the coefficients are mapped
//! back to the original scale, so reported coefficients and predictions
//! are unaffected.

use crate::data::{Dataset, ModelSpec, OutcomeFamily};
use crate::error::{Error, ModelRole, Result};
use crate::linalg::{solve_spd, xtv, xtwx};

/// Solver controls for the nuisance fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Iteration cap for the logistic solver.
    pub max_iter: usize,
    /// Convergence tolerance on the score norm (internally scaled columns).
    pub tol: f64,
    /// Nonnegative stabilizer added to the normal-equations diagonal
    /// (intercept excluded). Zero by default.
    pub ridge: f64,
    /// Optional clip bound for fitted propensity scores, for diagnostics
    /// only: scores are forced into `[clip, 1-clip]` after fitting.
    pub propensity_clip: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 100,
            tol: 1e-8,
            ridge: 0.0,
            propensity_clip: None,
        }
    }
}

/// Convergence record for one fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitInfo {
    pub converged: bool,
    pub iterations: usize,
}

/// Per-unit nuisance estimates: propensity scores, outcome predictions for
/// both arms, and the observed-arm residuals.
#[derive(Debug, Clone)]
pub struct FittedNuisance {
    pub e_hat: Vec<f64>,
    pub u0_hat: Vec<f64>,
    pub u1_hat: Vec<f64>,
    /// `y_i - u_{a_i}(x_i)`, computed exactly from the stored predictions.
    pub residual: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta0: Vec<f64>,
    pub beta1: Vec<f64>,
    pub propensity_fit: FitInfo,
    pub outcome0_fit: FitInfo,
    pub outcome1_fit: FitInfo,
}

/// Row-major design matrix. When `intercept` is set the leading column is
/// all ones.
#[derive(Debug, Clone)]
pub struct Design {
    data: Vec<f64>,
    n: usize,
    p: usize,
    intercept: bool,
}

impl Design {
    pub fn from_columns(cols: &[&[f64]], intercept: bool) -> Result<Design> {
        if cols.is_empty() {
            return Err(Error::InvalidArgument(
                "design needs at least one data column; use intercept_only for a bare intercept"
                    .into(),
            ));
        }
        let n = cols[0].len();
        let p = cols.len() + usize::from(intercept);
        let mut data = Vec::with_capacity(n * p);
        for i in 0..n {
            if intercept {
                data.push(1.0);
            }
            for col in cols {
                data.push(col[i]);
            }
        }
        Ok(Design {
            data,
            n,
            p,
            intercept,
        })
    }

    /// A design holding only the all-ones intercept column.
    pub fn intercept_only(n: usize) -> Design {
        Design {
            data: vec![1.0; n],
            n,
            p: 1,
            intercept: true,
        }
    }

    pub fn from_dataset(d: &Dataset, columns: &[String], intercept: bool) -> Result<Design> {
        if columns.is_empty() {
            if intercept {
                return Ok(Design::intercept_only(d.n()));
            }
            return Err(Error::InvalidArgument(
                "model needs at least one regressor".into(),
            ));
        }
        let cols: Vec<&[f64]> = columns
            .iter()
            .map(|c| d.column(c))
            .collect::<Result<_>>()?;
        Design::from_columns(&cols, intercept)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Linear predictor `X beta` (original scale).
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.p..(i + 1) * self.p]
                    .iter()
                    .zip(beta)
                    .map(|(x, b)| x * b)
                    .sum()
            })
            .collect()
    }

    /// Design restricted to the given rows.
    pub(crate) fn rows(&self, idx: &[usize]) -> Design {
        let mut data = Vec::with_capacity(idx.len() * self.p);
        for &i in idx {
            data.extend_from_slice(&self.data[i * self.p..(i + 1) * self.p]);
        }
        Design {
            data,
            n: idx.len(),
            p: self.p,
            intercept: self.intercept,
        }
    }

    /// Rescaled copy for numerical conditioning: non-intercept columns with
    /// positive spread are centered (only when an intercept is present) and
    /// divided by their sample standard deviation. Returns the per-column
    /// (mean, sd) actually applied.
    #[allow(clippy::needless_range_loop)]
    fn scaled(&self) -> (Design, Vec<(f64, f64)>) {
        let mut transforms = vec![(0.0, 1.0); self.p];
        let start = usize::from(self.intercept);
        let nf = self.n as f64;
        for j in start..self.p {
            let mut mean = 0.0;
            for i in 0..self.n {
                mean += self.data[i * self.p + j];
            }
            mean /= nf;
            let mut ss = 0.0;
            for i in 0..self.n {
                let dv = self.data[i * self.p + j] - mean;
                ss += dv * dv;
            }
            let sd = if self.n > 1 {
                (ss / (nf - 1.0)).sqrt()
            } else {
                0.0
            };
            if sd > 0.0 {
                transforms[j] = if self.intercept { (mean, sd) } else { (0.0, sd) };
            }
        }
        let mut data = self.data.clone();
        for i in 0..self.n {
            let row = &mut data[i * self.p..(i + 1) * self.p];
            for (x, &(m, s)) in row.iter_mut().zip(&transforms).skip(start) {
                *x = (*x - m) / s;
            }
        }
        (
            Design {
                data,
                n: self.n,
                p: self.p,
                intercept: self.intercept,
            },
            transforms,
        )
    }

    /// Map coefficients from the scaled design back to the original scale.
    fn unscale_coefficients(&self, beta: &[f64], transforms: &[(f64, f64)]) -> Vec<f64> {
        let mut out = beta.to_vec();
        let start = usize::from(self.intercept);
        for j in start..self.p {
            let (m, s) = transforms[j];
            out[j] = beta[j] / s;
            if self.intercept {
                out[0] -= beta[j] * m / s;
            }
        }
        out
    }
}

pub(crate) fn expit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

// |eta| beyond this while the score has not converged is treated as
// separation; at the cap expit stays strictly inside (0, 1) in f64.
const ETA_CAP: f64 = 30.0;

pub(crate) fn fit_logistic_impl(
    design: &Design,
    t: &[f64],
    opts: &FitOptions,
) -> Result<(Vec<f64>, Vec<f64>, FitInfo)> {
    let n = design.n();
    let p = design.p();
    if t.len() != n {
        return Err(Error::InvalidArgument(
            "response length differs from design".into(),
        ));
    }
    let ones = t.iter().filter(|&&v| v == 1.0).count();
    let zeros = t.iter().filter(|&&v| v == 0.0).count();
    if ones + zeros != n {
        return Err(Error::InvalidArgument(
            "logistic response must be 0/1".into(),
        ));
    }
    if ones == 0 || zeros == 0 {
        return Err(Error::OneClass);
    }
    let (scaled, transforms) = design.scaled();
    let mut beta = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut probs = vec![0.5; n];
    for iter in 0..=opts.max_iter {
        // a fit pushed past the cap is (quasi-)separated: the probabilities
        // pinned near 0/1 also silence the score, so this must be checked
        // before convergence
        let max_eta = eta.iter().fold(0.0_f64, |m, &e: &f64| m.max(e.abs()));
        if max_eta > ETA_CAP {
            return Err(Error::Separation);
        }
        let resid: Vec<f64> = t.iter().zip(&probs).map(|(ti, pi)| ti - pi).collect();
        let grad = xtv(&scaled.data, n, p, &resid);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm <= opts.tol {
            // a score that dies because every unit is predicted perfectly is
            // separation, not convergence: the likelihood maximum sits at
            // infinity
            if resid.iter().all(|r| r.abs() < 1e-6) {
                return Err(Error::Separation);
            }
            let coef = design.unscale_coefficients(&beta, &transforms);
            let info = FitInfo {
                converged: true,
                iterations: iter,
            };
            return Ok((coef, probs, info));
        }
        if iter == opts.max_iter {
            break;
        }
        let w: Vec<f64> = probs.iter().map(|pi| pi * (1.0 - pi)).collect();
        let mut a = xtwx(&scaled.data, n, p, Some(&w));
        if opts.ridge > 0.0 {
            for j in usize::from(design.intercept)..p {
                a[j * p + j] += opts.ridge;
            }
        }
        let step = solve_spd(&mut a, &grad, p)?;
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
        }
        eta = scaled.predict(&beta);
        probs = eta.iter().map(|&e| expit(e)).collect();
    }
    Err(Error::MaxIterExceeded {
        max_iter: opts.max_iter,
    })
}

/// Logistic regression by iteratively reweighted least squares.
///
/// Returns coefficients (original column scale) and fitted probabilities,
/// which are strictly inside (0, 1). The response must take both values.
pub fn fit_logistic(design: &Design, t: &[f64], opts: &FitOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    fit_logistic_impl(design, t, opts).map(|(c, f, _)| (c, f))
}

/// Least squares via the normal equations. Returns coefficients (original
/// column scale) and fitted values.
pub fn fit_linear(design: &Design, y: &[f64], opts: &FitOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = design.n();
    let p = design.p();
    if y.len() != n {
        return Err(Error::InvalidArgument(
            "response length differs from design".into(),
        ));
    }
    let (scaled, transforms) = design.scaled();
    let mut a = xtwx(&scaled.data, n, p, None);
    if opts.ridge > 0.0 {
        for j in usize::from(design.intercept)..p {
            a[j * p + j] += opts.ridge;
        }
    }
    let b = xtv(&scaled.data, n, p, y);
    let beta = solve_spd(&mut a, &b, p)?;
    let fitted = scaled.predict(&beta);
    let coef = design.unscale_coefficients(&beta, &transforms);
    Ok((coef, fitted))
}

fn validate_binary_outcome(y: &[f64], idx: &[usize]) -> Result<()> {
    for (&i, &v) in idx.iter().zip(y) {
        if v != 0.0 && v != 1.0 {
            return Err(Error::NonBinaryOutcome { row: i + 1 });
        }
    }
    Ok(())
}

/// Fit the propensity model on all units and the outcome model within each
/// treatment arm, predicting both potential-outcome regressions for every
/// unit.
pub fn fit_nuisance(d: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FittedNuisance> {
    spec.validate(d)?;
    let n = d.n();
    let a = d.a();
    let t: Vec<f64> = a.iter().map(|&v| v as f64).collect();

    let ps_design = Design::from_dataset(d, &spec.propensity_columns, spec.propensity_intercept)?;
    let (alpha, mut e_hat, propensity_fit) = fit_logistic_impl(&ps_design, &t, opts)
        .map_err(|e| e.in_model(ModelRole::Propensity))?;
    if let Some(clip) = opts.propensity_clip {
        for e in &mut e_hat {
            *e = e.clamp(clip, 1.0 - clip);
        }
    }

    let out_design = Design::from_dataset(d, &spec.outcome_columns, spec.outcome_intercept)?;
    let idx0: Vec<usize> = (0..n).filter(|&i| a[i] == 0).collect();
    let idx1: Vec<usize> = (0..n).filter(|&i| a[i] == 1).collect();
    let p_out = out_design.p();
    for (idx, role) in [
        (&idx0, ModelRole::OutcomeControl),
        (&idx1, ModelRole::OutcomeTreated),
    ] {
        if idx.len() < p_out + 1 {
            return Err(Error::InvalidArgument(format!(
                "arm has {} units but the outcome model needs at least {}",
                idx.len(),
                p_out + 1
            ))
            .in_model(role));
        }
    }

    let fit_arm = |idx: &[usize], role: ModelRole| -> Result<(Vec<f64>, Vec<f64>, FitInfo)> {
        let sub = out_design.rows(idx);
        let y_sub: Vec<f64> = idx.iter().map(|&i| d.y()[i]).collect();
        match spec.outcome_family {
            OutcomeFamily::Linear => {
                let (beta, _) = fit_linear(&sub, &y_sub, opts).map_err(|e| e.in_model(role))?;
                let pred = out_design.predict(&beta);
                let info = FitInfo {
                    converged: true,
                    iterations: 1,
                };
                Ok((beta, pred, info))
            }
            OutcomeFamily::Logistic => {
                validate_binary_outcome(&y_sub, idx)?;
                let (beta, _, info) =
                    fit_logistic_impl(&sub, &y_sub, opts).map_err(|e| e.in_model(role))?;
                let pred = out_design.predict(&beta).into_iter().map(expit).collect();
                Ok((beta, pred, info))
            }
        }
    };
    let (beta0, u0_hat, outcome0_fit) = fit_arm(&idx0, ModelRole::OutcomeControl)?;
    let (beta1, u1_hat, outcome1_fit) = fit_arm(&idx1, ModelRole::OutcomeTreated)?;

    let residual: Vec<f64> = (0..n)
        .map(|i| {
            if a[i] == 1 {
                d.y()[i] - u1_hat[i]
            } else {
                d.y()[i] - u0_hat[i]
            }
        })
        .collect();

    Ok(FittedNuisance {
        e_hat,
        u0_hat,
        u1_hat,
        residual,
        alpha,
        beta0,
        beta1,
        propensity_fit,
        outcome0_fit,
        outcome1_fit,
    })
}
