//! Classical and heteroskedasticity-consistent covariance estimators.
//!
//! Both estimators are built from the same fit. The classical estimator
//! replaces every disturbance variance with the pooled mean squared residual,
//! `s^2 (X'X)^-1`. The sandwich estimator uses each observation's own squared
//! residual:
//!
//! ```text
//! V_HC = (X'X)^-1 ( sum_i w_i e_i^2 x_i x_i' ) (X'X)^-1
//! ```
//!
//! with `w_i = 1` (HC0), `n / (n - p)` (HC1), `1 / (1 - h_i)` (HC2) or
//! `1 / (1 - h_i)^2` (HC3).
//!
//! For a single binary predictor the two estimators reduce to closed forms in
//! the group sizes `m` (treated) and `n - m`; see [`binary_closed_form_se`].
//! [`asymptotic_limits`] gives the probability limits of `sqrt(n)` times each
//! standard error when the group disturbance variances are known.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::FitResult;

/// Leverage at or above `1 - LEVERAGE_LIMIT` makes HC2/HC3 undefined.
pub const LEVERAGE_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[serde(alias = "Classical")]
    Classical,
    #[serde(alias = "HC0")]
    HC0,
    #[serde(alias = "HC1")]
    HC1,
    #[serde(alias = "HC2")]
    HC2,
    #[serde(alias = "HC3")]
    HC3,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Classical,
        Estimator::HC0,
        Estimator::HC1,
        Estimator::HC2,
        Estimator::HC3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Classical => "classical",
            Estimator::HC0 => "hc0",
            Estimator::HC1 => "hc1",
            Estimator::HC2 => "hc2",
            Estimator::HC3 => "hc3",
        }
    }

    pub fn is_robust(self) -> bool {
        self != Estimator::Classical
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown estimator '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HcVariant {
    HC0,
    HC1,
    HC2,
    HC3,
}

impl From<HcVariant> for Estimator {
    fn from(v: HcVariant) -> Self {
        match v {
            HcVariant::HC0 => Estimator::HC0,
            HcVariant::HC1 => Estimator::HC1,
            HcVariant::HC2 => Estimator::HC2,
            HcVariant::HC3 => Estimator::HC3,
        }
    }
}

/// A coefficient covariance matrix and the estimator that produced it.
#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub matrix: Matrix,
    pub estimator: Estimator,
    /// Divisor applied to the residual sum of squares: `n` or `n - p`.
    pub dof_used: usize,
}

impl CovEstimate {
    pub fn se(&self, j: usize) -> f64 {
        self.matrix[(j, j)].max(0.0).sqrt()
    }

    pub fn standard_errors(&self) -> Vec<f64> {
        (0..self.matrix.ncols()).map(|j| self.se(j)).collect()
    }
}

/// `s^2 (X'X)^-1` with `s^2 = RSS / n`, or `RSS / (n - p)` when `dof_correct`.
pub fn classical_cov(f: &FitResult, dof_correct: bool) -> Result<CovEstimate> {
    let divisor = if dof_correct {
        f.dims.n - f.dims.p
    } else {
        f.dims.n
    };
    if divisor == 0 {
        return Err(Error::DivideByZero("n - p is zero"));
    }
    let s2 = f.rss() / divisor as f64;
    let p = f.dims.p;
    let mut matrix = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            matrix[(i, j)] = s2 * f.xtx_inverse[(i, j)];
        }
    }
    Ok(CovEstimate {
        matrix,
        estimator: Estimator::Classical,
        dof_used: divisor,
    })
}

/// Sandwich covariance for the requested HC variant.
pub fn hc_cov(f: &FitResult, variant: HcVariant) -> Result<CovEstimate> {
    let (n, p) = (f.dims.n, f.dims.p);
    let hc1 = match variant {
        HcVariant::HC1 if n == p => return Err(Error::DivideByZero("n - p is zero")),
        HcVariant::HC1 => n as f64 / (n - p) as f64,
        _ => 1.0,
    };
    if matches!(variant, HcVariant::HC2 | HcVariant::HC3) {
        if let Some((row, &h)) = f
            .leverage
            .iter()
            .enumerate()
            .find(|(_, &h)| h >= 1.0 - LEVERAGE_LIMIT)
        {
            return Err(Error::LeverageOne { row, leverage: h });
        }
    }

    // V = sum_i w_i e_i^2 u_i u_i' with u_i = (X'X)^-1 x_i, which keeps the
    // diagonal a sum of non-negative terms.
    let x = f.design();
    let a = &f.xtx_inverse;
    let mut matrix = Matrix::zeros(p, p);
    let mut xi = vec![0.0; p];
    let mut u = vec![0.0; p];
    for (i, (&e, &h)) in f.residuals.iter().zip(&f.leverage).enumerate() {
        let w = match variant {
            HcVariant::HC0 => 1.0,
            HcVariant::HC1 => hc1,
            HcVariant::HC2 => 1.0 / (1.0 - h),
            HcVariant::HC3 => 1.0 / ((1.0 - h) * (1.0 - h)),
        };
        let omega = w * e * e;
        if omega == 0.0 {
            continue;
        }
        for (j, v) in xi.iter_mut().enumerate() {
            *v = x[(i, j)];
        }
        for (r, ur) in u.iter_mut().enumerate() {
            *ur = (0..p).map(|c| a[(r, c)] * xi[c]).sum();
        }
        for r in 0..p {
            for c in r..p {
                matrix[(r, c)] += omega * u[r] * u[c];
            }
        }
    }
    for r in 0..p {
        for c in 0..r {
            matrix[(r, c)] = matrix[(c, r)];
        }
    }
    Ok(CovEstimate {
        matrix,
        estimator: variant.into(),
        dof_used: if variant == HcVariant::HC1 { n - p } else { n },
    })
}

/// Dispatches on [`Estimator`]. `classical_dof` only affects the classical
/// estimator.
pub fn estimate(f: &FitResult, estimator: Estimator, classical_dof: bool) -> Result<CovEstimate> {
    match estimator {
        Estimator::Classical => classical_cov(f, classical_dof),
        Estimator::HC0 => hc_cov(f, HcVariant::HC0),
        Estimator::HC1 => hc_cov(f, HcVariant::HC1),
        Estimator::HC2 => hc_cov(f, HcVariant::HC2),
        Estimator::HC3 => hc_cov(f, HcVariant::HC3),
    }
}

/// Closed-form standard errors of the binary coefficient for a fit whose
/// design is `[1, X]`: `(classical, hc0)`, both without degrees-of-freedom
/// correction.
///
/// classical: `sqrt((RSS/n) (1/(n-m) + 1/m))`
/// hc0: `sqrt(mean(e^2 | X=0) / (n-m) + mean(e^2 | X=1) / m)`
pub fn binary_closed_form_se(f: &FitResult) -> Result<(f64, f64)> {
    let col = f.binary_column.ok_or(Error::MissingBinaryColumn)?;
    let m = f.dims.m.ok_or(Error::MissingBinaryColumn)?;
    let n = f.dims.n;
    let (n0, n1) = ((n - m) as f64, m as f64);
    let (mut ss0, mut ss1) = (0.0, 0.0);
    for (&e, &x) in f.residuals.iter().zip(f.design().column(col)) {
        if x == 1.0 {
            ss1 += e * e;
        } else {
            ss0 += e * e;
        }
    }
    let pooled = (ss0 + ss1) / n as f64;
    let classical = (pooled * (1.0 / n0 + 1.0 / n1)).sqrt();
    let hc0 = ((ss0 / n0) / n0 + (ss1 / n1) / n1).sqrt();
    Ok((classical, hc0))
}

/// Exact standard error of the difference in group means given the average
/// disturbance variance in each group: `sqrt(var0/(n-m) + var1/m)`.
pub fn binary_true_se(var0: f64, var1: f64, m: usize, n: usize) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::BadGroupSizes { m, n });
    }
    if !(var0 >= 0.0 && var1 >= 0.0 && var0.is_finite() && var1.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "group variances must be finite and non-negative, got {var0} and {var1}"
        )));
    }
    Ok((var0 / (n - m) as f64 + var1 / m as f64).sqrt())
}

/// Probability limits of `sqrt(n)` times the true, robust and classical
/// standard errors of the binary coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPair {
    pub robust_limit: f64,
    pub classical_limit: f64,
    pub true_limit: f64,
}

impl LimitPair {
    /// Asymptotic bias of the scaled classical standard error,
    /// `classical_limit - true_limit`. Its sign is that of
    /// `(2 mu - 1)(var1 - var0)`.
    pub fn classical_gap(&self) -> f64 {
        self.classical_limit - self.true_limit
    }

    /// The limits divided by `sqrt(n)`: large-sample standard errors at `n`.
    pub fn at_sample_size(&self, n: usize) -> LimitPair {
        let s = (n as f64).sqrt();
        LimitPair {
            robust_limit: self.robust_limit / s,
            classical_limit: self.classical_limit / s,
            true_limit: self.true_limit / s,
        }
    }
}

/// Limits when `m/n -> mu` and the group variances are `var0` (X = 0) and
/// `var1` (X = 1):
///
/// ```text
/// true = robust = sqrt(var1/mu + var0/(1-mu))
/// classical     = sqrt((mu var1 + (1-mu) var0) (1/mu + 1/(1-mu)))
/// ```
pub fn asymptotic_limits(mu: f64, var0: f64, var1: f64) -> Result<LimitPair> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::BadMu(mu));
    }
    if !(var0 > 0.0 && var1 > 0.0 && var0.is_finite() && var1.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "group variances must be finite and positive, got {var0} and {var1}"
        )));
    }
    let true_limit = (var1 / mu + var0 / (1.0 - mu)).sqrt();
    let pooled = mu * var1 + (1.0 - mu) * var0;
    let classical_limit = (pooled * (1.0 / mu + 1.0 / (1.0 - mu))).sqrt();
    Ok(LimitPair {
        robust_limit: true_limit,
        classical_limit,
        true_limit,
    })
}

/// `robust_se / classical_se`.
pub fn divergence_ratio(robust_se: f64, classical_se: f64) -> Result<f64> {
    if classical_se == 0.0 {
        return Err(Error::DivideByZero("classical standard error is zero"));
    }
    if !(classical_se > 0.0) || !(robust_se >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "standard errors must be non-negative, got {robust_se} and {classical_se}"
        )));
    }
    Ok(robust_se / classical_se)
}
