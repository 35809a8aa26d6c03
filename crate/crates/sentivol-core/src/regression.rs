//! Ordinary least squares and the two-stage volatility regressions.
//!
//! Stage one regresses index returns on their own first lag and keeps the
//! residuals. Stage two regresses the squared residuals, a crude realized
//! variance proxy, on a sentiment indicator level. Inference is classical:
//! homoskedastic standard errors and two-sided Student-t p-values.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::sentiment::{SentimentKind, SentimentSeries};
use crate::series::{self, ObservationSeries};

/// Stage regressions refuse to run on fewer observations than this unless the
/// caller lowers the bar explicitly.
pub const DEFAULT_MIN_OBSERVATIONS: usize = 30;

/// One design column matched element-for-element to the response dates.
#[derive(Debug, Clone)]
pub struct Regressor {
    pub name: String,
    pub values: Vec<f64>,
}

impl Regressor {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Regressor {
            name: name.into(),
            values,
        }
    }
}

/// A fitted least-squares regression with classical inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Coefficient labels; `intercept` first when one was included.
    pub coefficient_names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Classical homoskedastic standard errors, `sqrt(s^2 (X'X)^-1_jj)`.
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    /// Two-sided p-values from Student's t with `n - k` degrees of freedom.
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    /// `1 - (1 - R^2) (n - 1) / (n - k)`.
    pub adj_r_squared: f64,
    /// Residual standard error `s`.
    pub residual_std_error: f64,
    pub n: usize,
    pub k: usize,
    pub residuals: ObservationSeries,
    pub fitted: ObservationSeries,
}

/// OLS of `y` on the given columns (plus an intercept unless disabled),
/// solved by QR decomposition of the design matrix.
pub fn ols(
    y: &ObservationSeries,
    regressors: &[Regressor],
    include_intercept: bool,
) -> Result<RegressionFit> {
    let n = y.len();
    let k = regressors.len() + usize::from(include_intercept);
    if k == 0 {
        return Err(Error::BadParameter {
            name: "regressors",
            reason: "design matrix has no columns".to_string(),
        });
    }
    if n < k + 1 {
        return Err(Error::TooShort {
            required: k + 1,
            actual: n,
        });
    }
    for r in regressors {
        if r.values.len() != n {
            return Err(Error::RegressorLengthMismatch {
                name: r.name.clone(),
                expected: n,
                actual: r.values.len(),
            });
        }
        if let Some(i) = r.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                date: y.dates()[i],
                context: "regressor value",
            });
        }
    }

    let mut names = Vec::with_capacity(k);
    let mut design = DMatrix::zeros(n, k);
    let mut col = 0;
    if include_intercept {
        names.push("intercept".to_string());
        design.column_mut(0).fill(1.0);
        col += 1;
    }
    for r in regressors {
        names.push(r.name.clone());
        for (i, v) in r.values.iter().enumerate() {
            design[(i, col)] = *v;
        }
        col += 1;
    }
    let response = DVector::from_column_slice(y.values());

    let qr = design.clone().qr();
    let r_mat = qr.r();
    let rank_floor = (0..k)
        .map(|j| r_mat[(j, j)].abs())
        .fold(0.0_f64, f64::max)
        * f64::EPSILON
        * (n.max(k) as f64);
    if let Some(j) = (0..k).position(|j| r_mat[(j, j)].abs() <= rank_floor) {
        return Err(Error::SingularDesign {
            column: names[j].clone(),
        });
    }

    let qty = qr.q().transpose() * &response;
    let coefficients = r_mat
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign {
            column: names.last().cloned().unwrap_or_default(),
        })?;

    let fitted_vec = &design * &coefficients;
    let residual_vec = &response - &fitted_vec;
    let rss: f64 = residual_vec.iter().map(|e| e * e).sum();
    let df = n - k;
    let s2 = rss / df as f64;

    // (X'X)^-1 = R^-1 R^-T from the triangular factor.
    let r_inv = r_mat
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::SingularDesign {
            column: names.last().cloned().unwrap_or_default(),
        })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let t_dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::BadParameter {
        name: "degrees_of_freedom",
        reason: e.to_string(),
    })?;
    let mut std_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for j in 0..k {
        let se = (s2 * xtx_inv[(j, j)]).sqrt();
        std_errors.push(se);
        if se > 0.0 {
            let t = coefficients[j] / se;
            t_stats.push(t);
            p_values.push(2.0 * (1.0 - t_dist.cdf(t.abs())));
        } else {
            // No residual variance: inference is vacuous; report neutral stats.
            t_stats.push(0.0);
            p_values.push(1.0);
        }
    }

    let mean_y = y.values().iter().sum::<f64>() / n as f64;
    let tss: f64 = if include_intercept {
        y.values().iter().map(|v| (v - mean_y).powi(2)).sum()
    } else {
        y.values().iter().map(|v| v * v).sum()
    };
    // A constant response has no variance to explain; report zero by convention.
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let adj_r_squared = if tss > 0.0 {
        1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (df as f64)
    } else {
        0.0
    };

    Ok(RegressionFit {
        coefficient_names: names,
        coefficients: coefficients.as_slice().to_vec(),
        std_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        residual_std_error: s2.sqrt(),
        n,
        k,
        residuals: ObservationSeries::new(
            y.dates().to_vec(),
            residual_vec.as_slice().to_vec(),
            y.unit(),
        )?,
        fitted: ObservationSeries::new(
            y.dates().to_vec(),
            fitted_vec.as_slice().to_vec(),
            y.unit(),
        )?,
    })
}

/// Stage one: lag-1 autoregression of returns, `r_t = b0 + b1 r_{t-1} + e_t`.
/// Residuals are dated at `t`.
pub fn stage_one(returns: &ObservationSeries) -> Result<RegressionFit> {
    stage_one_with_min(returns, DEFAULT_MIN_OBSERVATIONS)
}

pub fn stage_one_with_min(
    returns: &ObservationSeries,
    min_observations: usize,
) -> Result<RegressionFit> {
    let pair = series::lag_pair(returns)?;
    if pair.len() < min_observations {
        return Err(Error::TooShort {
            required: min_observations,
            actual: pair.len(),
        });
    }
    let y = ObservationSeries::new(pair.dates.clone(), pair.left.clone(), returns.unit())?;
    ols(&y, &[Regressor::new("lagged return", pair.right)], true)
}

/// Squared stage-one residuals, the volatility proxy fed to stage two.
pub fn squared_residuals(fit: &RegressionFit) -> ObservationSeries {
    let values = fit.residuals.values().iter().map(|e| e * e).collect();
    ObservationSeries::new(fit.residuals.dates().to_vec(), values, "squared residual")
        .expect("residual dates already validated")
}

/// Stage two: squared residuals on the sentiment level, after date alignment.
/// `n` in the result counts the aligned overlap.
pub fn stage_two(
    squared: &ObservationSeries,
    sentiment: &SentimentSeries,
) -> Result<RegressionFit> {
    stage_two_with_min(squared, sentiment, DEFAULT_MIN_OBSERVATIONS)
}

pub fn stage_two_with_min(
    squared: &ObservationSeries,
    sentiment: &SentimentSeries,
    min_observations: usize,
) -> Result<RegressionFit> {
    let pair = series::align(squared, sentiment.series());
    if pair.len() < min_observations {
        return Err(Error::InsufficientOverlap {
            overlap: pair.len(),
            required: min_observations,
        });
    }
    let y = ObservationSeries::new(pair.dates.clone(), pair.left.clone(), squared.unit())?;
    ols(
        &y,
        &[Regressor::new(sentiment.kind().label(), pair.right)],
        true,
    )
}

/// Stage-two outcome for one indicator: either a fit or the reason it could
/// not run. Failures stay in the report instead of vanishing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum ProxyOutcome {
    Fit(RegressionFit),
    Failed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyResult {
    pub kind: SentimentKind,
    pub outcome: ProxyOutcome,
}

/// Both regression stages for one return series against many indicators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStageReport {
    pub stage_one: RegressionFit,
    pub proxies: Vec<ProxyResult>,
}

/// Runs stage one once, then stage two per indicator. Indicator failures are
/// recorded per proxy; only a stage-one failure aborts the report.
pub fn two_stage_report(
    returns: &ObservationSeries,
    sentiments: &[SentimentSeries],
) -> Result<TwoStageReport> {
    let stage_one_fit = stage_one(returns)?;
    let squared = squared_residuals(&stage_one_fit);
    let proxies = sentiments
        .iter()
        .map(|sent| ProxyResult {
            kind: sent.kind(),
            outcome: match stage_two(&squared, sent) {
                Ok(fit) => ProxyOutcome::Fit(fit),
                Err(e) => ProxyOutcome::Failed(e.to_string()),
            },
        })
        .collect();
    Ok(TwoStageReport {
        stage_one: stage_one_fit,
        proxies,
    })
}
