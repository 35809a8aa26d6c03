//! EGARCH(1,1) with exogenous sentiment-change regressors in the variance
//! equation, estimated by Gaussian quasi-maximum likelihood.
//!
//! The model for percent returns `r_t` with innovations `e_t = r_t - mu` and
//! standardized shocks `z_t = e_t / sigma_t`:
//!
//! ```text
//! ln sigma^2_t = omega + alpha (|z_{t-1}| - sqrt(2/pi)) + beta z_{t-1}
//!                + gamma ln sigma^2_{t-1} + sum_i delta_i x_{i,t}
//! ```
//!
//! `alpha` prices the magnitude of the last shock, `beta` its sign (the
//! leverage channel), `gamma` the persistence of log variance, and each
//! `delta_i` an exogenous regressor, here day-over-day sentiment changes.
//! `sqrt(2/pi)` is `E|z|` for a standard normal shock, which centers the
//! magnitude term at zero mean. The recursion is seeded with a configurable
//! `sigma^2_1` and the Gaussian log-likelihood sums over all observations.

use chrono::NaiveDate;
use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec;
use crate::optim::{
    self, central_gradient, central_hessian, five_point_gradient, MinimizeOptions,
};
use crate::series::{self, ObservationSeries};

/// `E|Z|` for standard normal `Z`, i.e. `sqrt(2/pi)`.
pub const ABS_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

/// `ln(2 pi)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Log-variance magnitude beyond which the recursion is declared divergent;
/// `exp` overflows shortly above this and no plausible fit comes near it.
const LOG_VARIANCE_BOUND: f64 = 700.0;

/// Model parameters. `delta` holds one coefficient per exogenous regressor
/// and may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgarchParams {
    pub mu: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: Vec<f64>,
}

impl EgarchParams {
    pub fn new(mu: f64, omega: f64, alpha: f64, beta: f64, gamma: f64, delta: Vec<f64>) -> Self {
        EgarchParams {
            mu,
            omega,
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// Flat layout `[mu, omega, alpha, beta, gamma, delta...]` shared by the
    /// optimizer, the Hessian, and reporting.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.mu, self.omega, self.alpha, self.beta, self.gamma];
        v.extend_from_slice(&self.delta);
        v
    }

    pub fn from_vec(v: &[f64]) -> Self {
        EgarchParams {
            mu: v[0],
            omega: v[1],
            alpha: v[2],
            beta: v[3],
            gamma: v[4],
            delta: v[5..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        5 + self.delta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.to_vec();
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter {
                name: "params",
                reason: "all parameters must be finite".to_string(),
            });
        }
        Ok(())
    }

    /// Log-variance persistence below one keeps the process stationary.
    pub fn is_stationary(&self) -> bool {
        self.gamma.abs() < 1.0
    }

    pub fn names(exog_names: &[String]) -> Vec<String> {
        let mut names = vec![
            "mu".to_string(),
            "omega".to_string(),
            "alpha".to_string(),
            "beta".to_string(),
            "gamma".to_string(),
        ];
        names.extend(exog_names.iter().cloned());
        names
    }
}

/// A named variance-equation regressor, already on the model's date axis or
/// ready to be aligned by [`fit`].
#[derive(Debug, Clone)]
pub struct ExogenousRegressor {
    pub name: String,
    pub series: ObservationSeries,
}

impl ExogenousRegressor {
    pub fn new(name: impl Into<String>, series: ObservationSeries) -> Self {
        ExogenousRegressor {
            name: name.into(),
            series,
        }
    }
}

/// How `sigma^2_1` is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma0Policy {
    /// Sample variance (divisor `n - 1`) of the demeaned return series.
    SampleVariance,
    /// Model-implied unconditional level `exp(omega / (1 - gamma))`; requires
    /// `|gamma| < 1` at every evaluation.
    Unconditional,
    /// A fixed positive value.
    Fixed(f64),
}

/// Timing of the exogenous regressor in the variance equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExogTiming {
    /// `x_t` enters `ln sigma^2_t` (the default reading).
    #[default]
    Contemporaneous,
    /// `x_{t-1}` enters `ln sigma^2_t`; a robustness alternative.
    Lagged,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of starting points; the first five come from a fixed grid,
    /// further ones are jittered draws seeded by `jitter_seed`.
    pub multistart: usize,
    pub jitter_seed: u64,
    /// Gradient infinity-norm tolerance on the average negative log-likelihood.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub min_observations: usize,
    pub sigma0: Sigma0Policy,
    pub exog_timing: ExogTiming,
    /// Optional per-coordinate pins in `to_vec` order (`Some(value)` freezes a
    /// coordinate). Pinned fits report no standard errors and count only free
    /// coordinates in `k`.
    pub pinned: Option<Vec<Option<f64>>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            multistart: 5,
            jitter_seed: 0,
            tolerance: 1e-6,
            max_iterations: 500,
            min_observations: 100,
            sigma0: Sigma0Policy::SampleVariance,
            exog_timing: ExogTiming::Contemporaneous,
            pinned: None,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if self.multistart == 0 {
            return Err(Error::BadParameter {
                name: "multistart",
                reason: "need at least one starting point".to_string(),
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::BadParameter {
                name: "tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::BadParameter {
                name: "max_iterations",
                reason: "need at least one iteration".to_string(),
            });
        }
        if let Sigma0Policy::Fixed(v) = self.sigma0 {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::BadParameter {
                    name: "sigma0",
                    reason: format!("fixed seed variance must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Optimizer diagnostics for a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the average-NLL gradient at the optimum.
    pub gradient_norm: f64,
    /// Which starting point won (0-based), and how many were tried.
    pub multistart_index: usize,
    pub starts_tried: usize,
    /// Total log-likelihood after the start and each accepted step;
    /// non-decreasing because the line search only accepts improvements.
    pub log_likelihood_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// A fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgarchFit {
    pub params: EgarchParams,
    /// `[mu, omega, alpha, beta, gamma, <regressor names>...]`.
    pub param_names: Vec<String>,
    /// QML standard errors from the inverse observed information (numerical
    /// Hessian of the negative log-likelihood); `None` when the Hessian is
    /// not positive definite or coordinates were pinned.
    pub standard_errors: Option<Vec<f64>>,
    pub t_stats: Option<Vec<f64>>,
    /// Two-sided p-values against a standard normal reference.
    pub p_values: Option<Vec<f64>>,
    pub log_likelihood: f64,
    pub n: usize,
    /// Number of estimated (free) parameters.
    pub k: usize,
    /// Per-observation Akaike criterion, `(-2 logL + 2k) / n`.
    pub aic: f64,
    /// Per-observation Schwarz criterion, `(-2 logL + k ln n) / n`.
    pub sc: f64,
    /// `1 - var(e) / var(r)` for the constant-mean model (`k = 1` adjustment,
    /// so the adjusted and plain values coincide); small negatives are normal
    /// because the QML mean is not the sample mean.
    pub adj_r_squared: f64,
    /// The seed variance actually used for `sigma^2_1`.
    pub sigma0_sq: f64,
    pub variance: ObservationSeries,
    pub std_residuals: ObservationSeries,
    pub convergence: ConvergenceReport,
}

/// Data the likelihood works on after alignment: returns plus zero or more
/// exogenous columns on one shared date axis.
struct ModelData {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
    exog: Vec<Vec<f64>>,
    mean: f64,
    sample_variance: f64,
}

impl ModelData {
    fn assemble(
        returns: &ObservationSeries,
        exog: &[&ObservationSeries],
        timing: ExogTiming,
    ) -> Result<ModelData> {
        let (dates, r, mut cols) = if exog.is_empty() {
            (
                returns.dates().to_vec(),
                returns.values().to_vec(),
                Vec::new(),
            )
        } else {
            let mut all: Vec<&ObservationSeries> = vec![returns];
            all.extend_from_slice(exog);
            let set = series::align_many(&all);
            let mut cols = set.columns;
            let r = cols.remove(0);
            (set.dates, r, cols)
        };
        if let ExogTiming::Lagged = timing {
            for col in &mut cols {
                // x_1 never enters the recursion, so a zero placeholder is exact.
                col.rotate_right(1);
                if let Some(first) = col.first_mut() {
                    *first = 0.0;
                }
            }
        }
        let n = r.len();
        if n == 0 {
            return Err(Error::TooShort {
                required: 1,
                actual: 0,
            });
        }
        let mean = r.iter().sum::<f64>() / n as f64;
        let sample_variance = if n > 1 {
            r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Ok(ModelData {
            dates,
            returns: r,
            exog: cols,
            mean,
            sample_variance,
        })
    }

    fn seed_variance(&self, policy: Sigma0Policy, params: &EgarchParams) -> Option<f64> {
        let v = match policy {
            Sigma0Policy::SampleVariance => self.sample_variance,
            Sigma0Policy::Unconditional => {
                if params.gamma.abs() >= 1.0 {
                    return None;
                }
                (params.omega / (1.0 - params.gamma)).exp()
            }
            Sigma0Policy::Fixed(v) => v,
        };
        (v.is_finite() && v > 0.0).then_some(v)
    }

    /// Average negative log-likelihood; `INFINITY` marks invalid parameters
    /// or a divergent recursion. This is the optimizer's objective.
    fn average_nll(&self, params: &EgarchParams, policy: Sigma0Policy) -> f64 {
        let Some(sigma0) = self.seed_variance(policy, params) else {
            return f64::INFINITY;
        };
        let n = self.returns.len();
        let mut log_var = sigma0.ln();
        let mut sigma2 = sigma0;
        let mut nll_sum = 0.0;
        let mut z_prev = 0.0_f64;
        for t in 0..n {
            if t > 0 {
                log_var = params.omega
                    + params.alpha * (z_prev.abs() - ABS_NORMAL_MEAN)
                    + params.beta * z_prev
                    + params.gamma * log_var;
                for (d, col) in params.delta.iter().zip(&self.exog) {
                    log_var += d * col[t];
                }
                if !log_var.is_finite() || log_var.abs() > LOG_VARIANCE_BOUND {
                    return f64::INFINITY;
                }
                sigma2 = log_var.exp();
            }
            let eps = self.returns[t] - params.mu;
            nll_sum += 0.5 * (LN_2PI + log_var + eps * eps / sigma2);
            z_prev = eps / sigma2.sqrt();
        }
        if nll_sum.is_finite() {
            nll_sum / n as f64
        } else {
            f64::INFINITY
        }
    }
}

fn check_exog_arity(params: &EgarchParams, dsent: &[ObservationSeries]) -> Result<()> {
    if params.delta.len() != dsent.len() {
        return Err(Error::BadParameter {
            name: "delta",
            reason: format!(
                "{} delta coefficients for {} exogenous series",
                params.delta.len(),
                dsent.len()
            ),
        });
    }
    Ok(())
}

fn check_same_dates(returns: &ObservationSeries, dsent: &[ObservationSeries]) -> Result<()> {
    for s in dsent {
        if s.dates() != returns.dates() {
            return Err(Error::InsufficientOverlap {
                overlap: series::align(returns, s).len(),
                required: returns.len(),
            });
        }
    }
    Ok(())
}

/// Conditional variance path at the given parameters. The exogenous series
/// must sit on exactly the returns' dates; `sigma0_sq` seeds `sigma^2_1`.
pub fn variance_path(
    params: &EgarchParams,
    returns: &ObservationSeries,
    dsent: &[ObservationSeries],
    sigma0_sq: f64,
) -> Result<ObservationSeries> {
    params.validate()?;
    check_exog_arity(params, dsent)?;
    check_same_dates(returns, dsent)?;
    if returns.is_empty() {
        return Err(Error::TooShort {
            required: 1,
            actual: 0,
        });
    }
    if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
        return Err(Error::BadParameter {
            name: "sigma0_sq",
            reason: format!("seed variance must be positive, got {sigma0_sq}"),
        });
    }
    let r = returns.values();
    let n = r.len();
    let mut sigma2 = Vec::with_capacity(n);
    let mut log_var = sigma0_sq.ln();
    sigma2.push(sigma0_sq);
    let mut z_prev = (r[0] - params.mu) / sigma0_sq.sqrt();
    for t in 1..n {
        log_var = params.omega
            + params.alpha * (z_prev.abs() - ABS_NORMAL_MEAN)
            + params.beta * z_prev
            + params.gamma * log_var;
        for (d, col) in params.delta.iter().zip(dsent) {
            log_var += d * col.values()[t];
        }
        if !log_var.is_finite() || log_var.abs() > LOG_VARIANCE_BOUND {
            return Err(Error::DivergedRecursion {
                date: returns.dates()[t],
                log_variance: log_var,
            });
        }
        let v = log_var.exp();
        sigma2.push(v);
        z_prev = (r[t] - params.mu) / v.sqrt();
    }
    ObservationSeries::new(returns.dates().to_vec(), sigma2, "conditional variance")
}

/// Gaussian log-likelihood at the given parameters, with the variance path it
/// was computed from.
pub fn log_likelihood(
    params: &EgarchParams,
    returns: &ObservationSeries,
    dsent: &[ObservationSeries],
    sigma0_sq: f64,
) -> Result<(f64, ObservationSeries)> {
    let variance = variance_path(params, returns, dsent, sigma0_sq)?;
    let mut ll = 0.0;
    for ((_, r), v) in returns.iter().zip(variance.values()) {
        let eps = r - params.mu;
        ll += -0.5 * (LN_2PI + v.ln() + eps * eps / v);
    }
    if !ll.is_finite() {
        return Err(Error::EstimationFailed {
            diagnostics: "log-likelihood not finite".to_string(),
        });
    }
    Ok((ll, variance))
}

/// Per-observation information criteria `(aic, sc)` for a fit with
/// log-likelihood `log_l`, `k` estimated parameters, and `n` observations.
pub fn information_criteria(log_l: f64, k: usize, n: usize) -> Result<(f64, f64)> {
    if n <= k {
        return Err(Error::CriteriaDegreesOfFreedom { n, k });
    }
    let n_f = n as f64;
    let k_f = k as f64;
    let aic = (-2.0 * log_l + 2.0 * k_f) / n_f;
    let sc = (-2.0 * log_l + k_f * n_f.ln()) / n_f;
    Ok((aic, sc))
}

/// The multistart grid: every start anchors `mu` at the sample mean, `omega`
/// at `(1 - gamma) ln(sample variance)` (so the implied unconditional level
/// matches the data), and `delta = 0`. The `(gamma, alpha, beta)` rows:
const START_GRID: [(f64, f64, f64); 5] = [
    (0.90, 0.10, -0.05),
    (0.00, 0.30, 0.00),
    (0.95, 0.05, 0.00),
    (0.50, 0.20, -0.10),
    (0.98, 0.10, 0.00),
];

fn starting_points(data: &ModelData, m: usize, options: &FitOptions) -> Vec<Vec<f64>> {
    use rand::Rng;
    use rand::SeedableRng;
    let log_var = data.sample_variance.max(f64::MIN_POSITIVE).ln();
    let build = |gamma: f64, alpha: f64, beta: f64| {
        let mut v = vec![
            data.mean,
            (1.0 - gamma) * log_var,
            alpha,
            beta,
            gamma,
        ];
        v.extend(std::iter::repeat(0.0).take(m));
        v
    };
    let mut starts: Vec<Vec<f64>> = START_GRID
        .iter()
        .take(options.multistart)
        .map(|(g, a, b)| build(*g, *a, *b))
        .collect();
    if options.multistart > START_GRID.len() {
        // Extra starts are uniform jitter over a tame region, seeded per fit.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(options.jitter_seed);
        for _ in START_GRID.len()..options.multistart {
            let gamma = rng.random_range(0.0..0.98);
            let alpha = rng.random_range(0.02..0.40);
            let beta = rng.random_range(-0.20..0.20);
            starts.push(build(gamma, alpha, beta));
        }
    }
    starts
}

/// Fits the model to returns and exogenous regressors by multistart BFGS over
/// the average negative log-likelihood. Inputs are aligned by date first; `n`
/// counts the aligned overlap.
pub fn fit(
    returns: &ObservationSeries,
    exog: &[ExogenousRegressor],
    options: &FitOptions,
) -> Result<EgarchFit> {
    options.validate()?;
    let exog_series: Vec<&ObservationSeries> = exog.iter().map(|e| &e.series).collect();
    let data = ModelData::assemble(returns, &exog_series, options.exog_timing)?;
    let n = data.returns.len();
    if n < options.min_observations {
        return Err(Error::TooShort {
            required: options.min_observations,
            actual: n,
        });
    }
    if data.sample_variance <= 0.0 {
        return Err(Error::DegenerateVariance);
    }

    let m = exog.len();
    let dim = 5 + m;
    let pins: Vec<Option<f64>> = match &options.pinned {
        Some(p) => {
            if p.len() != dim {
                return Err(Error::BadParameter {
                    name: "pinned",
                    reason: format!("expected {dim} entries, got {}", p.len()),
                });
            }
            p.clone()
        }
        None => vec![None; dim],
    };
    let free: Vec<usize> = (0..dim).filter(|i| pins[*i].is_none()).collect();
    if free.is_empty() {
        return Err(Error::BadParameter {
            name: "pinned",
            reason: "at least one coordinate must stay free".to_string(),
        });
    }

    let embed = |free_x: &[f64]| -> Vec<f64> {
        let mut full: Vec<f64> = pins
            .iter()
            .map(|p| p.unwrap_or(0.0))
            .collect();
        for (slot, value) in free.iter().zip(free_x) {
            full[*slot] = *value;
        }
        full
    };
    let policy = options.sigma0;
    let objective = |free_x: &[f64]| -> f64 {
        let full = embed(free_x);
        if full.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        data.average_nll(&EgarchParams::from_vec(&full), policy)
    };

    let minimize_options = MinimizeOptions {
        gradient_tolerance: options.tolerance,
        max_iterations: options.max_iterations,
        ..MinimizeOptions::default()
    };
    let starts = starting_points(&data, m, options);
    let outcomes = exec::map_indexed(&starts, |_, start| {
        let mut full = start.clone();
        for (i, pin) in pins.iter().enumerate() {
            if let Some(v) = pin {
                full[i] = *v;
            }
        }
        let free_start: Vec<f64> = free.iter().map(|i| full[*i]).collect();
        optim::minimize(&objective, &free_start, &minimize_options)
    });

    let best_index = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value.is_finite())
        .min_by(|(_, a), (_, b)| a.value.partial_cmp(&b.value).unwrap())
        .map(|(i, _)| i);
    let Some(best_index) = best_index else {
        let detail: Vec<String> = outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| format!("start {i}: value {}, {} iterations", o.value, o.iterations))
            .collect();
        return Err(Error::EstimationFailed {
            diagnostics: format!("no starting point produced a finite likelihood ({})", detail.join("; ")),
        });
    };
    let best = &outcomes[best_index];

    let full = embed(&best.x);
    let params = EgarchParams::from_vec(&full);
    let sigma0_sq = data
        .seed_variance(policy, &params)
        .ok_or_else(|| Error::EstimationFailed {
            diagnostics: "seed variance invalid at the optimum".to_string(),
        })?;

    let aligned_returns =
        ObservationSeries::new(data.dates.clone(), data.returns.clone(), returns.unit())?;
    let aligned_exog: Vec<ObservationSeries> = data
        .exog
        .iter()
        .map(|col| ObservationSeries::new(data.dates.clone(), col.clone(), "exogenous"))
        .collect::<Result<_>>()?;
    let (log_l, variance) = log_likelihood(&params, &aligned_returns, &aligned_exog, sigma0_sq)?;

    let mut warnings = Vec::new();
    if !params.is_stationary() {
        warnings.push(format!(
            "persistence |gamma| = {} is at or above one; log variance is non-stationary",
            params.gamma.abs()
        ));
    }
    if best.stalled {
        warnings.push("line search stalled at the finite-difference noise floor".to_string());
    }

    // Observed information = n * Hessian of the average NLL at the optimum.
    let pinned_fit = options.pinned.is_some();
    let (standard_errors, t_stats, p_values) = if pinned_fit {
        warnings.push("pinned coordinates: standard errors not computed".to_string());
        (None, None, None)
    } else {
        match covariance_from_hessian(&objective, &best.x, n) {
            Some(ses) => {
                let normal = Normal::new(0.0, 1.0).expect("unit normal");
                let ts: Vec<f64> = full.iter().zip(&ses).map(|(c, s)| c / s).collect();
                let ps: Vec<f64> = ts.iter().map(|t| 2.0 * (1.0 - normal.cdf(t.abs()))).collect();
                (Some(ses), Some(ts), Some(ps))
            }
            None => {
                warnings.push(
                    "observed information not positive definite: standard errors unavailable"
                        .to_string(),
                );
                (None, None, None)
            }
        }
    };

    let k = free.len();
    let (aic, sc) = information_criteria(log_l, k, n)?;

    // Constant-mean fit statistic: share of return variance not left in the
    // innovations. With one mean parameter the k-adjustment cancels.
    let ess: f64 = data.returns.iter().map(|r| (r - params.mu).powi(2)).sum();
    let tss: f64 = data.returns.iter().map(|r| (r - data.mean).powi(2)).sum();
    let adj_r_squared = 1.0 - ess / tss;

    let std_residuals = ObservationSeries::new(
        data.dates.clone(),
        data.returns
            .iter()
            .zip(variance.values())
            .map(|(r, v)| (r - params.mu) / v.sqrt())
            .collect(),
        "standardized residual",
    )?;

    let trace: Vec<f64> = best
        .trace
        .iter()
        .map(|avg_nll| -avg_nll * n as f64)
        .collect();
    let exog_names: Vec<String> = exog.iter().map(|e| e.name.clone()).collect();

    Ok(EgarchFit {
        params,
        param_names: EgarchParams::names(&exog_names),
        standard_errors,
        t_stats,
        p_values,
        log_likelihood: log_l,
        n,
        k,
        aic,
        sc,
        adj_r_squared,
        sigma0_sq,
        variance,
        std_residuals,
        convergence: ConvergenceReport {
            converged: best.converged,
            iterations: best.iterations,
            gradient_norm: best.gradient_norm,
            multistart_index: best_index,
            starts_tried: starts.len(),
            log_likelihood_trace: trace,
            warnings,
        },
    })
}

/// Standard errors from the inverse observed information, or `None` when the
/// numerical Hessian is not positive definite.
fn covariance_from_hessian<F: Fn(&[f64]) -> f64>(
    objective: &F,
    x: &[f64],
    n: usize,
) -> Option<Vec<f64>> {
    let hessian_avg = central_hessian(objective, x, optim::hessian_step());
    if hessian_avg.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let information: DMatrix<f64> = hessian_avg * n as f64;
    let covariance = Cholesky::new(information)?.inverse();
    let ses: Vec<f64> = (0..x.len()).map(|i| covariance[(i, i)].sqrt()).collect();
    ses.iter().all(|s| s.is_finite() && *s > 0.0).then_some(ses)
}

/// Compares the optimizer's central-difference gradient of the average NLL
/// against an independent five-point stencil at `params`. Returns the largest
/// per-coordinate deviation `|g - g_ref| / max(1, |g|, |g_ref|)`.
///
/// The reference runs at the worker's step, not the wider fourth-order
/// optimum: the `|z|` terms kink the likelihood, and on long samples a wide
/// stencil almost surely straddles a kink, polluting the reference more than
/// the quantity under test. At the shared step the fourth-order truncation is
/// negligible, so the deviation isolates implementation error.
pub fn gradient_check(
    returns: &ObservationSeries,
    exog: &[ExogenousRegressor],
    params: &EgarchParams,
    options: &FitOptions,
) -> Result<f64> {
    params.validate()?;
    let exog_series: Vec<&ObservationSeries> = exog.iter().map(|e| &e.series).collect();
    if params.delta.len() != exog.len() {
        return Err(Error::BadParameter {
            name: "delta",
            reason: format!(
                "{} delta coefficients for {} exogenous series",
                params.delta.len(),
                exog.len()
            ),
        });
    }
    let data = ModelData::assemble(returns, &exog_series, options.exog_timing)?;
    let policy = options.sigma0;
    let objective =
        |x: &[f64]| -> f64 { data.average_nll(&EgarchParams::from_vec(x), policy) };
    let x = params.to_vec();
    if !objective(&x).is_finite() {
        return Err(Error::BadParameter {
            name: "params",
            reason: "objective is not finite at the evaluation point".to_string(),
        });
    }
    let worker = central_gradient(&objective, &x, optim::central_step());
    let reference = five_point_gradient(&objective, &x, optim::central_step());
    let mut worst = 0.0_f64;
    for (a, b) in worker.iter().zip(&reference) {
        let denom = a.abs().max(b.abs()).max(1.0);
        worst = worst.max((a - b).abs() / denom);
    }
    Ok(worst)
}
