//! Forward simulation of the EGARCH(1,1) process with an exogenous
//! sentiment-change regressor.
//!
//! The generator below is written independently of the estimation-side
//! recursion in [`crate::egarch`]: the two implementations serve as mutual
//! oracles, and tests require the filtered variance path recovered from
//! simulated returns to match the generator's emitted path.
//!
//! One convention matters for that round trip: the recursion is driven by the
//! standardized shock implied by the emitted return, `z_t = (r_t - mu) /
//! sqrt(sigma^2_t)`, not by the raw normal draw. The two differ by one
//! rounding step, and using the implied value means the generator and any
//! downstream filter see exactly the same information.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::egarch::{EgarchParams, ABS_NORMAL_MEAN};
use crate::error::{Error, Result};
use crate::sentiment::{ConstructionParams, SentimentKind, SentimentSeries};
use crate::series::{self, ObservationSeries};

/// Decorrelates the sentiment-shock stream from the return-shock stream so
/// the same seed yields the same returns under every `dsent` policy.
const DSENT_STREAM_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// How the exogenous sentiment-change column is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DsentPolicy {
    /// All zeros; the delta coefficient is inert.
    Zeros,
    /// Independent draws from `N(0, scale^2)`.
    IidNormal { scale: f64 },
    /// Caller-supplied values for the kept sample (zeros during burn-in).
    Supplied(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub params: EgarchParams,
    /// Observations kept after burn-in.
    pub n: usize,
    /// Steps discarded before the first kept observation.
    pub burn_in: usize,
    /// Seed for `sigma^2` at the very first (pre-burn-in) step.
    pub sigma0_sq: f64,
    pub dsent: DsentPolicy,
    /// Date assigned to the first kept observation; subsequent observations
    /// take consecutive days.
    pub start_date: NaiveDate,
}

impl SimulationSpec {
    pub fn new(params: EgarchParams, n: usize) -> Self {
        // Seed at the unconditional level when it exists, else at one.
        let sigma0_sq = if params.gamma.abs() < 1.0 {
            (params.omega / (1.0 - params.gamma)).exp()
        } else {
            1.0
        };
        SimulationSpec {
            params,
            n,
            burn_in: 1000,
            sigma0_sq,
            dsent: DsentPolicy::Zeros,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date"),
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_sigma0_sq(mut self, sigma0_sq: f64) -> Self {
        self.sigma0_sq = sigma0_sq;
        self
    }

    pub fn with_dsent(mut self, dsent: DsentPolicy) -> Self {
        self.dsent = dsent;
        self
    }

    pub fn with_start_date(mut self, start_date: NaiveDate) -> Self {
        self.start_date = start_date;
        self
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.delta.len() > 1 {
            return Err(Error::BadParameter {
                name: "delta",
                reason: "the simulator drives at most one exogenous regressor".to_string(),
            });
        }
        if self.n == 0 {
            return Err(Error::TooShort {
                required: 1,
                actual: 0,
            });
        }
        if !(self.sigma0_sq.is_finite() && self.sigma0_sq > 0.0) {
            return Err(Error::BadParameter {
                name: "sigma0_sq",
                reason: format!("seed variance must be positive, got {}", self.sigma0_sq),
            });
        }
        match &self.dsent {
            DsentPolicy::IidNormal { scale } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::BadParameter {
                        name: "dsent scale",
                        reason: format!("must be non-negative, got {scale}"),
                    });
                }
            }
            DsentPolicy::Supplied(values) => {
                if values.len() != self.n {
                    return Err(Error::LengthMismatch {
                        dates: self.n,
                        values: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::BadParameter {
                        name: "dsent",
                        reason: "supplied values must be finite".to_string(),
                    });
                }
            }
            DsentPolicy::Zeros => {}
        }
        Ok(())
    }
}

/// Simulation output on one shared date axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOutput {
    pub returns: ObservationSeries,
    pub dsent: ObservationSeries,
    pub variance: ObservationSeries,
}

/// Simulates the process. Deterministic in `(spec, seed)`: shocks come from a
/// ChaCha8 stream seeded by `seed`, sentiment shocks from an independent
/// stream at `seed + DSENT_STREAM_OFFSET` (wrapping).
pub fn simulate(spec: &SimulationSpec, seed: u64) -> Result<SimOutput> {
    spec.validate()?;
    let total = spec.burn_in + spec.n;
    let mut shock_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dsent_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(DSENT_STREAM_OFFSET));

    let dsent: Vec<f64> = match &spec.dsent {
        DsentPolicy::Zeros => vec![0.0; total],
        DsentPolicy::IidNormal { scale } => {
            let dist = Normal::new(0.0, *scale).map_err(|_| Error::BadParameter {
                name: "dsent scale",
                reason: "not a valid normal scale".to_string(),
            })?;
            (0..total).map(|_| dist.sample(&mut dsent_rng)).collect()
        }
        DsentPolicy::Supplied(values) => {
            let mut full = vec![0.0; spec.burn_in];
            full.extend_from_slice(values);
            full
        }
    };
    let delta = spec.params.delta.first().copied().unwrap_or(0.0);

    let p = &spec.params;
    let mut returns = Vec::with_capacity(total);
    let mut variance = Vec::with_capacity(total);
    let mut log_var = spec.sigma0_sq.ln();
    let mut sigma2 = spec.sigma0_sq;
    let mut z_implied = 0.0_f64;
    for t in 0..total {
        if t > 0 {
            log_var = p.omega
                + p.alpha * (z_implied.abs() - ABS_NORMAL_MEAN)
                + p.beta * z_implied
                + p.gamma * log_var
                + delta * dsent[t];
            if !log_var.is_finite() || log_var.abs() > 700.0 {
                return Err(Error::DivergedRecursion {
                    date: date_for(spec, t),
                    log_variance: log_var,
                });
            }
            sigma2 = log_var.exp();
        }
        let sigma = sigma2.sqrt();
        let z: f64 = StandardNormal.sample(&mut shock_rng);
        let r = p.mu + sigma * z;
        returns.push(r);
        variance.push(sigma2);
        z_implied = (r - p.mu) / sigma;
    }

    let dates = series::consecutive_dates(spec.start_date, spec.n);
    let keep = spec.burn_in..total;
    Ok(SimOutput {
        returns: ObservationSeries::new(dates.clone(), returns[keep.clone()].to_vec(), "percent")?,
        dsent: ObservationSeries::new(
            dates.clone(),
            dsent[keep.clone()].to_vec(),
            "sentiment change",
        )?,
        variance: ObservationSeries::new(
            dates,
            variance[keep].to_vec(),
            "conditional variance",
        )?,
    })
}

/// Synthesizes a sentiment level series of the given kind: a persistent AR(1)
/// core (coefficient 0.9) mapped onto each indicator's natural range, so the
/// result passes [`SentimentSeries::new`] level validation. `scale` sizes the
/// shocks; zero gives a constant series.
pub fn simulate_sentiment(
    kind: SentimentKind,
    n: usize,
    seed: u64,
    scale: f64,
) -> Result<SentimentSeries> {
    if n == 0 {
        return Err(Error::TooShort {
            required: 1,
            actual: 0,
        });
    }
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::BadParameter {
            name: "scale",
            reason: format!("must be non-negative, got {scale}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn = 100;
    let mut x = 0.0_f64;
    let mut core = Vec::with_capacity(n);
    for t in 0..burn + n {
        let shock: f64 = StandardNormal.sample(&mut rng);
        x = 0.9 * x + scale * shock;
        if t >= burn {
            core.push(x);
        }
    }
    let values: Vec<f64> = core
        .iter()
        .map(|&x| match kind {
            // Momentum deviations roam freely around zero.
            SentimentKind::Smmi | SentimentKind::Bmmi => x,
            // Ratios and dispersions stay non-negative around a unit level.
            SentimentKind::Smsi | SentimentKind::Bmsi => (1.0 + x).max(0.0),
            // Implied volatility hovers around a 20-point level.
            SentimentKind::Svix => (20.0 + x).max(0.0),
            // A market-value share lives in the unit interval.
            SentimentKind::Dri => (0.3 + x).clamp(0.0, 1.0),
        })
        .collect();
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let series = ObservationSeries::from_start_date(start, values, kind.label())?;
    SentimentSeries::new(series, kind, ConstructionParams::default())
}

fn date_for(spec: &SimulationSpec, t: usize) -> NaiveDate {
    if t >= spec.burn_in {
        spec.start_date + chrono::Days::new((t - spec.burn_in) as u64)
    } else {
        // Divergence during burn-in is reported at the nominal start.
        spec.start_date
    }
}
