//! Market-sentiment indices and their effect on return volatility.
//!
//! The crate builds six sentiment indicators from market activity data
//! (momentum, put/call ratio, implied volatility, return dispersion, and a
//! default-risk share), regresses squared return innovations on them in a
//! two-stage OLS design, and estimates EGARCH(1,1) models whose variance
//! equation carries day-over-day sentiment changes as exogenous regressors.
//! A forward simulator generates data from the same process for testing and
//! power studies.
//!
//! Modules, bottom up:
//!
//! * [`series`]: dated observation vectors and their alignment algebra.
//! * [`io`]: CSV ingestion and emission for dated tables.
//! * [`sentiment`]: the six indicator constructions.
//! * [`regression`]: OLS with classical inference and the two-stage design.
//! * [`optim`]: finite differences and BFGS minimization.
//! * [`egarch`]: the variance recursion, likelihood, and multistart fit.
//! * [`simulate`]: forward process generation, written independently of the
//!   estimation recursion so the two act as mutual oracles.
//! * [`report`]: text tables and CSV rendering.
//! * [`exec`]: rayon-or-sequential mapping, behind the `parallel` feature.

pub mod egarch;
pub mod error;
pub mod exec;
pub mod io;
pub mod optim;
pub mod regression;
pub mod report;
pub mod sentiment;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
