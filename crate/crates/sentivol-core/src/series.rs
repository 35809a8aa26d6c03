//! Date-indexed observation series and the rolling-window primitives built on it.
//!
//! A series is a strictly increasing sequence of trading-day dates with one
//! finite value per date. Missing observations are simply absent dates; no
//! interpolation happens anywhere. Rolling windows count observations, not
//! calendar days, and never emit partial windows.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly date-sorted series of finite values with a free-form unit tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesData", into = "SeriesData")]
pub struct ObservationSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    unit: String,
}

/// Serialization shadow of [`ObservationSeries`]; `TryFrom` re-runs the
/// constructor so deserialized data cannot bypass the invariants.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesData {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    unit: String,
}

impl TryFrom<SeriesData> for ObservationSeries {
    type Error = Error;

    fn try_from(raw: SeriesData) -> Result<Self> {
        ObservationSeries::new(raw.dates, raw.values, raw.unit)
    }
}

impl From<ObservationSeries> for SeriesData {
    fn from(s: ObservationSeries) -> Self {
        SeriesData {
            dates: s.dates,
            values: s.values,
            unit: s.unit,
        }
    }
}

impl ObservationSeries {
    /// Builds a series, enforcing equal lengths, strictly increasing dates,
    /// and finite values.
    pub fn new(
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
        unit: impl Into<String>,
    ) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                dates: dates.len(),
                values: values.len(),
            });
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::UnsortedDates { date: pair[1] });
            }
        }
        let unit = unit.into();
        for (date, value) in dates.iter().zip(&values) {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue {
                    date: *date,
                    context: "series value",
                });
            }
        }
        Ok(ObservationSeries {
            dates,
            values,
            unit,
        })
    }

    /// Convenience constructor for synthetic data: values are dated on a
    /// consecutive artificial calendar starting at `start`.
    pub fn from_start_date(start: NaiveDate, values: Vec<f64>, unit: impl Into<String>) -> Result<Self> {
        let dates = consecutive_dates(start, values.len());
        Self::new(dates, values, unit)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    /// Same observations under a different unit tag.
    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }

    /// Observations with `start <= date <= end`, preserving order. May be empty.
    pub fn window_by_date(&self, start: NaiveDate, end: NaiveDate) -> ObservationSeries {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        ObservationSeries {
            dates: self.dates[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
            unit: self.unit.clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }
}

/// Consecutive-day artificial calendar used for simulated data.
pub fn consecutive_dates(start: NaiveDate, len: usize) -> Vec<NaiveDate> {
    (0..len as i64)
        .map(|offset| start + chrono::Days::new(offset as u64))
        .collect()
}

/// Two series restricted to their common dates, in date order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub dates: Vec<NaiveDate>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Several series restricted to the dates they all share, in date order.
/// Column order follows input order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSet {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<Vec<f64>>,
}

impl AlignedSet {
    pub fn len(&self) -> usize {
        self.dates.len()
    }
}

/// Percentage simple returns: `r_t = 100 * (P_t / P_{t-1} - 1)`, dated at `t`.
///
/// Prices must be strictly positive; the first date carries no return.
pub fn simple_returns(prices: &ObservationSeries) -> Result<ObservationSeries> {
    if prices.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: prices.len(),
        });
    }
    for (date, value) in prices.iter() {
        if value <= 0.0 {
            return Err(Error::NonPositivePrice { date, value });
        }
    }
    let values = prices
        .values()
        .windows(2)
        .map(|w| 100.0 * (w[1] / w[0] - 1.0))
        .collect();
    ObservationSeries::new(prices.dates()[1..].to_vec(), values, "percent")
}

/// Trailing moving average over `window` observations, dated at the window end.
/// Output length is `len - window + 1`; no partial windows are emitted.
pub fn moving_average(series: &ObservationSeries, window: usize) -> Result<ObservationSeries> {
    if window == 0 {
        return Err(Error::BadWindow {
            window,
            requirement: "window >= 1",
        });
    }
    if window > series.len() {
        return Err(Error::WindowExceedsLength {
            window,
            len: series.len(),
        });
    }
    let values: Vec<f64> = series
        .values()
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    ObservationSeries::new(
        series.dates()[window - 1..].to_vec(),
        values,
        series.unit(),
    )
}

/// Trailing sample standard deviation (divisor `window - 1`) over `window`
/// observations, dated at the window end.
///
/// Each window is reduced with Welford's recurrence, so a constant window
/// yields exactly zero.
pub fn rolling_std(series: &ObservationSeries, window: usize) -> Result<ObservationSeries> {
    if window < 2 {
        return Err(Error::BadWindow {
            window,
            requirement: "window >= 2",
        });
    }
    if window > series.len() {
        return Err(Error::WindowExceedsLength {
            window,
            len: series.len(),
        });
    }
    let values: Vec<f64> = series
        .values()
        .windows(window)
        .map(|w| welford_std(w))
        .collect();
    ObservationSeries::new(
        series.dates()[window - 1..].to_vec(),
        values,
        series.unit(),
    )
}

fn welford_std(window: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, x) in window.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    (m2 / (window.len() - 1) as f64).sqrt()
}

/// First difference `x_t - x_{t-1}`, dated at `t`.
pub fn diff(series: &ObservationSeries) -> Result<ObservationSeries> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: series.len(),
        });
    }
    let values = series.values().windows(2).map(|w| w[1] - w[0]).collect();
    ObservationSeries::new(series.dates()[1..].to_vec(), values, series.unit())
}

/// Inner join of two series on date. Dates appearing in only one input are
/// dropped; order is preserved. The result may be empty.
pub fn align(left: &ObservationSeries, right: &ObservationSeries) -> AlignedPair {
    let mut dates = Vec::new();
    let mut l = Vec::new();
    let mut r = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        let (dl, dr) = (left.dates()[i], right.dates()[j]);
        if dl == dr {
            dates.push(dl);
            l.push(left.values()[i]);
            r.push(right.values()[j]);
            i += 1;
            j += 1;
        } else if dl < dr {
            i += 1;
        } else {
            j += 1;
        }
    }
    AlignedPair {
        dates,
        left: l,
        right: r,
    }
}

/// Inner join of several series on date; generalizes [`align`].
pub fn align_many(series: &[&ObservationSeries]) -> AlignedSet {
    assert!(!series.is_empty(), "align_many needs at least one series");
    let mut dates: Vec<NaiveDate> = series[0].dates().to_vec();
    for s in &series[1..] {
        let mut kept = Vec::with_capacity(dates.len().min(s.len()));
        let (mut i, mut j) = (0, 0);
        let other = s.dates();
        while i < dates.len() && j < other.len() {
            if dates[i] == other[j] {
                kept.push(dates[i]);
                i += 1;
                j += 1;
            } else if dates[i] < other[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        dates = kept;
    }
    let columns = series
        .iter()
        .map(|s| {
            let mut col = Vec::with_capacity(dates.len());
            let mut j = 0;
            for d in &dates {
                while s.dates()[j] < *d {
                    j += 1;
                }
                col.push(s.values()[j]);
            }
            col
        })
        .collect();
    AlignedSet { dates, columns }
}

/// Lag-1 pairs `(x_t, x_{t-1})` for the autoregression: `left[k] = x_{k+1}`,
/// `right[k] = x_k`, dated at `t`.
pub fn lag_pair(series: &ObservationSeries) -> Result<AlignedPair> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: series.len(),
        });
    }
    Ok(AlignedPair {
        dates: series.dates()[1..].to_vec(),
        left: series.values()[1..].to_vec(),
        right: series.values()[..series.len() - 1].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn day(n: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Days::new(n)
    }

    fn series(values: Vec<f64>) -> ObservationSeries {
        ObservationSeries::from_start_date(day(0), values, "test").unwrap()
    }

    #[test]
    fn constructor_rejects_unsorted_dates() {
        let err = ObservationSeries::new(
            vec![day(1), day(1), day(2)],
            vec![1.0, 2.0, 3.0],
            "x",
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnsortedDates { date } if date == day(1)));
    }

    #[test]
    fn constructor_rejects_non_finite() {
        let err =
            ObservationSeries::new(vec![day(0), day(1)], vec![1.0, f64::NAN], "x").unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { date, .. } if date == day(1)));
    }

    #[test]
    fn constructor_rejects_length_mismatch() {
        let err = ObservationSeries::new(vec![day(0)], vec![1.0, 2.0], "x").unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { dates: 1, values: 2 }));
    }

    #[test]
    fn returns_match_hand_computed_values() {
        let r = simple_returns(&series(vec![100.0, 101.0, 100.495])).unwrap();
        assert_relative_eq!(r.values()[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.values()[1], -0.5, max_relative = 1e-12);
        assert_eq!(r.dates(), &[day(1), day(2)]);
        assert_eq!(r.unit(), "percent");
    }

    #[test]
    fn returns_of_constant_prices_are_zero() {
        let r = simple_returns(&series(vec![50.0; 10])).unwrap();
        assert!(r.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn returns_match_per_element_oracle() {
        // Oracle recomputes each ratio independently of the windowed sweep.
        let prices: Vec<f64> = (0..30)
            .map(|i| 80.0 + 7.0 * ((i as f64) * 0.7).sin() + 0.3 * i as f64)
            .collect();
        let s = series(prices.clone());
        let r = simple_returns(&s).unwrap();
        for t in 1..prices.len() {
            let expected = 100.0 * (prices[t] - prices[t - 1]) / prices[t - 1];
            assert_relative_eq!(r.values()[t - 1], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn returns_reject_non_positive_price_naming_date() {
        let err = simple_returns(&series(vec![10.0, 0.0, 11.0])).unwrap_err();
        assert!(matches!(err, Error::NonPositivePrice { date, .. } if date == day(1)));
    }

    #[test]
    fn returns_reject_short_series_naming_minimum() {
        let err = simple_returns(&series(vec![10.0])).unwrap_err();
        assert!(matches!(err, Error::TooShort { required: 2, actual: 1 }));
    }

    #[test]
    fn moving_average_of_constant_is_constant() {
        let ma = moving_average(&series(vec![3.5; 40]), 25).unwrap();
        assert_eq!(ma.len(), 16);
        assert!(ma.values().iter().all(|v| *v == 3.5));
    }

    #[test]
    fn moving_average_window_one_is_identity() {
        let s = series(vec![1.0, 4.0, 9.0]);
        let ma = moving_average(&s, 1).unwrap();
        assert_eq!(ma.values(), s.values());
        assert_eq!(ma.dates(), s.dates());
    }

    #[test]
    fn moving_average_hand_example() {
        let ma = moving_average(&series(vec![1.0, 2.0, 3.0, 4.0, 5.0]), 3).unwrap();
        assert_eq!(ma.values(), &[2.0, 3.0, 4.0]);
        assert_eq!(ma.dates()[0], day(2));
    }

    #[test]
    fn moving_average_rejects_oversized_window() {
        let err = moving_average(&series(vec![1.0, 2.0]), 5).unwrap_err();
        assert!(matches!(err, Error::WindowExceedsLength { window: 5, len: 2 }));
    }

    #[test]
    fn rolling_std_of_constant_is_zero() {
        let rs = rolling_std(&series(vec![2.0; 30]), 10).unwrap();
        assert!(rs.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rolling_std_hand_example() {
        let rs = rolling_std(&series(vec![1.0, 2.0, 3.0]), 3).unwrap();
        assert_eq!(rs.len(), 1);
        assert_relative_eq!(rs.values()[0], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rolling_std_matches_two_pass_oracle() {
        // Deterministic pseudo-Gaussian sample; the oracle is a classic
        // two-pass mean-then-deviations computation, independent of the
        // Welford reduction used by the implementation.
        let data: Vec<f64> = (0..500)
            .map(|i| {
                let x = i as f64;
                (x * 0.11).sin() * 2.0 + (x * 0.037).cos() * 1.3 + 0.002 * x
            })
            .collect();
        let s = series(data.clone());
        let window = 250;
        let rs = rolling_std(&s, window).unwrap();
        for (k, w) in data.windows(window).enumerate() {
            let mean = w.iter().sum::<f64>() / window as f64;
            let ss: f64 = w.iter().map(|x| (x - mean).powi(2)).sum();
            let oracle = (ss / (window as f64 - 1.0)).sqrt();
            assert_relative_eq!(rs.values()[k], oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn diff_hand_example_and_constant() {
        let d = diff(&series(vec![3.0, 5.0, 4.0])).unwrap();
        assert_eq!(d.values(), &[2.0, -1.0]);
        let z = diff(&series(vec![7.0; 5])).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn diff_round_trips_through_cumulative_sum() {
        let data: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.31).sin() * 5.0).collect();
        let s = series(data.clone());
        let d = diff(&s).unwrap();
        let mut rebuilt = data[0];
        for (k, dv) in d.values().iter().enumerate() {
            rebuilt += dv;
            assert_relative_eq!(rebuilt, data[k + 1], max_relative = 1e-14, epsilon = 1e-14);
        }
    }

    #[test]
    fn align_identical_series_keeps_everything() {
        let s = series(vec![1.0, 2.0, 3.0]);
        let pair = align(&s, &s);
        assert_eq!(pair.len(), 3);
        assert_eq!(pair.left, pair.right);
    }

    #[test]
    fn align_disjoint_series_is_empty() {
        let a = series(vec![1.0, 2.0]);
        let b = ObservationSeries::from_start_date(day(100), vec![5.0, 6.0], "x").unwrap();
        assert!(align(&a, &b).is_empty());
    }

    #[test]
    fn align_matches_set_intersection_oracle() {
        let a = series((0..10).map(|i| i as f64).collect());
        let dates: Vec<NaiveDate> = (0..10).filter(|i| i % 2 == 0).map(day).collect();
        let b = ObservationSeries::new(dates.clone(), vec![9.0; 5], "x").unwrap();
        let pair = align(&a, &b);
        assert_eq!(pair.dates, dates);
        assert_eq!(pair.left, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn align_many_three_way_matches_pairwise_composition() {
        let a = series((0..12).map(|i| i as f64).collect());
        let b = ObservationSeries::new(
            (0..12).filter(|i| i % 2 == 0).map(day).collect(),
            (0..6).map(|i| 10.0 + i as f64).collect(),
            "x",
        )
        .unwrap();
        let c = ObservationSeries::new(
            (0..12).filter(|i| i % 3 == 0).map(day).collect(),
            (0..4).map(|i| 20.0 + i as f64).collect(),
            "x",
        )
        .unwrap();
        let set = align_many(&[&a, &b, &c]);
        // Common dates are multiples of 6.
        assert_eq!(set.dates, vec![day(0), day(6)]);
        assert_eq!(set.columns[0], vec![0.0, 6.0]);
        assert_eq!(set.columns[1], vec![10.0, 13.0]);
        assert_eq!(set.columns[2], vec![20.0, 22.0]);
    }

    #[test]
    fn lag_pair_hand_example() {
        let pair = lag_pair(&series(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(pair.left, vec![2.0, 3.0]);
        assert_eq!(pair.right, vec![1.0, 2.0]);
        assert_eq!(pair.dates, vec![day(1), day(2)]);
    }

    #[test]
    fn lag_pair_of_constant_has_equal_sides() {
        let pair = lag_pair(&series(vec![4.0; 6])).unwrap();
        assert_eq!(pair.left, pair.right);
    }

    #[test]
    fn window_by_date_is_inclusive_on_both_ends() {
        let s = series((0..10).map(|i| i as f64).collect());
        let w = s.window_by_date(day(2), day(5));
        assert_eq!(w.values(), &[2.0, 3.0, 4.0, 5.0]);
        assert!(s.window_by_date(day(50), day(60)).is_empty());
    }
}
