use chrono::{Datelike, Duration, NaiveDate};

use super::HourlySeries;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleUnit {
    Day,
    Month,
    Year,
}

impl ResampleUnit {
    fn period_of(self, date: NaiveDate) -> NaiveDate {
        match self {
            ResampleUnit::Day => date,
            ResampleUnit::Month => date.with_day(1).expect("day 1 exists"),
            ResampleUnit::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("Jan 1 exists"),
        }
    }
}

/// Mean of the hourly values falling in each UTC period, labelled by the
/// period's first day. Periods only partly covered by the calendar average
/// the hours that are present.
pub fn resample<T: Scalar>(series: &HourlySeries<T>, unit: ResampleUnit) -> Vec<(NaiveDate, T)> {
    let mut out = Vec::new();
    let mut ts = series.calendar.start();
    let mut current: Option<(NaiveDate, T, usize)> = None;
    for &v in &series.values {
        let period = unit.period_of(ts.date());
        current = match current {
            Some((p, sum, n)) if p == period => Some((p, sum + v, n + 1)),
            Some((p, sum, n)) => {
                out.push((p, sum / T::of_usize(n)));
                Some((period, v, 1))
            }
            None => Some((period, v, 1)),
        };
        ts += Duration::hours(1);
    }
    if let Some((p, sum, n)) = current {
        out.push((p, sum / T::of_usize(n)));
    }
    out
}
