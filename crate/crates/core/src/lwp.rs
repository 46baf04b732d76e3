//! Low-wind-power (LWP) days and events.
//!
//! A day is an LWP day when its daily-mean capacity factor is strictly below
//! the threshold. An event is a maximal run of consecutive LWP days inside the
//! analysis window (one calendar year); runs crossing the window edge are
//! clipped, so a run spanning New Year shows up as two events.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};

use crate::analytics::{region_daily, region_rollup, MixWeights, Region};
use crate::datastore::{CountryCode, DatasetSnapshot};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{correlate, significance_filter, CorrelationEntry};

pub const DEFAULT_THRESHOLD: f64 = 0.10;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Shortest histogram length; extended to the longest observed event.
pub const DEFAULT_D_MAX: usize = 10;

/// Capacity-factor threshold strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwpThreshold<T>(T);

impl<T: Scalar> LwpThreshold<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value < T::one() {
            Ok(Self(value))
        } else {
            Err(Error::BadParam(format!("threshold {value} outside (0, 1)")))
        }
    }

    pub fn value(&self) -> T {
        self.0
    }

    pub fn is_lwp(&self, daily_cf: T) -> bool {
        daily_cf < self.0
    }
}

impl<T: Scalar> Default for LwpThreshold<T> {
    fn default() -> Self {
        Self(T::of(DEFAULT_THRESHOLD))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LwpEvent {
    pub start: NaiveDate,
    pub duration_days: usize,
}

/// One flag per day of a year, `true` on LWP days.
#[derive(Debug, Clone, PartialEq)]
pub struct CalendarMask {
    pub year: i32,
    pub label: String,
    pub flags: Vec<bool>,
}

/// Event-duration histogram of one country or region.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationCounts {
    pub label: String,
    /// `counts[d - 1]` = number of events lasting at least `d` days.
    pub counts: Vec<usize>,
    pub events: Vec<LwpEvent>,
    pub aggregate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LwpSummary {
    pub d_max: usize,
    pub per_country: Vec<DurationCounts>,
    pub region: DurationCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationBasis {
    /// Daily 0/1 LWP indicators.
    LwpDays,
    /// Daily-mean capacity factors.
    CapacityFactor,
}

/// One cell of a correlation map.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationCell<T> {
    Significant(CorrelationEntry<T>),
    Suppressed(CorrelationEntry<T>),
    /// No coefficient exists, e.g. one side never has an LWP day.
    Undefined(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPoint<T> {
    pub date: NaiveDate,
    pub value: T,
    pub is_lwp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint<T> {
    pub date: NaiveDate,
    pub price: T,
    pub capacity_factor: T,
    pub is_lwp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceOverlay<T> {
    pub points: Vec<PricePoint<T>>,
    /// Daily capacity factor against price over the days with a price.
    pub correlation: Result<CorrelationEntry<T>>,
}

pub fn lwp_flags<T: Scalar>(daily: &[T], threshold: LwpThreshold<T>) -> Vec<bool> {
    daily.iter().map(|&v| threshold.is_lwp(v)).collect()
}

/// Maximal runs of days below the threshold; `first_day` dates `daily[0]`.
pub fn detect_lwp_events<T: Scalar>(
    daily: &[T],
    first_day: NaiveDate,
    threshold: LwpThreshold<T>,
) -> Vec<LwpEvent> {
    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &v) in daily.iter().enumerate() {
        match (threshold.is_lwp(v), run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                events.push(LwpEvent {
                    start: first_day + Duration::days(s as i64),
                    duration_days: i - s,
                });
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        events.push(LwpEvent {
            start: first_day + Duration::days(s as i64),
            duration_days: daily.len() - s,
        });
    }
    events
}

/// `counts[d - 1]` = number of events with duration at least `d`, for `d` in `1..=d_max`.
pub fn events_by_min_duration(events: &[LwpEvent], d_max: usize) -> Vec<usize> {
    (1..=d_max)
        .map(|d| events.iter().filter(|e| e.duration_days >= d).count())
        .collect()
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::BadParam(format!("alpha {alpha} outside (0, 1)")))
    }
}

fn year_window<T: Scalar>(snapshot: &DatasetSnapshot<T>, year: i32) -> Result<(std::ops::Range<usize>, NaiveDate)> {
    let days = snapshot.calendar().year_days(year)?;
    let first = snapshot.calendar().day(days.start);
    Ok((days, first))
}

/// Daily means of a region for one year (365 or 366 values).
pub fn daily_cf<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    year: i32,
    weights: MixWeights<T>,
) -> Result<Vec<T>> {
    let (days, _) = year_window(snapshot, year)?;
    region_daily(snapshot, region, days, weights)
}

/// Duration histograms of each country and of the selected region. Every
/// histogram shares one length: `d_max`, raised to the longest event seen.
pub fn lwp_summary<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    countries: &[CountryCode],
    year: i32,
    threshold: LwpThreshold<T>,
    weights: MixWeights<T>,
    d_max: usize,
) -> Result<LwpSummary> {
    if d_max == 0 {
        return Err(Error::BadParam("d_max must be at least 1".into()));
    }
    let region = Region::new(snapshot, countries)?;
    let (days, first) = year_window(snapshot, year)?;
    let events_of = |r: &Region| -> Result<Vec<LwpEvent>> {
        let daily = region_daily(snapshot, r, days.clone(), weights)?;
        Ok(detect_lwp_events(&daily, first, threshold))
    };
    let mut per_country = Vec::with_capacity(countries.len());
    for &c in region.countries() {
        let r = Region::new(snapshot, &[c])?;
        per_country.push((r.label().to_string(), events_of(&r)?));
    }
    let region_events = events_of(&region)?;
    let longest = per_country
        .iter()
        .flat_map(|(_, ev)| ev.iter())
        .chain(region_events.iter())
        .map(|e| e.duration_days)
        .max()
        .unwrap_or(0);
    let d_max = d_max.max(longest);
    let counts = |label: String, events: Vec<LwpEvent>, aggregate: bool| DurationCounts {
        label,
        counts: events_by_min_duration(&events, d_max),
        events,
        aggregate,
    };
    Ok(LwpSummary {
        d_max,
        per_country: per_country
            .into_iter()
            .map(|(label, ev)| counts(label, ev, false))
            .collect(),
        region: counts(region.label().to_string(), region_events, !region.is_singleton()),
    })
}

/// LWP-day mask of the region formed by `countries`.
pub fn lwp_calendar<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    countries: &[CountryCode],
    year: i32,
    threshold: LwpThreshold<T>,
    weights: MixWeights<T>,
) -> Result<CalendarMask> {
    let region = Region::new(snapshot, countries)?;
    let daily = daily_cf(snapshot, &region, year, weights)?;
    Ok(CalendarMask {
        year,
        label: region.label().to_string(),
        flags: lwp_flags(&daily, threshold),
    })
}

/// Correlation of the focus country with every other country over the whole
/// daily record, significance-filtered at `alpha`.
pub fn correlation_map<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    focus: CountryCode,
    basis: CorrelationBasis,
    alpha: T,
    threshold: LwpThreshold<T>,
    weights: MixWeights<T>,
) -> Result<BTreeMap<CountryCode, CorrelationCell<T>>> {
    check_alpha(alpha)?;
    let series = |c: CountryCode| -> Result<Vec<T>> {
        let rollup = region_rollup(snapshot, &Region::new(snapshot, &[c])?, weights)?;
        Ok(match basis {
            CorrelationBasis::CapacityFactor => rollup.daily.clone(),
            CorrelationBasis::LwpDays => rollup
                .daily
                .iter()
                .map(|&v| if threshold.is_lwp(v) { T::one() } else { T::zero() })
                .collect(),
        })
    };
    let focus_series = series(focus)?;
    let mut defined = BTreeMap::new();
    let mut out = BTreeMap::new();
    for c in snapshot.countries().filter(|&c| c != focus) {
        match correlate(&focus_series, &series(c)?) {
            Ok(entry) => {
                defined.insert(c, entry);
            }
            Err(e @ (Error::DegenerateInput(_) | Error::InsufficientSamples(_))) => {
                out.insert(c, CorrelationCell::Undefined(e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    for (c, f) in significance_filter(defined, alpha) {
        let cell = if f.suppressed {
            CorrelationCell::Suppressed(f.entry)
        } else {
            CorrelationCell::Significant(f.entry)
        };
        out.insert(c, cell);
    }
    Ok(out)
}

/// Climate index values over one year, flagged with the country's LWP days.
/// Monthly indices are forward-filled to days; days without index data are
/// left out.
pub fn index_overlay<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    index_name: &str,
    country: CountryCode,
    year: i32,
    threshold: LwpThreshold<T>,
    weights: MixWeights<T>,
) -> Result<Vec<IndexPoint<T>>> {
    let index = snapshot
        .indices()
        .get(index_name)
        .ok_or_else(|| Error::UnknownIndex(index_name.to_string()))?;
    let mask = lwp_calendar(snapshot, &[country], year, threshold, weights)?;
    let first = NaiveDate::from_ymd_opt(year, 1, 1).expect("checked year");
    let points: Vec<_> = mask
        .flags
        .iter()
        .enumerate()
        .filter_map(|(i, &is_lwp)| {
            let date = first + Duration::days(i as i64);
            index.value_on(date).map(|value| IndexPoint { date, value, is_lwp })
        })
        .collect();
    if points.is_empty() {
        return Err(Error::IndexYearMissing {
            name: index_name.to_string(),
            year,
        });
    }
    Ok(points)
}

/// Daily prices of one year flagged with LWP days, and the correlation between
/// daily capacity factor and price. Days without a price are skipped in both.
pub fn price_overlay<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    country: CountryCode,
    year: i32,
    threshold: LwpThreshold<T>,
    weights: MixWeights<T>,
) -> Result<PriceOverlay<T>> {
    let region = Region::new(snapshot, &[country])?;
    let (days, first) = year_window(snapshot, year)?;
    let no_data = || Error::NoPriceData {
        country: country.to_string(),
        year,
    };
    let prices = snapshot.prices().get(&country).ok_or_else(no_data)?;
    let daily = region_daily(snapshot, &region, days, weights)?;
    let points: Vec<_> = daily
        .iter()
        .enumerate()
        .filter_map(|(i, &cf)| {
            let date = first + Duration::days(i as i64);
            prices.price_on(date).map(|price| PricePoint {
                date,
                price,
                capacity_factor: cf,
                is_lwp: threshold.is_lwp(cf),
            })
        })
        .collect();
    if points.is_empty() {
        return Err(no_data());
    }
    let cf: Vec<T> = points.iter().map(|p| p.capacity_factor).collect();
    let price: Vec<T> = points.iter().map(|p| p.price).collect();
    Ok(PriceOverlay {
        correlation: correlate(&cf, &price),
        points,
    })
}
