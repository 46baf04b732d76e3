//! Validated, immutable storage of every input series.
//!
//! A [`DatasetSnapshot`] is built once (from CSV ingestion or a snapshot file)
//! and then only read. Construction also precomputes per-series rollups
//! (daily means and hour-of-day sums per calendar month) so that queries never
//! rescan the hourly record.

mod export;
mod ingest;
mod persist;
mod resample;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::calendar::{CalendarIndex, HOURS_PER_DAY};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use ingest::{
    build_snapshot, detect_cadence, file_digest, index_files_in, ingest_capacity_factors,
    ingest_climate_index, ingest_prices, IndexSource, IngestSources,
};
pub use export::export_csv;
pub use persist::{load_snapshot, save_snapshot, snapshot_from_bytes, snapshot_to_bytes, MAGIC, VERSION};
pub use resample::{resample, ResampleUnit};

/// Two-letter uppercase country identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn new(code: &str) -> Result<Self> {
        match code.as_bytes() {
            [a, b] if a.is_ascii_uppercase() && b.is_ascii_uppercase() => Ok(Self([*a, *b])),
            _ => Err(Error::InvalidCountryCode(code.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ASCII by construction")
    }

    pub(crate) fn bytes(&self) -> [u8; 2] {
        self.0
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Wind,
    Solar,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Wind => "wind",
            Source::Solar => "solar",
        }
    }
}

/// Hourly capacity factors of one country and source.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries<T> {
    pub country: CountryCode,
    pub source: Source,
    pub calendar: CalendarIndex,
    pub values: Vec<T>,
}

impl<T: Scalar> HourlySeries<T> {
    /// Checks length and the `[0, 1]` range of every value.
    pub fn new(
        country: CountryCode,
        source: Source,
        calendar: CalendarIndex,
        values: Vec<T>,
    ) -> Result<Self> {
        let series = Self {
            country,
            source,
            calendar,
            values,
        };
        series.validate()?;
        Ok(series)
    }

    fn validate(&self) -> Result<()> {
        if self.values.len() != self.calendar.len() {
            return Err(Error::InvalidSnapshot(format!(
                "{} {} series has {} values for a {}-hour calendar",
                self.country,
                self.source.as_str(),
                self.values.len(),
                self.calendar.len()
            )));
        }
        if let Some(i) = self
            .values
            .iter()
            .position(|v| !(v.is_finite() && *v >= T::zero() && *v <= T::one()))
        {
            return Err(Error::InvalidSnapshot(format!(
                "{} {} value {} at {} outside [0, 1]",
                self.country,
                self.source.as_str(),
                self.values[i],
                self.calendar.timestamp(i)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cadence {
    Daily,
    Monthly,
}

impl Cadence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cadence::Daily => "daily",
            Cadence::Monthly => "monthly",
        }
    }
}

/// A named climate index (NAO, AO, NINO, MJO variants, ...). Monthly values
/// are stamped with the first day of their month.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries<T> {
    pub name: String,
    pub cadence: Cadence,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<T>,
}

impl<T: Scalar> IndexSeries<T> {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSnapshot(format!("index {}: {msg}", self.name)));
        if self.dates.len() != self.values.len() {
            return bad("dates and values differ in length".into());
        }
        if self.dates.windows(2).any(|w| w[0] >= w[1]) {
            return bad("dates are not strictly increasing".into());
        }
        if self.cadence == Cadence::Monthly && self.dates.iter().any(|d| d.day() != 1) {
            return bad("monthly dates must be first-of-month".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value".into());
        }
        Ok(())
    }

    /// Value in effect on `date`: the exact day for daily indices, the
    /// containing month (forward-filled from the latest earlier month) for
    /// monthly ones.
    pub fn value_on(&self, date: NaiveDate) -> Option<T> {
        match self.cadence {
            Cadence::Daily => self
                .dates
                .binary_search(&date)
                .ok()
                .map(|i| self.values[i]),
            Cadence::Monthly => {
                let i = self.dates.partition_point(|d| *d <= date);
                let last = self.dates.last()?;
                let past_end = i == self.dates.len()
                    && (date.year(), date.month()) != (last.year(), last.month());
                (i > 0 && !past_end).then(|| self.values[i - 1])
            }
        }
    }
}

/// Sparse daily average day-ahead prices in EUR/MWh. Days absent from the
/// source are simply absent here.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    pub country: CountryCode,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<T>,
}

impl<T: Scalar> PriceSeries<T> {
    fn validate(&self) -> Result<()> {
        if self.dates.len() != self.values.len()
            || self.dates.windows(2).any(|w| w[0] >= w[1])
            || self.values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSnapshot(format!(
                "price series for {} is not a strictly increasing finite daily series",
                self.country
            )));
        }
        Ok(())
    }

    pub fn price_on(&self, date: NaiveDate) -> Option<T> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceDigest {
    pub path: String,
    /// Hex SHA-256 of the file contents.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub sources: Vec<SourceDigest>,
    /// RFC 3339 UTC.
    pub ingested_at: String,
}

/// Precomputed aggregates of one hourly series.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Rollup<T> {
    /// Mean of each calendar day.
    pub daily: Vec<T>,
    /// Sum of values at each hour of day, per month slot:
    /// `diurnal[slot * 24 + hour]`.
    pub diurnal: Vec<T>,
}

impl<T: Scalar> Rollup<T> {
    fn build(calendar: &CalendarIndex, values: &[T]) -> Self {
        let days = calendar.day_count();
        let mut daily = Vec::with_capacity(days);
        let mut diurnal = vec![T::zero(); calendar.month_slots() * HOURS_PER_DAY];
        let per_day = T::of_usize(HOURS_PER_DAY);
        for d in 0..days {
            let slot = calendar.month_slot(calendar.day(d)) * HOURS_PER_DAY;
            let hours = &values[d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY];
            let mut sum = T::zero();
            for (h, &v) in hours.iter().enumerate() {
                sum = sum + v;
                diurnal[slot + h] = diurnal[slot + h] + v;
            }
            daily.push(sum / per_day);
        }
        Self { daily, diurnal }
    }

    /// `wa * a + wb * b`, element-wise.
    pub fn blend(a: &Self, wa: T, b: &Self, wb: T) -> Self {
        let mix = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&x, &y)| wa * x + wb * y).collect();
        Self {
            daily: mix(&a.daily, &b.daily),
            diurnal: mix(&a.diurnal, &b.diurnal),
        }
    }

    /// Element-wise arithmetic mean, summed in slice order.
    pub fn mean_of(parts: &[Self]) -> Self {
        let k = T::of_usize(parts.len());
        let avg = |pick: fn(&Self) -> &Vec<T>| {
            let len = pick(&parts[0]).len();
            (0..len)
                .map(|i| parts.iter().fold(T::zero(), |acc, p| acc + pick(p)[i]) / k)
                .collect()
        };
        Self {
            daily: avg(|r| &r.daily),
            diurnal: avg(|r| &r.diurnal),
        }
    }
}

/// Inputs for [`DatasetSnapshot::new`].
#[derive(Debug, Clone)]
pub struct SnapshotParts<T> {
    pub wind: BTreeMap<CountryCode, HourlySeries<T>>,
    pub solar: BTreeMap<CountryCode, HourlySeries<T>>,
    pub indices: BTreeMap<String, IndexSeries<T>>,
    pub prices: BTreeMap<CountryCode, PriceSeries<T>>,
    pub provenance: Provenance,
}

impl<T> Default for SnapshotParts<T> {
    fn default() -> Self {
        Self {
            wind: BTreeMap::new(),
            solar: BTreeMap::new(),
            indices: BTreeMap::new(),
            prices: BTreeMap::new(),
            provenance: Provenance::default(),
        }
    }
}

/// Immutable collection of every series over one common hourly calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSnapshot<T> {
    calendar: CalendarIndex,
    wind: BTreeMap<CountryCode, HourlySeries<T>>,
    solar: BTreeMap<CountryCode, HourlySeries<T>>,
    indices: BTreeMap<String, IndexSeries<T>>,
    prices: BTreeMap<CountryCode, PriceSeries<T>>,
    provenance: Provenance,
    wind_rollups: BTreeMap<CountryCode, Rollup<T>>,
    solar_rollups: BTreeMap<CountryCode, Rollup<T>>,
    days_per_slot: Vec<usize>,
}

impl<T: Scalar> DatasetSnapshot<T> {
    pub fn new(parts: SnapshotParts<T>) -> Result<Self> {
        let SnapshotParts {
            wind,
            solar,
            indices,
            prices,
            provenance,
        } = parts;
        let calendar = wind
            .values()
            .next()
            .map(|s| s.calendar)
            .ok_or_else(|| Error::InvalidSnapshot("no wind series".into()))?;
        if calendar.is_empty() || !calendar.is_whole_days() {
            return Err(Error::InvalidSnapshot(
                "calendar must start at 00:00 UTC and cover whole days".into(),
            ));
        }
        for (source, map) in [(Source::Wind, &wind), (Source::Solar, &solar)] {
            for (code, series) in map {
                if series.country != *code || series.source != source {
                    return Err(Error::InvalidSnapshot(format!(
                        "series keyed {code}/{} is {}/{}",
                        source.as_str(),
                        series.country,
                        series.source.as_str()
                    )));
                }
                if series.calendar != calendar {
                    return Err(Error::InvalidSnapshot(format!(
                        "{code} {} calendar differs from the snapshot calendar",
                        source.as_str()
                    )));
                }
                series.validate()?;
            }
        }
        if let Some(code) = solar.keys().find(|c| !wind.contains_key(c)) {
            return Err(Error::InvalidSnapshot(format!("solar country {code} has no wind series")));
        }
        for (name, index) in &indices {
            if *name != index.name {
                return Err(Error::InvalidSnapshot(format!("index keyed {name} is named {}", index.name)));
            }
            index.validate()?;
        }
        for (code, series) in &prices {
            if *code != series.country {
                return Err(Error::InvalidSnapshot(format!("prices keyed {code} are for {}", series.country)));
            }
            series.validate()?;
        }

        let rollups = |map: &BTreeMap<CountryCode, HourlySeries<T>>| {
            map.iter()
                .map(|(c, s)| (*c, Rollup::build(&calendar, &s.values)))
                .collect()
        };
        Ok(Self {
            calendar,
            wind_rollups: rollups(&wind),
            solar_rollups: rollups(&solar),
            days_per_slot: calendar.days_per_month_slot(),
            wind,
            solar,
            indices,
            prices,
            provenance,
        })
    }

    pub fn calendar(&self) -> &CalendarIndex {
        &self.calendar
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.wind.keys().copied()
    }

    pub fn country_count(&self) -> usize {
        self.wind.len()
    }

    pub fn contains(&self, code: CountryCode) -> bool {
        self.wind.contains_key(&code)
    }

    /// Parses and checks membership in one step.
    pub fn country(&self, code: &str) -> Result<CountryCode> {
        let parsed = CountryCode::new(code)?;
        if self.contains(parsed) {
            Ok(parsed)
        } else {
            Err(Error::UnknownCountry(code.to_string()))
        }
    }

    pub fn wind(&self) -> &BTreeMap<CountryCode, HourlySeries<T>> {
        &self.wind
    }

    pub fn solar(&self) -> &BTreeMap<CountryCode, HourlySeries<T>> {
        &self.solar
    }

    pub fn indices(&self) -> &BTreeMap<String, IndexSeries<T>> {
        &self.indices
    }

    pub fn prices(&self) -> &BTreeMap<CountryCode, PriceSeries<T>> {
        &self.prices
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub(crate) fn wind_rollup(&self, code: CountryCode) -> Result<&Rollup<T>> {
        self.wind_rollups
            .get(&code)
            .ok_or_else(|| Error::UnknownCountry(code.to_string()))
    }

    pub(crate) fn solar_rollup(&self, code: CountryCode) -> Option<&Rollup<T>> {
        self.solar_rollups.get(&code)
    }

    /// Covered days per (year, month) slot, see [`CalendarIndex::month_slot`].
    pub(crate) fn days_per_slot(&self) -> &[usize] {
        &self.days_per_slot
    }

    pub(crate) fn into_parts(self) -> SnapshotParts<T> {
        SnapshotParts {
            wind: self.wind,
            solar: self.solar,
            indices: self.indices,
            prices: self.prices,
            provenance: self.provenance,
        }
    }
}
