//! Deterministic synthetic snapshots.
//!
//! Wind capacity factor of country `c` at hour `h` of a day in month `m`
//! (0-based) is
//!
//! ```text
//! base_c + diurnal * sin(2π (h + 3c) / 24) + seasonal * cos(2π m / 12) + weather * z_c(day)
//! ```
//!
//! clamped to `[0, 1]`, where `z_c` is a seeded AR(1) process per country with
//! a shared cross-country component. With `weather = 0` and amplitudes that
//! stay inside `[0, 1]` the hour-of-day and monthly means have the closed
//! forms returned by [`SynthConfig::hour_of_day_mean`] and
//! [`SynthConfig::month_mean`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::calendar::{CalendarIndex, HOURS_PER_DAY};
use crate::datastore::{
    Cadence, CountryCode, DatasetSnapshot, HourlySeries, IndexSeries, PriceSeries, Provenance,
    SnapshotParts, Source,
};
use crate::scalar::Scalar;

/// The 28 countries of the reference dataset.
pub const EUROPE_28: [&str; 28] = [
    "AT", "BE", "BG", "CH", "CZ", "DE", "DK", "EE", "ES", "FI", "FR", "GB", "GR", "HR", "HU", "IE",
    "IT", "LT", "LU", "LV", "NL", "NO", "PL", "PT", "RO", "SE", "SI", "SK",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Country code and base capacity factor.
    pub countries: Vec<(String, f64)>,
    pub first_year: i32,
    pub last_year: i32,
    pub seed: u64,
    pub diurnal: f64,
    pub seasonal: f64,
    pub weather: f64,
    /// AR(1) coefficient of the daily weather process.
    pub persistence: f64,
    /// Share of the weather innovation common to all countries, in `[0, 1]`.
    pub shared: f64,
    pub solar: bool,
    pub prices: bool,
    pub indices: bool,
}

impl SynthConfig {
    /// Three countries, 1979-1980, weather strong enough for LWP events.
    pub fn fixture() -> Self {
        Self {
            countries: vec![("DE".into(), 0.22), ("DK".into(), 0.30), ("FR".into(), 0.24)],
            first_year: 1979,
            last_year: 1980,
            seed: 42,
            diurnal: 0.05,
            seasonal: 0.06,
            weather: 0.12,
            persistence: 0.7,
            shared: 0.6,
            solar: true,
            prices: true,
            indices: true,
        }
    }

    /// 28 countries over 1979-2019 (359,400 hours each).
    pub fn full_scale() -> Self {
        Self {
            countries: EUROPE_28
                .iter()
                .enumerate()
                .map(|(i, c)| (c.to_string(), 0.18 + 0.01 * (i % 13) as f64))
                .collect(),
            first_year: 1979,
            last_year: 2019,
            ..Self::fixture()
        }
    }

    /// No weather term: every aggregate has a closed form.
    pub fn closed_form() -> Self {
        Self {
            weather: 0.0,
            ..Self::fixture()
        }
    }

    pub fn with_years(mut self, first: i32, last: i32) -> Self {
        self.first_year = first;
        self.last_year = last;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn calendar(&self) -> CalendarIndex {
        CalendarIndex::from_days(
            NaiveDate::from_ymd_opt(self.first_year, 1, 1).expect("valid year"),
            NaiveDate::from_ymd_opt(self.last_year, 12, 31).expect("valid year"),
        )
        .expect("first_year <= last_year")
    }

    fn deterministic_part(&self, country: usize, ts: NaiveDateTime) -> f64 {
        let (base, hour, month) = (self.countries[country].1, ts.hour() as f64, ts.month0() as f64);
        base + self.diurnal * (2.0 * PI * (hour + 3.0 * country as f64) / 24.0).sin()
            + self.seasonal * (2.0 * PI * month / 12.0).cos()
    }

    /// Closed-form mean at `hour` over the whole calendar (valid without weather).
    pub fn hour_of_day_mean(&self, country: usize, hour: u32) -> f64 {
        let cal = self.calendar();
        let seasonal_mean = (0..cal.day_count())
            .map(|d| (2.0 * PI * cal.day(d).month0() as f64 / 12.0).cos())
            .sum::<f64>()
            / cal.day_count() as f64;
        self.countries[country].1
            + self.diurnal * (2.0 * PI * (hour as f64 + 3.0 * country as f64) / 24.0).sin()
            + self.seasonal * seasonal_mean
    }

    /// Closed-form mean of calendar month `month` (1-based; valid without weather).
    pub fn month_mean(&self, country: usize, month: u32) -> f64 {
        self.countries[country].1 + self.seasonal * (2.0 * PI * (month - 1) as f64 / 12.0).cos()
    }

    pub fn build<T: Scalar>(&self) -> DatasetSnapshot<T> {
        let cal = self.calendar();
        let days = cal.day_count();
        let n = self.countries.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        // Daily weather: z[c][d] and the shared innovation.
        let mut shared_series = Vec::with_capacity(days);
        let mut z = vec![vec![0.0f64; days]; n];
        let innovation = (1.0 - self.persistence * self.persistence).sqrt();
        let own = (1.0 - self.shared * self.shared).sqrt();
        for d in 0..days {
            let common: f64 = rng.sample(StandardNormal);
            shared_series.push(common);
            for zc in z.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                let prev = if d == 0 { 0.0 } else { zc[d - 1] };
                zc[d] = self.persistence * prev + innovation * (self.shared * common + own * e);
            }
        }

        let codes: Vec<CountryCode> = self
            .countries
            .iter()
            .map(|(c, _)| CountryCode::new(c).expect("valid synthetic country code"))
            .collect();
        let mut parts = SnapshotParts::default();
        let mut daily_wind = vec![vec![0.0f64; days]; n];
        for (ci, code) in codes.iter().enumerate() {
            let mut values = Vec::with_capacity(cal.len());
            let mut ts = cal.start();
            for d in 0..days {
                let mut sum = 0.0;
                for _ in 0..HOURS_PER_DAY {
                    let v = (self.deterministic_part(ci, ts) + self.weather * z[ci][d]).clamp(0.0, 1.0);
                    sum += v;
                    values.push(T::of(v));
                    ts += Duration::hours(1);
                }
                daily_wind[ci][d] = sum / HOURS_PER_DAY as f64;
            }
            parts.wind.insert(*code, HourlySeries { country: *code, source: Source::Wind, calendar: cal, values });
        }

        if self.solar {
            for (ci, code) in codes.iter().enumerate() {
                let peak = 0.6 + 0.05 * ci as f64;
                let values = (0..cal.len())
                    .map(|i| {
                        let ts = cal.timestamp(i);
                        let daylight = (PI * (ts.hour() as f64 - 6.0) / 12.0).sin().max(0.0);
                        let season = 0.6 - 0.4 * (2.0 * PI * ts.month0() as f64 / 12.0).cos();
                        T::of((peak * daylight * season).clamp(0.0, 1.0))
                    })
                    .collect();
                parts.solar.insert(*code, HourlySeries { country: *code, source: Source::Solar, calendar: cal, values });
            }
        }

        if self.prices {
            for (ci, code) in codes.iter().enumerate() {
                let mut dates = Vec::new();
                let mut values = Vec::new();
                for d in (0..days).filter(|d| d % 11 != 3) {
                    let noise: f64 = rng.sample(StandardNormal);
                    dates.push(cal.day(d));
                    values.push(T::of(80.0 - 120.0 * (daily_wind[ci][d] - 0.25) + 4.0 * noise));
                }
                parts.prices.insert(*code, PriceSeries { country: *code, dates, values });
            }
        }

        if self.indices {
            let nao = IndexSeries {
                name: "NAO".into(),
                cadence: Cadence::Daily,
                dates: (0..days).map(|d| cal.day(d)).collect(),
                values: shared_series.iter().map(|&v| T::of(v)).collect(),
            };
            let months: Vec<NaiveDate> = (self.first_year..=self.last_year)
                .flat_map(|y| (1..=12).map(move |m| NaiveDate::from_ymd_opt(y, m, 1).expect("valid")))
                .collect();
            let nino = IndexSeries {
                name: "NINO".into(),
                cadence: Cadence::Monthly,
                values: (0..months.len())
                    .map(|i| T::of((2.0 * PI * i as f64 / 40.0).sin()))
                    .collect(),
                dates: months,
            };
            parts.indices.insert(nao.name.clone(), nao);
            parts.indices.insert(nino.name.clone(), nino);
        }

        parts.provenance = Provenance {
            sources: vec![],
            ingested_at: format!("synthetic seed {}", self.seed),
        };
        DatasetSnapshot::new(parts).expect("synthetic data satisfies snapshot invariants")
    }
}

/// Wind-only snapshot over whole years where `value(country_index, hour_index,
/// timestamp)` gives each hourly capacity factor.
pub fn snapshot_from_fn<T: Scalar>(
    countries: &[&str],
    first_year: i32,
    last_year: i32,
    value: impl Fn(usize, usize, NaiveDateTime) -> f64,
) -> DatasetSnapshot<T> {
    let cal = SynthConfig::fixture().with_years(first_year, last_year).calendar();
    let mut parts = SnapshotParts::default();
    for (ci, c) in countries.iter().enumerate() {
        let code = CountryCode::new(c).expect("valid country code");
        let values = (0..cal.len()).map(|i| T::of(value(ci, i, cal.timestamp(i)))).collect();
        parts
            .wind
            .insert(code, HourlySeries::new(code, Source::Wind, cal, values).expect("valid values"));
    }
    DatasetSnapshot::new(parts).expect("valid snapshot")
}

/// Wind-only snapshot with one constant value per country.
pub fn constant_snapshot<T: Scalar>(
    countries: &[(&str, f64)],
    first_year: i32,
    last_year: i32,
) -> DatasetSnapshot<T> {
    let codes: Vec<&str> = countries.iter().map(|(c, _)| *c).collect();
    snapshot_from_fn(&codes, first_year, last_year, |ci, _, _| countries[ci].1)
}

/// Adds solar series and/or prices to an existing snapshot.
pub fn with_extras<T: Scalar>(
    snapshot: DatasetSnapshot<T>,
    solar: BTreeMap<CountryCode, Vec<T>>,
    prices: BTreeMap<CountryCode, Vec<(NaiveDate, T)>>,
) -> DatasetSnapshot<T> {
    let cal = *snapshot.calendar();
    let mut parts = snapshot.into_parts();
    for (code, values) in solar {
        parts.solar.insert(code, HourlySeries::new(code, Source::Solar, cal, values).expect("valid solar"));
    }
    for (code, days) in prices {
        let (dates, values) = days.into_iter().unzip();
        parts.prices.insert(code, PriceSeries { country: code, dates, values });
    }
    DatasetSnapshot::new(parts).expect("valid snapshot")
}

/// Replaces (or adds) climate indices.
pub fn with_index<T: Scalar>(snapshot: DatasetSnapshot<T>, index: IndexSeries<T>) -> DatasetSnapshot<T> {
    let mut parts = snapshot.into_parts();
    parts.indices.insert(index.name.clone(), index);
    DatasetSnapshot::new(parts).expect("valid snapshot")
}
