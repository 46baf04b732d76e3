//! Aggregates behind the map and chart views: choropleth statistics,
//! temporal profiles, variation ranges, min/mean/max, cumulative days above
//! threshold, year-over-year curves, region aggregation and wind/solar blends.
//!
//! Regions are unweighted means of national capacity factors. All
//! aggregates are read from the snapshot's precomputed rollups; reductions
//! run in a fixed order so results are reproducible bit for bit.

use std::borrow::Cow;
use std::collections::BTreeMap;

use crate::calendar::{CalendarIndex, HOURS_PER_DAY};
use crate::datastore::{CountryCode, DatasetSnapshot, HourlySeries, Rollup, Source};
use crate::error::{Error, Result};
use crate::scalar::{mean, population_std, Scalar};

/// Label of the all-country aggregate.
pub const ALL_COUNTRIES_LABEL: &str = "28C";

/// A non-empty ordered set of countries treated as one interconnected zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    countries: Vec<CountryCode>,
    label: String,
}

impl Region {
    pub fn new<T: Scalar>(snapshot: &DatasetSnapshot<T>, countries: &[CountryCode]) -> Result<Self> {
        if countries.is_empty() {
            return Err(Error::BadParam("region needs at least one country".into()));
        }
        for (i, c) in countries.iter().enumerate() {
            if !snapshot.contains(*c) {
                return Err(Error::UnknownCountry(c.to_string()));
            }
            if countries[..i].contains(c) {
                return Err(Error::BadParam(format!("country {c} listed twice")));
            }
        }
        let label = countries.iter().map(CountryCode::as_str).collect::<Vec<_>>().join("+");
        Ok(Self {
            countries: countries.to_vec(),
            label,
        })
    }

    /// Every country of the snapshot, labelled [`ALL_COUNTRIES_LABEL`].
    pub fn all<T: Scalar>(snapshot: &DatasetSnapshot<T>) -> Self {
        Self {
            countries: snapshot.countries().collect(),
            label: ALL_COUNTRIES_LABEL.to_string(),
        }
    }

    pub fn countries(&self) -> &[CountryCode] {
        &self.countries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_singleton(&self) -> bool {
        self.countries.len() == 1
    }
}

/// Wind/solar mix. Both weights are non-negative and sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixWeights<T> {
    wind: T,
    solar: T,
}

impl<T: Scalar> MixWeights<T> {
    pub fn new(wind: T, solar: T) -> Result<Self> {
        if !(wind >= T::zero() && solar >= T::zero()) || ((wind + solar) - T::one()).abs() > T::of(1e-9) {
            return Err(Error::BadParam(format!(
                "mix weights ({wind}, {solar}) must be non-negative and sum to 1"
            )));
        }
        Ok(Self { wind, solar })
    }

    /// Solar weight derived as `1 - wind`.
    pub fn from_wind(wind: T) -> Result<Self> {
        if !(wind >= T::zero() && wind <= T::one()) {
            return Err(Error::BadParam(format!("wind weight {wind} outside [0, 1]")));
        }
        Ok(Self {
            wind,
            solar: T::one() - wind,
        })
    }

    pub fn wind_only() -> Self {
        Self {
            wind: T::one(),
            solar: T::zero(),
        }
    }

    pub fn wind(&self) -> T {
        self.wind
    }

    pub fn solar(&self) -> T {
        self.solar
    }
}

impl<T: Scalar> Default for MixWeights<T> {
    fn default() -> Self {
        Self::wind_only()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    /// 24 hour-of-day units, 0..=23.
    Hourly,
    /// 12 calendar-month units, 1..=12.
    Monthly,
    /// One unit per calendar year.
    Yearly,
}

impl Resolution {
    pub fn as_str(&self) -> &'static str {
        match self {
            Resolution::Hourly => "hourly",
            Resolution::Monthly => "monthly",
            Resolution::Yearly => "yearly",
        }
    }
}

/// Inclusive unit bounds at one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeFilter {
    pub resolution: Resolution,
    pub from: i32,
    pub to: i32,
}

impl TimeFilter {
    pub fn new(resolution: Resolution, from: i32, to: i32) -> Result<Self> {
        let legal = match resolution {
            Resolution::Hourly => 0..=23,
            Resolution::Monthly => 1..=12,
            Resolution::Yearly => i32::MIN..=i32::MAX,
        };
        if from > to || !legal.contains(&from) || !legal.contains(&to) {
            return Err(Error::BadParam(format!(
                "bounds {from}..={to} are not legal for {} resolution",
                resolution.as_str()
            )));
        }
        Ok(Self { resolution, from, to })
    }

    /// Every unit the snapshot covers at this resolution.
    pub fn full<T: Scalar>(resolution: Resolution, snapshot: &DatasetSnapshot<T>) -> Self {
        let (from, to) = match resolution {
            Resolution::Hourly => (0, 23),
            Resolution::Monthly => (1, 12),
            Resolution::Yearly => snapshot.calendar().year_span(),
        };
        Self { resolution, from, to }
    }

    fn contains(&self, unit: i32) -> bool {
        (self.from..=self.to).contains(&unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    Mean,
    Std,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationMode {
    /// 12 monthly means of one year.
    Intrayear,
    /// 24 hour-of-day means of one year.
    Intraday,
}

/// A labelled value vector. `aggregate` marks region or all-country lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledValues<T> {
    pub label: String,
    pub values: Vec<T>,
    pub aggregate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResult<T> {
    pub resolution: Resolution,
    /// Hours (0..=23), months (1..=12) or years.
    pub labels: Vec<i32>,
    pub series: Vec<LabeledValues<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeEntry<T> {
    pub label: String,
    pub value: T,
    pub aggregate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMeanMax<T> {
    pub label: String,
    pub min: T,
    pub mean: T,
    pub max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurves<T> {
    pub thresholds: Vec<T>,
    pub curves: Vec<LabeledValues<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoyResult<T> {
    pub label: String,
    pub focus_year: i32,
    pub focus: Vec<T>,
    pub background: Vec<(i32, Vec<T>)>,
}

/// Hourly series of a region (the unweighted mean of member blends).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSeries<T> {
    pub label: String,
    pub calendar: CalendarIndex,
    pub values: Vec<T>,
}

/// Rollup of one country under a mix. Borrowed when no blending is needed.
pub(crate) fn country_rollup<'a, T: Scalar>(
    snapshot: &'a DatasetSnapshot<T>,
    country: CountryCode,
    weights: MixWeights<T>,
) -> Result<Cow<'a, Rollup<T>>> {
    let wind = snapshot.wind_rollup(country)?;
    if weights.solar == T::zero() {
        return Ok(Cow::Borrowed(wind));
    }
    let solar = snapshot
        .solar_rollup(country)
        .ok_or_else(|| Error::MissingSolar(country.to_string()))?;
    if weights.wind == T::zero() {
        return Ok(Cow::Borrowed(solar));
    }
    Ok(Cow::Owned(Rollup::blend(wind, weights.wind, solar, weights.solar)))
}

pub(crate) fn region_rollup<'a, T: Scalar>(
    snapshot: &'a DatasetSnapshot<T>,
    region: &Region,
    weights: MixWeights<T>,
) -> Result<Cow<'a, Rollup<T>>> {
    if region.is_singleton() {
        return country_rollup(snapshot, region.countries[0], weights);
    }
    let parts = region
        .countries
        .iter()
        .map(|&c| country_rollup(snapshot, c, weights).map(Cow::into_owned))
        .collect::<Result<Vec<_>>>()?;
    Ok(Cow::Owned(Rollup::mean_of(&parts)))
}

/// Read access to one rollup with the calendar's slot layout.
struct Cube<'a, T> {
    rollup: &'a Rollup<T>,
    days: &'a [usize],
    first_year: i32,
}

impl<'a, T: Scalar> Cube<'a, T> {
    fn new(snapshot: &'a DatasetSnapshot<T>, rollup: &'a Rollup<T>) -> Self {
        Self {
            rollup,
            days: snapshot.days_per_slot(),
            first_year: snapshot.calendar().year_span().0,
        }
    }

    fn year_slots(&self, year: i32) -> std::ops::Range<usize> {
        let base = (year - self.first_year) as usize * 12;
        base..base + 12
    }

    fn hour_sum(&self, slot: usize, hour: usize) -> T {
        self.rollup.diurnal[slot * HOURS_PER_DAY + hour]
    }

    /// Mean at each hour of day over the given slots.
    fn hour_means(&self, slots: impl Iterator<Item = usize> + Clone) -> Vec<T> {
        let days: usize = slots.clone().map(|s| self.days[s]).sum();
        (0..HOURS_PER_DAY)
            .map(|h| {
                let sum = slots.clone().fold(T::zero(), |acc, s| acc + self.hour_sum(s, h));
                sum / T::of_usize(days)
            })
            .collect()
    }

    /// Mean of all hourly values in the given slots.
    fn mean_over(&self, slots: impl Iterator<Item = usize> + Clone) -> Option<T> {
        let days: usize = slots.clone().map(|s| self.days[s]).sum();
        if days == 0 {
            return None;
        }
        let sum = slots.fold(T::zero(), |acc, s| {
            (0..HOURS_PER_DAY).fold(acc, |acc, h| acc + self.hour_sum(s, h))
        });
        Some(sum / T::of_usize(days * HOURS_PER_DAY))
    }

    /// `(unit, mean)` for every unit at a resolution, pooled over the whole record.
    fn unit_means(&self, resolution: Resolution) -> Vec<(i32, T)> {
        let slots = 0..self.days.len();
        match resolution {
            Resolution::Hourly => self
                .hour_means(slots)
                .into_iter()
                .enumerate()
                .map(|(h, v)| (h as i32, v))
                .collect(),
            Resolution::Monthly => (0..12)
                .filter_map(|m| {
                    let v = self.mean_over(slots.clone().filter(move |s| s % 12 == m))?;
                    Some((m as i32 + 1, v))
                })
                .collect(),
            Resolution::Yearly => {
                let years = self.days.len() / 12;
                (0..years as i32)
                    .filter_map(|i| {
                        let y = self.first_year + i;
                        Some((y, self.mean_over(self.year_slots(y))?))
                    })
                    .collect()
            }
        }
    }

    /// The 12 monthly or 24 hour-of-day means of one (fully covered) year.
    fn year_profile(&self, year: i32, mode: VariationMode) -> Vec<T> {
        match mode {
            VariationMode::Intrayear => self
                .year_slots(year)
                .map(|s| self.mean_over(s..s + 1).expect("full year has days in every month"))
                .collect(),
            VariationMode::Intraday => self.hour_means(self.year_slots(year)),
        }
    }
}

fn check_full_year<T: Scalar>(snapshot: &DatasetSnapshot<T>, year: i32) -> Result<()> {
    snapshot.calendar().year_days(year).map(|_| ())
}

fn filtered_units<T: Scalar>(cube: &Cube<'_, T>, filter: &TimeFilter) -> Result<(Vec<i32>, Vec<T>)> {
    let (units, values): (Vec<i32>, Vec<T>) = cube
        .unit_means(filter.resolution)
        .into_iter()
        .filter(|(u, _)| filter.contains(*u))
        .unzip();
    if units.is_empty() {
        return Err(Error::EmptyFilter);
    }
    Ok((units, values))
}

/// `w_wind * wind + w_solar * solar`, hour by hour. With no solar weight the
/// wind series is returned unchanged.
pub fn blended_series<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    country: CountryCode,
    weights: MixWeights<T>,
) -> Result<HourlySeries<T>> {
    let wind = snapshot
        .wind()
        .get(&country)
        .ok_or_else(|| Error::UnknownCountry(country.to_string()))?;
    if weights.solar == T::zero() {
        return Ok(wind.clone());
    }
    let solar = snapshot
        .solar()
        .get(&country)
        .ok_or_else(|| Error::MissingSolar(country.to_string()))?;
    let values = wind
        .values
        .iter()
        .zip(&solar.values)
        .map(|(&a, &b)| (weights.wind * a + weights.solar * b).min(T::one()))
        .collect();
    Ok(HourlySeries {
        country,
        source: Source::Wind,
        calendar: wind.calendar,
        values,
    })
}

/// Per-hour unweighted mean of the members' blended series.
pub fn region_series<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    weights: MixWeights<T>,
) -> Result<RegionSeries<T>> {
    let members = region
        .countries
        .iter()
        .map(|&c| blended_series(snapshot, c, weights))
        .collect::<Result<Vec<_>>>()?;
    let k = T::of_usize(members.len());
    let values = (0..snapshot.calendar().len())
        .map(|i| members.iter().fold(T::zero(), |acc, s| acc + s.values[i]) / k)
        .collect();
    Ok(RegionSeries {
        label: region.label.clone(),
        calendar: *snapshot.calendar(),
        values,
    })
}

/// Choropleth value per country: the mean or population standard deviation
/// of the per-unit means selected by `filter`. Hour-of-day and month units
/// are always pooled over the whole record; yearly bounds select years.
pub fn spatial_stat<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    stat: Stat,
    filter: TimeFilter,
    weights: MixWeights<T>,
) -> Result<BTreeMap<CountryCode, T>> {
    snapshot
        .countries()
        .map(|c| {
            let rollup = country_rollup(snapshot, c, weights)?;
            let (_, values) = filtered_units(&Cube::new(snapshot, &rollup), &filter)?;
            let v = match stat {
                Stat::Mean => mean(&values),
                Stat::Std => population_std(&values),
            }
            .expect("filtered_units is non-empty");
            Ok((c, v))
        })
        .collect()
}

/// Hour-of-day, month-of-year or per-year means of each region.
pub fn temporal_profile<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    regions: &[Region],
    filter: TimeFilter,
    weights: MixWeights<T>,
) -> Result<ProfileResult<T>> {
    if regions.is_empty() {
        return Err(Error::BadParam("profile needs at least one region".into()));
    }
    let mut labels = Vec::new();
    let mut series = Vec::with_capacity(regions.len());
    for region in regions {
        let rollup = region_rollup(snapshot, region, weights)?;
        let (units, values) = filtered_units(&Cube::new(snapshot, &rollup), &filter)?;
        labels = units;
        series.push(LabeledValues {
            label: region.label.clone(),
            values,
            aggregate: !region.is_singleton() || region.label == ALL_COUNTRIES_LABEL,
        });
    }
    Ok(ProfileResult {
        resolution: filter.resolution,
        labels,
        series,
    })
}

fn year_profile<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    year: i32,
    mode: VariationMode,
    weights: MixWeights<T>,
) -> Result<Vec<T>> {
    let rollup = region_rollup(snapshot, region, weights)?;
    Ok(Cube::new(snapshot, &rollup).year_profile(year, mode))
}

fn min_max<T: Scalar>(values: &[T]) -> (T, T) {
    values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn by_value_then_label<T: Scalar>(a: (&T, &str), b: (&T, &str)) -> std::cmp::Ordering {
    a.0.partial_cmp(b.0)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then_with(|| a.1.cmp(b.1))
}

/// Max minus min of a year's monthly (or hour-of-day) profile, per country,
/// plus the all-country aggregate. Without a selection every country is
/// returned and the whole list, aggregate included, is sorted ascending by
/// value (ties by label). With a selection, entries follow the selection and
/// the aggregate comes last.
pub fn variation_range<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    mode: VariationMode,
    year: i32,
    countries: &[CountryCode],
    weights: MixWeights<T>,
) -> Result<Vec<RangeEntry<T>>> {
    check_full_year(snapshot, year)?;
    let selected: Vec<CountryCode> = if countries.is_empty() {
        snapshot.countries().collect()
    } else {
        Region::new(snapshot, countries)?.countries
    };
    let mut regions: Vec<Region> = selected
        .iter()
        .map(|&c| Region::new(snapshot, &[c]))
        .collect::<Result<_>>()?;
    regions.push(Region::all(snapshot));
    let mut entries = regions
        .iter()
        .map(|r| {
            let (lo, hi) = min_max(&year_profile(snapshot, r, year, mode, weights)?);
            Ok(RangeEntry {
                label: r.label.clone(),
                value: hi - lo,
                aggregate: r.label == ALL_COUNTRIES_LABEL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if countries.is_empty() {
        entries.sort_by(|a, b| by_value_then_label((&a.value, &a.label), (&b.value, &b.label)));
    }
    Ok(entries)
}

/// Min, mean and max of each country's profile values for one year, ordered
/// ascending by mean (ties by country code). No selection means every country.
pub fn min_mean_max<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    mode: VariationMode,
    year: i32,
    countries: &[CountryCode],
    weights: MixWeights<T>,
) -> Result<Vec<MinMeanMax<T>>> {
    check_full_year(snapshot, year)?;
    let selected: Vec<CountryCode> = if countries.is_empty() {
        snapshot.countries().collect()
    } else {
        Region::new(snapshot, countries)?.countries
    };
    let mut out = selected
        .into_iter()
        .map(|c| {
            let region = Region::new(snapshot, &[c])?;
            let profile = year_profile(snapshot, &region, year, mode, weights)?;
            let (min, max) = min_max(&profile);
            let mean = mean(&profile).expect("profile is non-empty");
            // Rounding in the mean must not break min <= mean <= max.
            Ok(MinMeanMax {
                label: region.label,
                min,
                mean: mean.max(min).min(max),
                max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| by_value_then_label((&a.mean, &a.label), (&b.mean, &b.label)));
    Ok(out)
}

/// 0.00, 0.01, ..., 1.00.
pub fn default_threshold_grid<T: Scalar>() -> Vec<T> {
    (0..=100).map(|i| T::of(i as f64 / 100.0)).collect()
}

/// Fraction of `daily` values strictly greater than each threshold.
pub fn fraction_above<T: Scalar>(daily: &[T], thresholds: &[T]) -> Vec<T> {
    let n = T::of_usize(daily.len().max(1));
    thresholds
        .iter()
        .map(|&t| T::of_usize(daily.iter().filter(|&&v| v > t).count()) / n)
        .collect()
}

fn check_thresholds<T: Scalar>(thresholds: &[T]) -> Result<()> {
    let in_unit = thresholds.iter().all(|&t| t >= T::zero() && t <= T::one());
    let ascending = thresholds.windows(2).all(|w| w[0] < w[1]);
    if thresholds.is_empty() || !in_unit || !ascending {
        return Err(Error::BadParam("thresholds must be ascending within [0, 1]".into()));
    }
    Ok(())
}

/// Daily means of a region under a mix, for one fully covered year.
pub(crate) fn region_daily<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    days: std::ops::Range<usize>,
    weights: MixWeights<T>,
) -> Result<Vec<T>> {
    Ok(region_rollup(snapshot, region, weights)?.daily[days].to_vec())
}

/// Share of the year's days whose daily-mean capacity factor exceeds each
/// threshold. Multi-country regions get one curve per member followed by the
/// region curve.
pub fn cumulative_days_above<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    year: i32,
    thresholds: &[T],
    weights: MixWeights<T>,
) -> Result<CumulativeCurves<T>> {
    let days = snapshot.calendar().year_days(year)?;
    check_thresholds(thresholds)?;
    let mut targets: Vec<Region> = Vec::new();
    if !region.is_singleton() {
        for &c in &region.countries {
            targets.push(Region::new(snapshot, &[c])?);
        }
    }
    targets.push(region.clone());
    let curves = targets
        .iter()
        .map(|r| {
            let daily = region_daily(snapshot, r, days.clone(), weights)?;
            Ok(LabeledValues {
                label: r.label.clone(),
                values: fraction_above(&daily, thresholds),
                aggregate: !r.is_singleton(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulativeCurves {
        thresholds: thresholds.to_vec(),
        curves,
    })
}

/// Monthly means of the focus year against every other fully covered year.
pub fn yoy_monthly<T: Scalar>(
    snapshot: &DatasetSnapshot<T>,
    region: &Region,
    focus_year: i32,
    weights: MixWeights<T>,
) -> Result<YoyResult<T>> {
    check_full_year(snapshot, focus_year)?;
    let (first, last) = snapshot.calendar().full_years().expect("checked above");
    let rollup = region_rollup(snapshot, region, weights)?;
    let cube = Cube::new(snapshot, &rollup);
    Ok(YoyResult {
        label: region.label.clone(),
        focus_year,
        focus: cube.year_profile(focus_year, VariationMode::Intrayear),
        background: (first..=last)
            .filter(|&y| y != focus_year)
            .map(|y| (y, cube.year_profile(y, VariationMode::Intrayear)))
            .collect(),
    })
}
