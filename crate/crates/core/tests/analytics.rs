mod oracle;

use chrono::Datelike;
use oracle::Oracle;
use proptest::prelude::*;
use remap_core::analytics::*;
use remap_core::datastore::CountryCode;
use remap_core::synth::{constant_snapshot, snapshot_from_fn, with_extras, SynthConfig};
use remap_core::{Error, Snapshot, Weights};

const TOL: f64 = 1e-9;

fn code(s: &str) -> CountryCode {
    s.parse().unwrap()
}

fn region(snap: &Snapshot, codes: &[&str]) -> Region {
    Region::new(snap, &codes.iter().map(|c| code(c)).collect::<Vec<_>>()).unwrap()
}

fn close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= TOL, "index {i}: {x} vs {y}");
    }
}

#[test]
fn spatial_stat_matches_oracle() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    for (res, name, from, to) in [
        (Resolution::Hourly, "hourly", 0, 23),
        (Resolution::Hourly, "hourly", 6, 18),
        (Resolution::Monthly, "monthly", 1, 12),
        (Resolution::Monthly, "monthly", 11, 12),
        (Resolution::Yearly, "yearly", 1979, 1980),
        (Resolution::Yearly, "yearly", 1980, 1990),
    ] {
        let filter = TimeFilter::new(res, from, to).unwrap();
        let means = spatial_stat(&snap, Stat::Mean, filter, Weights::default()).unwrap();
        let stds = spatial_stat(&snap, Stat::Std, filter, Weights::default()).unwrap();
        for c in ["DE", "DK", "FR"] {
            let units: Vec<f64> = o
                .unit_means(&[c], 1.0, name)
                .into_iter()
                .filter(|(u, _)| (from..=to).contains(u))
                .map(|(_, v)| v)
                .collect();
            assert!((means[&code(c)] - oracle::mean(&units)).abs() <= TOL);
            assert!((stds[&code(c)] - oracle::pop_std(&units)).abs() <= TOL);
        }
    }
}

#[test]
fn yearly_std_uses_population_convention() {
    let snap = snapshot_from_fn::<f64>(&["FR"], 1979, 1980, |_, _, ts| if ts.year() == 1979 { 0.2 } else { 0.4 });
    let f = TimeFilter::new(Resolution::Yearly, 1979, 1980).unwrap();
    let s = spatial_stat(&snap, Stat::Std, f, Weights::default()).unwrap();
    assert!((s[&code("FR")] - 0.1).abs() < 1e-12);
}

#[test]
fn blended_and_region_series_match_oracle() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    let w = Weights::from_wind(0.6).unwrap();
    let fr = blended_series(&snap, code("FR"), w).unwrap();
    close(&fr.values, &o.hourly(&["FR"], 0.6));
    let all = region_series(&snap, &Region::all(&snap), Weights::default()).unwrap();
    close(&all.values, &o.hourly(&["DE", "DK", "FR"], 1.0));
    assert_eq!(all.label, "28C");
}

#[test]
fn blend_of_constants() {
    let snap = constant_snapshot::<f64>(&[("FR", 0.2)], 1979, 1979);
    let n = snap.calendar().len();
    let snap = with_extras(snap, [(code("FR"), vec![0.4; n])].into(), Default::default());
    let s = blended_series(&snap, code("FR"), Weights::new(0.5, 0.5).unwrap()).unwrap();
    assert!(s.values.iter().all(|v| (v - 0.3).abs() < 1e-12));
    let s = blended_series(&snap, code("FR"), Weights::from_wind(0.25).unwrap()).unwrap();
    assert!(s.values.iter().all(|v| (v - (0.25 * 0.2 + 0.75 * 0.4)).abs() < 1e-12));
}

#[test]
fn profiles_match_oracle() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    let regions = [region(&snap, &["FR"]), region(&snap, &["DE", "DK"]), Region::all(&snap)];
    let members: [&[&str]; 3] = [&["FR"], &["DE", "DK"], &["DE", "DK", "FR"]];
    for (res, name) in [(Resolution::Hourly, "hourly"), (Resolution::Monthly, "monthly"), (Resolution::Yearly, "yearly")] {
        let p = temporal_profile(&snap, &regions, TimeFilter::full(res, &snap), Weights::default()).unwrap();
        for (series, m) in p.series.iter().zip(members) {
            let expected: Vec<f64> = o.unit_means(m, 1.0, name).into_iter().map(|(_, v)| v).collect();
            close(&series.values, &expected);
        }
        assert_eq!(p.labels.len(), match res { Resolution::Hourly => 24, Resolution::Monthly => 12, Resolution::Yearly => 2 });
    }
}

#[test]
fn diurnal_and_seasonal_closed_forms() {
    let cfg = SynthConfig::closed_form();
    let snap = cfg.build::<f64>();
    let regions: Vec<Region> = cfg.countries.iter().map(|(c, _)| region(&snap, &[c])).collect();
    let hourly = temporal_profile(&snap, &regions, TimeFilter::full(Resolution::Hourly, &snap), Weights::default()).unwrap();
    let monthly = temporal_profile(&snap, &regions, TimeFilter::full(Resolution::Monthly, &snap), Weights::default()).unwrap();
    for ci in 0..cfg.countries.len() {
        for h in 0..24 {
            assert!((hourly.series[ci].values[h] - cfg.hour_of_day_mean(ci, h as u32)).abs() < TOL);
        }
        for m in 1..=12 {
            assert!((monthly.series[ci].values[m - 1] - cfg.month_mean(ci, m as u32)).abs() < TOL);
        }
    }
}

#[test]
fn constant_intraday_profile_and_yearly_span() {
    let snap = constant_snapshot::<f64>(&[("FR", 0.3)], 1979, 2019);
    assert_eq!(snap.calendar().day_count(), 14_975);
    let p = temporal_profile(&snap, &[Region::all(&snap)], TimeFilter::full(Resolution::Hourly, &snap), Weights::default()).unwrap();
    assert_eq!(p.series[0].values.len(), 24);
    assert!(p.series[0].values.iter().all(|v| (v - 0.3).abs() < 1e-12));
    let y = temporal_profile(&snap, &[Region::all(&snap)], TimeFilter::full(Resolution::Yearly, &snap), Weights::default()).unwrap();
    assert_eq!(y.labels, (1979..=2019).collect::<Vec<_>>());
    let ranges = variation_range(&snap, VariationMode::Intraday, 2000, &[], Weights::default()).unwrap();
    assert!(ranges.iter().all(|e| e.value.abs() < 1e-12));
    let mmm = min_mean_max(&snap, VariationMode::Intrayear, 2016, &[], Weights::default()).unwrap();
    assert!((mmm[0].min - 0.3).abs() < 1e-12 && (mmm[0].max - 0.3).abs() < 1e-12);
}

#[test]
fn variation_range_and_min_mean_max_match_oracle() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    for year in [1979, 1980] {
        for (mode, name) in [(VariationMode::Intrayear, "intrayear"), (VariationMode::Intraday, "intraday")] {
            let got = variation_range(&snap, mode, year, &[], Weights::default()).unwrap();
            let mut expected: Vec<(f64, String)> = ["DE", "DK", "FR"]
                .iter()
                .map(|c| (o.range(&[c], year, name), c.to_string()))
                .chain(std::iter::once((o.range(&["DE", "DK", "FR"], year, name), "28C".to_string())))
                .collect();
            expected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            assert_eq!(got.iter().map(|e| e.label.clone()).collect::<Vec<_>>(), expected.iter().map(|e| e.1.clone()).collect::<Vec<_>>());
            close(&got.iter().map(|e| e.value).collect::<Vec<_>>(), &expected.iter().map(|e| e.0).collect::<Vec<_>>());

            let mmm = min_mean_max(&snap, mode, year, &[code("FR"), code("DK")], Weights::default()).unwrap();
            for e in &mmm {
                let p = o.year_profile(&[&e.label], 1.0, year, name);
                assert!((e.min - p.iter().cloned().fold(f64::MAX, f64::min)).abs() <= TOL);
                assert!((e.max - p.iter().cloned().fold(f64::MIN, f64::max)).abs() <= TOL);
                assert!((e.mean - oracle::mean(&p)).abs() <= TOL);
                assert!(e.min <= e.mean && e.mean <= e.max);
            }
            assert!(mmm[0].mean <= mmm[1].mean);
        }
    }
}

#[test]
fn min_mean_max_month_pattern() {
    let snap = snapshot_from_fn::<f64>(&["FR"], 1979, 1979, |_, _, ts| ts.month() as f64 / 20.0);
    let m = min_mean_max(&snap, VariationMode::Intrayear, 1979, &[], Weights::default()).unwrap();
    let direct: Vec<f64> = (1..=12).map(|m| m as f64 / 20.0).collect();
    assert!((m[0].min - 0.05).abs() < 1e-12);
    assert!((m[0].max - 0.6).abs() < 1e-12);
    assert!((m[0].mean - oracle::mean(&direct)).abs() < 1e-12);
    let r = variation_range(&snap, VariationMode::Intrayear, 1979, &[], Weights::default()).unwrap();
    assert!((r[0].value - 0.55).abs() < 1e-12);
}

#[test]
fn cumulative_matches_oracle_and_adds_region_curve() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    let grid = default_threshold_grid::<f64>();
    let r = region(&snap, &["FR", "DK"]);
    let c = cumulative_days_above(&snap, &r, 1979, &grid, Weights::default()).unwrap();
    assert_eq!(c.curves.iter().map(|c| c.label.as_str()).collect::<Vec<_>>(), vec!["FR", "DK", "FR+DK"]);
    close(&c.curves[0].values, &o.cumulative(&["FR"], 1979, &grid));
    close(&c.curves[1].values, &o.cumulative(&["DK"], 1979, &grid));
    close(&c.curves[2].values, &o.cumulative(&["FR", "DK"], 1979, &grid));
    assert!(c.curves[2].aggregate);
}

#[test]
fn yoy_matches_oracle_and_flags_depressed_summer() {
    let snap = SynthConfig::fixture().build::<f64>();
    let o = Oracle::new(&snap);
    let y = yoy_monthly(&snap, &region(&snap, &["DE", "FR"]), 1980, Weights::default()).unwrap();
    close(&y.focus, &o.year_profile(&["DE", "FR"], 1.0, 1980, "intrayear"));
    close(&y.background[0].1, &o.year_profile(&["DE", "FR"], 1.0, 1979, "intrayear"));

    let snap = snapshot_from_fn::<f64>(&["FR"], 1979, 2019, |_, i, ts| {
        let base = 0.25 + 0.001 * ((i / 24) % 17) as f64;
        if ts.year() == 1995 && ts.month() == 7 { base - 0.15 } else { base }
    });
    let y = yoy_monthly(&snap, &Region::all(&snap), 1995, Weights::default()).unwrap();
    assert_eq!(y.focus.len(), 12);
    assert_eq!(y.background.len(), 40);
    assert!(y.background.iter().all(|(_, v)| y.focus[6] < v[6]));
}

#[test]
fn singleton_region_is_the_country() {
    let snap = SynthConfig::fixture().build::<f64>();
    let w = Weights::default();
    let fr = region(&snap, &["FR"]);
    let via_region = yoy_monthly(&snap, &fr, 1979, w).unwrap();
    let via_series = region_series(&snap, &fr, w).unwrap();
    assert_eq!(via_series.values, blended_series(&snap, code("FR"), w).unwrap().values);
    let p = temporal_profile(&snap, &[fr.clone()], TimeFilter::full(Resolution::Monthly, &snap), w).unwrap();
    let choropleth = spatial_stat(&snap, Stat::Mean, TimeFilter::full(Resolution::Monthly, &snap), w).unwrap();
    assert_eq!(remap_core::scalar::mean(&p.series[0].values).unwrap(), choropleth[&code("FR")]);
    assert_eq!(via_region.label, "FR");
}

#[test]
fn empty_filter_and_unknown_region() {
    let snap = SynthConfig::fixture().build::<f64>();
    let f = TimeFilter::new(Resolution::Yearly, 1990, 1995).unwrap();
    assert_eq!(temporal_profile(&snap, &[Region::all(&snap)], f, Weights::default()), Err(Error::EmptyFilter));
    assert!(matches!(Region::new(&snap, &[code("GB")]), Err(Error::UnknownCountry(_))));
}

fn random_snapshot(seed: u64) -> Snapshot {
    SynthConfig::fixture().with_years(1979, 1979).with_seed(seed).build()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn blend_identity_and_region_bounds(seed in any::<u64>(), wind in 0.0f64..=1.0) {
        let snap = random_snapshot(seed);
        let fr = blended_series(&snap, code("FR"), Weights::wind_only()).unwrap();
        let raw = &snap.wind()[&code("FR")].values;
        prop_assert!(fr.values.iter().zip(raw).all(|(a, b)| a.to_bits() == b.to_bits()));

        let w = Weights::from_wind(wind).unwrap();
        let all = region_series(&snap, &Region::all(&snap), w).unwrap();
        let members: Vec<_> = snap.countries().map(|c| blended_series(&snap, c, w).unwrap()).collect();
        for (i, v) in all.values.iter().enumerate() {
            let lo = members.iter().map(|m| m.values[i]).fold(f64::MAX, f64::min);
            let hi = members.iter().map(|m| m.values[i]).fold(f64::MIN, f64::max);
            prop_assert!(*v >= lo - 1e-15 && *v <= hi + 1e-15);
            prop_assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn cumulative_is_monotone_on_random_snapshots(seed in any::<u64>()) {
        let snap = random_snapshot(seed);
        let grid = default_threshold_grid::<f64>();
        let c = cumulative_days_above(&snap, &Region::all(&snap), 1979, &grid, Weights::default()).unwrap();
        for curve in &c.curves {
            prop_assert!(curve.values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(curve.values.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(*curve.values.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn ranges_and_stds_are_non_negative(seed in any::<u64>()) {
        let snap = random_snapshot(seed);
        for mode in [VariationMode::Intrayear, VariationMode::Intraday] {
            prop_assert!(variation_range(&snap, mode, 1979, &[], Weights::default()).unwrap().iter().all(|e| e.value >= 0.0));
            for e in min_mean_max(&snap, mode, 1979, &[], Weights::default()).unwrap() {
                prop_assert!(e.min <= e.mean && e.mean <= e.max);
            }
        }
        let s = spatial_stat(&snap, Stat::Std, TimeFilter::full(Resolution::Hourly, &snap), Weights::default()).unwrap();
        prop_assert!(s.values().all(|v| *v >= 0.0));
    }
}

proptest! {
    #[test]
    fn fraction_above_is_monotone(daily in prop::collection::vec(0.0f64..=1.0, 1..400)) {
        let grid = default_threshold_grid::<f64>();
        let f = fraction_above(&daily, &grid);
        prop_assert!(f.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(f[100], 0.0);
    }
}

#[test]
fn f32_snapshot_agrees_with_f64() {
    let s64 = SynthConfig::fixture().build::<f64>();
    let s32 = SynthConfig::fixture().build::<f32>();
    let f = TimeFilter::full(Resolution::Monthly, &s64);
    let a = spatial_stat(&s64, Stat::Mean, f, Weights::default()).unwrap();
    let b = spatial_stat(&s32, Stat::Mean, f, MixWeights::<f32>::default()).unwrap();
    for (c, v) in &a {
        assert!((*v - b[c] as f64).abs() < 1e-5);
    }
}
