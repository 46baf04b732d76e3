//! Definition-level recomputation of every aggregate straight from the hourly
//! record. Shares no code with the engine beyond reading the raw series:
//! days, months and years are found by walking timestamps, means are plain
//! sums, correlation uses the one-pass moment formula.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use remap_core::Snapshot;

pub struct Oracle<'a> {
    pub snap: &'a Snapshot,
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pop_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// One-pass product-moment formula.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    if den <= 1e-300 {
        return None;
    }
    Some(((n * sxy - sx * sy) / den).clamp(-1.0, 1.0))
}

/// Phi coefficient from the 2x2 contingency table of two boolean vectors.
pub fn phi(a: &[bool], b: &[bool]) -> Option<f64> {
    let mut t = [[0f64; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        t[x as usize][y as usize] += 1.0;
    }
    let (n11, n10, n01, n00) = (t[1][1], t[1][0], t[0][1], t[0][0]);
    let den = ((n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00)).sqrt();
    if den == 0.0 {
        return None;
    }
    Some((n11 * n00 - n10 * n01) / den)
}

pub fn events(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..flags.len() {
        if flags[i] && (i == 0 || !flags[i - 1]) {
            let len = flags[i..].iter().take_while(|&&f| f).count();
            out.push((i, len));
        }
    }
    out
}

pub fn counts(events: &[(usize, usize)], d_max: usize) -> Vec<usize> {
    (1..=d_max).map(|d| events.iter().filter(|e| e.1 >= d).count()).collect()
}

impl<'a> Oracle<'a> {
    pub fn new(snap: &'a Snapshot) -> Self {
        Self { snap }
    }

    fn ts(&self, i: usize) -> NaiveDateTime {
        self.snap.calendar().start() + chrono::Duration::hours(i as i64)
    }

    /// Blended, region-averaged hourly values.
    pub fn hourly(&self, countries: &[&str], wind_weight: f64) -> Vec<f64> {
        let n = self.snap.calendar().len();
        let mut out = vec![0.0; n];
        for c in countries {
            let code = c.parse().unwrap();
            let wind = &self.snap.wind()[&code].values;
            let solar = self.snap.solar().get(&code).map(|s| &s.values);
            for i in 0..n {
                let s = if wind_weight < 1.0 { solar.unwrap()[i] } else { 0.0 };
                out[i] += wind_weight * wind[i] + (1.0 - wind_weight) * s;
            }
        }
        out.iter().map(|v| v / countries.len() as f64).collect()
    }

    fn group<K: Ord>(&self, values: &[f64], key: impl Fn(NaiveDateTime) -> Option<K>) -> BTreeMap<K, f64> {
        let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
        for (i, v) in values.iter().enumerate() {
            if let Some(k) = key(self.ts(i)) {
                let e = acc.entry(k).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    pub fn daily(&self, countries: &[&str], wind_weight: f64, year: Option<i32>) -> Vec<f64> {
        let h = self.hourly(countries, wind_weight);
        self.group(&h, |ts| (year.is_none() || Some(ts.year()) == year).then(|| ts.date()))
            .into_values()
            .collect()
    }

    pub fn days_of(&self, year: i32) -> Vec<NaiveDate> {
        NaiveDate::from_ymd_opt(year, 1, 1)
            .unwrap()
            .iter_days()
            .take_while(|d| d.year() == year)
            .collect()
    }

    /// (unit, mean) at hourly / monthly / yearly resolution over the record.
    pub fn unit_means(&self, countries: &[&str], wind_weight: f64, resolution: &str) -> Vec<(i32, f64)> {
        let h = self.hourly(countries, wind_weight);
        let m = match resolution {
            "hourly" => self.group(&h, |ts| Some(ts.hour() as i32)),
            "monthly" => self.group(&h, |ts| Some(ts.month() as i32)),
            "yearly" => self.group(&h, |ts| Some(ts.year())),
            _ => unreachable!(),
        };
        m.into_iter().collect()
    }

    /// Monthly ("intrayear") or hour-of-day ("intraday") means of one year.
    pub fn year_profile(&self, countries: &[&str], wind_weight: f64, year: i32, mode: &str) -> Vec<f64> {
        let h = self.hourly(countries, wind_weight);
        let m = match mode {
            "intrayear" => self.group(&h, |ts| (ts.year() == year).then(|| ts.month())),
            "intraday" => self.group(&h, |ts| (ts.year() == year).then(|| ts.hour())),
            _ => unreachable!(),
        };
        m.into_values().collect()
    }

    pub fn range(&self, countries: &[&str], year: i32, mode: &str) -> f64 {
        let p = self.year_profile(countries, 1.0, year, mode);
        p.iter().cloned().fold(f64::MIN, f64::max) - p.iter().cloned().fold(f64::MAX, f64::min)
    }

    pub fn cumulative(&self, countries: &[&str], year: i32, thresholds: &[f64]) -> Vec<f64> {
        let d = self.daily(countries, 1.0, Some(year));
        thresholds
            .iter()
            .map(|t| d.iter().filter(|&&v| v > *t).count() as f64 / d.len() as f64)
            .collect()
    }

    pub fn lwp_flags(&self, countries: &[&str], year: Option<i32>, threshold: f64) -> Vec<bool> {
        self.daily(countries, 1.0, year).iter().map(|&v| v < threshold).collect()
    }
}
