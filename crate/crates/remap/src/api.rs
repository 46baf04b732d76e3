//! Routing and parameter handling for the `/api/v1` endpoints. The HTTP
//! service and `remap query` both answer through [`dispatch`].

use std::collections::BTreeMap;

use remap_core::analytics::{
    self, LabeledValues, Region, Resolution, Stat, TimeFilter, VariationMode, ALL_COUNTRIES_LABEL,
};
use remap_core::datastore::CountryCode;
use remap_core::lwp::{
    self, CorrelationBasis, CorrelationCell, DurationCounts, DEFAULT_ALPHA, DEFAULT_D_MAX, DEFAULT_THRESHOLD,
};
use remap_core::{Correlation, Error, Snapshot, Threshold, Weights};
use serde_json::{json, Map, Value};

use crate::json::{self, num, nums};

pub const API_PREFIX: &str = "/api/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

/// Service-wide parameter defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defaults {
    pub threshold: f64,
    pub alpha: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl Defaults {
    pub fn validate(&self) -> Result<(), String> {
        Threshold::new(self.threshold).map_err(|e| e.to_string())?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: u16, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn bad_param(message: impl Into<String>) -> Self {
        Self::new(400, "BadParam", message)
    }

    pub fn into_response(self) -> Response {
        Response {
            status: self.status,
            body: json::error(&self.code, &self.message),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = if e.is_data_error() { 500 } else { 400 };
        Self::new(status, e.code(), e.to_string())
    }
}

/// 503 answer for requests that arrive before a snapshot is loaded.
pub fn not_ready() -> Response {
    ApiError::new(503, "NotReady", "snapshot is still loading").into_response()
}

type Handler = fn(&mut Params<'_>) -> Result<Value, ApiError>;

const ROUTES: &[(&str, &[&str], Handler)] = &[
    ("meta", &[], meta),
    ("health", &[], health),
    ("choropleth", &["stat", "resolution", "from", "to", "wind_weight"], choropleth),
    ("series", &["countries", "resolution", "from", "to", "wind_weight"], series),
    ("variation-range", &["mode", "year", "countries", "wind_weight"], variation_range),
    ("min-mean-max", &["mode", "year", "countries", "wind_weight"], min_mean_max),
    ("cumulative", &["countries", "year", "thresholds", "wind_weight"], cumulative),
    ("yoy", &["countries", "year", "wind_weight"], yoy),
    ("lwp/events", &["countries", "year", "threshold", "wind_weight", "d_max"], lwp_events),
    ("lwp/calendar", &["countries", "year", "threshold", "wind_weight"], lwp_calendar),
    ("correlation", &["country", "basis", "alpha", "threshold", "wind_weight"], correlation),
    ("overlay/index", &["name", "country", "year", "threshold", "wind_weight"], overlay_index),
    ("overlay/price", &["country", "year", "threshold", "wind_weight"], overlay_price),
];

/// Every endpoint path with the query keys it accepts.
pub fn routes() -> impl Iterator<Item = (String, &'static [&'static str])> {
    ROUTES.iter().map(|(name, keys, _)| (format!("{API_PREFIX}/{name}"), *keys))
}

/// Answers one request target (`/api/v1/...?...`) against a snapshot.
pub fn dispatch(snapshot: &Snapshot, defaults: &Defaults, method: &str, target: &str) -> Response {
    match route(snapshot, defaults, method, target) {
        Ok(body) => Response { status: 200, body },
        Err(e) => e.into_response(),
    }
}

fn route(snapshot: &Snapshot, defaults: &Defaults, method: &str, target: &str) -> Result<String, ApiError> {
    let (path, query) = target.split_once('?').unwrap_or((target, ""));
    let unknown = || ApiError::new(404, "UnknownRoute", format!("no endpoint at `{path}`"));
    let name = path
        .strip_prefix(API_PREFIX)
        .and_then(|rest| rest.strip_prefix('/'))
        .ok_or_else(unknown)?;
    let (_, allowed, handler) = ROUTES
        .iter()
        .find(|(n, ..)| *n == name.trim_end_matches('/'))
        .ok_or_else(unknown)?;
    if method != "GET" {
        return Err(ApiError::new(405, "MethodNotAllowed", format!("{method} is not supported; use GET")));
    }

    let mut raw = BTreeMap::new();
    for (key, value) in form_urlencoded::parse(query.as_bytes()) {
        if !allowed.contains(&key.as_ref()) {
            let mut msg = format!("unknown parameter `{key}` for {path}");
            if !allowed.is_empty() {
                msg.push_str(&format!("; accepted: {}", allowed.join(", ")));
            }
            return Err(ApiError::bad_param(msg));
        }
        if raw.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ApiError::bad_param(format!("parameter `{key}` given more than once")));
        }
    }
    let mut params = Params {
        snapshot,
        defaults: *defaults,
        raw,
        echo: Map::new(),
    };
    let payload = handler(&mut params)?;
    Ok(json::ok(params.echo, payload))
}

/// Query values plus the resolved-parameter echo built while reading them.
struct Params<'a> {
    snapshot: &'a Snapshot,
    defaults: Defaults,
    raw: BTreeMap<String, String>,
    echo: Map<String, Value>,
}

fn parse_number<N: std::str::FromStr>(key: &str, raw: &str, what: &str) -> Result<N, ApiError> {
    raw.trim()
        .parse()
        .map_err(|_| ApiError::bad_param(format!("parameter `{key}` must be {what}, got `{raw}`")))
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, ApiError> {
    let v: f64 = parse_number(key, raw, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ApiError::bad_param(format!("parameter `{key}` must be finite")))
    }
}

impl Params<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, ApiError> {
        self.get(key)
            .ok_or_else(|| ApiError::bad_param(format!("missing required parameter `{key}`")))
    }

    fn echo(&mut self, key: &str, value: impl Into<Value>) {
        self.echo.insert(key.to_string(), value.into());
    }

    /// Comma-separated country list; empty or absent means no selection.
    fn countries(&mut self) -> Result<Vec<CountryCode>, ApiError> {
        let raw = self.get("countries").unwrap_or("").trim();
        let mut out: Vec<CountryCode> = Vec::new();
        if !raw.is_empty() {
            for part in raw.split(',') {
                let code = self.snapshot.country(part.trim())?;
                if out.contains(&code) {
                    return Err(ApiError::bad_param(format!("country {code} listed twice")));
                }
                out.push(code);
            }
        }
        self.echo("countries", out.iter().map(|c| c.to_string()).collect::<Vec<_>>());
        Ok(out)
    }

    fn country(&mut self) -> Result<CountryCode, ApiError> {
        let code = self.snapshot.country(self.required("country")?.trim())?;
        self.echo("country", code.to_string());
        Ok(code)
    }

    /// Defaults to the last fully covered year.
    fn year(&mut self) -> Result<i32, ApiError> {
        let year = match self.get("year") {
            Some(raw) => parse_number("year", raw, "an integer year")?,
            None => {
                let cal = self.snapshot.calendar();
                cal.full_years().map_or(cal.year_span().1, |(_, last)| last)
            }
        };
        self.echo("year", year);
        Ok(year)
    }

    fn weights(&mut self) -> Result<Weights, ApiError> {
        let w = match self.get("wind_weight") {
            Some(raw) => parse_f64("wind_weight", raw)?,
            None => 1.0,
        };
        let weights = Weights::from_wind(w).map_err(|e| ApiError::bad_param(e.to_string()))?;
        self.echo("wind_weight", num(weights.wind()));
        Ok(weights)
    }

    fn threshold(&mut self) -> Result<Threshold, ApiError> {
        let t = match self.get("threshold") {
            Some(raw) => parse_f64("threshold", raw)?,
            None => self.defaults.threshold,
        };
        let threshold = Threshold::new(t).map_err(|e| ApiError::bad_param(e.to_string()))?;
        self.echo("threshold", num(t));
        Ok(threshold)
    }

    fn alpha(&mut self) -> Result<f64, ApiError> {
        let alpha = match self.get("alpha") {
            Some(raw) => parse_f64("alpha", raw)?,
            None => self.defaults.alpha,
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ApiError::bad_param(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        self.echo("alpha", num(alpha));
        Ok(alpha)
    }

    fn choice<V: Copy>(&mut self, key: &str, default: &str, options: &[(&str, V, &str)]) -> Result<V, ApiError> {
        let raw = self.get(key).unwrap_or(default).trim().to_ascii_lowercase();
        let &(_, value, canonical) = options.iter().find(|(name, ..)| *name == raw).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, ..)| *n).collect();
            ApiError::bad_param(format!("parameter `{key}` must be one of {}, got `{raw}`", names.join("|")))
        })?;
        self.echo(key, canonical);
        Ok(value)
    }

    fn resolution(&mut self, default: &str) -> Result<Resolution, ApiError> {
        self.choice(
            "resolution",
            default,
            &[
                ("hourly", Resolution::Hourly, "hourly"),
                ("intraday", Resolution::Hourly, "hourly"),
                ("monthly", Resolution::Monthly, "monthly"),
                ("intrayear", Resolution::Monthly, "monthly"),
                ("yearly", Resolution::Yearly, "yearly"),
            ],
        )
    }

    fn mode(&mut self) -> Result<VariationMode, ApiError> {
        self.choice(
            "mode",
            "intrayear",
            &[
                ("intrayear", VariationMode::Intrayear, "intrayear"),
                ("intraday", VariationMode::Intraday, "intraday"),
            ],
        )
    }

    fn filter(&mut self, resolution: Resolution) -> Result<TimeFilter, ApiError> {
        let full = TimeFilter::full(resolution, self.snapshot);
        let from = match self.get("from") {
            Some(raw) => parse_number("from", raw, "an integer")?,
            None => full.from,
        };
        let to = match self.get("to") {
            Some(raw) => parse_number("to", raw, "an integer")?,
            None => full.to,
        };
        self.echo("from", from);
        self.echo("to", to);
        Ok(TimeFilter::new(resolution, from, to)?)
    }

    fn thresholds(&mut self) -> Result<Vec<f64>, ApiError> {
        let grid = match self.get("thresholds") {
            None => analytics::default_threshold_grid(),
            Some(raw) => raw
                .split(',')
                .map(|t| parse_f64("thresholds", t))
                .collect::<Result<Vec<_>, _>>()?,
        };
        self.echo("thresholds", nums(&grid));
        Ok(grid)
    }

    fn d_max(&mut self) -> Result<usize, ApiError> {
        let d = match self.get("d_max") {
            Some(raw) => parse_number("d_max", raw, "a positive integer")?,
            None => DEFAULT_D_MAX,
        };
        if d == 0 {
            return Err(ApiError::bad_param("parameter `d_max` must be at least 1"));
        }
        self.echo("d_max", d);
        Ok(d)
    }

    /// The selected countries as one region, or every country when none is selected.
    fn region(&mut self) -> Result<(Region, bool), ApiError> {
        let countries = self.countries()?;
        if countries.is_empty() {
            Ok((Region::all(self.snapshot), true))
        } else {
            Ok((Region::new(self.snapshot, &countries)?, false))
        }
    }
}

fn labeled(v: &LabeledValues<f64>) -> Value {
    json!({ "label": v.label, "aggregate": v.aggregate, "values": nums(&v.values) })
}

fn correlation_json(entry: &Correlation) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("r".into(), num(entry.r));
    m.insert("p".into(), num(entry.p));
    m.insert("n".into(), entry.n.into());
    m
}

fn undefined_correlation(reason: String) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("r".into(), Value::Null);
    m.insert("p".into(), Value::Null);
    m.insert("n".into(), Value::Null);
    m.insert("reason".into(), reason.into());
    m
}

fn meta(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let s = p.snapshot;
    let cal = s.calendar();
    let codes = |keys: Vec<&CountryCode>| keys.into_iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let indices: Vec<Value> = s
        .indices()
        .values()
        .map(|ix| {
            json!({
                "name": ix.name,
                "cadence": ix.cadence.as_str(),
                "first": ix.dates.first().map(|d| d.to_string()),
                "last": ix.dates.last().map(|d| d.to_string()),
                "points": ix.values.len(),
            })
        })
        .collect();
    Ok(json!({
        "countries": codes(s.wind().keys().collect()),
        "solar_countries": codes(s.solar().keys().collect()),
        "price_countries": codes(s.prices().keys().collect()),
        "all_countries_label": ALL_COUNTRIES_LABEL,
        "first_day": cal.first_day().to_string(),
        "last_day": cal.last_day().to_string(),
        "days": cal.day_count(),
        "hours": cal.len(),
        "full_years": cal.full_years().map(|(first, last)| json!({ "first": first, "last": last })),
        "indices": indices,
        "defaults": {
            "threshold": num(p.defaults.threshold),
            "alpha": num(p.defaults.alpha),
            "wind_weight": num(1.0),
            "d_max": DEFAULT_D_MAX,
        },
        "endpoints": routes().map(|(path, _)| path).collect::<Vec<_>>(),
    }))
}

fn health(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let prov = p.snapshot.provenance();
    let sources: Vec<Value> = prov
        .sources
        .iter()
        .map(|d| json!({ "path": d.path, "sha256": d.sha256 }))
        .collect();
    Ok(json!({
        "ready": true,
        "country_count": p.snapshot.country_count(),
        "provenance": { "ingested_at": prov.ingested_at, "sources": sources },
    }))
}

fn choropleth(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let stat = p.choice("stat", "mean", &[("mean", Stat::Mean, "mean"), ("std", Stat::Std, "std")])?;
    let resolution = p.resolution("yearly")?;
    let filter = p.filter(resolution)?;
    let weights = p.weights()?;
    let values = analytics::spatial_stat(p.snapshot, stat, filter, weights)?;
    let values: Map<String, Value> = values.into_iter().map(|(c, v)| (c.to_string(), num(v))).collect();
    Ok(json!({ "values": values }))
}

fn series(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let countries = p.countries()?;
    let resolution = p.resolution("monthly")?;
    let filter = p.filter(resolution)?;
    let weights = p.weights()?;
    let mut regions = countries
        .iter()
        .map(|&c| Region::new(p.snapshot, &[c]))
        .collect::<Result<Vec<_>, _>>()?;
    regions.push(Region::all(p.snapshot));
    let profile = analytics::temporal_profile(p.snapshot, &regions, filter, weights)?;
    Ok(json!({
        "labels": profile.labels,
        "series": profile.series.iter().map(labeled).collect::<Vec<_>>(),
    }))
}

fn variation_range(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let mode = p.mode()?;
    let year = p.year()?;
    let countries = p.countries()?;
    let weights = p.weights()?;
    let entries = analytics::variation_range(p.snapshot, mode, year, &countries, weights)?;
    let entries: Vec<Value> = entries
        .iter()
        .map(|e| json!({ "label": e.label, "value": num(e.value), "aggregate": e.aggregate }))
        .collect();
    Ok(json!({ "entries": entries }))
}

fn min_mean_max(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let mode = p.mode()?;
    let year = p.year()?;
    let countries = p.countries()?;
    let weights = p.weights()?;
    let entries = analytics::min_mean_max(p.snapshot, mode, year, &countries, weights)?;
    let entries: Vec<Value> = entries
        .iter()
        .map(|e| json!({ "label": e.label, "min": num(e.min), "mean": num(e.mean), "max": num(e.max) }))
        .collect();
    Ok(json!({ "entries": entries }))
}

fn cumulative(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let (region, fallback) = p.region()?;
    let year = p.year()?;
    let thresholds = p.thresholds()?;
    let weights = p.weights()?;
    let mut result = analytics::cumulative_days_above(p.snapshot, &region, year, &thresholds, weights)?;
    if fallback {
        result.curves.retain(|c| c.label == ALL_COUNTRIES_LABEL);
    }
    Ok(json!({
        "thresholds": nums(&result.thresholds),
        "curves": result.curves.iter().map(labeled).collect::<Vec<_>>(),
    }))
}

fn yoy(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let (region, _) = p.region()?;
    let year = p.year()?;
    let weights = p.weights()?;
    let r = analytics::yoy_monthly(p.snapshot, &region, year, weights)?;
    let background: Vec<Value> = r
        .background
        .iter()
        .map(|(y, values)| json!({ "year": y, "values": nums(values) }))
        .collect();
    Ok(json!({
        "label": r.label,
        "focus_year": r.focus_year,
        "focus": nums(&r.focus),
        "background": background,
    }))
}

fn duration_json(d: &DurationCounts) -> Value {
    let events: Vec<Value> = d
        .events
        .iter()
        .map(|e| json!({ "start": e.start.to_string(), "duration_days": e.duration_days }))
        .collect();
    json!({
        "label": d.label,
        "aggregate": d.aggregate,
        "counts": d.counts,
        "lwp_days": d.events.iter().map(|e| e.duration_days).sum::<usize>(),
        "events": events,
    })
}

fn lwp_events(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let countries = p.countries()?;
    let year = p.year()?;
    let threshold = p.threshold()?;
    let weights = p.weights()?;
    let d_max = p.d_max()?;
    let fallback = countries.is_empty();
    let members: Vec<CountryCode> = if fallback { p.snapshot.countries().collect() } else { countries };
    let mut summary = lwp::lwp_summary(p.snapshot, &members, year, threshold, weights, d_max)?;
    let mut series: Vec<&DurationCounts> = Vec::new();
    if fallback {
        summary.region.label = ALL_COUNTRIES_LABEL.to_string();
        summary.region.aggregate = true;
    } else {
        series.extend(&summary.per_country);
    }
    if fallback || members.len() > 1 {
        series.push(&summary.region);
    }
    Ok(json!({
        "d_max": summary.d_max,
        "durations": (1..=summary.d_max).collect::<Vec<_>>(),
        "series": series.into_iter().map(duration_json).collect::<Vec<_>>(),
    }))
}

fn lwp_calendar(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let (region, fallback) = p.region()?;
    let year = p.year()?;
    let threshold = p.threshold()?;
    let weights = p.weights()?;
    let mut mask = lwp::lwp_calendar(p.snapshot, region.countries(), year, threshold, weights)?;
    if fallback {
        mask.label = ALL_COUNTRIES_LABEL.to_string();
    }
    Ok(json!({
        "label": mask.label,
        "year": mask.year,
        "first_day": format!("{year:04}-01-01"),
        "lwp_days": mask.flags.iter().filter(|&&f| f).count(),
        "flags": mask.flags,
    }))
}

fn correlation(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let focus = p.country()?;
    let basis = p.choice(
        "basis",
        "lwp",
        &[("lwp", CorrelationBasis::LwpDays, "lwp"), ("cf", CorrelationBasis::CapacityFactor, "cf")],
    )?;
    let alpha = p.alpha()?;
    let threshold = p.threshold()?;
    let weights = p.weights()?;
    let map = lwp::correlation_map(p.snapshot, focus, basis, alpha, threshold, weights)?;
    let cells: Map<String, Value> = map
        .into_iter()
        .map(|(code, cell)| {
            let (state, mut body) = match cell {
                CorrelationCell::Significant(e) => ("significant", correlation_json(&e)),
                CorrelationCell::Suppressed(e) => ("suppressed", correlation_json(&e)),
                CorrelationCell::Undefined(reason) => ("undefined", undefined_correlation(reason)),
            };
            body.insert("state".into(), state.into());
            (code.to_string(), Value::Object(body))
        })
        .collect();
    Ok(json!({ "focus": focus.to_string(), "cells": cells }))
}

fn overlay_index(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let name = p.required("name")?.trim().to_string();
    p.echo("name", name.as_str());
    let country = p.country()?;
    let year = p.year()?;
    let threshold = p.threshold()?;
    let weights = p.weights()?;
    let points = lwp::index_overlay(p.snapshot, &name, country, year, threshold, weights)?;
    let cadence = p.snapshot.indices()[&name].cadence.as_str();
    let points: Vec<Value> = points
        .iter()
        .map(|pt| json!({ "date": pt.date.to_string(), "value": num(pt.value), "is_lwp": pt.is_lwp }))
        .collect();
    Ok(json!({ "cadence": cadence, "points": points }))
}

fn overlay_price(p: &mut Params<'_>) -> Result<Value, ApiError> {
    let country = p.country()?;
    let year = p.year()?;
    let threshold = p.threshold()?;
    let weights = p.weights()?;
    let overlay = lwp::price_overlay(p.snapshot, country, year, threshold, weights)?;
    let points: Vec<Value> = overlay
        .points
        .iter()
        .map(|pt| {
            json!({
                "date": pt.date.to_string(),
                "price": num(pt.price),
                "capacity_factor": num(pt.capacity_factor),
                "is_lwp": pt.is_lwp,
            })
        })
        .collect();
    let correlation = match &overlay.correlation {
        Ok(e) => correlation_json(e),
        Err(e) => undefined_correlation(e.to_string()),
    };
    Ok(json!({ "points": points, "correlation": correlation }))
}
