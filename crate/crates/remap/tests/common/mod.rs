//! Fixture, request samples and a small structural checker for API payloads.

#![allow(dead_code)]

use remap::{dispatch, Defaults};
use remap_core::synth::SynthConfig;
use remap_core::Snapshot;
use serde_json::Value;

pub fn fixture() -> Snapshot {
    SynthConfig::fixture().build()
}

/// Runs a GET through the dispatcher and parses the body.
pub fn get(snapshot: &Snapshot, path: &str) -> (u16, Value) {
    let r = dispatch(snapshot, &Defaults::default(), "GET", path);
    let body = serde_json::from_str(&r.body).unwrap_or_else(|e| panic!("{path}: body is not JSON: {e}"));
    (r.status, body)
}

pub fn ok_payload(snapshot: &Snapshot, path: &str) -> Value {
    let (status, body) = get(snapshot, path);
    assert_eq!(status, 200, "{path}: {body}");
    body["payload"].clone()
}

/// At least one request per endpoint, covering defaults and every option.
pub fn sample_paths() -> Vec<&'static str> {
    vec![
        "/api/v1/meta",
        "/api/v1/health",
        "/api/v1/choropleth",
        "/api/v1/choropleth?stat=std&resolution=hourly&from=6&to=18",
        "/api/v1/choropleth?stat=mean&resolution=monthly&from=6&to=8&wind_weight=0.5",
        "/api/v1/series?countries=&resolution=intrayear",
        "/api/v1/series?countries=FR,DK&resolution=intraday&wind_weight=0.7",
        "/api/v1/series?countries=DE&resolution=yearly&from=1980&to=1980",
        "/api/v1/variation-range?mode=intrayear&year=1979",
        "/api/v1/variation-range?mode=intraday&year=1980&countries=FR,DE",
        "/api/v1/min-mean-max?mode=intraday&year=1979",
        "/api/v1/min-mean-max?mode=intrayear&year=1980&countries=DK",
        "/api/v1/cumulative?countries=FR,DK&year=1979",
        "/api/v1/cumulative?countries=&year=1980&thresholds=0,0.1,0.25,0.5,1",
        "/api/v1/yoy?countries=FR&year=1980",
        "/api/v1/yoy?countries=FR,DE&year=1979&wind_weight=0.8",
        "/api/v1/lwp/events?countries=FR,DE&year=1979",
        "/api/v1/lwp/events?countries=DK&year=1980&threshold=0.15&d_max=3",
        "/api/v1/lwp/calendar?countries=FR,DE&year=1980",
        "/api/v1/lwp/calendar?year=1979&threshold=0.2",
        "/api/v1/correlation?country=FR",
        "/api/v1/correlation?country=DE&basis=cf&alpha=0.01",
        "/api/v1/overlay/index?name=NAO&country=FR&year=1979",
        "/api/v1/overlay/index?name=NINO&country=DK&year=1980&threshold=0.2",
        "/api/v1/overlay/price?country=DE&year=1979",
        "/api/v1/overlay/price?country=FR&year=1980&wind_weight=0.6",
    ]
}

#[derive(Debug, Clone)]
pub enum Shape {
    Num,
    Int,
    Bool,
    Str,
    Null,
    Nullable(Box<Shape>),
    Arr(Box<Shape>),
    /// Object with arbitrary keys and uniform values.
    Map(Box<Shape>),
    /// Object with exactly the required keys plus any of the optional ones.
    Obj(Vec<(&'static str, Shape)>, Vec<(&'static str, Shape)>),
}

use Shape::*;

fn arr(s: Shape) -> Shape {
    Arr(Box::new(s))
}

fn obj(fields: Vec<(&'static str, Shape)>) -> Shape {
    Obj(fields, vec![])
}

fn nullable(s: Shape) -> Shape {
    Nullable(Box::new(s))
}

pub fn check(value: &Value, shape: &Shape, at: &str) -> Result<(), String> {
    let fail = |what: &str| Err(format!("{at}: expected {what}, got {value}"));
    match shape {
        Num => match value.as_f64() {
            Some(v) if v.is_finite() => Ok(()),
            _ => fail("number"),
        },
        Int => {
            if value.is_i64() || value.is_u64() {
                Ok(())
            } else {
                fail("integer")
            }
        }
        Bool => if value.is_boolean() { Ok(()) } else { fail("boolean") },
        Str => if value.is_string() { Ok(()) } else { fail("string") },
        Null => if value.is_null() { Ok(()) } else { fail("null") },
        Nullable(inner) => {
            if value.is_null() {
                Ok(())
            } else {
                check(value, inner, at)
            }
        }
        Arr(inner) => {
            let Some(items) = value.as_array() else { return fail("array") };
            items.iter().enumerate().try_for_each(|(i, v)| check(v, inner, &format!("{at}[{i}]")))
        }
        Map(inner) => {
            let Some(m) = value.as_object() else { return fail("object") };
            m.iter().try_for_each(|(k, v)| check(v, inner, &format!("{at}.{k}")))
        }
        Obj(required, optional) => {
            let Some(m) = value.as_object() else { return fail("object") };
            for (k, s) in required {
                let v = m.get(*k).ok_or_else(|| format!("{at}: missing key `{k}`"))?;
                check(v, s, &format!("{at}.{k}"))?;
            }
            for (k, v) in m {
                if required.iter().any(|(r, _)| r == k) {
                    continue;
                }
                let (_, s) = optional
                    .iter()
                    .find(|(o, _)| o == k)
                    .ok_or_else(|| format!("{at}: unexpected key `{k}`"))?;
                check(v, s, &format!("{at}.{k}"))?;
            }
            Ok(())
        }
    }
}

fn labeled() -> Shape {
    obj(vec![("label", Str), ("aggregate", Bool), ("values", arr(Num))])
}

fn correlation() -> Shape {
    Obj(
        vec![("r", nullable(Num)), ("p", nullable(Num)), ("n", nullable(Int))],
        vec![("reason", Str), ("state", Str)],
    )
}

/// Documented payload shape of an endpoint.
pub fn payload_shape(endpoint: &str) -> Shape {
    match endpoint {
        "meta" => obj(vec![
            ("countries", arr(Str)),
            ("solar_countries", arr(Str)),
            ("price_countries", arr(Str)),
            ("all_countries_label", Str),
            ("first_day", Str),
            ("last_day", Str),
            ("days", Int),
            ("hours", Int),
            ("full_years", nullable(obj(vec![("first", Int), ("last", Int)]))),
            (
                "indices",
                arr(obj(vec![
                    ("name", Str),
                    ("cadence", Str),
                    ("first", nullable(Str)),
                    ("last", nullable(Str)),
                    ("points", Int),
                ])),
            ),
            (
                "defaults",
                obj(vec![("threshold", Num), ("alpha", Num), ("wind_weight", Num), ("d_max", Int)]),
            ),
            ("endpoints", arr(Str)),
        ]),
        "health" => obj(vec![
            ("ready", Bool),
            ("country_count", Int),
            (
                "provenance",
                obj(vec![
                    ("ingested_at", Str),
                    ("sources", arr(obj(vec![("path", Str), ("sha256", Str)]))),
                ]),
            ),
        ]),
        "choropleth" => obj(vec![("values", Map(Box::new(Num)))]),
        "series" => obj(vec![("labels", arr(Int)), ("series", arr(labeled()))]),
        "variation-range" => obj(vec![(
            "entries",
            arr(obj(vec![("label", Str), ("value", Num), ("aggregate", Bool)])),
        )]),
        "min-mean-max" => obj(vec![(
            "entries",
            arr(obj(vec![("label", Str), ("min", Num), ("mean", Num), ("max", Num)])),
        )]),
        "cumulative" => obj(vec![("thresholds", arr(Num)), ("curves", arr(labeled()))]),
        "yoy" => obj(vec![
            ("label", Str),
            ("focus_year", Int),
            ("focus", arr(Num)),
            ("background", arr(obj(vec![("year", Int), ("values", arr(Num))]))),
        ]),
        "lwp/events" => obj(vec![
            ("d_max", Int),
            ("durations", arr(Int)),
            (
                "series",
                arr(obj(vec![
                    ("label", Str),
                    ("aggregate", Bool),
                    ("counts", arr(Int)),
                    ("lwp_days", Int),
                    ("events", arr(obj(vec![("start", Str), ("duration_days", Int)]))),
                ])),
            ),
        ]),
        "lwp/calendar" => obj(vec![
            ("label", Str),
            ("year", Int),
            ("first_day", Str),
            ("lwp_days", Int),
            ("flags", arr(Bool)),
        ]),
        "correlation" => obj(vec![("focus", Str), ("cells", Map(Box::new(correlation())))]),
        "overlay/index" => obj(vec![
            ("cadence", Str),
            ("points", arr(obj(vec![("date", Str), ("value", Num), ("is_lwp", Bool)]))),
        ]),
        "overlay/price" => obj(vec![
            (
                "points",
                arr(obj(vec![("date", Str), ("price", Num), ("capacity_factor", Num), ("is_lwp", Bool)])),
            ),
            ("correlation", correlation()),
        ]),
        other => panic!("no shape for `{other}`"),
    }
}

pub fn endpoint_of(path: &str) -> &str {
    let p = path.split('?').next().unwrap();
    p.strip_prefix("/api/v1/").unwrap_or(p)
}

/// Envelope plus payload shape, and the semantic rules the shapes cannot express.
pub fn validate(path: &str, body: &Value) -> Result<(), String> {
    let m =body.as_object().ok_or("body is not an object")?;
    let mut keys: Vec<&String> = m.keys().collect();
    keys.sort();
    if keys != ["params", "payload", "status"] {
        return Err(format!("{path}: envelope keys {keys:?}"));
    }
    if body["status"] != "ok" || !body["params"].is_object() {
        return Err(format!("{path}: bad envelope {body}"));
    }
    let payload = &body["payload"];
    check(payload, &payload_shape(endpoint_of(path)), "payload")?;
    if endpoint_of(path) == "correlation" {
        for (k, cell) in payload["cells"].as_object().unwrap() {
            let state = cell["state"].as_str().ok_or(format!("cell {k} has no state"))?;
            let defined = cell["r"].is_number() && cell["p"].is_number() && cell["n"].is_number();
            match state {
                "significant" | "suppressed" if defined && cell.get("reason").is_none() => {}
                "undefined" if cell["r"].is_null() && cell["reason"].is_string() => {}
                _ => return Err(format!("{path}: inconsistent cell {k}: {cell}")),
            }
        }
    }
    Ok(())
}
