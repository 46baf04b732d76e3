//! Writes a snapshot back out in the ingestion CSV formats.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{Cadence, CountryCode, DatasetSnapshot, HourlySeries, IndexSource, IngestSources};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e))
}

fn wide<T: Scalar>(path: &Path, series: &BTreeMap<CountryCode, HourlySeries<T>>) -> Result<()> {
    let Some(first) = series.values().next() else {
        return Ok(());
    };
    let mut w = writer(path)?;
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.keys().map(|c| c.to_string()));
    w.write_record(&header).map_err(|e| Error::io(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..first.calendar.len() {
        row.clear();
        row.push(first.calendar.timestamp(i).format("%Y-%m-%dT%H:%M:%SZ").to_string());
        row.extend(series.values().map(|s| s.values[i].as_f64().to_string()));
        w.write_record(&row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `wind.csv`, `solar.csv`, `prices.csv` and `indices/<NAME>.csv` into
/// `dir`, skipping absent parts, and returns the matching ingestion sources.
pub fn export_csv<T: Scalar>(snapshot: &DatasetSnapshot<T>, dir: impl AsRef<Path>) -> Result<IngestSources> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sources = IngestSources {
        wind: dir.join("wind.csv"),
        ..IngestSources::default()
    };
    wide(&sources.wind, snapshot.wind())?;

    if !snapshot.solar().is_empty() {
        let path = dir.join("solar.csv");
        wide(&path, snapshot.solar())?;
        sources.solar = Some(path);
    }

    if !snapshot.prices().is_empty() {
        let path = dir.join("prices.csv");
        let mut w = writer(&path)?;
        w.write_record(["date", "country", "price_eur_mwh"]).map_err(|e| Error::io(&path, e))?;
        for (code, p) in snapshot.prices() {
            for (d, v) in p.dates.iter().zip(&p.values) {
                w.write_record([d.to_string(), code.to_string(), v.as_f64().to_string()])
                    .map_err(|e| Error::io(&path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        sources.prices = Some(path);
    }

    if !snapshot.indices().is_empty() {
        let idx_dir: PathBuf = dir.join("indices");
        std::fs::create_dir_all(&idx_dir).map_err(|e| Error::io(&idx_dir, e))?;
        for (name, series) in snapshot.indices() {
            let path = idx_dir.join(format!("{name}.csv"));
            let mut w = writer(&path)?;
            w.write_record(["date", "value"]).map_err(|e| Error::io(&path, e))?;
            for (d, v) in series.dates.iter().zip(&series.values) {
                let date = match series.cadence {
                    Cadence::Daily => d.format("%Y-%m-%d").to_string(),
                    Cadence::Monthly => d.format("%Y-%m").to_string(),
                };
                w.write_record([date, v.as_f64().to_string()]).map_err(|e| Error::io(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            sources.indices.push(IndexSource {
                path,
                name: name.clone(),
                cadence: series.cadence,
            });
        }
    }
    Ok(sources)
}
