//! CSV ingestion.
//!
//! Formats:
//! - capacity factors, wide: `timestamp,AT,BE,...` with one row per UTC hour
//!   (`1979-01-01T00:00Z,0.312,0.287,...`);
//! - climate index: `date,value` (daily) or `year-month,value` (monthly);
//! - prices, long: `date,country,price_eur_mwh`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, Timelike, Utc};
use sha2::{Digest, Sha256};

use super::{
    Cadence, CountryCode, DatasetSnapshot, HourlySeries, IndexSeries, PriceSeries, Provenance,
    SnapshotParts, Source, SourceDigest,
};
use crate::calendar::CalendarIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

struct CsvFile {
    name: String,
    reader: csv::Reader<File>,
}

impl CsvFile {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        Ok(Self {
            name: path.display().to_string(),
            reader,
        })
    }

    fn malformed(&self, line: u64, column: &str, reason: impl Into<String>) -> Error {
        Error::MalformedRow {
            file: self.name.clone(),
            line,
            column: column.to_string(),
            reason: reason.into(),
        }
    }

    fn headers(&mut self) -> Result<Vec<String>> {
        match self.reader.headers() {
            Ok(headers) => Ok(headers.iter().map(str::to_string).collect()),
            Err(e) => Err(self.malformed(1, "", e.to_string())),
        }
    }

    /// Next record with its 1-based line number.
    fn next_record(&mut self, record: &mut csv::StringRecord) -> Result<Option<u64>> {
        match self.reader.read_record(record) {
            Ok(false) => Ok(None),
            Ok(true) => Ok(Some(record.position().map_or(0, |p| p.line()))),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(self.malformed(line, "", e.to_string()))
            }
        }
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc).naive_utc());
    }
    let naive = s.strip_suffix('Z').unwrap_or(s);
    ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(naive, fmt).ok())
}

fn parse_day(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

fn parse_month(s: &str) -> Option<NaiveDate> {
    let (y, m) = s.split_once('-')?;
    if y.len() != 4 || m.len() != 2 {
        return None;
    }
    NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, 1)
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a wide capacity-factor CSV into one series per country column.
pub fn ingest_capacity_factors<T: Scalar>(
    path: impl AsRef<Path>,
    source: Source,
) -> Result<BTreeMap<CountryCode, HourlySeries<T>>> {
    let mut csv = CsvFile::open(path.as_ref())?;
    let headers = csv.headers()?;
    match headers.first() {
        Some(h) if h.eq_ignore_ascii_case("timestamp") => {}
        _ => return Err(csv.malformed(1, "timestamp", "first column must be `timestamp`")),
    }
    let mut codes = Vec::with_capacity(headers.len() - 1);
    for h in &headers[1..] {
        let code = CountryCode::new(h).map_err(|_| csv.malformed(1, h, "not a country code"))?;
        if codes.contains(&code) {
            return Err(csv.malformed(1, h, "duplicate country column"));
        }
        codes.push(code);
    }
    if codes.is_empty() {
        return Err(csv.malformed(1, "", "no country columns"));
    }

    let mut columns: Vec<Vec<T>> = vec![Vec::new(); codes.len()];
    let mut start: Option<NaiveDateTime> = None;
    let mut previous: Option<NaiveDateTime> = None;
    let mut record = csv::StringRecord::new();
    while let Some(line) = csv.next_record(&mut record)? {
        let raw = &record[0];
        let ts = parse_timestamp(raw)
            .ok_or_else(|| csv.malformed(line, "timestamp", format!("bad timestamp `{raw}`")))?;
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(csv.malformed(line, "timestamp", format!("`{raw}` is not on the hour")));
        }
        if let Some(prev) = previous {
            let expected = prev + Duration::hours(1);
            let first = start.expect("set with previous");
            if ts < first {
                return Err(csv.malformed(line, "timestamp", format!("`{raw}` precedes the first row")));
            }
            if ts < expected {
                return Err(Error::DuplicateTimestamp {
                    file: csv.name.clone(),
                    line,
                    column: "timestamp".into(),
                    timestamp: raw.to_string(),
                });
            }
            if ts > expected {
                return Err(Error::GapInCalendar {
                    file: csv.name.clone(),
                    line,
                    column: "timestamp".into(),
                    expected: expected.format("%Y-%m-%dT%H:%MZ").to_string(),
                    found: raw.to_string(),
                });
            }
        } else {
            start = Some(ts);
        }
        previous = Some(ts);

        for (i, code) in codes.iter().enumerate() {
            let field = &record[i + 1];
            let v = parse_finite(field).ok_or_else(|| {
                csv.malformed(line, code.as_str(), format!("bad capacity factor `{field}`"))
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    file: csv.name.clone(),
                    line,
                    column: code.to_string(),
                    value: v,
                });
            }
            columns[i].push(T::of(v));
        }
    }
    let start = start.ok_or_else(|| csv.malformed(1, "", "no data rows"))?;
    let calendar = CalendarIndex::new(start, columns[0].len())?;
    codes
        .into_iter()
        .zip(columns)
        .map(|(code, values)| Ok((code, HourlySeries::new(code, source, calendar, values)?)))
        .collect()
}

/// Reads a two-column climate-index CSV with the declared cadence.
pub fn ingest_climate_index<T: Scalar>(
    path: impl AsRef<Path>,
    name: &str,
    cadence: Cadence,
) -> Result<IndexSeries<T>> {
    let mut csv = CsvFile::open(path.as_ref())?;
    let headers = csv.headers()?;
    if headers.len() != 2 {
        return Err(csv.malformed(1, "", "expected two columns: date,value"));
    }
    let date_col = headers[0].clone();
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    while let Some(line) = csv.next_record(&mut record)? {
        let raw = &record[0];
        let date = match cadence {
            Cadence::Daily => parse_day(raw),
            Cadence::Monthly => parse_month(raw),
        }
        .ok_or_else(|| {
            csv.malformed(line, &date_col, format!("bad {} date `{raw}`", cadence.as_str()))
        })?;
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(Error::NonMonotoneDates {
                    file: csv.name.clone(),
                    line,
                    column: date_col,
                    date: raw.to_string(),
                    previous: prev.to_string(),
                });
            }
        }
        let v = parse_finite(&record[1])
            .ok_or_else(|| csv.malformed(line, &headers[1], format!("bad value `{}`", &record[1])))?;
        dates.push(date);
        values.push(T::of(v));
    }
    Ok(IndexSeries {
        name: name.to_string(),
        cadence,
        dates,
        values,
    })
}

/// Cadence of an index file judged from its first data row
/// (`YYYY-MM-DD` daily, `YYYY-MM` monthly).
pub fn detect_cadence(path: impl AsRef<Path>) -> Result<Cadence> {
    let mut csv = CsvFile::open(path.as_ref())?;
    let headers = csv.headers()?;
    let mut record = csv::StringRecord::new();
    let line = csv
        .next_record(&mut record)?
        .ok_or_else(|| csv.malformed(1, "", "no data rows"))?;
    let raw = &record[0];
    if parse_day(raw).is_some() {
        Ok(Cadence::Daily)
    } else if parse_month(raw).is_some() {
        Ok(Cadence::Monthly)
    } else {
        let column = headers.first().map_or("", String::as_str);
        Err(csv.malformed(line, column, format!("bad date `{raw}`")))
    }
}

/// Reads a long-format price CSV into one sorted daily series per country.
pub fn ingest_prices<T: Scalar>(path: impl AsRef<Path>) -> Result<BTreeMap<CountryCode, PriceSeries<T>>> {
    let mut csv = CsvFile::open(path.as_ref())?;
    let headers = csv.headers()?;
    if headers.len() != 3 {
        return Err(csv.malformed(1, "", "expected three columns: date,country,price_eur_mwh"));
    }
    let mut seen: HashMap<(CountryCode, NaiveDate), u64> = HashMap::new();
    let mut rows: BTreeMap<CountryCode, Vec<(NaiveDate, T)>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while let Some(line) = csv.next_record(&mut record)? {
        let date = parse_day(&record[0])
            .ok_or_else(|| csv.malformed(line, &headers[0], format!("bad date `{}`", &record[0])))?;
        let country = CountryCode::new(&record[1])
            .map_err(|_| csv.malformed(line, &headers[1], format!("bad country `{}`", &record[1])))?;
        let price = parse_finite(&record[2])
            .ok_or_else(|| csv.malformed(line, &headers[2], format!("bad price `{}`", &record[2])))?;
        if seen.insert((country, date), line).is_some() {
            return Err(Error::DuplicateDayForCountry {
                file: csv.name.clone(),
                line,
                column: headers[0].clone(),
                date: date.to_string(),
                country: country.to_string(),
            });
        }
        rows.entry(country).or_default().push((date, T::of(price)));
    }
    Ok(rows
        .into_iter()
        .map(|(country, mut days)| {
            days.sort_by_key(|(d, _)| *d);
            let (dates, values) = days.into_iter().unzip();
            (
                country,
                PriceSeries {
                    country,
                    dates,
                    values,
                },
            )
        })
        .collect())
}

pub fn file_digest(path: impl AsRef<Path>) -> Result<SourceDigest> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(SourceDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSource {
    pub path: PathBuf,
    pub name: String,
    pub cadence: Cadence,
}

/// Every input file of one ingestion run.
#[derive(Debug, Clone, Default)]
pub struct IngestSources {
    pub wind: PathBuf,
    pub solar: Option<PathBuf>,
    pub indices: Vec<IndexSource>,
    pub prices: Option<PathBuf>,
}

/// Lists `*.csv` files of a directory as climate indices named after the file
/// stem, with cadence detected from the first row. Sorted by name.
pub fn index_files_in(dir: impl AsRef<Path>) -> Result<Vec<IndexSource>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::io(&path, "file name is not UTF-8"))?
            .to_string();
        let cadence = detect_cadence(&path)?;
        out.push(IndexSource { path, name, cadence });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Ingests every source and assembles a validated snapshot.
pub fn build_snapshot<T: Scalar>(sources: &IngestSources) -> Result<DatasetSnapshot<T>> {
    let mut parts = SnapshotParts {
        wind: ingest_capacity_factors(&sources.wind, Source::Wind)?,
        ..SnapshotParts::default()
    };
    let mut digests = vec![file_digest(&sources.wind)?];
    if let Some(solar) = &sources.solar {
        parts.solar = ingest_capacity_factors(solar, Source::Solar)?;
        digests.push(file_digest(solar)?);
    }
    for index in &sources.indices {
        let series = ingest_climate_index(&index.path, &index.name, index.cadence)?;
        parts.indices.insert(index.name.clone(), series);
        digests.push(file_digest(&index.path)?);
    }
    if let Some(prices) = &sources.prices {
        parts.prices = ingest_prices(prices)?;
        digests.push(file_digest(prices)?);
    }
    parts.provenance = Provenance {
        sources: digests,
        ingested_at: Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    DatasetSnapshot::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Datelike;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn hourly_csv(hours: usize, skip: Option<usize>, value: &str) -> String {
        let start = NaiveDate::from_ymd_opt(1979, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let mut s = String::from("timestamp,FR,DE\n");
        for h in (0..hours).filter(|h| Some(*h) != skip) {
            let ts = start + Duration::hours(h as i64);
            s.push_str(&format!("{},{value},{value}\n", ts.format("%Y-%m-%dT%H:%MZ")));
        }
        s
    }

    #[test]
    fn constant_two_country_file() {
        let f = write(&hourly_csv(48, None, "0.5"));
        let map = ingest_capacity_factors::<f64>(f.path(), Source::Wind).unwrap();
        assert_eq!(map.len(), 2);
        for s in map.values() {
            assert_eq!(s.values.len(), 48);
            assert!(s.values.iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn missing_hour_is_a_gap_at_its_line() {
        let f = write(&hourly_csv(48, Some(5), "0.5"));
        match ingest_capacity_factors::<f64>(f.path(), Source::Wind) {
            Err(Error::GapInCalendar { line, column, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(column, "timestamp");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_and_malformed_values() {
        let f = write(&hourly_csv(3, None, "1.2"));
        assert!(matches!(
            ingest_capacity_factors::<f64>(f.path(), Source::Wind),
            Err(Error::OutOfRange { line: 2, .. })
        ));
        let f = write("timestamp,FR\n1979-01-01T00:00Z,abc\n");
        assert!(matches!(
            ingest_capacity_factors::<f64>(f.path(), Source::Wind),
            Err(Error::MalformedRow { line: 2, ref column, .. }) if column == "FR"
        ));
        let f = write("timestamp,FR\n1979-01-01 nope,0.1\n");
        assert!(matches!(
            ingest_capacity_factors::<f64>(f.path(), Source::Wind),
            Err(Error::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn repeated_hour_is_duplicate() {
        let f = write("timestamp,FR\n1979-01-01T00:00Z,0.1\n1979-01-01T01:00Z,0.1\n1979-01-01T01:00Z,0.1\n");
        assert!(matches!(
            ingest_capacity_factors::<f64>(f.path(), Source::Wind),
            Err(Error::DuplicateTimestamp { line: 4, .. })
        ));
    }

    #[test]
    fn accepts_rfc3339_offsets() {
        let f = write("timestamp,FR\n1979-01-01T01:00:00+01:00,0.1\n1979-01-01T01:00:00Z,0.2\n");
        let map = ingest_capacity_factors::<f32>(f.path(), Source::Solar).unwrap();
        let s = &map[&CountryCode::new("FR").unwrap()];
        assert_eq!(s.calendar.start().to_string(), "1979-01-01 00:00:00");
        assert_eq!(s.values, vec![0.1f32, 0.2]);
    }

    #[test]
    fn climate_index_cadences() {
        let mut daily = String::from("date,value\n");
        let mut day = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        while day.year_ce().1 == 2018 {
            daily.push_str(&format!("{day},0.5\n"));
            day = day.succ_opt().unwrap();
        }
        let f = write(&daily);
        assert_eq!(detect_cadence(f.path()).unwrap(), Cadence::Daily);
        let nao = ingest_climate_index::<f64>(f.path(), "NAO", Cadence::Daily).unwrap();
        assert_eq!(nao.values.len(), 365);

        let monthly: String = std::iter::once("year-month,value\n".to_string())
            .chain((1..=12).map(|m| format!("2018-{m:02},{m}\n")))
            .collect();
        let f = write(&monthly);
        assert_eq!(detect_cadence(f.path()).unwrap(), Cadence::Monthly);
        let nino = ingest_climate_index::<f64>(f.path(), "NINO", Cadence::Monthly).unwrap();
        assert_eq!(nino.values.len(), 12);
        assert_eq!(nino.cadence, Cadence::Monthly);
        assert_eq!(nino.dates[3], NaiveDate::from_ymd_opt(2018, 4, 1).unwrap());

        let f = write("date,value\n2018-01-02,1\n2018-01-01,2\n");
        assert!(matches!(
            ingest_climate_index::<f64>(f.path(), "NAO", Cadence::Daily),
            Err(Error::NonMonotoneDates { line: 3, .. })
        ));
    }

    #[test]
    fn prices_group_sort_and_reject_duplicates() {
        let f = write(
            "date,country,price_eur_mwh\n2018-01-02,DE,30\n2018-01-01,DE,-5.0\n2018-01-01,FR,40\n\
             2018-01-03,DE,31\n2018-01-02,FR,41\n2018-01-03,FR,42\n",
        );
        let map = ingest_prices::<f64>(f.path()).unwrap();
        assert_eq!(map.len(), 2);
        let de = &map[&CountryCode::new("DE").unwrap()];
        assert_eq!(de.values, vec![-5.0, 30.0, 31.0]);
        assert_eq!(de.dates.len(), 3);

        let f = write("date,country,price_eur_mwh\n2018-01-01,DE,30\n2018-01-01,DE,31\n");
        assert!(matches!(
            ingest_prices::<f64>(f.path()),
            Err(Error::DuplicateDayForCountry { line: 3, .. })
        ));
    }

}
