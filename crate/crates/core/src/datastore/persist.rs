//! Snapshot cache file.
//!
//! ```text
//! "REMAPSNAP"  9 bytes magic
//! version      u8
//! length       u64 LE, payload byte count
//! payload      columnar body, all integers and floats little-endian
//! digest       32 bytes SHA-256 of the payload
//! ```
//!
//! Payload: scalar width (u8), calendar (start as i64 unix seconds, u64
//! hours), then wind series, solar series, climate indices, prices and
//! provenance. Every collection is prefixed with a u32 count, every vector
//! with a u64 length, every string with a u32 byte length.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use sha2::{Digest, Sha256};

use super::{
    Cadence, CountryCode, DatasetSnapshot, HourlySeries, IndexSeries, PriceSeries, Provenance,
    SnapshotParts, Source, SourceDigest,
};
use crate::calendar::CalendarIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 9] = b"REMAPSNAP";
pub const VERSION: u8 = 1;
const DIGEST_LEN: usize = 32;
const HEADER_LEN: usize = MAGIC.len() + 1 + 8;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn code(&mut self, c: CountryCode) {
        self.0.extend_from_slice(&c.bytes());
    }
    fn dates(&mut self, dates: &[NaiveDate]) {
        self.u64(dates.len());
        for d in dates {
            self.0.extend_from_slice(&chrono::Datelike::num_days_from_ce(d).to_le_bytes());
        }
    }
    fn values<T: Scalar>(&mut self, values: &[T]) {
        self.u64(values.len());
        self.0.reserve(values.len() * T::WIDTH as usize);
        for &v in values {
            v.write_le(&mut self.0);
        }
    }
    fn hourly<T: Scalar>(&mut self, map: &BTreeMap<CountryCode, HourlySeries<T>>) {
        self.u32(map.len());
        for (code, series) in map {
            self.code(*code);
            self.values(&series.values);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptSnapshot(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt("payload ends early"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4")) as usize)
    }
    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8"));
        usize::try_from(v).map_err(|_| corrupt("length overflow"))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8")))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }
    fn code(&mut self) -> Result<CountryCode> {
        let b = self.take(2)?;
        CountryCode::new(std::str::from_utf8(b).map_err(|_| corrupt("bad country code"))?)
            .map_err(|_| corrupt("bad country code"))
    }
    fn dates(&mut self) -> Result<Vec<NaiveDate>> {
        let n = self.u64()?;
        let raw = self.take(n.checked_mul(4).ok_or_else(|| corrupt("length overflow"))?)?;
        raw.chunks_exact(4)
            .map(|c| {
                NaiveDate::from_num_days_from_ce_opt(i32::from_le_bytes(c.try_into().expect("4")))
                    .ok_or_else(|| corrupt("bad date"))
            })
            .collect()
    }
    fn values<T: Scalar>(&mut self) -> Result<Vec<T>> {
        let n = self.u64()?;
        let width = T::WIDTH as usize;
        let raw = self.take(n.checked_mul(width).ok_or_else(|| corrupt("length overflow"))?)?;
        Ok(raw.chunks_exact(width).map(T::read_le).collect())
    }
    fn hourly<T: Scalar>(
        &mut self,
        source: Source,
        calendar: CalendarIndex,
    ) -> Result<BTreeMap<CountryCode, HourlySeries<T>>> {
        let n = self.u32()?;
        (0..n)
            .map(|_| {
                let country = self.code()?;
                let values = self.values()?;
                Ok((
                    country,
                    HourlySeries {
                        country,
                        source,
                        calendar,
                        values,
                    },
                ))
            })
            .collect()
    }
}

pub fn snapshot_to_bytes<T: Scalar>(snapshot: &DatasetSnapshot<T>) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(T::WIDTH);
    let cal = snapshot.calendar();
    w.i64(cal.start().and_utc().timestamp());
    w.u64(cal.len());
    w.hourly(snapshot.wind());
    w.hourly(snapshot.solar());

    w.u32(snapshot.indices().len());
    for index in snapshot.indices().values() {
        w.str(&index.name);
        w.u8(match index.cadence {
            Cadence::Daily => 0,
            Cadence::Monthly => 1,
        });
        w.dates(&index.dates);
        w.values(&index.values);
    }
    w.u32(snapshot.prices().len());
    for prices in snapshot.prices().values() {
        w.code(prices.country);
        w.dates(&prices.dates);
        w.values(&prices.values);
    }
    let prov = snapshot.provenance();
    w.u32(prov.sources.len());
    for s in &prov.sources {
        w.str(&s.path);
        w.str(&s.sha256);
    }
    w.str(&prov.ingested_at);

    let payload = w.0;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    out
}

pub fn snapshot_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<DatasetSnapshot<T>> {
    if bytes.len() < MAGIC.len() + 1 {
        return Err(if MAGIC.starts_with(bytes) || bytes.starts_with(MAGIC) {
            corrupt("file ends inside the header")
        } else {
            Error::VersionMismatch("missing REMAPSNAP magic".into())
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::VersionMismatch("missing REMAPSNAP magic".into()));
    }
    let version = bytes[MAGIC.len()];
    if version != VERSION {
        return Err(Error::VersionMismatch(format!(
            "file version {version}, supported version {VERSION}"
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("file ends inside the header"));
    }
    let len = u64::from_le_bytes(bytes[MAGIC.len() + 1..HEADER_LEN].try_into().expect("8"));
    let expected = (len as usize)
        .checked_add(HEADER_LEN + DIGEST_LEN)
        .ok_or_else(|| corrupt("length overflow"))?;
    if bytes.len() != expected {
        return Err(corrupt(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + len as usize];
    if Sha256::digest(payload).as_slice() != &bytes[HEADER_LEN + len as usize..] {
        return Err(corrupt("digest mismatch"));
    }

    let mut r = Reader { buf: payload, pos: 0 };
    let width = r.u8()?;
    if width != T::WIDTH {
        return Err(Error::VersionMismatch(format!(
            "snapshot stores {width}-byte scalars, reader expects {}",
            T::WIDTH
        )));
    }
    let start = DateTime::from_timestamp(r.i64()?, 0)
        .ok_or_else(|| corrupt("bad calendar start"))?
        .naive_utc();
    let calendar = CalendarIndex::new(start, r.u64()?).map_err(|e| corrupt(e.to_string()))?;
    let mut parts = SnapshotParts {
        wind: r.hourly(Source::Wind, calendar)?,
        solar: r.hourly(Source::Solar, calendar)?,
        ..SnapshotParts::default()
    };
    for _ in 0..r.u32()? {
        let name = r.str()?;
        let cadence = match r.u8()? {
            0 => Cadence::Daily,
            1 => Cadence::Monthly,
            other => return Err(corrupt(format!("unknown cadence tag {other}"))),
        };
        let dates = r.dates()?;
        let values = r.values()?;
        parts.indices.insert(
            name.clone(),
            IndexSeries {
                name,
                cadence,
                dates,
                values,
            },
        );
    }
    for _ in 0..r.u32()? {
        let country = r.code()?;
        let dates = r.dates()?;
        let values = r.values()?;
        parts.prices.insert(
            country,
            PriceSeries {
                country,
                dates,
                values,
            },
        );
    }
    let mut sources = Vec::new();
    for _ in 0..r.u32()? {
        sources.push(SourceDigest {
            path: r.str()?,
            sha256: r.str()?,
        });
    }
    parts.provenance = Provenance {
        sources,
        ingested_at: r.str()?,
    };
    if r.pos != payload.len() {
        return Err(corrupt("trailing bytes after payload"));
    }
    DatasetSnapshot::new(parts).map_err(|e| corrupt(e.to_string()))
}

/// Writes through a temporary sibling and renames, so readers never observe a
/// half-written file.
pub fn save_snapshot<T: Scalar>(snapshot: &DatasetSnapshot<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, snapshot_to_bytes(snapshot)).map_err(|e| Error::io(path, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot<T: Scalar>(path: impl AsRef<Path>) -> Result<DatasetSnapshot<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    snapshot_from_bytes(&bytes)
}
