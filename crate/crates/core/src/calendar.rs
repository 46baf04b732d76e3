//! Contiguous hourly UTC calendar.
//!
//! Timestamps are period-beginning: the value stamped `1979-01-01T05:00Z`
//! covers 05:00 to 06:00 UTC. Days run 00:00..=23:00 UTC.

use std::ops::Range;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: usize = 24;

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_year(year: i32) -> usize {
    if is_leap_year(year) {
        366
    } else {
        365
    }
}

pub fn days_in_month(year: i32, month: u32) -> usize {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => panic!("month {month} out of 1..=12"),
    }
}

/// A strictly contiguous run of `len` hours starting at `start` (UTC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CalendarIndex {
    start: NaiveDateTime,
    len: usize,
}

impl CalendarIndex {
    pub fn new(start: NaiveDateTime, len: usize) -> Result<Self> {
        if start.minute() != 0 || start.second() != 0 || start.nanosecond() != 0 {
            return Err(Error::InvalidSnapshot(format!(
                "calendar start {start} is not on an hour boundary"
            )));
        }
        Ok(Self { start, len })
    }

    /// Calendar covering whole days `first..=last`.
    pub fn from_days(first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidSnapshot(format!("{last} precedes {first}")));
        }
        let days = (last - first).num_days() as usize + 1;
        Self::new(first.and_hms_opt(0, 0, 0).expect("midnight"), days * HOURS_PER_DAY)
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Stamp of hour `i`.
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::hours(i as i64)
    }

    /// Exclusive end stamp.
    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.len)
    }

    pub fn position(&self, ts: NaiveDateTime) -> Option<usize> {
        let offset = (ts - self.start).num_seconds();
        if offset < 0 || offset % 3600 != 0 {
            return None;
        }
        let i = (offset / 3600) as usize;
        (i < self.len).then_some(i)
    }

    /// True when the calendar starts at midnight and covers a whole number of days.
    pub fn is_whole_days(&self) -> bool {
        self.start.hour() == 0 && self.len % HOURS_PER_DAY == 0
    }

    pub fn first_day(&self) -> NaiveDate {
        self.start.date()
    }

    /// Number of whole days; only meaningful when [`Self::is_whole_days`].
    pub fn day_count(&self) -> usize {
        self.len / HOURS_PER_DAY
    }

    pub fn day(&self, d: usize) -> NaiveDate {
        self.first_day() + Duration::days(d as i64)
    }

    pub fn last_day(&self) -> NaiveDate {
        self.timestamp(self.len.saturating_sub(1)).date()
    }

    pub fn day_position(&self, date: NaiveDate) -> Option<usize> {
        let d = (date - self.first_day()).num_days();
        (d >= 0 && (d as usize) < self.day_count()).then_some(d as usize)
    }

    /// Calendar year of the first and last hour.
    pub fn year_span(&self) -> (i32, i32) {
        (self.first_day().year(), self.last_day().year())
    }

    /// Years whose every day lies inside the calendar, as `(first, last)`.
    /// `None` when no year is fully covered.
    pub fn full_years(&self) -> Option<(i32, i32)> {
        if self.is_empty() {
            return None;
        }
        let first_day = self.first_day();
        let last_day = self.last_day();
        let mut first = first_day.year();
        if first_day.ordinal() != 1 || self.start.hour() != 0 {
            first += 1;
        }
        let mut last = last_day.year();
        let last_hour = self.timestamp(self.len - 1);
        if !(last_day.month() == 12 && last_day.day() == 31 && last_hour.hour() == 23) {
            last -= 1;
        }
        (first <= last).then_some((first, last))
    }

    /// Day-index range of a fully covered year.
    pub fn year_days(&self, year: i32) -> Result<Range<usize>> {
        let out_of_range = || {
            let (first, last) = self.full_years().unwrap_or((0, -1));
            Error::YearOutOfRange { year, first, last }
        };
        match self.full_years() {
            Some((first, last)) if (first..=last).contains(&year) => {
                let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(out_of_range)?;
                let start = self.day_position(jan1).ok_or_else(out_of_range)?;
                Ok(start..start + days_in_year(year))
            }
            _ => Err(out_of_range()),
        }
    }

    /// Number of (year, month) slots spanned by the calendar, starting at the
    /// first year's January.
    pub fn month_slots(&self) -> usize {
        let (first, last) = self.year_span();
        (last - first + 1) as usize * 12
    }

    pub fn month_slot(&self, date: NaiveDate) -> usize {
        let (first, _) = self.year_span();
        (date.year() - first) as usize * 12 + date.month0() as usize
    }

    /// Covered day count per month slot.
    pub fn days_per_month_slot(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.month_slots()];
        for d in 0..self.day_count() {
            counts[self.month_slot(self.day(d))] += 1;
        }
        counts
    }
}
