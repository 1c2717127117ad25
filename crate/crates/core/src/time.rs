//! Timestamps and the month convention used for every rate in the toolkit.
//!
//! Instants are Unix seconds (`i64`). A month is a fixed number of days,
//! 30.44 by default (the mean Gregorian month), so durations never depend
//! on calendar boundaries.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DEFAULT_DAYS_PER_MONTH: f64 = 30.44;

/// Length of one month in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonthConvention(f64);

impl Default for MonthConvention {
    fn default() -> Self {
        MonthConvention(DEFAULT_DAYS_PER_MONTH)
    }
}

impl MonthConvention {
    pub fn new(days_per_month: f64) -> Option<Self> {
        (days_per_month.is_finite() && days_per_month > 0.0).then_some(MonthConvention(days_per_month))
    }

    pub fn days_per_month(self) -> f64 {
        self.0
    }

    pub fn seconds_per_month(self) -> f64 {
        self.0 * SECONDS_PER_DAY
    }

    /// Fractional months between two instants. Negative spans clamp to zero.
    pub fn months_between(self, first: i64, last: i64) -> f64 {
        let days = (last - first).max(0) as f64 / SECONDS_PER_DAY;
        days / self.0
    }

    /// Smallest whole-second span that counts as at least `months` months.
    ///
    /// Timestamps have seconds precision, so the inclusive threshold is
    /// compared in integer seconds rather than in rounded fractional months.
    pub fn min_span_seconds(self, months: f64) -> i64 {
        (months * self.seconds_per_month() - 1e-6).ceil() as i64
    }
}

/// Accepted spellings of an instant in input records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampFormat {
    /// RFC 3339 / ISO-8601, with or without offset; a bare date means midnight UTC.
    #[default]
    Iso8601,
    /// Integer seconds since the Unix epoch.
    Unix,
}

impl TimestampFormat {
    pub fn parse(self, raw: &str) -> Option<i64> {
        let raw = raw.trim();
        match self {
            TimestampFormat::Unix => raw.parse::<i64>().ok(),
            TimestampFormat::Iso8601 => parse_iso8601(raw),
        }
    }
}

pub fn parse_iso8601(raw: &str) -> Option<i64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// `YYYY-MM-DDTHH:MM:SSZ`, the form written to every output file.
pub fn format_iso8601(ts: i64) -> String {
    match DateTime::<Utc>::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => ts.to_string(),
    }
}
