use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const FORMAT: &str = "%Y%m%d%H%M%S";

/// Snapshot time in the archive's 14-digit `YYYYMMDDhhmmss` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(NaiveDateTime);

impl Timestamp {
    pub fn new(at: NaiveDateTime) -> Timestamp {
        Timestamp(at)
    }

    /// Midnight of `date`.
    pub fn at_midnight(date: NaiveDate) -> Timestamp {
        Timestamp(date.and_hms_opt(0, 0, 0).expect("midnight exists"))
    }

    pub fn datetime(&self) -> NaiveDateTime {
        self.0
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date()
    }

    /// Elapsed time from `self` to `later`, in days.
    pub fn days_until(&self, later: Timestamp) -> f64 {
        (later.0 - self.0).num_seconds() as f64 / 86_400.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(FORMAT))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp {0:?}, expected YYYYMMDDhhmmss")]
pub struct TimestampError(pub String);

impl FromStr for Timestamp {
    type Err = TimestampError;

    /// Accepts 4 to 14 digits; missing trailing fields default to their
    /// first value, as in archive URLs.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TimestampError(s.to_owned());
        if !(4..=14).contains(&s.len()) || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut full = s.to_owned();
        let pad = "00000101000000";
        full.push_str(&pad[s.len()..]);
        NaiveDateTime::parse_from_str(&full, FORMAT)
            .map(Timestamp)
            .map_err(|_| bad())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl DateRange {
    pub fn new(from: NaiveDate, to: NaiveDate) -> DateRange {
        DateRange { from, to }
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        (self.from..=self.to).contains(&t.date())
    }
}
