//! Romanian personal numeric code (CNP), used as the subject identifier.
//!
//! Layout: `S YY MM DD JJ NNN C`. The first digit carries sex and century,
//! digits 2-7 the birth date, the last digit a control digit computed with
//! the weight vector `279146358279` (sum mod 11, a remainder of 10 maps
//! to 1).
//!
//! An incorrect control digit is recorded in [`Cnp::checksum_ok`] rather than
//! rejected; shape and date errors are hard failures.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::anthro::Sex;

pub const CNP_LEN: usize = 13;

const CONTROL_WEIGHTS: [u32; 12] = [2, 7, 9, 1, 4, 6, 3, 5, 8, 2, 7, 9];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnpError {
    #[error("CNP must be exactly 13 digits, got {0} characters")]
    Length(usize),
    #[error("CNP must contain only digits")]
    NonDigit,
    #[error("CNP first digit {0} does not encode sex and century")]
    SexDigit(u8),
    #[error("CNP encodes an impossible birth date ({year:04}-{month:02}-{day:02})")]
    Date { year: i32, month: u32, day: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cnp {
    raw: String,
    sex: Sex,
    birthdate: NaiveDate,
    checksum_ok: bool,
}

impl Cnp {
    pub fn parse(raw: &str) -> Result<Cnp, CnpError> {
        let raw = raw.trim();
        let len = raw.chars().count();
        if len != CNP_LEN {
            return Err(CnpError::Length(len));
        }
        if !raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CnpError::NonDigit);
        }
        let digits: Vec<u32> = raw.bytes().map(|b| u32::from(b - b'0')).collect();

        let (sex, century) = match digits[0] {
            1 => (Sex::Male, 1900),
            2 => (Sex::Female, 1900),
            3 => (Sex::Male, 1800),
            4 => (Sex::Female, 1800),
            5 => (Sex::Male, 2000),
            6 => (Sex::Female, 2000),
            // Foreign residents; the code does not carry the century.
            7 => (Sex::Male, 1900),
            8 => (Sex::Female, 1900),
            d => return Err(CnpError::SexDigit(d as u8)),
        };
        let pair = |i: usize| digits[i] * 10 + digits[i + 1];
        let year = century + pair(1) as i32;
        let (month, day) = (pair(3), pair(5));
        let birthdate =
            NaiveDate::from_ymd_opt(year, month, day).ok_or(CnpError::Date { year, month, day })?;

        Ok(Cnp {
            raw: raw.to_string(),
            sex,
            birthdate,
            checksum_ok: control_digit(&digits[..12]) == digits[12],
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn sex(&self) -> Sex {
        self.sex
    }

    pub fn birthdate(&self) -> NaiveDate {
        self.birthdate
    }

    pub fn checksum_ok(&self) -> bool {
        self.checksum_ok
    }

    /// Whole years completed on `date`, or `None` when `date` precedes birth.
    pub fn age_on(&self, date: NaiveDate) -> Option<u32> {
        date.years_since(self.birthdate)
    }
}

/// Expected control digit for the first twelve digits.
pub fn control_digit(first_twelve: &[u32]) -> u32 {
    let sum: u32 = first_twelve
        .iter()
        .zip(CONTROL_WEIGHTS)
        .map(|(d, w)| d * w)
        .sum();
    match sum % 11 {
        10 => 1,
        r => r,
    }
}

impl fmt::Display for Cnp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for Cnp {
    type Err = CnpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Cnp::parse(s)
    }
}

impl Serialize for Cnp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for Cnp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Cnp::parse(&raw).map_err(serde::de::Error::custom)
    }
}
