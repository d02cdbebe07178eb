//! Reference body-weight tables (mean and standard deviation per age, sex
//! and environment) and the weight band of a measured subject.
//!
//! Tables are loaded from CSV with the exact header
//! `age,sex,environment,mean_kg,sd_kg`. Lookups are exact-key; a missing cell
//! means the band is unavailable, never interpolated.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anthro::Sex;

/// Seed table shipped with the crate.
pub const SEED_CSV: &str = include_str!("../data/reference_seed.csv");

pub const REFERENCE_HEADER: [&str; 5] = ["age", "sex", "environment", "mean_kg", "sd_kg"];

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: duplicate reference cell ({key})")]
    Duplicate { line: u64, key: ReferenceKey },
    #[error("line {line}: invalid reference entry ({key}): {message}")]
    Invalid {
        line: u64,
        key: ReferenceKey,
        message: String,
    },
    #[error("reference I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    Urban,
    Rural,
}

impl Environment {
    pub fn code(self) -> &'static str {
        match self {
            Environment::Urban => "urban",
            Environment::Rural => "rural",
        }
    }

    pub fn parse(input: &str) -> Option<Environment> {
        match input.trim().to_lowercase().as_str() {
            "urban" => Some(Environment::Urban),
            "rural" => Some(Environment::Rural),
            _ => None,
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReferenceKey {
    pub age: u32,
    pub sex: Sex,
    pub environment: Environment,
}

impl fmt::Display for ReferenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.age, self.sex, self.environment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub age: u32,
    pub sex: Sex,
    pub environment: Environment,
    pub mean: f64,
    pub sd: f64,
}

impl ReferenceEntry {
    pub fn new(
        age: u32,
        sex: Sex,
        environment: Environment,
        mean: f64,
        sd: f64,
    ) -> Result<Self, String> {
        let entry = ReferenceEntry {
            age,
            sex,
            environment,
            mean,
            sd,
        };
        entry.validate()?;
        Ok(entry)
    }

    fn validate(&self) -> Result<(), String> {
        if !self.mean.is_finite() || self.mean <= 0.0 {
            return Err(format!("mean_kg must be positive, got {}", self.mean));
        }
        if !self.sd.is_finite() || self.sd <= 0.0 {
            return Err(format!("sd_kg must be positive, got {}", self.sd));
        }
        if self.mean - 2.0 * self.sd <= 0.0 {
            return Err("mean_kg - 2*sd_kg must be positive".to_string());
        }
        Ok(())
    }

    pub fn key(&self) -> ReferenceKey {
        ReferenceKey {
            age: self.age,
            sex: self.sex,
            environment: self.environment,
        }
    }

    /// The four cut values `[M-2d, M-d, M+d, M+2d]`.
    pub fn thresholds(&self) -> [f64; 4] {
        [
            self.mean - 2.0 * self.sd,
            self.mean - self.sd,
            self.mean + self.sd,
            self.mean + 2.0 * self.sd,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandLevel {
    VeryLow,
    Low,
    Normal,
    High,
    VeryHigh,
}

impl BandLevel {
    pub fn label(self) -> &'static str {
        match self {
            BandLevel::VeryLow => "Very low",
            BandLevel::Low => "Low",
            BandLevel::Normal => "Normal",
            BandLevel::High => "High",
            BandLevel::VeryHigh => "Very high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBand {
    pub level: BandLevel,
    pub thresholds: [f64; 4],
}

/// Bins `weight` against the entry. Normal is the closed interval
/// `[M-d, M+d]`; Low is `[M-2d, M-d)` and High is `(M+d, M+2d]`.
pub fn weight_band(weight: f64, entry: &ReferenceEntry) -> WeightBand {
    let thresholds = entry.thresholds();
    let [very_low, low, high, very_high] = thresholds;
    let level = if weight < very_low {
        BandLevel::VeryLow
    } else if weight < low {
        BandLevel::Low
    } else if weight <= high {
        BandLevel::Normal
    } else if weight <= very_high {
        BandLevel::High
    } else {
        BandLevel::VeryHigh
    };
    WeightBand { level, thresholds }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceTable {
    entries: BTreeMap<ReferenceKey, ReferenceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReferenceRow {
    age: u32,
    sex: String,
    environment: String,
    mean_kg: f64,
    sd_kg: f64,
}

impl ReferenceTable {
    pub fn seed() -> Self {
        Self::load(SEED_CSV.as_bytes()).expect("shipped seed table is valid")
    }

    pub fn load<R: Read>(source: R) -> Result<Self, ReferenceError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);

        let header_line = 1;
        let headers = match reader.headers() {
            Ok(h) if h.is_empty() => return Ok(Self::default()),
            Ok(h) => {
                if h.iter().ne(REFERENCE_HEADER) {
                    return Err(ReferenceError::Parse {
                        line: header_line,
                        message: format!(
                            "expected header `{}`, found `{}`",
                            REFERENCE_HEADER.join(","),
                            h.iter().collect::<Vec<_>>().join(",")
                        ),
                    });
                }
                h.clone()
            }
            Err(e) => return Err(csv_error(e, header_line)),
        };

        let mut table = Self::default();
        for result in reader.records() {
            let record = result.map_err(|e| csv_error(e, header_line))?;
            let line = record.position().map_or(0, |p| p.line());
            let row: ReferenceRow = record
                .deserialize(Some(&headers))
                .map_err(|e| csv_error(e, line))?;
            let sex = match row.sex.as_str() {
                "M" => Sex::Male,
                "F" => Sex::Female,
                other => {
                    return Err(ReferenceError::Parse {
                        line,
                        message: format!("sex must be M or F, found `{other}`"),
                    })
                }
            };
            let environment = match row.environment.as_str() {
                "urban" => Environment::Urban,
                "rural" => Environment::Rural,
                other => {
                    return Err(ReferenceError::Parse {
                        line,
                        message: format!("environment must be urban or rural, found `{other}`"),
                    })
                }
            };
            let key = ReferenceKey {
                age: row.age,
                sex,
                environment,
            };
            let entry = ReferenceEntry::new(row.age, sex, environment, row.mean_kg, row.sd_kg)
                .map_err(|message| ReferenceError::Invalid { line, key, message })?;
            if table.entries.insert(key, entry).is_some() {
                return Err(ReferenceError::Duplicate { line, key });
            }
        }
        Ok(table)
    }

    pub fn write<W: Write>(&self, sink: W) -> Result<(), ReferenceError> {
        let mut writer = csv::Writer::from_writer(sink);
        writer
            .write_record(REFERENCE_HEADER)
            .map_err(|e| csv_error(e, 0))?;
        for entry in self.entries.values() {
            writer
                .write_record([
                    entry.age.to_string(),
                    entry.sex.code().to_string(),
                    entry.environment.code().to_string(),
                    crate::display::exact(entry.mean),
                    crate::display::exact(entry.sd),
                ])
                .map_err(|e| csv_error(e, 0))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn lookup(&self, age: u32, sex: Sex, environment: Environment) -> Option<&ReferenceEntry> {
        self.entries.get(&ReferenceKey {
            age,
            sex,
            environment,
        })
    }

    /// Weight band for a measurement, or `None` when the table has no cell
    /// for the subject.
    pub fn band_for(
        &self,
        age: u32,
        sex: Sex,
        environment: Environment,
        weight: f64,
    ) -> Option<WeightBand> {
        self.lookup(age, sex, environment)
            .map(|entry| weight_band(weight, entry))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ReferenceEntry> {
        self.entries.values()
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> ReferenceError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ReferenceError::Io(io),
        kind => ReferenceError::Parse {
            line,
            message: csv_kind_message(kind),
        },
    }
}

fn csv_kind_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(i) => format!(
                "column `{}`: {}",
                REFERENCE_HEADER.get(i as usize).unwrap_or(&"?"),
                err.kind()
            ),
            None => err.kind().to_string(),
        },
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        other => format!("{other:?}"),
    }
}
