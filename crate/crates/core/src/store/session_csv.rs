//! Session CSV codec. The same format is used for the on-disk log, export
//! and import.

use std::io::Read;

use chrono::NaiveDate;

use super::{SessionRecord, StoreError};
use crate::anthro::SkinfoldSet;
use crate::cnp::Cnp;
use crate::display;

pub const SESSION_HEADER: [&str; 15] = [
    "cnp",
    "date",
    "age",
    "height_m",
    "weight_kg",
    "chest_mm",
    "midaxillary_mm",
    "triceps_mm",
    "subscapular_mm",
    "abdomen_mm",
    "suprailiac_mm",
    "thigh_mm",
    "bmi",
    "bd",
    "pat_percent",
];

/// Largest accepted gap between a stored derived value and its recomputation:
/// half a unit in the last displayed place, plus float slack.
const BMI_SLACK: f64 = 0.005 + 1e-9;
const BD_SLACK: f64 = 0.0005 + 1e-9;
const PAT_PERCENT_SLACK: f64 = 0.5 + 1e-9;

/// One parsed row before evaluation.
#[derive(Debug, Clone)]
pub(crate) struct SessionRow {
    pub line: u64,
    pub cnp: Cnp,
    pub date: NaiveDate,
    pub age: u32,
    pub height: f64,
    pub weight: f64,
    pub folds: SkinfoldSet,
    pub bmi: f64,
    pub bd: Option<f64>,
    pub pat_percent: Option<f64>,
}

pub(crate) fn header_line() -> String {
    let mut line = SESSION_HEADER.join(",");
    line.push('\n');
    line
}

pub(crate) fn format_row(record: &SessionRecord) -> String {
    let eval = &record.evaluation;
    let mut fields = vec![
        record.cnp.to_string(),
        record.date.format("%Y-%m-%d").to_string(),
        record.metrics.age.to_string(),
        display::exact(record.metrics.height),
        display::exact(record.metrics.weight),
    ];
    fields.extend(record.folds.to_array().into_iter().map(display::exact));
    fields.push(display::bmi(eval.bmi));
    fields.push(
        eval.body_density
            .map(display::body_density)
            .unwrap_or_default(),
    );
    fields.push(eval.pat.map(display::pat_percent).unwrap_or_default());
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub(crate) fn read_rows<R: Read>(source: R) -> Result<Vec<SessionRow>, StoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    if headers.iter().ne(SESSION_HEADER) {
        return Err(StoreError::Parse {
            line: 1,
            message: format!("expected header `{}`", SESSION_HEADER.join(",")),
        });
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(parse_record(line, &record)?);
    }
    Ok(rows)
}

fn parse_record(line: u64, record: &csv::StringRecord) -> Result<SessionRow, StoreError> {
    let field = |i: usize| record.get(i).unwrap_or("");
    let bad = |i: usize, what: &str| StoreError::Parse {
        line,
        message: format!("column `{}`: {what} `{}`", SESSION_HEADER[i], field(i)),
    };
    let number = |i: usize| -> Result<f64, StoreError> {
        field(i)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(i, "not a decimal number"))
    };
    let optional = |i: usize| -> Result<Option<f64>, StoreError> {
        if field(i).is_empty() {
            Ok(None)
        } else {
            number(i).map(Some)
        }
    };

    let cnp = Cnp::parse(field(0)).map_err(|e| StoreError::Parse {
        line,
        message: format!("column `cnp`: {e}"),
    })?;
    let date = NaiveDate::parse_from_str(field(1), "%Y-%m-%d")
        .map_err(|_| bad(1, "not an ISO-8601 date"))?;
    let age = field(2)
        .parse::<u32>()
        .map_err(|_| bad(2, "not a whole number of years"))?;
    let height = number(3)?;
    let weight = number(4)?;
    let mut folds = [0.0; 7];
    for (i, slot) in folds.iter_mut().enumerate() {
        *slot = number(5 + i)?;
    }

    Ok(SessionRow {
        line,
        cnp,
        date,
        age,
        height,
        weight,
        folds: SkinfoldSet::from_array(folds),
        bmi: number(12)?,
        bd: optional(13)?,
        pat_percent: optional(14)?,
    })
}

/// Compares a row's stored derived values with the recomputed record.
pub(crate) fn check_derived(row: &SessionRow, record: &SessionRecord) -> Result<(), StoreError> {
    let eval = &record.evaluation;
    let mismatch = |field: &'static str, stored: String, computed: String| StoreError::Mismatch {
        line: row.line,
        field,
        stored,
        computed,
    };
    let opt = |v: Option<f64>| v.map(display::exact).unwrap_or_default();

    if (row.bmi - eval.bmi).abs() > BMI_SLACK {
        return Err(mismatch(
            "bmi",
            display::exact(row.bmi),
            display::bmi(eval.bmi),
        ));
    }
    match (row.bd, eval.body_density) {
        (Some(s), Some(c)) if (s - c).abs() <= BD_SLACK => {}
        (None, None) => {}
        (s, c) => {
            return Err(mismatch(
                "bd",
                opt(s),
                c.map(display::body_density).unwrap_or_default(),
            ))
        }
    }
    match (row.pat_percent, eval.pat) {
        (Some(s), Some(c)) if (s - c * 100.0).abs() <= PAT_PERCENT_SLACK => {}
        (None, None) => {}
        (s, c) => {
            return Err(mismatch(
                "pat_percent",
                opt(s),
                c.map(display::pat_percent).unwrap_or_default(),
            ))
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error, fallback_line: u64) -> StoreError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => StoreError::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => StoreError::Parse {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => StoreError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}
