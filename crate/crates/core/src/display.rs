//! Presentation rounding for report values.
//!
//! BMI is shown with 2 decimals, body density with 3, adipose tissue as a
//! whole percent. Rounding is half-up at the displayed place; the scaled
//! value is first snapped to 1e-6 so decimal ties such as 25.255 that are
//! stored as 25.254999... still round up.

use crate::anthro::EvaluationResult;

pub const BMI_DECIMALS: usize = 2;
pub const BD_DECIMALS: usize = 3;
pub const PAT_DECIMALS: usize = 0;

/// Rounds half-up (away from zero for negatives) to `decimals` places.
pub fn round_half_up(value: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = ((value * scale) * 1e6).round() / 1e6;
    scaled.round() / scale
}

pub fn format_fixed(value: f64, decimals: usize) -> String {
    format!("{:.*}", decimals, round_half_up(value, decimals))
}

pub fn bmi(value: f64) -> String {
    format_fixed(value, BMI_DECIMALS)
}

pub fn body_density(value: f64) -> String {
    format_fixed(value, BD_DECIMALS)
}

/// Whole percent, no `%` sign.
pub fn pat_percent(fraction: f64) -> String {
    format_fixed(fraction * 100.0, PAT_DECIMALS)
}

/// Whole-percent value as stored in the `pat_percent` column.
pub fn pat_percent_value(fraction: f64) -> i64 {
    round_half_up(fraction * 100.0, PAT_DECIMALS) as i64
}

/// Display strings for one evaluation. `bd` and `pat` are `None` when the
/// adipose formulas do not apply to the subject's age.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayValues {
    pub bmi: String,
    pub bd: Option<String>,
    pub pat: Option<String>,
}

impl DisplayValues {
    pub fn of(result: &EvaluationResult) -> Self {
        DisplayValues {
            bmi: bmi(result.bmi),
            bd: result.body_density.map(body_density),
            pat: result.pat.map(pat_percent),
        }
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn exact(value: f64) -> String {
    format!("{value}")
}
