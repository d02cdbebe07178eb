//! Body-composition formulas: BMI, seven-site skinfold body density,
//! percent adipose tissue and active body mass, plus the BMI cut-off
//! classification.
//!
//! Everything here is a pure function of its arguments. Values are kept at
//! full precision; rounding for presentation lives in [`crate::display`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Accepted height range in meters (exclusive bounds).
pub const HEIGHT_RANGE_M: (f64, f64) = (0.5, 2.5);
/// Accepted weight range in kilograms (exclusive bounds).
pub const WEIGHT_RANGE_KG: (f64, f64) = (5.0, 300.0);
/// Accepted age range in whole years (inclusive).
pub const AGE_RANGE_YEARS: (u32, u32) = (5, 25);
/// Ages for which the density and adipose formulas are defined (inclusive).
pub const PAT_AGE_RANGE_YEARS: (u32, u32) = (8, 18);
/// Upper bound for a single skinfold, millimeters.
pub const MAX_FOLD_MM: f64 = 100.0;
/// Upper bound for the seven-fold sum accepted by the density formula.
pub const MAX_FOLD_SUM_MM: f64 = 300.0;
/// Body density interval accepted by the adipose formulas (exclusive).
pub const BD_RANGE: (f64, f64) = (0.9, 1.2);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{field}: {value} is outside the accepted range {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{field}: value is not a finite number")]
    NotFinite { field: &'static str },
    #[error("age {age} is outside 8-18 years; adipose tissue formulas do not apply")]
    UnsupportedAge { age: u32 },
}

impl DomainError {
    /// Name of the offending input, matching the session CSV column names.
    pub fn field(&self) -> &'static str {
        match self {
            DomainError::OutOfRange { field, .. } | DomainError::NotFinite { field } => field,
            DomainError::UnsupportedAge { .. } => "age",
        }
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::NotFinite { field })
    }
}

fn open_interval(
    field: &'static str,
    value: f64,
    (lo, hi): (f64, f64),
    range: &'static str,
) -> Result<f64, DomainError> {
    finite(field, value)?;
    if value > lo && value < hi {
        Ok(value)
    } else {
        Err(DomainError::OutOfRange {
            field,
            value,
            range,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
}

impl Sex {
    pub fn code(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
        }
    }

    /// Parses operator input. Accepts `M`/`F`, English words and the
    /// Romanian synonyms (`masculin`, `baiat`, `feminin`, `fata`), in any case.
    pub fn parse(input: &str) -> Option<Sex> {
        match input.trim().to_lowercase().as_str() {
            "m" | "male" | "masculin" | "b" | "baiat" | "băiat" => Some(Sex::Male),
            "f" | "female" | "feminin" | "fata" | "fată" => Some(Sex::Female),
            _ => None,
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The seven caliper sites, in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkinfoldSet {
    pub chest: f64,
    pub midaxillary: f64,
    pub triceps: f64,
    pub subscapular: f64,
    pub abdomen: f64,
    pub suprailiac: f64,
    pub thigh: f64,
}

impl SkinfoldSet {
    /// Column names used by the CSV and JSON interfaces, in site order.
    pub const FIELD_NAMES: [&'static str; 7] = [
        "chest_mm",
        "midaxillary_mm",
        "triceps_mm",
        "subscapular_mm",
        "abdomen_mm",
        "suprailiac_mm",
        "thigh_mm",
    ];

    pub fn new(values: [f64; 7]) -> Result<Self, DomainError> {
        let folds = SkinfoldSet::from_array(values);
        folds.validate()?;
        Ok(folds)
    }

    pub(crate) fn from_array(v: [f64; 7]) -> Self {
        SkinfoldSet {
            chest: v[0],
            midaxillary: v[1],
            triceps: v[2],
            subscapular: v[3],
            abdomen: v[4],
            suprailiac: v[5],
            thigh: v[6],
        }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.chest,
            self.midaxillary,
            self.triceps,
            self.subscapular,
            self.abdomen,
            self.suprailiac,
            self.thigh,
        ]
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        for (field, value) in Self::FIELD_NAMES.into_iter().zip(self.to_array()) {
            finite(field, value)?;
            if !(value > 0.0 && value <= MAX_FOLD_MM) {
                return Err(DomainError::OutOfRange {
                    field,
                    value,
                    range: "(0, 100] mm",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyMetrics {
    pub height: f64,
    pub weight: f64,
    pub age: u32,
}

impl BodyMetrics {
    pub fn new(height: f64, weight: f64, age: u32) -> Result<Self, DomainError> {
        let metrics = BodyMetrics {
            height,
            weight,
            age,
        };
        metrics.validate()?;
        Ok(metrics)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        check_height(self.height)?;
        check_weight(self.weight)?;
        check_age(self.age)
    }
}

fn check_height(height: f64) -> Result<f64, DomainError> {
    open_interval("height_m", height, HEIGHT_RANGE_M, "(0.5, 2.5) m")
}

fn check_weight(weight: f64) -> Result<f64, DomainError> {
    open_interval("weight_kg", weight, WEIGHT_RANGE_KG, "(5, 300) kg")
}

fn check_age(age: u32) -> Result<(), DomainError> {
    if (AGE_RANGE_YEARS.0..=AGE_RANGE_YEARS.1).contains(&age) {
        Ok(())
    } else {
        Err(DomainError::OutOfRange {
            field: "age",
            value: f64::from(age),
            range: "[5, 25] years",
        })
    }
}

fn check_pat_age(age: u32) -> Result<(), DomainError> {
    if (PAT_AGE_RANGE_YEARS.0..=PAT_AGE_RANGE_YEARS.1).contains(&age) {
        Ok(())
    } else {
        Err(DomainError::UnsupportedAge { age })
    }
}

/// Principal BMI cut-off classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrincipalClass {
    SevereThinness,
    ModerateThinness,
    MildThinness,
    NormalRange,
    PreObese,
    ObeseI,
    ObeseII,
    ObeseIII,
}

impl PrincipalClass {
    pub const ALL: [PrincipalClass; 8] = [
        PrincipalClass::SevereThinness,
        PrincipalClass::ModerateThinness,
        PrincipalClass::MildThinness,
        PrincipalClass::NormalRange,
        PrincipalClass::PreObese,
        PrincipalClass::ObeseI,
        PrincipalClass::ObeseII,
        PrincipalClass::ObeseIII,
    ];

    /// Half-open BMI interval `[lower, upper)` covered by this class.
    pub fn interval(self) -> (f64, f64) {
        match self {
            PrincipalClass::SevereThinness => (0.0, 16.0),
            PrincipalClass::ModerateThinness => (16.0, 17.0),
            PrincipalClass::MildThinness => (17.0, 18.5),
            PrincipalClass::NormalRange => (18.5, 25.0),
            PrincipalClass::PreObese => (25.0, 30.0),
            PrincipalClass::ObeseI => (30.0, 35.0),
            PrincipalClass::ObeseII => (35.0, 40.0),
            PrincipalClass::ObeseIII => (40.0, f64::INFINITY),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PrincipalClass::SevereThinness => "Severe thinness",
            PrincipalClass::ModerateThinness => "Moderate thinness",
            PrincipalClass::MildThinness => "Mild thinness",
            PrincipalClass::NormalRange => "Normal range",
            PrincipalClass::PreObese => "Pre-obese",
            PrincipalClass::ObeseI => "Obese class I",
            PrincipalClass::ObeseII => "Obese class II",
            PrincipalClass::ObeseIII => "Obese class III",
        }
    }
}

/// Refinement of [`PrincipalClass`] by the additional cut-off points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditionalClass {
    SevereThinness,
    ModerateThinness,
    MildThinness,
    NormalLower,
    NormalUpper,
    PreObeseLower,
    PreObeseUpper,
    ObeseILower,
    ObeseIUpper,
    ObeseIILower,
    ObeseIIUpper,
    ObeseIII,
}

impl AdditionalClass {
    pub fn interval(self) -> (f64, f64) {
        match self {
            AdditionalClass::SevereThinness => (0.0, 16.0),
            AdditionalClass::ModerateThinness => (16.0, 17.0),
            AdditionalClass::MildThinness => (17.0, 18.5),
            AdditionalClass::NormalLower => (18.5, 23.0),
            AdditionalClass::NormalUpper => (23.0, 25.0),
            AdditionalClass::PreObeseLower => (25.0, 27.5),
            AdditionalClass::PreObeseUpper => (27.5, 30.0),
            AdditionalClass::ObeseILower => (30.0, 32.5),
            AdditionalClass::ObeseIUpper => (32.5, 35.0),
            AdditionalClass::ObeseIILower => (35.0, 37.5),
            AdditionalClass::ObeseIIUpper => (37.5, 40.0),
            AdditionalClass::ObeseIII => (40.0, f64::INFINITY),
        }
    }

    pub fn principal(self) -> PrincipalClass {
        match self {
            AdditionalClass::SevereThinness => PrincipalClass::SevereThinness,
            AdditionalClass::ModerateThinness => PrincipalClass::ModerateThinness,
            AdditionalClass::MildThinness => PrincipalClass::MildThinness,
            AdditionalClass::NormalLower | AdditionalClass::NormalUpper => {
                PrincipalClass::NormalRange
            }
            AdditionalClass::PreObeseLower | AdditionalClass::PreObeseUpper => {
                PrincipalClass::PreObese
            }
            AdditionalClass::ObeseILower | AdditionalClass::ObeseIUpper => PrincipalClass::ObeseI,
            AdditionalClass::ObeseIILower | AdditionalClass::ObeseIIUpper => {
                PrincipalClass::ObeseII
            }
            AdditionalClass::ObeseIII => PrincipalClass::ObeseIII,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmiClass {
    pub principal: PrincipalClass,
    pub additional: AdditionalClass,
    pub underweight: bool,
    pub overweight: bool,
    pub obese: bool,
}

impl BmiClass {
    pub fn label(&self) -> &'static str {
        self.principal.label()
    }

    /// Subject should be flagged for intervention.
    pub fn flagged(&self) -> bool {
        self.overweight || self.obese
    }
}

/// Derived quantities for one measurement session.
///
/// `body_density`, `pat` and `abm` are `None` exactly when `pat_supported`
/// is false (age outside 8-18).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub bmi: f64,
    pub fold_sum: f64,
    pub body_density: Option<f64>,
    pub pat: Option<f64>,
    pub abm: Option<f64>,
    pub bmi_class: BmiClass,
    pub pat_supported: bool,
}

pub fn compute_bmi(weight: f64, height: f64) -> Result<f64, DomainError> {
    let weight = check_weight(weight)?;
    let height = check_height(height)?;
    Ok(weight / (height * height))
}

// Cut-off points shared by both classification levels.
const CUT_SEVERE: f64 = 16.0;
const CUT_MODERATE: f64 = 17.0;
const CUT_UNDERWEIGHT: f64 = 18.5;
const CUT_NORMAL_UPPER: f64 = 23.0;
const CUT_OVERWEIGHT: f64 = 25.0;
const CUT_PRE_OBESE_UPPER: f64 = 27.5;
const CUT_OBESE: f64 = 30.0;
const CUT_OBESE_I_UPPER: f64 = 32.5;
const CUT_OBESE_II: f64 = 35.0;
const CUT_OBESE_II_UPPER: f64 = 37.5;
const CUT_OBESE_III: f64 = 40.0;

/// Classifies a BMI with half-open `[lower, upper)` intervals: a value equal
/// to a cut-off point belongs to the class above it.
pub fn classify_bmi(bmi: f64) -> Result<BmiClass, DomainError> {
    finite("bmi", bmi)?;
    if bmi <= 0.0 {
        return Err(DomainError::OutOfRange {
            field: "bmi",
            value: bmi,
            range: "(0, inf)",
        });
    }
    let additional = if bmi < CUT_SEVERE {
        AdditionalClass::SevereThinness
    } else if bmi < CUT_MODERATE {
        AdditionalClass::ModerateThinness
    } else if bmi < CUT_UNDERWEIGHT {
        AdditionalClass::MildThinness
    } else if bmi < CUT_NORMAL_UPPER {
        AdditionalClass::NormalLower
    } else if bmi < CUT_OVERWEIGHT {
        AdditionalClass::NormalUpper
    } else if bmi < CUT_PRE_OBESE_UPPER {
        AdditionalClass::PreObeseLower
    } else if bmi < CUT_OBESE {
        AdditionalClass::PreObeseUpper
    } else if bmi < CUT_OBESE_I_UPPER {
        AdditionalClass::ObeseILower
    } else if bmi < CUT_OBESE_II {
        AdditionalClass::ObeseIUpper
    } else if bmi < CUT_OBESE_II_UPPER {
        AdditionalClass::ObeseIILower
    } else if bmi < CUT_OBESE_III {
        AdditionalClass::ObeseIIUpper
    } else {
        AdditionalClass::ObeseIII
    };
    Ok(BmiClass {
        principal: additional.principal(),
        additional,
        underweight: bmi < CUT_UNDERWEIGHT,
        overweight: bmi >= CUT_OVERWEIGHT,
        obese: bmi >= CUT_OBESE,
    })
}

pub fn sum_folds(folds: &SkinfoldSet) -> Result<f64, DomainError> {
    folds.validate()?;
    Ok(folds.to_array().iter().sum())
}

/// Coefficients of the quadratic seven-fold density equation:
/// `BD = c0 - c1*F + c2*F^2 - c3*A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCoefficients {
    pub intercept: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub age: f64,
}

pub const MALE_DENSITY: DensityCoefficients = DensityCoefficients {
    intercept: 1.112,
    linear: 0.000_434_99,
    quadratic: 0.000_000_55,
    age: 0.000_288_26,
};

pub const FEMALE_DENSITY: DensityCoefficients = DensityCoefficients {
    intercept: 1.0970,
    linear: 0.000_469_71,
    quadratic: 0.000_000_56,
    age: 0.000_128_28,
};

impl DensityCoefficients {
    pub fn for_sex(sex: Sex) -> Self {
        match sex {
            Sex::Male => MALE_DENSITY,
            Sex::Female => FEMALE_DENSITY,
        }
    }
}

pub fn body_density(fold_sum: f64, age: u32, sex: Sex) -> Result<f64, DomainError> {
    finite("fold_sum", fold_sum)?;
    if !(fold_sum > 0.0 && fold_sum <= MAX_FOLD_SUM_MM) {
        return Err(DomainError::OutOfRange {
            field: "fold_sum",
            value: fold_sum,
            range: "(0, 300] mm",
        });
    }
    check_pat_age(age)?;
    Ok(density_unchecked(fold_sum, age, sex))
}

fn density_unchecked(fold_sum: f64, age: u32, sex: Sex) -> f64 {
    let c = DensityCoefficients::for_sex(sex);
    c.intercept - c.linear * fold_sum + c.quadratic * fold_sum * fold_sum - c.age * f64::from(age)
}

/// `PAT = numerator / BD - offset` for one (age band, sex) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiposeCoefficients {
    pub numerator: f64,
    pub offset: f64,
}

/// Ages 8-12, both sexes.
pub const CHILD_ADIPOSE: AdiposeCoefficients = AdiposeCoefficients {
    numerator: 5.27,
    offset: 4.85,
};
pub const ADOLESCENT_MALE_ADIPOSE: AdiposeCoefficients = AdiposeCoefficients {
    numerator: 5.12,
    offset: 4.69,
};
pub const ADOLESCENT_FEMALE_ADIPOSE: AdiposeCoefficients = AdiposeCoefficients {
    numerator: 5.19,
    offset: 4.76,
};

impl AdiposeCoefficients {
    /// Age must already be inside the supported range.
    pub fn for_age_sex(age: u32, sex: Sex) -> Self {
        match (age, sex) {
            (0..=12, Sex::Male) | (0..=12, Sex::Female) => CHILD_ADIPOSE,
            (_, Sex::Male) => ADOLESCENT_MALE_ADIPOSE,
            (_, Sex::Female) => ADOLESCENT_FEMALE_ADIPOSE,
        }
    }
}

/// Adipose tissue as a fraction of body mass. The result is not clamped:
/// very high densities give negative values, which [`active_body_mass`]
/// rejects.
pub fn pat_fraction(bd: f64, age: u32, sex: Sex) -> Result<f64, DomainError> {
    open_interval("bd", bd, BD_RANGE, "(0.9, 1.2) g/cm3")?;
    check_pat_age(age)?;
    let c = AdiposeCoefficients::for_age_sex(age, sex);
    Ok(c.numerator / bd - c.offset)
}

pub fn active_body_mass(weight: f64, pat: f64) -> Result<f64, DomainError> {
    finite("weight_kg", weight)?;
    finite("pat", pat)?;
    if !(0.0..1.0).contains(&pat) {
        return Err(DomainError::OutOfRange {
            field: "pat",
            value: pat,
            range: "[0, 1)",
        });
    }
    Ok(weight * (1.0 - pat))
}

pub fn evaluate(
    metrics: &BodyMetrics,
    folds: &SkinfoldSet,
    sex: Sex,
) -> Result<EvaluationResult, DomainError> {
    metrics.validate()?;
    let bmi = compute_bmi(metrics.weight, metrics.height)?;
    let bmi_class = classify_bmi(bmi)?;
    let fold_sum = sum_folds(folds)?;

    let composition = match body_density(fold_sum, metrics.age, sex) {
        Ok(bd) => {
            let pat = pat_fraction(bd, metrics.age, sex)?;
            let abm = active_body_mass(metrics.weight, pat)?;
            Some((bd, pat, abm))
        }
        Err(DomainError::UnsupportedAge { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(EvaluationResult {
        bmi,
        fold_sum,
        body_density: composition.map(|c| c.0),
        pat: composition.map(|c| c.1),
        abm: composition.map(|c| c.2),
        bmi_class,
        pat_supported: composition.is_some(),
    })
}
