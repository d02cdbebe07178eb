//! JSON shapes returned by the API. Field names follow the session CSV
//! columns; every derived number also has a pre-rounded `*_display` string.

use chrono::NaiveDate;
use serde::Serialize;

use screening_core::display;
use screening_core::reference::BandLevel;
use screening_core::{
    AdditionalClass, BmiClass, PrincipalClass, ReferenceEntry, ReferenceTable, SessionRecord,
    Subject, WeightBand,
};

#[derive(Debug, Serialize)]
pub struct SubjectView {
    pub cnp: String,
    pub name: Option<String>,
    pub sex: &'static str,
    pub birthdate: NaiveDate,
    pub environment: &'static str,
    pub checksum_ok: bool,
}

impl From<&Subject> for SubjectView {
    fn from(s: &Subject) -> Self {
        SubjectView {
            cnp: s.cnp.to_string(),
            name: s.name.clone(),
            sex: s.sex.code(),
            birthdate: s.birthdate,
            environment: s.environment.code(),
            checksum_ok: s.cnp.checksum_ok(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ClassificationView {
    pub principal: PrincipalClass,
    pub additional: AdditionalClass,
    pub label: &'static str,
    pub underweight: bool,
    pub overweight: bool,
    pub obese: bool,
}

impl From<&BmiClass> for ClassificationView {
    fn from(c: &BmiClass) -> Self {
        ClassificationView {
            principal: c.principal,
            additional: c.additional,
            label: c.label(),
            underweight: c.underweight,
            overweight: c.overweight,
            obese: c.obese,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WeightBandView {
    pub level: BandLevel,
    pub label: &'static str,
    pub thresholds: [f64; 4],
    pub thresholds_display: [String; 4],
}

impl From<&WeightBand> for WeightBandView {
    fn from(b: &WeightBand) -> Self {
        WeightBandView {
            level: b.level,
            label: b.level.label(),
            thresholds: b.thresholds,
            thresholds_display: b.thresholds.map(|t| display::format_fixed(t, 3)),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub cnp: String,
    pub date: NaiveDate,
    pub age: u32,
    pub sex: &'static str,
    pub height_m: f64,
    pub weight_kg: f64,
    pub chest_mm: f64,
    pub midaxillary_mm: f64,
    pub triceps_mm: f64,
    pub subscapular_mm: f64,
    pub abdomen_mm: f64,
    pub suprailiac_mm: f64,
    pub thigh_mm: f64,
    pub fold_sum_mm: f64,
    pub bmi: f64,
    pub bmi_display: String,
    pub bd: Option<f64>,
    pub bd_display: Option<String>,
    pub pat: Option<f64>,
    pub pat_percent: Option<i64>,
    pub pat_display: Option<String>,
    pub abm_kg: Option<f64>,
    pub abm_display: Option<String>,
    pub pat_supported: bool,
    pub classification: ClassificationView,
    pub weight_band: Option<WeightBandView>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SessionView {
    pub fn new(record: &SessionRecord, subject: &Subject, reference: &ReferenceTable) -> Self {
        let eval = &record.evaluation;
        let f = &record.folds;
        let band = reference.band_for(
            record.metrics.age,
            record.sex(),
            subject.environment,
            record.metrics.weight,
        );
        SessionView {
            cnp: record.cnp.to_string(),
            date: record.date,
            age: record.metrics.age,
            sex: record.sex().code(),
            height_m: record.metrics.height,
            weight_kg: record.metrics.weight,
            chest_mm: f.chest,
            midaxillary_mm: f.midaxillary,
            triceps_mm: f.triceps,
            subscapular_mm: f.subscapular,
            abdomen_mm: f.abdomen,
            suprailiac_mm: f.suprailiac,
            thigh_mm: f.thigh,
            fold_sum_mm: eval.fold_sum,
            bmi: eval.bmi,
            bmi_display: display::bmi(eval.bmi),
            bd: eval.body_density,
            bd_display: eval.body_density.map(display::body_density),
            pat: eval.pat,
            pat_percent: eval.pat.map(display::pat_percent_value),
            pat_display: eval.pat.map(display::pat_percent),
            abm_kg: eval.abm,
            abm_display: eval.abm.map(|a| display::format_fixed(a, 2)),
            pat_supported: eval.pat_supported,
            classification: (&eval.bmi_class).into(),
            weight_band: band.as_ref().map(WeightBandView::from),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FlagView {
    pub subject: SubjectView,
    pub latest: SessionView,
}

#[derive(Debug, Serialize)]
pub struct ReferenceView {
    pub age: u32,
    pub sex: &'static str,
    pub environment: &'static str,
    pub mean_kg: f64,
    pub sd_kg: f64,
    pub thresholds: [f64; 4],
}

impl From<&ReferenceEntry> for ReferenceView {
    fn from(e: &ReferenceEntry) -> Self {
        ReferenceView {
            age: e.age,
            sex: e.sex.code(),
            environment: e.environment.code(),
            mean_kg: e.mean,
            sd_kg: e.sd,
            thresholds: e.thresholds(),
        }
    }
}
