//! Prompt and report text in English and Romanian.

use clap::ValueEnum;

use screening_core::{BandLevel, PrincipalClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    En,
    Ro,
}

pub struct Labels {
    pub prompt_cnp: &'static str,
    pub prompt_age: &'static str,
    pub prompt_height: &'static str,
    pub prompt_weight: &'static str,
    pub prompt_sex: &'static str,
    pub prompt_folds: &'static str,
    /// Site names in `SkinfoldSet` order.
    pub sites: [&'static str; 7],

    pub subject: &'static str,
    pub name: &'static str,
    pub age: &'static str,
    pub years: &'static str,
    pub height: &'static str,
    pub weight: &'static str,
    pub sex: &'static str,
    pub folds: &'static str,
    pub bmi: &'static str,
    pub bd: &'static str,
    pub pat: &'static str,
    pub abm: &'static str,
    pub pat_unsupported: &'static str,
    pub classification: &'static str,
    pub weight_band: &'static str,
    pub band_unavailable: &'static str,

    /// Column headings of the history table.
    pub history_columns: [&'static str; 13],
    pub flags_columns: [&'static str; 5],
    pub no_flags: &'static str,
    pub imported: &'static str,
    pub exported: &'static str,
}

pub const EN: Labels = Labels {
    prompt_cnp: "Enter subject CNP: ",
    prompt_age: "Enter subject age: ",
    prompt_height: "Enter subject height (m): ",
    prompt_weight: "Enter subject weight (kg): ",
    prompt_sex: "Enter subject sex (M/F): ",
    prompt_folds: "Enter skinfold thicknesses (mm):",
    sites: [
        "chest",
        "midaxillary",
        "triceps",
        "subscapular",
        "abdomen",
        "suprailiac",
        "thigh",
    ],
    subject: "Subject",
    name: "Name",
    age: "Age",
    years: "y",
    height: "Height",
    weight: "Weight",
    sex: "Sex",
    folds: "Skinfolds (mm)",
    bmi: "Body mass index",
    bd: "Body density",
    pat: "% Adipose tissue",
    abm: "Active body mass",
    pat_unsupported: "not computed for this age",
    classification: "Classification",
    weight_band: "Weight band",
    band_unavailable: "band unavailable",
    history_columns: [
        "Age", "Height", "Weight", "Chest", "MidAx", "Tri", "Subsc", "Abd", "Supra", "Thigh",
        "BMI", "BD", "PAT%",
    ],
    flags_columns: ["CNP", "Date", "BMI", "Class", "Weight band"],
    no_flags: "no flagged subjects",
    imported: "imported sessions",
    exported: "exported sessions",
};

pub const RO: Labels = Labels {
    prompt_cnp: "Introduceti CNP subiectului: ",
    prompt_age: "Introduceti varsta subiectului: ",
    prompt_height: "Introduceti talia subiectului: ",
    prompt_weight: "Introduceti greutatea subiectului: ",
    prompt_sex: "Introduceti sexul subiectului (M/F): ",
    prompt_folds: "Introduceti dimensiunile pliurilor cutanate:",
    sites: [
        "torace",
        "linia axilara mijlocie",
        "triceps",
        "subcapular",
        "abdomen",
        "suprailiac",
        "coapsa",
    ],
    subject: "Subiect",
    name: "Nume",
    age: "Varsta",
    years: "ani",
    height: "Talie",
    weight: "Greutate",
    sex: "Sex",
    folds: "Pliuri subcutanate (mm)",
    bmi: "Indicele de masa corporala",
    bd: "Densitatea corporala",
    pat: "% Tesut adipos",
    abm: "Masa corporala activa",
    pat_unsupported: "nu se calculeaza la aceasta varsta",
    classification: "Clasificare",
    weight_band: "Greutate fata de medie",
    band_unavailable: "referinta indisponibila",
    history_columns: [
        "A", "Inal", "Gre", "P.Tor", "P.LAM", "P.Tri", "P.Sub", "P.Abd", "P.Sup", "P.Coa", "IMC",
        "DC", "Pr",
    ],
    flags_columns: ["CNP", "Data", "IMC", "Clasa", "Greutate"],
    no_flags: "niciun subiect semnalat",
    imported: "sesiuni importate",
    exported: "sesiuni exportate",
};

impl Lang {
    pub fn labels(self) -> &'static Labels {
        match self {
            Lang::En => &EN,
            Lang::Ro => &RO,
        }
    }

    pub fn class_label(self, class: PrincipalClass) -> &'static str {
        match self {
            Lang::En => class.label(),
            Lang::Ro => match class {
                PrincipalClass::SevereThinness => "Slabiciune severa",
                PrincipalClass::ModerateThinness => "Slabiciune moderata",
                PrincipalClass::MildThinness => "Slabiciune usoara",
                PrincipalClass::NormalRange => "Normal",
                PrincipalClass::PreObese => "Preobezitate",
                PrincipalClass::ObeseI => "Obezitate gradul I",
                PrincipalClass::ObeseII => "Obezitate gradul II",
                PrincipalClass::ObeseIII => "Obezitate gradul III",
            },
        }
    }

    pub fn band_label(self, level: BandLevel) -> &'static str {
        match self {
            Lang::En => level.label(),
            Lang::Ro => match level {
                BandLevel::VeryLow => "Foarte scazuta",
                BandLevel::Low => "Scazuta",
                BandLevel::Normal => "Normala",
                BandLevel::High => "Ridicata",
                BandLevel::VeryHigh => "Foarte ridicata",
            },
        }
    }
}
