//! Juvenile body-composition screening: formulas, reference weight bands,
//! national ID decoding and the longitudinal session store.

pub mod anthro;
pub mod cnp;
pub mod display;
pub mod reference;
pub mod store;

pub use anthro::{
    active_body_mass, body_density, classify_bmi, compute_bmi, evaluate, pat_fraction, sum_folds,
    AdditionalClass, BmiClass, BodyMetrics, DomainError, EvaluationResult, PrincipalClass, Sex,
    SkinfoldSet,
};
pub use cnp::{Cnp, CnpError};
pub use reference::{
    weight_band, BandLevel, Environment, ReferenceEntry, ReferenceError, ReferenceTable, WeightBand,
};
pub use store::{SessionInput, SessionRecord, Store, StoreError, Subject, Warning};
