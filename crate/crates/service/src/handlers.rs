use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::Json;
use chrono::NaiveDate;
use serde_json::{Map, Value};

use screening_core::{Cnp, Environment, SessionInput, Sex, SkinfoldSet, StoreError, Subject};

use crate::error::ApiError;
use crate::views::{FlagView, ReferenceView, SessionView, SubjectView};
use crate::AppState;

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_object(body: &[u8]) -> Result<Map<String, Value>, ApiError> {
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ApiError::validation(
            "body",
            "request body must be a JSON object",
        )),
        Err(e) => Err(ApiError::validation("body", format!("invalid JSON: {e}"))),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a Value, ApiError> {
    match obj.get(field) {
        Some(Value::Null) | None => {
            Err(ApiError::validation(field, format!("{field} is required")))
        }
        Some(v) => Ok(v),
    }
}

fn number(obj: &Map<String, Value>, field: &str) -> Result<f64, ApiError> {
    required(obj, field)?
        .as_f64()
        .ok_or_else(|| ApiError::validation(field, format!("{field} must be a number")))
}

fn optional_str<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<Option<&'a str>, ApiError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(ApiError::validation(
            field,
            format!("{field} must be a string"),
        )),
    }
}

fn optional_sex(obj: &Map<String, Value>) -> Result<Option<Sex>, ApiError> {
    optional_str(obj, "sex")?
        .map(|s| Sex::parse(s).ok_or_else(|| ApiError::validation("sex", "sex must be M or F")))
        .transpose()
}

fn parse_date(field: &str, raw: &str) -> Result<NaiveDate, ApiError> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| {
        ApiError::validation(
            field,
            format!("{field} must be an ISO-8601 date (YYYY-MM-DD)"),
        )
    })
}

/// A path key that is not a valid CNP cannot name a registered subject.
fn path_cnp(raw: &str) -> Result<Cnp, ApiError> {
    Cnp::parse(raw).map_err(|_| StoreError::UnknownSubject(raw.to_string()).into())
}

fn subject_of(state: &AppState, cnp: &Cnp) -> Result<Subject, ApiError> {
    state
        .store
        .subject(cnp.as_str())
        .ok_or_else(|| StoreError::UnknownSubject(cnp.to_string()).into())
}

fn limit(params: &HashMap<String, String>) -> Result<Option<usize>, ApiError> {
    params
        .get("limit")
        .map(|raw| {
            raw.parse::<usize>()
                .map_err(|_| ApiError::validation("limit", "limit must be a non-negative integer"))
        })
        .transpose()
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

pub async fn healthz() -> &'static str {
    "ok"
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("not_found", "no such endpoint")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError {
        status: axum::http::StatusCode::METHOD_NOT_ALLOWED,
        code: "method_not_allowed",
        message: "method not allowed for this endpoint".into(),
        field: None,
    }
}

pub async fn create_subject(State(state): State<AppState>, body: Bytes) -> ApiResult<SubjectView> {
    let obj = parse_object(&body)?;
    let cnp = match required(&obj, "cnp")? {
        Value::String(s) => Cnp::parse(s)?,
        _ => return Err(ApiError::validation("cnp", "cnp must be a string")),
    };
    let name = optional_str(&obj, "name")?
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(str::to_string);
    let environment = match optional_str(&obj, "environment")? {
        None => state.default_environment,
        Some(raw) => Environment::parse(raw).ok_or_else(|| {
            ApiError::validation("environment", "environment must be urban or rural")
        })?,
    };
    let mut subject = Subject::from_cnp(cnp, name, environment);
    if let Some(sex) = optional_sex(&obj)? {
        subject.sex = sex;
    }
    if let Some(raw) = optional_str(&obj, "birthdate")? {
        subject.birthdate = parse_date("birthdate", raw)?;
    }

    let store = state.store.clone();
    let stored = blocking(move || Ok(store.register_subject(subject)?)).await?;
    Ok(Json(SubjectView::from(&stored)))
}

pub async fn record_session(
    State(state): State<AppState>,
    Path(raw_cnp): Path<String>,
    body: Bytes,
) -> ApiResult<SessionView> {
    let cnp = path_cnp(&raw_cnp)?;
    let subject = subject_of(&state, &cnp)?;
    let obj = parse_object(&body)?;

    let date = match required(&obj, "date")? {
        Value::String(s) => parse_date("date", s)?,
        _ => return Err(ApiError::validation("date", "date must be a string")),
    };
    let entered_age = match obj.get("age") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .and_then(|a| u32::try_from(a).ok())
                .ok_or_else(|| {
                    ApiError::validation("age", "age must be a whole number of years")
                })?,
        ),
    };
    let mut folds = [0.0; 7];
    for (slot, field) in folds.iter_mut().zip(SkinfoldSet::FIELD_NAMES) {
        *slot = number(&obj, field)?;
    }
    let input = SessionInput {
        date,
        entered_age,
        entered_sex: optional_sex(&obj)?,
        height: number(&obj, "height_m")?,
        weight: number(&obj, "weight_kg")?,
        folds: SkinfoldSet::new(folds).map_err(StoreError::from)?,
    };

    let store = state.store.clone();
    let (record, warnings) = blocking(move || Ok(store.record_session(&cnp, &input)?)).await?;
    let mut view = SessionView::new(&record, &subject, &state.reference);
    view.warnings = warnings.iter().map(ToString::to_string).collect();
    Ok(Json(view))
}

pub async fn history(
    State(state): State<AppState>,
    Path(raw_cnp): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Vec<SessionView>> {
    let cnp = path_cnp(&raw_cnp)?;
    let subject = subject_of(&state, &cnp)?;
    let records = state.store.history(cnp.as_str())?;
    // `limit` keeps the most recent sessions, still oldest first.
    let skip = limit(&params)?.map_or(0, |n| records.len().saturating_sub(n));
    Ok(Json(
        records[skip..]
            .iter()
            .map(|r| SessionView::new(r, &subject, &state.reference))
            .collect(),
    ))
}

pub async fn latest(
    State(state): State<AppState>,
    Path(raw_cnp): Path<String>,
) -> ApiResult<SessionView> {
    let cnp = path_cnp(&raw_cnp)?;
    let subject = subject_of(&state, &cnp)?;
    let record = state.store.latest(cnp.as_str())?.ok_or_else(|| {
        ApiError::not_found("no_sessions", format!("subject {cnp} has no sessions"))
    })?;
    Ok(Json(SessionView::new(&record, &subject, &state.reference)))
}

pub async fn flags(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Vec<FlagView>> {
    let mut flagged = state.store.flag_list();
    if let Some(n) = limit(&params)? {
        flagged.truncate(n);
    }
    Ok(Json(
        flagged
            .iter()
            .map(|(subject, record)| FlagView {
                subject: subject.into(),
                latest: SessionView::new(record, subject, &state.reference),
            })
            .collect(),
    ))
}

pub async fn reference(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<ReferenceView> {
    let param = |name: &str| {
        params.get(name).map(String::as_str).ok_or_else(|| {
            ApiError::validation(name, format!("query parameter {name} is required"))
        })
    };
    let age = param("age")?
        .parse::<u32>()
        .map_err(|_| ApiError::validation("age", "age must be a whole number of years"))?;
    let sex = match param("sex")? {
        "M" | "m" => Sex::Male,
        "F" | "f" => Sex::Female,
        _ => return Err(ApiError::validation("sex", "sex must be M or F")),
    };
    let environment = Environment::parse(param("env")?)
        .ok_or_else(|| ApiError::validation("env", "env must be urban or rural"))?;

    state
        .reference
        .lookup(age, sex, environment)
        .map(|e| Json(ReferenceView::from(e)))
        .ok_or_else(|| {
            ApiError::not_found(
                "unknown_reference",
                format!("no reference cell for age {age}, sex {sex}, {environment}"),
            )
        })
}
