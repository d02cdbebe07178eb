//! Subject registry and append-only session log.
//!
//! The log is a single session CSV file (see [`SESSION_HEADER`]); subject
//! metadata that the CNP does not encode (name, environment) lives in a
//! sidecar `<stem>.subjects.csv`. Both files are only ever appended to.
//!
//! Derived values are written alongside the inputs. On open and on import
//! every row is re-evaluated and rejected if a stored value disagrees with
//! the recomputation by more than display rounding.
//!
//! All mutations take the write half of one `RwLock`, so there is a single
//! writer at a time and readers always see a prefix of the log.

mod session_csv;

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::anthro::{evaluate, BodyMetrics, DomainError, EvaluationResult, Sex, SkinfoldSet};
use crate::cnp::{Cnp, CnpError};
use crate::reference::Environment;

pub use session_csv::SESSION_HEADER;

const SUBJECT_HEADER: [&str; 3] = ["cnp", "name", "environment"];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("cnp: {0}")]
    Cnp(#[from] CnpError),
    #[error("unknown subject {0}")]
    UnknownSubject(String),
    #[error("{field}: {message}")]
    Consistency {
        field: &'static str,
        message: String,
    },
    #[error("date: session date {date} precedes birth date {birthdate}")]
    BeforeBirth {
        date: NaiveDate,
        birthdate: NaiveDate,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: stored {field} `{stored}` disagrees with recomputed `{computed}`")]
    Mismatch {
        line: u64,
        field: &'static str,
        stored: String,
        computed: String,
    },
    #[error("storage: {0}")]
    Io(#[from] io::Error),
}

impl StoreError {
    /// Offending input field, when the error concerns one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            StoreError::Domain(e) => Some(e.field()),
            StoreError::Cnp(_) => Some("cnp"),
            StoreError::Consistency { field, .. } => Some(field),
            StoreError::BeforeBirth { .. } => Some("date"),
            StoreError::Mismatch { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn is_storage(&self) -> bool {
        matches!(self, StoreError::Io(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// The CNP control digit does not match; the code is still accepted.
    Checksum { cnp: String },
    /// The operator-entered age differs from the age derived from the CNP.
    AgeMismatch { entered: u32, computed: u32 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Checksum { cnp } => {
                write!(f, "CNP {cnp} has an invalid control digit")
            }
            Warning::AgeMismatch { entered, computed } => write!(
                f,
                "entered age {entered} differs from age {computed} derived from the CNP; using {computed}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subject {
    pub cnp: Cnp,
    pub name: Option<String>,
    pub sex: Sex,
    pub birthdate: NaiveDate,
    pub environment: Environment,
}

impl Subject {
    /// Subject with sex and birth date taken from the CNP.
    pub fn from_cnp(cnp: Cnp, name: Option<String>, environment: Environment) -> Self {
        Subject {
            sex: cnp.sex(),
            birthdate: cnp.birthdate(),
            cnp,
            name,
            environment,
        }
    }

    fn check_consistent(&self) -> Result<(), StoreError> {
        if self.sex != self.cnp.sex() {
            return Err(StoreError::Consistency {
                field: "sex",
                message: format!(
                    "sex {} contradicts CNP {} (encodes {})",
                    self.sex,
                    self.cnp,
                    self.cnp.sex()
                ),
            });
        }
        if self.birthdate != self.cnp.birthdate() {
            return Err(StoreError::Consistency {
                field: "birthdate",
                message: format!(
                    "birth date {} contradicts CNP {} (encodes {})",
                    self.birthdate,
                    self.cnp,
                    self.cnp.birthdate()
                ),
            });
        }
        Ok(())
    }
}

/// Measurements for one session as entered by the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionInput {
    pub date: NaiveDate,
    /// Age typed by the operator; the CNP-derived age always wins.
    pub entered_age: Option<u32>,
    /// Sex typed by the operator; must agree with the CNP when present.
    pub entered_sex: Option<Sex>,
    pub height: f64,
    pub weight: f64,
    pub folds: SkinfoldSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub cnp: Cnp,
    pub date: NaiveDate,
    pub metrics: BodyMetrics,
    pub folds: SkinfoldSet,
    pub evaluation: EvaluationResult,
}

impl SessionRecord {
    /// Derives the age from the CNP and evaluates the measurements.
    pub fn compute(
        cnp: &Cnp,
        date: NaiveDate,
        height: f64,
        weight: f64,
        folds: SkinfoldSet,
    ) -> Result<Self, StoreError> {
        let age = cnp.age_on(date).ok_or(StoreError::BeforeBirth {
            date,
            birthdate: cnp.birthdate(),
        })?;
        let metrics = BodyMetrics::new(height, weight, age)?;
        folds.validate()?;
        let evaluation = evaluate(&metrics, &folds, cnp.sex())?;
        Ok(SessionRecord {
            cnp: cnp.clone(),
            date,
            metrics,
            folds,
            evaluation,
        })
    }

    pub fn sex(&self) -> Sex {
        self.cnp.sex()
    }
}

#[derive(Debug)]
struct State {
    subjects: BTreeMap<String, Subject>,
    sessions: Vec<SessionRecord>,
    by_subject: HashMap<String, Vec<usize>>,
    session_file: Option<File>,
    subject_file: Option<File>,
}

impl State {
    fn empty() -> Self {
        State {
            subjects: BTreeMap::new(),
            sessions: Vec::new(),
            by_subject: HashMap::new(),
            session_file: None,
            subject_file: None,
        }
    }

    fn push_session(&mut self, record: SessionRecord) {
        self.by_subject
            .entry(record.cnp.as_str().to_string())
            .or_default()
            .push(self.sessions.len());
        self.sessions.push(record);
    }

    fn append_subject(&mut self, subject: Subject) -> Result<(), StoreError> {
        if let Some(file) = self.subject_file.as_mut() {
            let line = subject_row(&subject)?;
            file.write_all(line.as_bytes())?;
            file.sync_data()?;
        }
        self.subjects
            .insert(subject.cnp.as_str().to_string(), subject);
        Ok(())
    }

    fn append_sessions(&mut self, records: Vec<SessionRecord>) -> Result<(), StoreError> {
        if let Some(file) = self.session_file.as_mut() {
            let text: String = records.iter().map(session_csv::format_row).collect();
            file.write_all(text.as_bytes())?;
            file.sync_data()?;
        }
        for record in records {
            self.push_session(record);
        }
        Ok(())
    }
}

/// Handle to a screening store. Cheap to share behind an `Arc`.
#[derive(Debug)]
pub struct Store {
    path: Option<PathBuf>,
    state: RwLock<State>,
}

impl Store {
    /// Opens (creating if needed) the store whose session log is `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        let path = path.as_ref().to_path_buf();
        let subjects_path = subjects_path(&path);
        let mut state = State::empty();

        if let Some(file) = open_existing(&subjects_path)? {
            for subject in read_subjects(BufReader::new(file))? {
                state
                    .subjects
                    .insert(subject.cnp.as_str().to_string(), subject);
            }
        }

        let mut implied_subjects = Vec::new();
        if let Some(file) = open_existing(&path)? {
            for row in session_csv::read_rows(BufReader::new(file))? {
                let record = materialize(&row)?;
                if !state.subjects.contains_key(record.cnp.as_str())
                    && !implied_subjects
                        .iter()
                        .any(|s: &Subject| s.cnp == record.cnp)
                {
                    implied_subjects.push(default_subject(&record.cnp));
                }
                state.push_session(record);
            }
        }

        state.session_file = Some(open_log(&path, &session_csv::header_line())?);
        state.subject_file = Some(open_log(&subjects_path, &header(&SUBJECT_HEADER))?);
        for subject in implied_subjects {
            state.append_subject(subject)?;
        }

        Ok(Store {
            path: Some(path),
            state: RwLock::new(state),
        })
    }

    /// Store with no backing files.
    pub fn in_memory() -> Store {
        Store {
            path: None,
            state: RwLock::new(State::empty()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Idempotent registration keyed by CNP. Returns the stored subject.
    pub fn register_subject(&self, subject: Subject) -> Result<Subject, StoreError> {
        subject.check_consistent()?;
        let mut state = self.write();
        if let Some(existing) = state.subjects.get(subject.cnp.as_str()) {
            if existing.name != subject.name {
                return Err(StoreError::Consistency {
                    field: "name",
                    message: format!(
                        "subject {} is already registered with another name",
                        subject.cnp
                    ),
                });
            }
            if existing.environment != subject.environment {
                return Err(StoreError::Consistency {
                    field: "environment",
                    message: format!(
                        "subject {} is already registered as {}",
                        subject.cnp, existing.environment
                    ),
                });
            }
            return Ok(existing.clone());
        }
        state.append_subject(subject.clone())?;
        Ok(subject)
    }

    pub fn subject(&self, cnp: &str) -> Option<Subject> {
        self.read().subjects.get(cnp).cloned()
    }

    pub fn subjects(&self) -> Vec<Subject> {
        self.read().subjects.values().cloned().collect()
    }

    /// Evaluates and appends one session for a registered subject.
    pub fn record_session(
        &self,
        cnp: &Cnp,
        input: &SessionInput,
    ) -> Result<(SessionRecord, Vec<Warning>), StoreError> {
        if self.subject(cnp.as_str()).is_none() {
            return Err(StoreError::UnknownSubject(cnp.to_string()));
        }
        if let Some(sex) = input.entered_sex {
            if sex != cnp.sex() {
                return Err(StoreError::Consistency {
                    field: "sex",
                    message: format!("sex {sex} contradicts CNP {cnp} (encodes {})", cnp.sex()),
                });
            }
        }
        let record =
            SessionRecord::compute(cnp, input.date, input.height, input.weight, input.folds)?;

        let mut warnings = Vec::new();
        if !cnp.checksum_ok() {
            warnings.push(Warning::Checksum {
                cnp: cnp.to_string(),
            });
        }
        if let Some(entered) = input.entered_age {
            if entered != record.metrics.age {
                warnings.push(Warning::AgeMismatch {
                    entered,
                    computed: record.metrics.age,
                });
            }
        }

        self.write().append_sessions(vec![record.clone()])?;
        Ok((record, warnings))
    }

    /// All sessions of one subject in insertion order.
    pub fn history(&self, cnp: &str) -> Result<Vec<SessionRecord>, StoreError> {
        let state = self.read();
        if !state.subjects.contains_key(cnp) {
            return Err(StoreError::UnknownSubject(cnp.to_string()));
        }
        Ok(state
            .by_subject
            .get(cnp)
            .map(|idx| idx.iter().map(|&i| state.sessions[i].clone()).collect())
            .unwrap_or_default())
    }

    pub fn latest(&self, cnp: &str) -> Result<Option<SessionRecord>, StoreError> {
        let state = self.read();
        if !state.subjects.contains_key(cnp) {
            return Err(StoreError::UnknownSubject(cnp.to_string()));
        }
        Ok(state
            .by_subject
            .get(cnp)
            .and_then(|idx| idx.last())
            .map(|&i| state.sessions[i].clone()))
    }

    pub fn session_count(&self) -> usize {
        self.read().sessions.len()
    }

    /// Subjects whose latest session is overweight or obese, highest BMI
    /// first.
    pub fn flag_list(&self) -> Vec<(Subject, SessionRecord)> {
        let state = self.read();
        let mut flagged: Vec<(Subject, SessionRecord)> = state
            .subjects
            .values()
            .filter_map(|subject| {
                let &last = state.by_subject.get(subject.cnp.as_str())?.last()?;
                let record = &state.sessions[last];
                record
                    .evaluation
                    .bmi_class
                    .flagged()
                    .then(|| (subject.clone(), record.clone()))
            })
            .collect();
        flagged.sort_by(|a, b| {
            b.1.evaluation
                .bmi
                .total_cmp(&a.1.evaluation.bmi)
                .then_with(|| a.0.cnp.cmp(&b.0.cnp))
        });
        flagged
    }

    /// Writes every session, in log order, as session CSV.
    pub fn export_csv<W: Write>(&self, mut sink: W) -> Result<usize, StoreError> {
        let state = self.read();
        sink.write_all(session_csv::header_line().as_bytes())?;
        for record in &state.sessions {
            sink.write_all(session_csv::format_row(record).as_bytes())?;
        }
        sink.flush()?;
        Ok(state.sessions.len())
    }

    /// Validates every row of `source`, then appends them all. Nothing is
    /// written if any row fails. Unknown CNPs are registered with default
    /// metadata (no name, urban).
    pub fn import_csv<R: Read>(&self, source: R) -> Result<usize, StoreError> {
        let rows = session_csv::read_rows(source)?;
        let records = rows
            .iter()
            .map(materialize)
            .collect::<Result<Vec<_>, _>>()?;

        let mut state = self.write();
        for record in &records {
            if !state.subjects.contains_key(record.cnp.as_str()) {
                state.append_subject(default_subject(&record.cnp))?;
            }
        }
        let count = records.len();
        state.append_sessions(records)?;
        Ok(count)
    }
}

fn default_subject(cnp: &Cnp) -> Subject {
    Subject::from_cnp(cnp.clone(), None, Environment::Urban)
}

/// Recomputes a parsed row and checks it against its stored values.
fn materialize(row: &session_csv::SessionRow) -> Result<SessionRecord, StoreError> {
    let at_line = |e: StoreError| match e {
        e @ (StoreError::Parse { .. } | StoreError::Mismatch { .. } | StoreError::Io(_)) => e,
        other => StoreError::Parse {
            line: row.line,
            message: other.to_string(),
        },
    };
    let record = SessionRecord::compute(&row.cnp, row.date, row.height, row.weight, row.folds)
        .map_err(at_line)?;
    if record.metrics.age != row.age {
        return Err(StoreError::Mismatch {
            line: row.line,
            field: "age",
            stored: row.age.to_string(),
            computed: record.metrics.age.to_string(),
        });
    }
    session_csv::check_derived(row, &record)?;
    Ok(record)
}

fn subjects_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "screening".to_string());
    path.with_file_name(format!("{stem}.subjects.csv"))
}

fn open_existing(path: &Path) -> Result<Option<File>, StoreError> {
    match File::open(path) {
        Ok(f) => Ok(Some(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Opens `path` for appending, writing `header` first if the file is empty.
fn open_log(path: &Path, header: &str) -> Result<File, StoreError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if file.metadata()?.len() == 0 {
        file.write_all(header.as_bytes())?;
        file.sync_data()?;
    }
    Ok(file)
}

fn header(columns: &[&str]) -> String {
    let mut line = columns.join(",");
    line.push('\n');
    line
}

fn subject_row(subject: &Subject) -> Result<String, StoreError> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record([
            subject.cnp.as_str(),
            subject.name.as_deref().unwrap_or(""),
            subject.environment.code(),
        ])
        .map_err(|e| io::Error::other(e.to_string()))?;
    let bytes = writer
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output of UTF-8 fields is UTF-8"))
}

fn read_subjects<R: Read>(source: R) -> Result<Vec<Subject>, StoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let parse_err = |line: u64, message: String| StoreError::Parse { line, message };

    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    if headers.iter().ne(SUBJECT_HEADER) {
        return Err(parse_err(
            1,
            format!("expected header `{}`", SUBJECT_HEADER.join(",")),
        ));
    }

    let mut subjects = Vec::new();
    for result in reader.records() {
        let record =
            result.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let cnp = Cnp::parse(&record[0]).map_err(|e| parse_err(line, format!("cnp: {e}")))?;
        let name = Some(record[1].to_string()).filter(|n| !n.is_empty());
        let environment = Environment::parse(&record[2])
            .ok_or_else(|| parse_err(line, format!("environment: `{}`", &record[2])))?;
        subjects.push(Subject::from_cnp(cnp, name, environment));
    }
    Ok(subjects)
}
