//! `screening`: record measurement sessions, print reports and history,
//! list flagged subjects, move sessions in and out as CSV, and run the HTTP
//! service.
//!
//! Exit status: 0 on success, 1 for validation errors, 2 for storage or I/O
//! errors.

mod labels;
mod report;

use std::fs::File;
use std::io::{self, BufRead, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use screening_core::{
    Cnp, Environment, ReferenceError, ReferenceTable, SessionInput, SessionRecord, Sex,
    SkinfoldSet, Store, StoreError, Subject,
};
use screening_service::{AppState, ServiceConfig};

use labels::Lang;

#[derive(Debug, Parser)]
#[command(
    name = "screening",
    version,
    about = "Juvenile body-composition screening"
)]
struct Cli {
    /// Session log file; subject metadata is kept next to it.
    #[arg(
        long,
        global = true,
        env = "SCREENING_STORE",
        default_value = "./screening.csv"
    )]
    store: PathBuf,
    /// Reference weight table (CSV). Defaults to the built-in seed table.
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
    /// Environment recorded for newly registered subjects.
    #[arg(long = "env", global = true, value_enum, default_value = "urban")]
    environment: EnvArg,
    #[arg(long, global = true, value_enum, default_value = "en")]
    lang: Lang,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvArg {
    Urban,
    Rural,
}

impl From<EnvArg> for Environment {
    fn from(e: EnvArg) -> Self {
        match e {
            EnvArg::Urban => Environment::Urban,
            EnvArg::Rural => Environment::Rural,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Record a session. Values missing from the flags are prompted for.
    Record(Box<RecordArgs>),
    /// Print every session of a subject.
    History { cnp: String },
    /// List subjects whose latest session is overweight or obese.
    Flags,
    /// Append sessions from a session CSV file.
    Import { path: PathBuf },
    /// Write all sessions to a session CSV file.
    Export { path: PathBuf },
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct RecordArgs {
    #[arg(long)]
    cnp: Option<String>,
    #[arg(long)]
    age: Option<String>,
    /// Standing height in meters.
    #[arg(long)]
    height: Option<String>,
    /// Weight in kilograms.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    sex: Option<String>,
    #[arg(long)]
    chest: Option<String>,
    #[arg(long)]
    midaxillary: Option<String>,
    #[arg(long)]
    triceps: Option<String>,
    #[arg(long)]
    subscapular: Option<String>,
    #[arg(long)]
    abdomen: Option<String>,
    #[arg(long)]
    suprailiac: Option<String>,
    #[arg(long)]
    thigh: Option<String>,
    /// Session date (YYYY-MM-DD); defaults to today.
    #[arg(long)]
    date: Option<String>,
    /// Subject name, used when the subject is registered by this session.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = screening_service::DEFAULT_BIND)]
    bind: SocketAddr,
    /// Origin allowed to call the API from a browser.
    #[arg(long)]
    ui_origin: Option<String>,
    /// Directory of static UI assets to serve.
    #[arg(long)]
    serve_ui: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Storage(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Storage(_) => ExitCode::from(2),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        if e.is_storage() {
            CliError::Storage(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::Io(_) => CliError::Storage(format!("reference table: {e}")),
            other => CliError::Validation(format!("reference table: {other}")),
        }
    }
}

fn io_error(context: &str, e: io::Error) -> CliError {
    CliError::Storage(format!("{context}: {e}"))
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {message}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let echo = !stdin.is_terminal();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();

    match run(cli, &mut input, &mut out, echo) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            match &e {
                CliError::Validation(m) | CliError::Storage(m) => eprintln!("error: {m}"),
            }
            e.exit_code()
        }
    }
}

fn run(
    cli: Cli,
    input: &mut impl BufRead,
    out: &mut impl Write,
    echo: bool,
) -> Result<(), CliError> {
    let lang = cli.lang;
    let reference = load_reference(cli.reference.as_ref())?;
    let store = Store::open(&cli.store)?;
    let write_err = |e: io::Error| io_error("stdout", e);

    match cli.command {
        Command::Record(args) => {
            let mut prompter = Prompter {
                input,
                out: &mut *out,
                echo,
            };
            let text = record(
                &store,
                &reference,
                lang,
                cli.environment.into(),
                *args,
                &mut prompter,
            )?;
            out.write_all(text.as_bytes()).map_err(write_err)?;
        }
        Command::History { cnp } => {
            let records = store.history(cnp.trim())?;
            out.write_all(report::history(lang, cnp.trim(), &records).as_bytes())
                .map_err(write_err)?;
        }
        Command::Flags => {
            let flagged: Vec<_> = store
                .flag_list()
                .into_iter()
                .map(|(subject, record)| {
                    let band = reference.band_for(
                        record.metrics.age,
                        record.sex(),
                        subject.environment,
                        record.metrics.weight,
                    );
                    (subject, record, band)
                })
                .collect();
            out.write_all(report::flags(lang, &flagged).as_bytes())
                .map_err(write_err)?;
        }
        Command::Import { path } => {
            let file = File::open(&path).map_err(|e| io_error(&path.display().to_string(), e))?;
            let count = store.import_csv(io::BufReader::new(file))?;
            writeln!(out, "{} {count}", lang.labels().imported).map_err(write_err)?;
        }
        Command::Export { path } => {
            let file = File::create(&path).map_err(|e| io_error(&path.display().to_string(), e))?;
            let count = store.export_csv(io::BufWriter::new(file))?;
            writeln!(out, "{} {count}", lang.labels().exported).map_err(write_err)?;
        }
        Command::Serve(args) => {
            let mut state = AppState::new(Arc::new(store), Arc::new(reference));
            state.default_environment = cli.environment.into();
            let config = ServiceConfig {
                ui_origin: args.ui_origin,
                ui_dir: args.serve_ui,
            };
            let app = screening_service::router(state, &config)
                .map_err(|e| invalid("ui-origin", e.message))?;
            writeln!(out, "listening on http://{}", args.bind).map_err(write_err)?;
            out.flush().map_err(write_err)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| io_error("runtime", e))?;
            runtime
                .block_on(screening_service::serve(app, args.bind))
                .map_err(|e| io_error(&args.bind.to_string(), e))?;
        }
    }
    Ok(())
}

fn load_reference(path: Option<&PathBuf>) -> Result<ReferenceTable, CliError> {
    match path {
        None => Ok(ReferenceTable::seed()),
        Some(p) => {
            let file = File::open(p).map_err(|e| io_error(&p.display().to_string(), e))?;
            Ok(ReferenceTable::load(io::BufReader::new(file))?)
        }
    }
}

struct Prompter<'a, R, W> {
    input: &'a mut R,
    out: &'a mut W,
    /// Repeat the answer after the prompt, for non-terminal input.
    echo: bool,
}

impl<R: BufRead, W: Write> Prompter<'_, R, W> {
    fn ask(&mut self, prompt: &str, field: &str) -> Result<String, CliError> {
        let err = |e: io::Error| io_error("prompt", e);
        write!(self.out, "{prompt}").map_err(err)?;
        self.out.flush().map_err(err)?;
        let mut line = String::new();
        let n = self.input.read_line(&mut line).map_err(err)?;
        if n == 0 {
            return Err(invalid(field, "no value entered"));
        }
        let value = line.trim().to_string();
        if self.echo {
            writeln!(self.out, "{value}").map_err(err)?;
        }
        Ok(value)
    }

    fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(|e| io_error("prompt", e))
    }
}

/// Takes the flag value, or prompts when interactive and the flag is absent.
fn value<R: BufRead, W: Write>(
    flag: Option<String>,
    interactive: bool,
    prompter: &mut Prompter<'_, R, W>,
    prompt: &str,
    field: &str,
) -> Result<Option<String>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None if interactive => prompter.ask(prompt, field).map(Some),
        None => Ok(None),
    }
}

fn decimal(field: &str, raw: &str) -> Result<f64, CliError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(field, format!("`{raw}` is not a decimal number")))
}

fn record<R: BufRead, W: Write>(
    store: &Store,
    reference: &ReferenceTable,
    lang: Lang,
    environment: Environment,
    args: RecordArgs,
    prompter: &mut Prompter<'_, R, W>,
) -> Result<String, CliError> {
    let l = lang.labels();
    let interactive = args.cnp.is_none()
        || args.height.is_none()
        || args.weight.is_none()
        || [
            &args.chest,
            &args.midaxillary,
            &args.triceps,
            &args.subscapular,
            &args.abdomen,
            &args.suprailiac,
            &args.thigh,
        ]
        .iter()
        .any(|f| f.is_none());

    let required = |v: Option<String>, field: &str| v.ok_or_else(|| invalid(field, "missing"));

    // Prompt order: CNP, age, height, weight, sex, then the seven folds.
    let cnp_raw = required(
        value(args.cnp, interactive, prompter, l.prompt_cnp, "cnp")?,
        "cnp",
    )?;
    let cnp = Cnp::parse(&cnp_raw).map_err(|e| invalid("cnp", e))?;
    let age = value(args.age, interactive, prompter, l.prompt_age, "age")?
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| invalid("age", format!("`{s}` is not a whole number of years")))
        })
        .transpose()?;
    let height = decimal(
        "height_m",
        &required(
            value(
                args.height,
                interactive,
                prompter,
                l.prompt_height,
                "height_m",
            )?,
            "height_m",
        )?,
    )?;
    let weight = decimal(
        "weight_kg",
        &required(
            value(
                args.weight,
                interactive,
                prompter,
                l.prompt_weight,
                "weight_kg",
            )?,
            "weight_kg",
        )?,
    )?;
    let sex = value(args.sex, interactive, prompter, l.prompt_sex, "sex")?
        .filter(|s| !s.is_empty())
        .map(|s| Sex::parse(&s).ok_or_else(|| invalid("sex", format!("`{s}` is not M or F"))))
        .transpose()?;

    if interactive {
        prompter.line(l.prompt_folds)?;
    }
    let fold_flags = [
        args.chest,
        args.midaxillary,
        args.triceps,
        args.subscapular,
        args.abdomen,
        args.suprailiac,
        args.thigh,
    ];
    let mut folds = [0.0; 7];
    for (i, flag) in fold_flags.into_iter().enumerate() {
        let field = SkinfoldSet::FIELD_NAMES[i];
        let prompt = format!("-{}: ", l.sites[i]);
        folds[i] = decimal(
            field,
            &required(value(flag, interactive, prompter, &prompt, field)?, field)?,
        )?;
    }
    let folds = SkinfoldSet::new(folds).map_err(StoreError::from)?;

    let date = match args.date {
        Some(raw) => NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
            .map_err(|_| invalid("date", format!("`{raw}` is not a YYYY-MM-DD date")))?,
        None => chrono::Local::now().date_naive(),
    };

    // Reject bad measurements before a new subject gets registered.
    SessionRecord::compute(&cnp, date, height, weight, folds)?;
    let subject = match store.subject(cnp.as_str()) {
        Some(s) => s,
        None => {
            if let Some(sex) = sex {
                if sex != cnp.sex() {
                    return Err(invalid(
                        "sex",
                        format!("sex {sex} contradicts CNP {cnp} (encodes {})", cnp.sex()),
                    ));
                }
            }
            let name = args
                .name
                .map(|n| n.trim().to_string())
                .filter(|n| !n.is_empty());
            store.register_subject(Subject::from_cnp(cnp.clone(), name, environment))?
        }
    };

    let input = SessionInput {
        date,
        entered_age: age,
        entered_sex: sex,
        height,
        weight,
        folds,
    };
    let (record, warnings) = store.record_session(&cnp, &input)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let band = reference.band_for(
        record.metrics.age,
        record.sex(),
        subject.environment,
        record.metrics.weight,
    );
    Ok(report::evaluation(lang, &subject, &record, band.as_ref()))
}
