//! Text rendering: the boxed evaluation report, the history table and the
//! flag list.

use screening_core::display;
use screening_core::{SessionRecord, Subject, WeightBand};

use crate::labels::Lang;

const BOX_WIDTH: usize = 48;
const COLUMN: usize = 22;

/// Frames `lines` in a `*` border at least `BOX_WIDTH` wide.
fn boxed(lines: &[String]) -> String {
    let inner = lines
        .iter()
        .map(|l| l.chars().count())
        .fold(BOX_WIDTH - 4, usize::max);
    let border = "*".repeat(inner + 4);
    let mut out = String::new();
    out.push_str(&border);
    out.push('\n');
    for line in lines {
        out.push_str(&format!("* {line:<inner$} *\n"));
    }
    out.push_str(&border);
    out.push('\n');
    out
}

fn two(left: String, right: String) -> String {
    format!("{left:<COLUMN$}{right}")
}

pub fn evaluation(
    lang: Lang,
    subject: &Subject,
    record: &SessionRecord,
    band: Option<&WeightBand>,
) -> String {
    let l = lang.labels();
    let eval = &record.evaluation;
    let folds = record.folds.to_array();
    let fold = |i: usize| format!("-{}: {}", l.sites[i], display::format_fixed(folds[i], 2));

    let mut lines = vec![format!("{}: {}", l.subject, subject.cnp)];
    if let Some(name) = &subject.name {
        lines.push(format!("{}: {name}", l.name));
    }
    lines.push(two(
        format!("{}: {} {}", l.age, record.metrics.age, l.years),
        format!(
            "{}: {} m",
            l.height,
            display::format_fixed(record.metrics.height, 2)
        ),
    ));
    lines.push(two(
        format!("{}: {} kg", l.weight, display::exact(record.metrics.weight)),
        format!("{}: {}", l.sex, record.sex()),
    ));
    lines.push(format!("{}:", l.folds));
    for pair in [0, 2, 4].map(|i| (i, i + 1)) {
        lines.push(two(fold(pair.0), fold(pair.1)));
    }
    lines.push(fold(6));
    lines.push(format!("{} = {}", l.bmi, display::bmi(eval.bmi)));
    match (eval.body_density, eval.pat, eval.abm) {
        (Some(bd), Some(pat), Some(abm)) => {
            lines.push(format!("{} = {}", l.bd, display::body_density(bd)));
            lines.push(format!("{} = {}%", l.pat, display::pat_percent(pat)));
            lines.push(format!("{} = {} kg", l.abm, display::format_fixed(abm, 2)));
        }
        _ => {
            lines.push(format!("{}: {}", l.bd, l.pat_unsupported));
            lines.push(format!("{}: {}", l.pat, l.pat_unsupported));
        }
    }
    lines.push(format!(
        "{}: {}",
        l.classification,
        lang.class_label(eval.bmi_class.principal)
    ));
    lines.push(format!(
        "{}: {}",
        l.weight_band,
        band.map_or(l.band_unavailable, |b| lang.band_label(b.level))
    ));
    boxed(&lines)
}

fn table(header: &[&str], rows: &[Vec<String>], min_width: usize) -> (String, Vec<String>) {
    let widths: Vec<usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([h.len(), min_width])
                .max()
                .unwrap_or(min_width)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let head = line(header.to_vec());
    let body = rows
        .iter()
        .map(|r| line(r.iter().map(String::as_str).collect()))
        .collect();
    (head, body)
}

/// Session history, one row per session in insertion order.
pub fn history(lang: Lang, cnp: &str, records: &[SessionRecord]) -> String {
    let l = lang.labels();
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let eval = &r.evaluation;
            let mut row = vec![
                r.metrics.age.to_string(),
                display::format_fixed(r.metrics.height, 2),
                display::exact(r.metrics.weight),
            ];
            row.extend(r.folds.to_array().map(|f| display::format_fixed(f, 2)));
            row.push(display::bmi(eval.bmi));
            row.push(eval.body_density.map_or("-".into(), display::body_density));
            row.push(eval.pat.map_or("-".into(), display::pat_percent));
            row
        })
        .collect();
    let (head, body) = table(&l.history_columns, &rows, 4);
    let rule = "=".repeat(head.len());

    let mut out = format!("{}: {cnp}\n{head}\n{rule}\n", l.subject);
    for line in body {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&rule);
    out.push('\n');
    out
}

pub fn flags(lang: Lang, flagged: &[(Subject, SessionRecord, Option<WeightBand>)]) -> String {
    let l = lang.labels();
    if flagged.is_empty() {
        return format!("{}\n", l.no_flags);
    }
    let rows: Vec<Vec<String>> = flagged
        .iter()
        .map(|(subject, record, band)| {
            vec![
                subject.cnp.to_string(),
                record.date.to_string(),
                display::bmi(record.evaluation.bmi),
                lang.class_label(record.evaluation.bmi_class.principal)
                    .to_string(),
                band.as_ref()
                    .map_or(l.band_unavailable, |b| lang.band_label(b.level))
                    .to_string(),
            ]
        })
        .collect();
    let (head, body) = table(&l.flags_columns, &rows, 3);
    let mut out = format!("{head}\n{}\n", "-".repeat(head.len()));
    for line in body {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
