use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StudyReport;
use crate::criteria::CriterionVerdict;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Txt,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "txt" => Ok(OutputFormat::Txt),
            other => Err(Error::Config(format!("unknown format {other:?} (csv or txt)"))),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Key/value header record: the study identity, thresholds, outcome and joined verdict.
fn header_rows(r: &StudyReport) -> Vec<(String, String)> {
    let c = &r.config;
    let mut rows = vec![
        ("name".to_string(), c.experiment.name.clone()),
        ("kind".into(), format!("{:?}", c.experiment.kind).to_lowercase()),
        ("operator".into(), c.operator.name().into()),
        ("seed".into(), c.corpus.seed.to_string()),
        ("budget".into(), c.corpus.budget.to_string()),
        ("stability_ratio".into(), c.thresholds.stability_ratio.to_string()),
        ("blow_up_ratio".into(), c.thresholds.blow_up_ratio.to_string()),
        ("outcome".into(), r.trend.outcome.as_str().into()),
        ("last_over_previous".into(), r.trend.last_over_previous.to_string()),
        ("overall_growth".into(), r.trend.overall_growth.to_string()),
        ("monotone".into(), r.trend.monotone.to_string()),
    ];
    if let Some(v) = &r.verdict {
        rows.push(("criterion".into(), v.name.clone()));
        rows.push(("criterion_status".into(), v.status.as_str().into()));
        rows.push(("criterion_strength".into(), format!("{:?}", v.strength).to_lowercase()));
        rows.push(("criterion_statement".into(), v.citation.clone()));
    }
    for (k, n) in r.notes.iter().enumerate() {
        rows.push((format!("note{k}"), n.clone()));
    }
    rows
}

fn write_study_csv(r: &StudyReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, v) in header_rows(r) {
        w.write_record([k, v]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_levels_csv(r: &StudyReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["level", "size", "mesh", "estimate", "trials", "skipped", "argmax_id", "argmax_tag"])
        .map_err(csv_err)?;
    for e in &r.estimates {
        w.write_record([
            e.level.to_string(),
            e.size.to_string(),
            e.mesh.to_string(),
            e.value.to_string(),
            e.trials.to_string(),
            e.skipped.to_string(),
            e.argmax_id.to_string(),
            e.argmax_tag.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn verdict_text(out: &mut String, v: &CriterionVerdict, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}{} [{}]: {}", v.name, v.status.as_str(), v.citation);
    for w in &v.witnesses {
        let _ = writeln!(out, "{pad}  {} = {}", w.name, w.value);
    }
    for (k, f) in &v.flags {
        let _ = writeln!(out, "{pad}  flag {k} = {f}");
    }
    for n in &v.notes {
        let _ = writeln!(out, "{pad}  note: {n}");
    }
    for p in &v.parts {
        verdict_text(out, p, depth + 1);
    }
}

/// Structured text report: config echo, per-level table, trend and joined verdict.
pub fn report_text(r: &StudyReport) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "study: {}", r.config.experiment.name);
    for (k, v) in header_rows(r).into_iter().skip(1) {
        let _ = writeln!(out, "{k}: {v}");
    }
    let _ = writeln!(out, "\nlevels:");
    let _ = writeln!(out, "{:>5} {:>8} {:>14} {:>14} {:>7}  argmax", "level", "size", "mesh", "estimate", "trials");
    for e in &r.estimates {
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>14.6e} {:>14.8} {:>7}  {}",
            e.level, e.size, e.mesh, e.value, e.trials, e.argmax_tag
        );
    }
    if let Some(v) = &r.verdict {
        let _ = writeln!(out, "\ncriterion:");
        verdict_text(&mut out, v, 1);
    }
    let _ = writeln!(out, "\nconfig:");
    out.push_str(&r.config.to_toml()?);
    Ok(out)
}

/// Two columns, `size estimate`, one line per level.
pub fn plot_data(r: &StudyReport) -> String {
    let mut out = String::from("# size estimate\n");
    for e in &r.estimates {
        let _ = writeln!(out, "{} {}", e.size, e.value);
    }
    out
}

/// Writes the study tables into `dir` and returns the paths written.
///
/// `Csv` gives `study.csv` (header record) and `levels.csv`; `Txt` gives `report.txt`.
/// Both also write `estimates.dat` for plotting. Nothing written depends on the clock.
pub fn write_report(r: &StudyReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match format {
        OutputFormat::Csv => {
            let study = dir.join("study.csv");
            write_study_csv(r, &study)?;
            files.push(study);
            let levels = dir.join("levels.csv");
            write_levels_csv(r, &levels)?;
            files.push(levels);
        }
        OutputFormat::Txt => {
            let txt = dir.join("report.txt");
            std::fs::write(&txt, report_text(r)?)?;
            files.push(txt);
        }
    }
    let dat = dir.join("estimates.dat");
    std::fs::write(&dat, plot_data(r))?;
    files.push(dat);
    Ok(files)
}
