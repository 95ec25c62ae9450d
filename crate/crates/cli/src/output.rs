use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use varexp::criteria::CriterionVerdict;
use varexp::harness::OutputFormat;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Txt,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Txt => OutputFormat::Txt,
        }
    }
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Txt => "txt",
        }
    }
}

/// Rows of strings under a header, written as CSV or as an aligned text table.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Two-column key/value table.
    pub fn pairs(rows: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut t = Table::new(&["key", "value"]);
        for (k, v) in rows {
            t.push(vec![k, v]);
        }
        t
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.txt`.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let bytes = match format {
            Format::Csv => self.to_csv()?,
            Format::Txt => self.to_text().into_bytes(),
        };
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn witness_list(v: &CriterionVerdict) -> String {
    v.witnesses.iter().map(|w| format!("{}={}", w.name, w.value)).collect::<Vec<_>>().join("; ")
}

/// One row per verdict; parts follow their parent with a dotted name.
pub fn verdict_table(verdicts: &[CriterionVerdict]) -> Table {
    fn add(t: &mut Table, v: &CriterionVerdict, prefix: &str) {
        let name = if prefix.is_empty() { v.name.clone() } else { format!("{prefix}.{}", v.name) };
        t.push(vec![
            name.clone(),
            v.status.as_str().into(),
            format!("{:?}", v.strength).to_lowercase(),
            witness_list(v),
            v.citation.clone(),
        ]);
        for p in &v.parts {
            add(t, p, &name);
        }
    }
    let mut t = Table::new(&["name", "status", "strength", "witnesses", "condition"]);
    for v in verdicts {
        add(&mut t, v, "");
    }
    t
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
