//! Deterministic result emission: CSV for archival and whitespace-separated
//! per-method series files for plotting tools.
//!
//! Floats print with nine significant digits in scientific notation, so a
//! table always serializes to identical bytes. Failed cells carry `NA`.

use super::table::{ResultRow, ResultTable};
use crate::analytics::Method;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("i/o error writing results: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed results file: {0}")]
    Malformed(String),
}

/// Nine significant digits, stable across platforms.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format_value(x),
        None => "NA".into(),
    }
}

/// Write the table as CSV with header `sweep_value,method,tier,value,ci95`.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sweep_value", "method", "tier", "value", "ci95"])?;
    for r in &table.rows {
        w.write_record([
            format_value(r.sweep_value),
            r.method.as_str().to_string(),
            r.tier.clone(),
            cell(r.value),
            r.ci95.map(format_value).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a CSV produced by [`emit_csv`].
pub fn parse_csv(path: &Path) -> Result<ResultTable, EmitError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut table = ResultTable::default();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(EmitError::Malformed(format!(
                "expected 5 columns, got {}",
                rec.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, EmitError> {
            s.parse::<f64>()
                .map_err(|e| EmitError::Malformed(format!("bad float '{s}': {e}")))
        };
        let method: Method = rec[1]
            .parse()
            .map_err(|e: String| EmitError::Malformed(e))?;
        table.rows.push(ResultRow {
            sweep_value: parse(&rec[0])?,
            method,
            tier: rec[2].to_string(),
            value: match &rec[3] {
                "NA" => None,
                s => Some(parse(s)?),
            },
            ci95: match &rec[4] {
                "" => None,
                s => Some(parse(s)?),
            },
        });
    }
    Ok(table)
}

/// Write one whitespace-separated series file per method:
/// `<stem>__<method>.dat` with columns `sweep_value` followed by the tier
/// columns in table order (plus `ci95_total` when present).
pub fn emit_plotdata(table: &ResultTable, dir: &Path, stem: &str) -> Result<Vec<String>, EmitError> {
    std::fs::create_dir_all(dir)?;
    let tiers = table.tier_columns();
    let mut written = Vec::new();
    for method in table.methods() {
        let rows: Vec<&ResultRow> = table.rows.iter().filter(|r| r.method == method).collect();
        let mut sweep_values: Vec<f64> = Vec::new();
        for r in &rows {
            if !sweep_values.iter().any(|&v| v == r.sweep_value) {
                sweep_values.push(r.sweep_value);
            }
        }
        let has_ci = rows.iter().any(|r| r.ci95.is_some());
        let name = format!("{stem}__{}.dat", method.as_str());
        let mut f = std::fs::File::create(dir.join(&name))?;
        write!(f, "# sweep_value")?;
        for t in &tiers {
            write!(f, " {t}")?;
        }
        if has_ci {
            write!(f, " ci95_total")?;
        }
        writeln!(f)?;
        for &sv in &sweep_values {
            write!(f, "{}", format_value(sv))?;
            let mut ci_total = None;
            for t in &tiers {
                let row = rows
                    .iter()
                    .find(|r| r.sweep_value == sv && &r.tier == t);
                let v = row.and_then(|r| r.value);
                if t == "total" {
                    ci_total = row.and_then(|r| r.ci95);
                }
                write!(f, " {}", cell(v))?;
            }
            if has_ci {
                write!(f, " {}", cell(ci_total))?;
            }
            writeln!(f)?;
        }
        written.push(name);
    }
    Ok(written)
}
