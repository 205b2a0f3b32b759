//! CSV and JSON writers. CSV uses `.` as the decimal point, no thousands
//! separators and LF line endings, and starts with a `#` comment line that
//! echoes the schema version and every parameter.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::generator::{Trajectory, RESULT_SCHEMA};
use crate::stats::DegreeHistogram;

use super::CliError;

/// Shortest round-trip form; integral values keep a trailing `.0`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn header(command: &str, echo: &impl Serialize) -> String {
    let params = serde_json::to_string(echo).expect("parameters serialize");
    format!("# rankgraph schema={RESULT_SCHEMA} command={command} params={params}\n")
}

/// `k,count,tail_count[,theory_tail]` for `k = 1..=max_degree`.
pub fn degree_csv(header: &str, hist: &DegreeHistogram, theory: Option<&[f64]>) -> String {
    let mut out = String::from(header);
    out.push_str("k,count,tail_count");
    if theory.is_some() {
        out.push_str(",theory_tail");
    }
    out.push('\n');
    for k in 1..=hist.max_degree() as usize {
        write!(out, "{},{},{}", k, hist.count(k as u32), hist.at_least(k)).unwrap();
        if let Some(th) = theory {
            write!(out, ",{}", num(th[k - 1])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(header: &str, traj: &Trajectory) -> String {
    let mut out = String::from(header);
    out.push_str("t,rank,degree\n");
    for p in &traj.points {
        writeln!(out, "{},{},{}", p.t, p.rank, p.degree).unwrap();
    }
    out
}

pub fn table_csv(header: &str, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::from(header);
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
