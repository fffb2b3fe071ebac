use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct CommandOutput {
    pub result: Value,
    pub table: Option<Table>,
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(format!("serialization: {e}")))
}

fn csv_path(out: &Path) -> PathBuf {
    let p = out.with_extension("csv");
    if p == out {
        out.with_extension("table.csv")
    } else {
        p
    }
}

fn write_csv(path: &Path, t: &Table) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(&t.header).map_err(err)?;
    for r in &t.rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Wraps the result with the tool name, version, command and the resolved
/// config, then writes JSON (and CSV when a table exists and an output path
/// is given).
pub fn emit(command: &str, cfg: &RunConfig, out: CommandOutput, path: Option<&Path>) -> Result<(), CliError> {
    let doc = json!({
        "tool": "fibtrace",
        "version": fibtrace::VERSION,
        "command": command,
        "config": to_value(cfg)?,
        "result": out.result,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(format!("serialization: {e}")))? + "\n";
    match path {
        None => print!("{text}"),
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", p.display())))?;
            if let Some(t) = &out.table {
                write_csv(&csv_path(p), t)?;
            }
        }
    }
    Ok(())
}
