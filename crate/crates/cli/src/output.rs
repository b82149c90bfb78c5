use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use weylkit_core::{Error, Result};

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("output failed: {e}"))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes `body` (a JSON object) with the configuration under `"config"`.
pub fn json(out: Option<&Path>, config: &Value, body: Value) -> Result<()> {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("config".into(), config.clone());
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &Value::Object(obj)).map_err(io_error)?;
    writeln!(w).map_err(io_error)
}

/// Writes a CSV table preceded by a `# config: {...}` comment line.
pub fn csv(out: Option<&Path>, config: &Value, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = sink(out)?;
    writeln!(w, "# config: {config}").map_err(io_error)?;
    let mut table = csv::Writer::from_writer(w);
    table.write_record(header).map_err(io_error)?;
    for row in rows {
        table.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(io_error)?;
    }
    table.flush().map_err(io_error)
}

pub fn report_error(code: &str, message: &str) {
    eprintln!("{}", json!({ "error": code, "message": message.trim() }));
}
