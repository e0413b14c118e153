//! Reading slot values from files given on the command line.

use std::fs;
use std::io::Read;
use std::path::Path;

use raforge_core::catalog::{ContextInput, DimensionInput};
use raforge_core::comparison::dimension_key;
use raforge_core::ingest::parse_response;
use serde_json::Value;

use crate::CliError;

/// Reads `path`, or stdin when it is `-`.
pub fn read_text(path: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .map_err(|e| CliError::Op(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Op(format!("{path}: {e}")))
}

/// Pairs `--context` files with `--label`s by position. Trailing line
/// breaks are dropped from each body.
pub fn contexts(files: &[String], labels: &[String], stdin: &mut dyn Read) -> Result<Vec<ContextInput>, CliError> {
    if labels.len() > files.len() {
        return Err(CliError::Usage(format!(
            "{} --label values for {} --context files",
            labels.len(),
            files.len()
        )));
    }
    files
        .iter()
        .enumerate()
        .map(|(i, file)| {
            let body = read_text(file, stdin)?;
            Ok(ContextInput {
                label: labels.get(i).cloned(),
                body: body.trim_end().to_string(),
                source: (file != "-").then(|| file.clone()),
            })
        })
        .collect()
}

fn from_json(text: &str) -> Result<Vec<DimensionInput>, String> {
    match serde_json::from_str::<Value>(text).map_err(|e| e.to_string())? {
        Value::Array(_) => serde_json::from_str(text).map_err(|e| e.to_string()),
        Value::Object(map) => Ok(map
            .into_iter()
            .map(|(name, def)| DimensionInput::new(name, def.as_str().unwrap_or_default()))
            .collect()),
        _ => Err("expected an array of {name, definition} or a name-to-definition object".into()),
    }
}

fn from_csv(text: &str) -> Result<Vec<DimensionInput>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let name = record.get(0).unwrap_or_default().trim();
        let is_header = i == 0 && matches!(name.to_lowercase().as_str(), "dimension" | "name");
        if name.is_empty() || is_header {
            continue;
        }
        out.push(DimensionInput::new(name, record.get(1).unwrap_or_default()));
    }
    Ok(out)
}

fn from_markdown(text: &str) -> Result<Vec<DimensionInput>, String> {
    let parsed = parse_response(text).map_err(|e| e.to_string())?;
    Ok(parsed
        .dimensions
        .into_iter()
        .map(|d| DimensionInput::new(d.name, d.definition))
        .collect())
}

/// Dimensions from a `.json`, `.csv` or pipe-markdown file.
pub fn dimensions(path: &str, stdin: &mut dyn Read) -> Result<Vec<DimensionInput>, CliError> {
    let text = read_text(path, stdin)?;
    let ext = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_lowercase();
    let parsed = match ext.as_str() {
        "json" => from_json(&text),
        "csv" => from_csv(&text),
        _ => from_markdown(&text),
    };
    parsed.map_err(|e| CliError::Op(format!("{path}: {e}")))
}

/// Keeps the dimensions named in `select`, in selection order.
pub fn select(dims: Vec<DimensionInput>, select: &[String]) -> Result<Vec<DimensionInput>, CliError> {
    if select.is_empty() {
        return Ok(dims);
    }
    select
        .iter()
        .map(|name| {
            let key = dimension_key(name);
            dims.iter()
                .find(|d| dimension_key(&d.name) == key)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("--select `{name}` matches no dimension")))
        })
        .collect()
}
