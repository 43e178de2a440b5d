use std::fs;
use std::path::Path;

use cubic_tba::model::SCHEMA_VERSION;
use cubic_tba::Error;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    /// Bad arguments or files that parse but do not make sense.
    Usage(String),
    /// A check ran and failed, like an invalid spectrum.
    Validation(String, Value),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message, details) = match self {
            CliError::Core(e) => (e.kind(), e.to_string(), Value::Null),
            CliError::Io(m) => ("Io", m.clone(), Value::Null),
            CliError::Usage(m) => ("InvalidInput", m.clone(), Value::Null),
            CliError::Validation(m, d) => ("ValidationFailed", m.clone(), d.clone()),
        };
        let mut err = json!({ "kind": kind, "message": message });
        if !details.is_null() {
            err["details"] = details;
        }
        serde_json::to_string(&json!({ "schema_version": SCHEMA_VERSION, "error": err })).unwrap()
    }
}

/// Pretty JSON with `schema_version` first, to a file or stdout.
pub fn emit<T: Serialize>(out: Option<&Path>, body: &T) -> Result<(), CliError> {
    let mut value = serde_json::to_value(body).map_err(|e| CliError::Io(e.to_string()))?;
    let mut doc = serde_json::Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    if let Value::Object(fields) = &mut value {
        fields.remove("schema_version");
        doc.append(fields);
    } else {
        doc.insert("data".into(), value);
    }
    let text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap() + "\n";
    write_text(out, &text)
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
