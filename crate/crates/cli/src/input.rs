use std::io::Read;
use std::path::Path;

use majorana_core::dynamics::DriveField;
use majorana_core::spinstate::StateRecord;
use majorana_core::stellar::{find_stars, stars_to_state, ConstellationRecord};
use majorana_core::{Constellation, Convention, SpinState};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Reads every input source and accumulates a digest over the raw bytes
/// in the order they were read.
#[derive(Default)]
pub struct Sources {
    digest: Sha256,
}

impl Sources {
    /// Reads `path`, or standard input when the path is absent or `-`.
    pub fn read(&mut self, path: Option<&Path>) -> CliResult<Vec<u8>> {
        let bytes = match path {
            Some(p) if p != Path::new("-") => std::fs::read(p).map_err(|e| CliError::io(p, e))?,
            _ => {
                let mut buf = Vec::new();
                std::io::stdin()
                    .read_to_end(&mut buf)
                    .map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
                buf
            }
        };
        self.digest.update((bytes.len() as u64).to_le_bytes());
        self.digest.update(&bytes);
        Ok(bytes)
    }

    pub fn sha256(self) -> String {
        self.digest.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A parsed input file: either a state or a constellation.
#[derive(Debug, Clone)]
pub enum Document {
    State(SpinState),
    Constellation(Constellation),
}

impl Document {
    pub fn state(&self) -> CliResult<SpinState> {
        match self {
            Document::State(s) => Ok(s.clone()),
            Document::Constellation(c) => Ok(stars_to_state(c)?),
        }
    }

    pub fn constellation(&self, tolerance: f64, conv: Convention) -> CliResult<Constellation> {
        match self {
            Document::State(s) => Ok(find_stars(&s.to_polynomial(), tolerance, conv)?),
            Document::Constellation(c) => Ok(c.with_convention(conv)),
        }
    }
}

fn parse_value(bytes: &[u8], what: &str) -> CliResult<Value> {
    serde_json::from_slice(bytes).map_err(|e| CliError::json(what, e))
}

/// Parses a state or constellation, also accepting the output envelope of
/// a previous run so commands can be piped. Returns the convention named
/// by an envelope, if any.
pub fn parse_document(bytes: &[u8], conv: Convention) -> CliResult<(Document, Option<Convention>)> {
    let mut value = parse_value(bytes, "input")?;
    let mut found = None;
    if let Some(obj) = value.as_object_mut() {
        if let Some(Value::Object(result)) = obj.get("result") {
            let result = Value::Object(result.clone());
            found = obj.get("convention").and_then(Value::as_str).and_then(Convention::parse);
            value = result;
        }
    }
    let conv = found.unwrap_or(conv);
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::new("MALFORMED_JSON", "input must be a JSON object"))?;
    let doc = if obj.contains_key("amplitudes") {
        let rec: StateRecord = serde_json::from_value(value).map_err(|e| CliError::json("state file", e))?;
        Document::State(SpinState::from_record(&rec)?)
    } else if obj.contains_key("stars") {
        let rec: ConstellationRecord =
            serde_json::from_value(value).map_err(|e| CliError::json("constellation file", e))?;
        Document::Constellation(Constellation::from_record(&rec, conv)?)
    } else {
        return Err(CliError::new(
            "MALFORMED_JSON",
            "input has neither \"amplitudes\" nor \"stars\"",
        ));
    };
    Ok((doc, found))
}

pub fn parse_drive(bytes: &[u8]) -> CliResult<DriveField> {
    let drive: DriveField = serde_json::from_slice(bytes).map_err(|e| CliError::json("drive file", e))?;
    drive.validate()?;
    Ok(drive)
}
