use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::Command;
use crate::error::{CliError, CliResult};

/// Record of one run: the parsed command plus any values derived from it.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub argv: Vec<String>,
    pub output_dir: String,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub resolved: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replayed_from: Option<String>,
    pub status: String,
}

impl Manifest {
    pub fn new(argv: Vec<String>, output_dir: &Path, command: Command) -> Self {
        Manifest {
            program: "sgp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            argv,
            output_dir: output_dir.display().to_string(),
            command,
            resolved: Map::new(),
            replayed_from: None,
            status: "running".into(),
        }
    }

    pub fn resolve<T: Serialize>(&mut self, key: &str, value: T) {
        self.resolved.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable value"),
        );
    }

    pub fn load(path: &Path) -> CliResult<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(path, e.to_string()))
    }
}
