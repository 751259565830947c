//! JSON run manifests.
//!
//! ```json
//! { "command": "delta", "parameters": { "X": 20, "q": 3, "a": 1 },
//!   "output": "delta.csv", "format": "csv", "threads": 4, "seed": 7 }
//! ```
//!
//! Parameter keys are the command's flag names. Relative output paths are
//! resolved against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::args::{Command, Threads};
use crate::commands::{CliError, CliResult};
use crate::table::Format;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<Value>,
    pub seed: Option<u64>,
}

/// A manifest resolved into a parsed command and its global settings.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<Threads>,
    pub seed: Option<u64>,
}

fn render(key: &str, v: &Value) -> CliResult<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) => Ok(items
            .iter()
            .map(|i| render(key, i))
            .collect::<CliResult<Vec<_>>>()?
            .join(",")),
        _ => Err(CliError::Usage(format!(
            "parameter `{key}`: expected a number, string or list"
        ))),
    }
}

impl RunManifest {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parse the command through the same grammar as the command line, so
    /// unknown or malformed parameters are rejected by name.
    pub fn resolve(&self, base: Option<&Path>) -> CliResult<ResolvedRun> {
        if self.command == "run" {
            return Err(CliError::Usage("manifest: `run` cannot be nested".into()));
        }
        let mut argv = vec!["klab".to_string(), self.command.clone()];
        for (k, v) in &self.parameters {
            argv.push(format!("--{k}"));
            argv.push(render(k, v)?);
        }
        let cli = <crate::args::Cli as clap::Parser>::try_parse_from(&argv)
            .map_err(|e| {
                let msg = e.render().to_string();
                let msg = msg.trim().trim_start_matches("error: ").to_string();
                CliError::Usage(format!("manifest: {msg}"))
            })?;
        let threads = match &self.threads {
            None => None,
            Some(v) => Some(
                render("threads", v)?
                    .parse::<Threads>()
                    .map_err(|e| CliError::Usage(format!("manifest key `threads`: {e}")))?,
            ),
        };
        let output = self.output.as_ref().map(|p| match base {
            Some(b) if p.is_relative() && p.as_os_str() != "-" => b.join(p),
            _ => p.clone(),
        });
        Ok(ResolvedRun {
            command: cli.command,
            output,
            format: self.format,
            threads,
            seed: self.seed,
        })
    }
}
