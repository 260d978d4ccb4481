//! Config parsing, job execution and deterministic output for the `oms`
//! command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_with, to_toml, JobKind, JobSpec, KindRequest, OutputFormat, Overrides};
pub use error::CliError;
pub use run::{run_job, RunOutcome};

use oms_core::presets;
use serde_json::json;

/// One line per preset: `name: description`.
pub fn presets_text() -> String {
    presets::list_presets()
        .iter()
        .map(|p| format!("{}: {}\n", p.name, p.description))
        .collect()
}

pub fn presets_json() -> String {
    let list: Vec<_> = presets::list_presets()
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "description": p.description,
                "nominal_bare_ghz": p.nominal_bare_ghz,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&list).expect("preset list serializes");
    s.push('\n');
    s
}
