//! `key = value` config files merged under the command line.
//!
//! The command line is parsed once to find `--config` and to learn which
//! arguments the user set explicitly. File entries for every other argument
//! are appended as flags and the result is parsed again, so explicit flags
//! always win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};

use crate::args::Cli;
use crate::CliError;

/// Parsed `key = value` lines. `#` and `;` start comments; `[section]`
/// headers are accepted and ignored.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", idx + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", idx + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Parses `argv`, folding in the `--config` file if one is named.
pub fn parse_with_config(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command();
    let first = cmd.clone().try_get_matches_from(&argv)?;
    let Some(path) = first.get_one::<std::path::PathBuf>("config").cloned() else {
        return Cli::from_arg_matches(&first);
    };
    let (sub_name, sub_matches) = first.subcommand().expect("subcommand is required");
    let entries = read_config(&path).map_err(|e| cmd.clone().error(clap::error::ErrorKind::Io, e.to_string()))?;

    let sub_cmd = cmd.find_subcommand(sub_name).expect("known subcommand").clone();
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        let id = key.replace('-', "_");
        let arg = sub_cmd
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_id() == id.as_str() || a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            return Err(cmd.clone().error(
                clap::error::ErrorKind::UnknownArgument,
                format!("config key `{key}` is not an option of `{sub_name}`"),
            ));
        };
        if key == "config" {
            continue;
        }
        let id = arg.get_id().as_str();
        // global args are propagated into the subcommand matches
        if sub_matches.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let long = format!("--{}", arg.get_long().unwrap_or(&key));
        if arg.get_action().takes_values() {
            extra.push(long.into());
            extra.push(value.into());
        } else if matches!(value.to_ascii_lowercase().as_str(), "true" | "yes" | "1" | "on") {
            extra.push(long.into());
        }
    }
    let mut full = argv;
    full.extend(extra);
    let matches = cmd.try_get_matches_from(full)?;
    Cli::from_arg_matches(&matches)
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
