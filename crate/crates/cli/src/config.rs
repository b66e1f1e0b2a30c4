//! Config-file merging and echoing of the effective settings.
//!
//! A config file holds `key = value` lines named after the long flags of the
//! chosen command. Its entries are spliced in right after the command name, so
//! anything given on the command line comes later and wins.

use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use torus_layer::textfmt::Document;

/// Returns `args` with the entries of any `--config` file inserted after the
/// command name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(cmd_pos) = command_position(&args) else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[1..]) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let doc = Document::parse(&text).with_context(|| format!("in config file {path}"))?;
    if let Some((line, row)) = doc.rows.first() {
        bail!("config file {path}, line {line}: expected `key = value`, found `{row}`");
    }
    let mut extra = Vec::new();
    for key in doc.keys() {
        let value = doc.get(key).unwrap_or_default();
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            bail!("config file {path}: `config` cannot be nested");
        }
        match value {
            "true" => extra.push(flag.into()),
            "false" => {}
            v => {
                extra.push(flag.into());
                extra.push(v.into());
            }
        }
    }
    let mut out = args[..=cmd_pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[cmd_pos + 1..]);
    Ok(out)
}

fn command_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().map(|a| a.to_string_lossy());
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            found = it.next().map(|p| p.into_owned());
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(p.to_string());
        }
    }
    found
}

/// `key = value` lines for every setting of the command, defaults included.
/// Output paths are left out so that reruns into another file match byte for
/// byte.
pub fn echo(command: &Command, matches: &ArgMatches) -> Vec<String> {
    let mut lines = vec![
        format!("torus-layer {} {}", env!("CARGO_PKG_VERSION"), command.get_name()),
    ];
    let mut ids: Vec<String> = command
        .get_arguments()
        .map(|a| a.get_id().as_str().to_string())
        .collect();
    ids.sort();
    for id in ids {
        if matches!(id.as_str(), "config" | "out" | "linear_out") {
            continue;
        }
        let Ok(Some(raw)) = matches.try_get_raw(&id) else {
            continue;
        };
        let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
        let origin = match matches.value_source(&id) {
            Some(ValueSource::DefaultValue) => " (default)",
            _ => "",
        };
        lines.push(format!("{} = {}{origin}", id.replace('_', "-"), values.join(",")));
    }
    lines
}
