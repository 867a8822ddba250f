//! Run configuration: a TOML file with one `[command]` section, plus
//! `-p key=value` overrides and Monte Carlo flags.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{usage, CliError, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Power,
    AssuranceClosed,
    Curve,
    AssuranceSim,
    AssuranceUnbalanced,
    AssuranceUnknownvar,
    Adcock,
    Betabin,
    Goal,
    GenDesign,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Power => "power",
            Command::AssuranceClosed => "assurance-closed",
            Command::Curve => "curve",
            Command::AssuranceSim => "assurance-sim",
            Command::AssuranceUnbalanced => "assurance-unbalanced",
            Command::AssuranceUnknownvar => "assurance-unknownvar",
            Command::Adcock => "adcock",
            Command::Betabin => "betabin",
            Command::Goal => "goal",
            Command::GenDesign => "gen-design",
        }
    }
}

/// Monte Carlo settings given on the command line; they win over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McFlags {
    pub seed: Option<u64>,
    pub mc_iter: Option<usize>,
    pub datasets: Option<usize>,
    pub workers: Option<usize>,
}

pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub mc: McFlags,
}

/// Parses `key=value`; the value is read as a TOML value, or kept as a
/// string when it is not one.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("override {text:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(usage(format!("override {text:?} has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Extracts the section for `command` from config text.
pub fn section_from_str(command: Command, text: &str, origin: &str) -> Result<Table> {
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Parse(format!("{origin}: {}", e.to_string().trim_end())))?;
    let name = command.name();
    let section = match doc.remove(name) {
        Some(Value::Table(t)) => t,
        Some(_) => return Err(usage(format!("{origin}: `{name}` must be a [{name}] section"))),
        None => return Err(usage(format!("{origin}: no [{name}] section for command {name}"))),
    };
    if let Some(other) = doc.keys().next() {
        return Err(usage(format!(
            "{origin}: unexpected top-level key or section `{other}`; the file must hold only [{name}]"
        )));
    }
    Ok(section)
}

impl RunConfig {
    pub fn load(command: Command, path: Option<&Path>, overrides: &[String], mc: McFlags) -> Result<Self> {
        let (mut table, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (section_from_str(command, &text, &p.display().to_string())?, base)
            }
            None => (Table::new(), PathBuf::from(".")),
        };
        for o in overrides {
            let (key, value) = parse_override(o)?;
            table.insert(key, value);
        }
        Ok(Self {
            command,
            params: Params::new(command.name(), table, base_dir),
            mc,
        })
    }

    pub fn from_table(command: Command, table: Table, mc: McFlags) -> Self {
        Self {
            command,
            params: Params::new(command.name(), table, PathBuf::from(".")),
            mc,
        }
    }
}
