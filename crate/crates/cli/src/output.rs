//! Writes a bundle to files or the data stream.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{usage, Result};
use crate::report::Bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub format: Format,
}

/// `dir/stem.ext` becomes `dir/stem_<suffix>.ext`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes tables and plots; returns diagnostics meant for stderr.
pub fn emit(bundle: &Bundle, opts: &OutputOptions, data: &mut dyn Write) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    let mut out = String::new();
    match &opts.out_csv {
        Some(path) => {
            for (i, table) in bundle.tables.iter().enumerate() {
                let target = if i == 0 {
                    path.clone()
                } else {
                    sibling(path, &table.name)
                };
                write_file(&target, &table.to_csv())?;
            }
        }
        None if opts.format == Format::Csv => {
            for (i, table) in bundle.tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&table.to_csv());
            }
        }
        None => {}
    }
    if opts.format == Format::Json {
        out.push_str(&bundle.to_json());
    }
    match &opts.out_svg {
        Some(path) if bundle.plots.is_empty() => {
            notes.extend(bundle.notes.iter().cloned());
            notes.push(format!("no plot written to {}", path.display()));
        }
        Some(path) => {
            for (i, plot) in bundle.plots.iter().enumerate() {
                let target = if i == 0 {
                    path.clone()
                } else {
                    sibling(path, &plot.name)
                };
                write_file(&target, &plot.svg)?;
            }
        }
        None => {}
    }
    if !out.is_empty() {
        // a closed pipe on the data stream is not an error of the run
        let _ = data.write_all(out.as_bytes()).and_then(|()| data.flush());
    }
    Ok(notes)
}
