use std::path::{Path, PathBuf};

use holoalign_core::model::{emit_label_file, parse_label_file, Annotation, CoordSpace, LabelSource};
use serde::Serialize;
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Creates the directory that will hold `path`.
pub fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => ensure_dir(dir),
        None => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Normalized label file. A missing path is an I/O error, not an empty set.
pub fn read_labels(path: &Path, source: LabelSource) -> Result<Vec<Annotation>, CliError> {
    let text = read_text(path)?;
    parse_label_file(&text, CoordSpace::Normalized, source)
        .map_err(|e| CliError::Core(holoalign_core::Error::Parse { path: path.to_path_buf(), message: e.to_string() }))
}

pub fn write_labels(path: &Path, anns: &[Annotation]) -> Result<(), CliError> {
    write_text(path, &emit_label_file(anns)?)
}

/// Files in `dir` with extension `ext`, sorted by name.
pub fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| CliError::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == ext) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn parse_size(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("size {text:?} is not WIDTHxHEIGHT"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a PipelineConfig,
    stats: Value,
}

/// Run summary as pretty JSON. Holds no paths or timestamps, so repeated
/// runs write identical bytes.
pub fn write_summary(path: &Path, command: &str, config: &PipelineConfig, stats: Value) -> Result<(), CliError> {
    let s = Summary { command, version: env!("CARGO_PKG_VERSION"), config, stats };
    let mut text = serde_json::to_string_pretty(&s).expect("summary serializes");
    text.push('\n');
    write_text(path, &text)
}
