//! File formats: matrix JSON in, measure / decomposition / report JSON out.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use jointspec::linalg::{CMatrix, MatrixJson};
use jointspec::spectral::CommutingTuple;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

/// A JSON argument given either inline (starting with `{` or `[`) or as a file.
pub fn json_arg<T: DeserializeOwned>(arg: &str) -> CliResult<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| CliError::parse("<inline>", e))
    } else {
        read_json(Path::new(arg))
    }
}

pub fn read_matrix(path: &Path) -> CliResult<CMatrix> {
    let j: MatrixJson = read_json(path)?;
    j.to_square().map_err(|e| CliError::parse(path, e))
}

/// Matrices from the given files, validated as a commuting tuple.
pub fn read_tuple(paths: &[PathBuf], commute_tol: f64) -> CliResult<CommutingTuple> {
    if paths.is_empty() {
        return Err(CliError::Usage("no input matrices given".into()));
    }
    let mats = paths.iter().map(|p| read_matrix(p)).collect::<CliResult<Vec<_>>>()?;
    if let Some((p, m)) = paths.iter().zip(&mats).find(|(_, m)| m.nrows() != mats[0].nrows()) {
        return Err(CliError::parse(p, format!("dimension {} differs from {}", m.nrows(), mats[0].nrows())));
    }
    Ok(CommutingTuple::with_tol(mats, commute_tol)?)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Write JSON to `path`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = to_json_string(value);
    match path {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> CliResult<()> {
    write_bytes(path, to_json_string(&MatrixJson::from_matrix(m)).as_bytes())
}
