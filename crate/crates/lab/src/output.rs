//! CSV/JSON serialization helpers and atomic file output.

use std::io::Write;
use std::path::Path;

use kink_core::nalgebra::DMatrix;
use kink_core::C64;
use serde_json::{json, Value};

use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// `{rows, cols, data}` with `data` row-major `[re, im]` pairs.
pub fn matrix_json(m: &DMatrix<C64>) -> Value {
    let data: Vec<Value> = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| complex_json(m[(r, c)]))
        .collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
