//! CSV tables and JSON summaries. Floats carry 17 significant digits so
//! reruns can be diffed byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use affwalk_core::report::EstimateRow;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const ESTIMATE_HEADER: [&str; 9] = [
    "step_n",
    "omega_coords",
    "exact",
    "estimate",
    "ratio",
    "regime",
    "dist_boundary",
    "det_nB",
    "phi",
];

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Integer coordinates joined by `;`.
pub fn fmt_coords(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(";")
}

pub fn estimate_record(r: &EstimateRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_coords(&r.omega.0),
        fmt_f(r.exact),
        fmt_f(r.estimate),
        fmt_f(r.ratio),
        r.regime.clone(),
        fmt_f(r.dist_boundary),
        fmt_f(r.det_nb),
        fmt_f(r.phi),
    ]
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<PathBuf> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

pub fn write_estimate_csv(path: &Path, rows: &[EstimateRow]) -> CliResult<PathBuf> {
    write_csv(path, &ESTIMATE_HEADER, rows.iter().map(estimate_record))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<PathBuf> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}
