//! Output files: stable names, JSON envelopes and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const CONFIG_ECHO: &str = "config_echo.json";
pub const SOLUTION: &str = "solution.csv";
pub const REPORT: &str = "report.json";
pub const ENERGY_TRACE: &str = "energy_trace.csv";
pub const ODE_PROFILE: &str = "ode_profile.csv";
pub const ODE_REPORT: &str = "ode_report.json";
pub const PHI_FIELD: &str = "phi.csv";
pub const PHI_REPORT: &str = "phi_report.json";
pub const DECAY: &str = "decay.json";
pub const CUTOFF_REPORT: &str = "cutoff_report.json";
pub const HYPOTHESES: &str = "hypotheses.json";

/// One file to be written under the output directory.
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

impl Artifact {
    pub fn text(name: &'static str, contents: String) -> Self {
        Self { name, contents }
    }

    pub fn json<T: Serialize>(name: &'static str, value: &T) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("report serializes");
        contents.push('\n');
        Self { name, contents }
    }
}

/// Common header of every JSON report.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub version: &'static str,
    pub subcommand: &'a str,
    pub seed: u64,
    pub warnings: &'a [String],
    #[serde(flatten)]
    pub body: &'a T,
}

/// Writes `artifacts` into `dir`, creating it if needed, and returns the
/// written paths in order.
pub fn emit_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(a.name);
            fs::write(&path, &a.contents).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}

pub fn energy_trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,energy\n");
    for (k, e) in trace.iter().enumerate() {
        let _ = writeln!(out, "{k},{e:.16e}");
    }
    out
}

/// `i,j,s,y,value` rows for a scalar field on a subset of cells.
pub fn scalar_csv(rows: impl Iterator<Item = (usize, usize, f64, f64, f64)>, name: &str) -> String {
    let mut out = format!("i,j,s,y,{name}\n");
    for (i, j, s, y, v) in rows {
        let _ = writeln!(out, "{i},{j},{s:.16e},{y:.16e},{v:.16e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_has_round_trip_precision() {
        let x = 0.1 + 0.2;
        let csv = energy_trace_csv(&[x, 1.0 / 3.0]);
        let mut lines = csv.lines().skip(1);
        let first: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first.to_bits(), x.to_bits());
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn writes_into_fresh_directory() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nested").join("run");
        let paths = emit_artifacts(&target, &[Artifact::text(DECAY, "{}\n".into())]).unwrap();
        assert_eq!(paths, vec![target.join(DECAY)]);
        assert_eq!(fs::read_to_string(&paths[0]).unwrap(), "{}\n");
    }

    #[test]
    fn unwritable_path_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        let err = emit_artifacts(&file.join("sub"), &[]).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert!(err.to_string().contains("plain"));
    }
}
