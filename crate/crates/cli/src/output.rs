//! Run directories: `timeseries.csv`, `report.json` and `manifest.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bjj_core::{Drive, State, Termination, Trajectory};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{LabError, Result};
use crate::report::RunReport;

pub const TIMESERIES: &str = "timeseries.csv";
pub const REPORT: &str = "report.json";
pub const MANIFEST: &str = "manifest.json";
pub const TIMESERIES_HEADER: &str = "t,w,phi,lambda";

/// Provenance record written next to every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub termination: String,
    pub pole_passages: usize,
    pub wall_time_s: f64,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(config: &ScenarioConfig, traj: &Trajectory, wall_time_s: f64) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            termination: traj.terminated_by.as_str().into(),
            pole_passages: traj.passages.len(),
            wall_time_s,
            files: vec![TIMESERIES.into(), REPORT.into(), MANIFEST.into()],
        }
    }
}

/// CSV text for a trajectory. `Display` for `f64` prints the shortest string
/// that parses back to the same value, so the file is lossless.
pub fn timeseries_csv(traj: &Trajectory, drive: &Drive, lambda0: f64) -> String {
    let mut out = String::with_capacity(traj.len() * 64);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t,
            s.w,
            s.phi,
            drive.lambda_at(lambda0, *t)
        );
    }
    out
}

fn data_err(path: &Path, message: impl Into<String>) -> LabError {
    LabError::Data {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads a trajectory back from `timeseries.csv`.
pub fn read_timeseries(path: &Path, terminated_by: Termination) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TIMESERIES_HEADER => {}
        _ => {
            return Err(data_err(
                path,
                format!("expected header `{TIMESERIES_HEADER}`"),
            ))
        }
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(data_err(path, format!("row {}: expected 4 fields", i + 1)));
        }
        let mut v = [0.0; 3];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| data_err(path, format!("row {}: bad number `{f}`", i + 1)))?;
        }
        if times.last().is_some_and(|&t| v[0] <= t) {
            return Err(data_err(
                path,
                format!("row {}: time is not increasing", i + 1),
            ));
        }
        times.push(v[0]);
        states.push(State::new(v[1], v[2]));
    }
    if times.len() < 2 {
        return Err(data_err(path, "fewer than two samples"));
    }
    Ok(Trajectory {
        times,
        states,
        terminated_by,
        passages: Vec::new(),
    })
}

pub fn parse_termination(s: &str) -> Option<Termination> {
    [Termination::ReachedEnd, Termination::SingularityGuard]
        .into_iter()
        .find(|t| t.as_str() == s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| LabError::io(path, e))
}

/// Writes the three run files into `dir`, creating it if needed.
pub fn write_run(
    dir: &Path,
    config: &ScenarioConfig,
    traj: &Trajectory,
    report: &RunReport,
    wall_time_s: f64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let sys = config.system()?;
    let ts = dir.join(TIMESERIES);
    write_file(&ts, &timeseries_csv(traj, &sys.drive, sys.params.lambda0))?;
    let rp = dir.join(REPORT);
    write_file(&rp, &report.to_json())?;
    let mp = dir.join(MANIFEST);
    let manifest = Manifest::new(config, traj, wall_time_s);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    text.push('\n');
    write_file(&mp, &text)?;
    Ok(vec![ts, rp, mp])
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| data_err(path, e.to_string()))
}
