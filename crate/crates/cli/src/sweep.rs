//! `(γ, ε)` stability charts from the slow flow, optionally checked cell by
//! cell against full simulations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bjj_core::slowflow::{
    boundary_polyline, diagram_cell, DiagramBase, DiagramCell, DiagramSpec, StabilityDiagram,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, ScenarioConfig};
use crate::error::{LabError, Result};
use crate::output::write_file;
use crate::run::run_scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub name: String,
    pub lambda0: f64,
    pub eta_over_n: f64,
    pub omega_p: f64,
    pub kappa: f64,
    pub gamma_range: (f64, f64),
    pub epsilon_range: (f64, f64),
    pub n_gamma: usize,
    pub n_epsilon: usize,
    /// Values of `γ` belonging to the figure's scenarios.
    pub gamma_lines: Vec<f64>,
    /// Values of `ε` marked along each `γ` line.
    pub marked_epsilons: Vec<f64>,
    /// Template for `--simulate`: everything but `ω_p` and `h` is kept.
    pub simulation: ScenarioConfig,
}

impl SweepConfig {
    pub fn base(&self) -> DiagramBase {
        DiagramBase {
            omega_p: self.omega_p,
            kappa: self.kappa,
            eta_over_n: self.eta_over_n,
        }
    }

    pub fn spec(&self) -> Result<DiagramSpec> {
        let spec = DiagramSpec {
            gamma_range: self.gamma_range,
            epsilon_range: self.epsilon_range,
            n_gamma: self.n_gamma,
            n_epsilon: self.n_epsilon,
            base: self.base(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The scenario simulated at `(γ, ε)`: the template's junction and
    /// initial state with `ω_p = ω_J/√γ` and `h = ε ω_p²`. `None` when
    /// `γ ≤ 0` or the template's mode has no frequency.
    pub fn simulation_at(&self, gamma: f64, epsilon: f64) -> Option<ScenarioConfig> {
        if !(gamma > 0.0) || epsilon < 0.0 {
            return None;
        }
        let t = &self.simulation;
        let l = t.lambda0().ok()?;
        let wj2 = match t.mode {
            Mode::Zero | Mode::Running => 1.0 + l,
            Mode::Pi => 1.0 - l,
            Mode::SelfTrappedPi => l * l - 1.0,
        };
        if !(wj2 > 0.0) {
            return None;
        }
        let omega_p = (wj2 / gamma).sqrt();
        let mut c = t.clone();
        c.name = format!("{}_g{gamma}_e{epsilon}", self.name);
        c.preset = None;
        c.omega_p = omega_p;
        c.h = epsilon * omega_p * omega_p;
        c.notes = vec![format!("sweep cell gamma = {gamma}, epsilon = {epsilon}")];
        c.validate().ok()?;
        Some(c)
    }
}

/// Outcome of one simulated point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedPoint {
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda_plus: f64,
    pub label: String,
    pub sim_label: String,
    pub lyapunov: Option<f64>,
    pub omega_p: Option<f64>,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Simulate {
    No,
    /// Every grid cell.
    Grid,
    /// Only the listed `(γ, ε)` points.
    Points(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub diagram: StabilityDiagram,
    /// Per-cell simulation labels in diagram order, for [`Simulate::Grid`].
    pub sim_labels: Option<Vec<String>>,
    /// `(γ line, ε mark)` cells.
    pub marks: Vec<DiagramCell>,
    pub points: Vec<SimulatedPoint>,
}

/// Label for a simulated cell; `n/a` where no scenario maps to the cell.
fn simulate_point(cfg: &SweepConfig, gamma: f64, epsilon: f64) -> SimulatedPoint {
    let cell = diagram_cell(&cfg.base(), gamma, epsilon);
    let mut p = SimulatedPoint {
        gamma,
        epsilon,
        lambda_plus: cell.lambda_plus,
        label: cell.label.as_str().into(),
        sim_label: "n/a".into(),
        lyapunov: None,
        omega_p: None,
        h: None,
    };
    if let Some(sc) = cfg.simulation_at(gamma, epsilon) {
        p.omega_p = Some(sc.omega_p);
        p.h = Some(sc.h);
        p.sim_label = match run_scenario(&sc) {
            Ok((_, a)) => {
                p.lyapunov = a.report.lyapunov;
                a.report.label.unwrap_or_else(|| "inconclusive".into())
            }
            Err(e) => format!("error({})", e.exit_code()),
        };
    }
    p
}

pub fn run_sweep(cfg: &SweepConfig, simulate: &Simulate) -> Result<SweepResult> {
    let spec = cfg.spec()?;
    let base = spec.base;
    let gamma_axis = spec.gamma_axis();
    let epsilon_axis = spec.epsilon_axis();
    let rows: Vec<Vec<DiagramCell>> = epsilon_axis
        .par_iter()
        .map(|&e| {
            gamma_axis
                .iter()
                .map(|&g| diagram_cell(&base, g, e))
                .collect()
        })
        .collect();
    let cells: Vec<DiagramCell> = rows.into_iter().flatten().collect();
    let diagram = StabilityDiagram {
        boundary: boundary_polyline(&base, &epsilon_axis),
        gamma_axis,
        epsilon_axis,
        cells,
    };
    let marks = cfg
        .gamma_lines
        .iter()
        .flat_map(|&g| cfg.marked_epsilons.iter().map(move |&e| (g, e)))
        .map(|(g, e)| diagram_cell(&base, g, e))
        .collect();
    let (sim_labels, points) = match simulate {
        Simulate::No => (None, Vec::new()),
        Simulate::Grid => {
            let labels = diagram
                .cells
                .par_iter()
                .map(|c| simulate_point(cfg, c.gamma, c.epsilon).sim_label)
                .collect();
            (Some(labels), Vec::new())
        }
        Simulate::Points(pts) => {
            let points = pts
                .par_iter()
                .map(|&(g, e)| simulate_point(cfg, g, e))
                .collect();
            (None, points)
        }
    };
    Ok(SweepResult {
        diagram,
        sim_labels,
        marks,
        points,
    })
}

/// Parses `GxE`, e.g. `200x200`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let err = || LabError::Config(format!("grid `{s}` is not of the form GxE"));
    let (g, e) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let g: usize = g.trim().parse().map_err(|_| err())?;
    let e: usize = e.trim().parse().map_err(|_| err())?;
    if g == 0 || e == 0 {
        return Err(err());
    }
    Ok((g, e))
}

/// Parses `g:e[,g:e...]`.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|p| {
            let err = || LabError::Config(format!("point `{p}` is not of the form gamma:epsilon"));
            let (g, e) = p.split_once(':').ok_or_else(err)?;
            Ok((
                g.trim().parse().map_err(|_| err())?,
                e.trim().parse().map_err(|_| err())?,
            ))
        })
        .collect()
}

pub fn diagram_csv(result: &SweepResult) -> String {
    let mut out = String::from("gamma,epsilon,lambda_plus,label");
    if result.sim_labels.is_some() {
        out.push_str(",sim_label");
    }
    out.push('\n');
    for (i, c) in result.diagram.cells.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            c.gamma,
            c.epsilon,
            c.lambda_plus,
            c.label.as_str()
        );
        if let Some(l) = &result.sim_labels {
            let _ = write!(out, ",{}", l[i]);
        }
        out.push('\n');
    }
    out
}

pub fn boundary_csv(result: &SweepResult) -> String {
    let mut out = String::from("epsilon,gamma_minus,gamma_plus\n");
    for b in &result.diagram.boundary {
        let _ = writeln!(out, "{},{},{}", b.epsilon, b.gamma_minus, b.gamma_plus);
    }
    out
}

pub fn marks_csv(result: &SweepResult) -> String {
    let mut out = String::from("gamma,epsilon,lambda_plus,label\n");
    for c in &result.marks {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.gamma,
            c.epsilon,
            c.lambda_plus,
            c.label.as_str()
        );
    }
    out
}

pub fn points_csv(result: &SweepResult) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::from("gamma,epsilon,lambda_plus,label,sim_label,lyapunov,omega_p,h\n");
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.gamma,
            p.epsilon,
            p.lambda_plus,
            p.label,
            p.sim_label,
            opt(p.lyapunov),
            opt(p.omega_p),
            opt(p.h)
        );
    }
    out
}

#[derive(Debug, Serialize)]
struct SweepManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a SweepConfig,
    simulate: &'static str,
    wall_time_s: f64,
    files: Vec<String>,
}

pub fn write_sweep(
    dir: &Path,
    cfg: &SweepConfig,
    simulate: &Simulate,
    result: &SweepResult,
    wall_time_s: f64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut files = vec![
        ("diagram.csv", diagram_csv(result)),
        ("boundary.csv", boundary_csv(result)),
        ("marks.csv", marks_csv(result)),
    ];
    if !result.points.is_empty() {
        files.push(("points.csv", points_csv(result)));
    }
    let mut written = Vec::new();
    for (name, body) in &files {
        let p = dir.join(name);
        write_file(&p, body)?;
        written.push(p);
    }
    let manifest = SweepManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        simulate: match simulate {
            Simulate::No => "no",
            Simulate::Grid => "grid",
            Simulate::Points(_) => "points",
        },
        wall_time_s,
        files: files
            .iter()
            .map(|(n, _)| n.to_string())
            .chain(["manifest.json".to_string()])
            .collect(),
    };
    let p = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    text.push('\n');
    write_file(&p, &text)?;
    written.push(p);
    Ok(written)
}
