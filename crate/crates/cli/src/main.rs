use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bjj_core::Termination;
use bjj_lab::config::{parse_override, ScenarioConfig};
use bjj_lab::error::{exit, LabError, Result};
use bjj_lab::output::{self, MANIFEST, REPORT};
use bjj_lab::preset;
use bjj_lab::run::{analyze_trajectory, run_scenario};
use bjj_lab::sweep::{self, Simulate};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bjj",
    version,
    about = "Parametrically driven, dissipative bosonic Josephson junction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write timeseries, report and manifest.
    Run(RunArgs),
    /// Scan the (gamma, epsilon) stability chart.
    Sweep(SweepArgs),
    /// Re-run the diagnostics on a stored timeseries.
    Analyze(AnalyzeArgs),
    /// List the built-in presets with their parameters.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON object or key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default runs/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the integration horizon.
    #[arg(long)]
    tmax: Option<f64>,
    /// Field override, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    preset: String,
    /// Grid resolution as GAMMAxEPSILON.
    #[arg(long)]
    grid: Option<String>,
    /// Classify by full simulation as well (every cell, or only --points).
    #[arg(long)]
    simulate: bool,
    /// Points to simulate, as gamma:epsilon[,gamma:epsilon...]. Implies --simulate.
    #[arg(long)]
    points: Option<String>,
    /// Output directory (default sweeps/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// A timeseries.csv written by `run`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Scenario config; defaults to the manifest next to the timeseries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write report.json here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), _) => preset::scenario(name)?,
        (None, Some(path)) => ScenarioConfig::load(path)?,
        (None, None) => unreachable!("clap requires one of --preset and --config"),
    };
    let mut overrides = a
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(t) = a.tmax {
        overrides.push(("t_end".into(), serde_json::json!(t)));
    }
    cfg = cfg.with_overrides(&overrides)?;
    let dir = a
        .out
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("runs").join(&cfg.name));

    let start = Instant::now();
    let (traj, analysis) = run_scenario(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    output::write_run(&dir, &cfg, &traj, &analysis.report, wall)?;

    let r = &analysis.report;
    println!("scenario      {}", r.name);
    println!(
        "label         {}",
        r.label.as_deref().unwrap_or("inconclusive")
    );
    println!(
        "termination   {} ({} pole passages)",
        r.termination, r.pole_passages
    );
    println!("h / h_t       {} / {}", r.h, r.h_threshold);
    if let Some(l) = r.lyapunov {
        println!("lyapunov      {l}");
    }
    if let Some(f) = r.dominant_frequency {
        println!("frequency     {f}");
    }
    if r.slip_count > 0 {
        println!("phase slips   {} {:?}", r.slip_count, r.slip_jump);
    }
    for e in &r.diagnostic_errors {
        eprintln!("note: {e}");
    }
    println!("output        {}", dir.display());
    Ok(analysis.exit_code)
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let mut cfg = preset::sweep(&a.preset)?;
    if let Some(g) = &a.grid {
        (cfg.n_gamma, cfg.n_epsilon) = sweep::parse_grid(g)?;
    }
    let simulate = match (&a.points, a.simulate) {
        (Some(p), _) => Simulate::Points(sweep::parse_points(p)?),
        (None, true) => Simulate::Grid,
        (None, false) => Simulate::No,
    };
    let dir = a.out.unwrap_or_else(|| Path::new("sweeps").join(&cfg.name));
    let start = Instant::now();
    let result = sweep::run_sweep(&cfg, &simulate)?;
    let wall = start.elapsed().as_secs_f64();
    sweep::write_sweep(&dir, &cfg, &simulate, &result, wall)?;
    println!(
        "{}: {}x{} cells, {} boundary points",
        cfg.name,
        cfg.n_gamma,
        cfg.n_epsilon,
        result.diagram.boundary.len()
    );
    for m in &result.marks {
        println!(
            "  gamma {} epsilon {}: {} ({})",
            m.gamma,
            m.epsilon,
            m.label.as_str(),
            m.lambda_plus
        );
    }
    for p in &result.points {
        println!(
            "  simulated gamma {} epsilon {}: {} (slow flow {}, lyapunov {:?})",
            p.gamma, p.epsilon, p.sim_label, p.label, p.lyapunov
        );
    }
    println!("output {}", dir.display());
    Ok(exit::SUCCESS)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<i32> {
    let manifest_path = a.input.with_file_name(MANIFEST);
    let (cfg, termination, passages) = match &a.config {
        Some(p) => (ScenarioConfig::load(p)?, Termination::ReachedEnd, 0),
        None => {
            let m = output::read_manifest(&manifest_path)?;
            let term = output::parse_termination(&m.termination).ok_or_else(|| LabError::Data {
                path: manifest_path.clone(),
                message: format!("unknown termination `{}`", m.termination),
            })?;
            (m.config, term, m.pole_passages)
        }
    };
    let traj = output::read_timeseries(&a.input, termination)?;
    let analysis = analyze_trajectory(&cfg, &traj, passages)?;
    let json = analysis.report.to_json();
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| LabError::Io {
                path: dir.clone(),
                source: e,
            })?;
            output::write_file(&dir.join(REPORT), &json)?;
        }
        None => print!("{json}"),
    }
    Ok(analysis.exit_code)
}

fn cmd_presets() -> Result<i32> {
    println!(
        "{:<7} {:>8} {:>6} {:>7} {:>8} {:>6} {:>7} {:>7}  mode",
        "name", "lambda0", "eta/N", "omega_p", "h", "w0", "phi0", "t_end"
    );
    for name in preset::RUN_PRESETS {
        let c = preset::scenario(name)?;
        println!(
            "{:<7} {:>8} {:>6} {:>7} {:>8.4} {:>6} {:>7.4} {:>7}  {}",
            name,
            c.lambda0()?,
            c.eta_over_n,
            c.omega_p,
            c.h,
            c.w0,
            c.phi0,
            c.t_end,
            c.mode.as_str()
        );
    }
    for name in preset::SWEEP_PRESETS {
        let s = preset::sweep(name)?;
        println!(
            "{:<7} sweep gamma {:?} epsilon {:?} grid {}x{}, omega_p {}, kappa {}",
            name, s.gamma_range, s.epsilon_range, s.n_gamma, s.n_epsilon, s.omega_p, s.kappa
        );
    }
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Presets => cmd_presets(),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
