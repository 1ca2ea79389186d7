//! Single-scenario pipeline: integrate, then run every diagnostic on the
//! stored samples.

use bjj_core::diagnostics::{
    classify_asymptotic, detect_phase_slips, dominant_frequency, envelope, lyapunov_max,
    mean_imbalance, LyapunovEstimate, LyapunovSettings, RegimeLabel,
};
use bjj_core::linear::{mode_analysis, threshold_amplitude, DampingSign, ModeAnalysis};
use bjj_core::model::Channel;
use bjj_core::ode::{integrate_bjj, resample, UniformSeries};
use bjj_core::slowflow::{classify_point, slow_flow_coeffs};
use bjj_core::{Termination, Trajectory};

use crate::config::{KappaConvention, Mode, ScenarioConfig};
use crate::error::{exit, Result};
use crate::report::{Comparison, RunReport};

/// Report plus the exit status it implies.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: RunReport,
    pub exit_code: i32,
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory> {
    cfg.validate()?;
    Ok(integrate_bjj(
        &cfg.system()?,
        cfg.initial_state(),
        &cfg.integrator(),
    )?)
}

/// Integrates and analyses `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Trajectory, Analysis)> {
    let traj = simulate(cfg)?;
    let analysis = analyze_trajectory(cfg, &traj, traj.passages.len())?;
    Ok((traj, analysis))
}

fn omega_j(mode: Mode, lambda0: f64) -> Option<f64> {
    match mode {
        Mode::Zero | Mode::Running => Some((1.0 + lambda0).sqrt()),
        Mode::Pi => (lambda0 < 1.0).then(|| (1.0 - lambda0).sqrt()),
        Mode::SelfTrappedPi => (lambda0 > 1.0).then(|| (lambda0 * lambda0 - 1.0).sqrt()),
    }
}

fn kappa(cfg: &ScenarioConfig, lambda0: f64) -> f64 {
    match cfg.kappa_convention {
        KappaConvention::Zero => cfg.eta_over_n * (1.0 + lambda0),
        KappaConvention::Linearization => mode_analysis(cfg.mode.kind(), lambda0, cfg.eta_over_n)
            .ok()
            .and_then(|m| m.tau)
            .map_or(0.0, |tau| 2.0 / tau),
    }
}

/// Imbalance of the state the analysed mode oscillates about.
fn mode_center(mode: Mode, lambda0: f64, w0: f64) -> f64 {
    match mode {
        Mode::SelfTrappedPi if lambda0 > 1.0 => {
            (1.0 - 1.0 / (lambda0 * lambda0)).sqrt().copysign(w0)
        }
        _ => 0.0,
    }
}

/// Runs the diagnostics on an existing trajectory. `pole_passages` is passed
/// separately because stored data only keep the count.
pub fn analyze_trajectory(
    cfg: &ScenarioConfig,
    traj: &Trajectory,
    pole_passages: usize,
) -> Result<Analysis> {
    cfg.validate()?;
    let lambda0 = cfg.lambda0()?;
    let sys = cfg.system()?;
    let drive = sys.drive;
    let mut errors: Vec<String> = Vec::new();
    let mut note_err = |what: &str, e: &dyn std::fmt::Display| errors.push(format!("{what}: {e}"));

    let mode: Option<ModeAnalysis> = match mode_analysis(cfg.mode.kind(), lambda0, cfg.eta_over_n) {
        Ok(m) => Some(m),
        Err(e) => {
            note_err("mode analysis", &e);
            None
        }
    };
    let wj = omega_j(cfg.mode, lambda0);
    let kappa = kappa(cfg, lambda0);
    let h_threshold = threshold_amplitude(kappa, cfg.omega_p);
    let h_threshold_raw = cfg
        .lambda0_raw()
        .map(|l| threshold_amplitude(self::kappa(cfg, l), cfg.omega_p));

    let (gamma, epsilon) = match (wj, cfg.omega_p > 0.0) {
        (Some(w), true) => (
            Some(w * w / (cfg.omega_p * cfg.omega_p)),
            Some(cfg.h / (cfg.omega_p * cfg.omega_p)),
        ),
        _ => (None, None),
    };
    let mut slow_flow = None;
    if cfg.h > 0.0 {
        match wj.ok_or(bjj_core::Error::Domain(
            "mode frequency undefined at this lambda0",
        )) {
            Ok(w) => match slow_flow_coeffs(cfg.h, cfg.omega_p, kappa, cfg.eta_over_n, w) {
                Ok(co) => slow_flow = Some(classify_point(co.gamma, co.epsilon, co.rho, co.c)),
                Err(e) => note_err("slow flow", &e),
            },
            Err(e) => note_err("slow flow", &e),
        }
    }

    let mut report = RunReport {
        name: cfg.name.clone(),
        preset: cfg.preset.clone(),
        mode: cfg.mode.as_str().into(),
        kappa_convention: cfg.kappa_convention.as_str().into(),
        lambda0,
        lambda0_raw: cfg.lambda0_raw(),
        eta_over_n: cfg.eta_over_n,
        h: cfg.h,
        omega_p: cfg.omega_p,
        w0: cfg.w0,
        phi0: cfg.phi0,
        t_end: cfg.t_end,
        kappa,
        omega_j: wj,
        mode_omega: mode.map(|m| m.omega),
        mode_tau: mode.and_then(|m| m.tau),
        mode_envelope_rate: mode.map(|m| m.envelope_rate()),
        h_threshold,
        h_threshold_raw,
        gamma,
        epsilon,
        slow_flow_label: slow_flow.map(|p| p.label.as_str().into()),
        slow_flow_lambda_plus: slow_flow.map(|p| p.lambda_plus),
        termination: traj.terminated_by.as_str().into(),
        pole_passages,
        samples: traj.len(),
        label: None,
        center_w: None,
        center_phi: None,
        amplitude: None,
        window_rate: None,
        lyapunov: None,
        dominant_frequency: None,
        transient_window_end: None,
        transient_frequency: None,
        transient_rate: None,
        linear_window_end: None,
        linear_rate: None,
        slip_count: 0,
        slip_t_mid: Vec::new(),
        slip_jump: Vec::new(),
        slip_pre_plateau: Vec::new(),
        slip_post_plateau: Vec::new(),
        early_window_end: None,
        early_mean_w: None,
        late_mean_w: None,
        cmp_drive_threshold: (h_threshold > 0.0).then(|| Comparison::new(cfg.h, h_threshold)),
        cmp_subharmonic: None,
        cmp_mode_frequency: None,
        cmp_mode_rate: None,
        cmp_growth_rate: None,
        diagnostic_errors: Vec::new(),
        notes: cfg.notes.clone(),
    };

    let mut exit_code = exit::SUCCESS;
    let lyap_enabled = cfg.lyapunov;
    let classification = classify_asymptotic(traj, &drive, &cfg.classifier(), || {
        if !lyap_enabled {
            return Ok(LyapunovEstimate {
                lambda_max: f64::NEG_INFINITY,
                horizon: 0.0,
                renorm_interval: 0.0,
            });
        }
        let horizon = cfg.lyapunov_horizon.unwrap_or(cfg.t_end);
        let settings = LyapunovSettings::for_drive(&drive, horizon, cfg.integrator());
        lyapunov_max(&sys, cfg.initial_state().as_array(), 0.0, &settings)
    });
    let label = match classification {
        Ok(c) => {
            report.label = Some(c.label.as_str().into());
            report.center_w = Some(c.center.0);
            report.center_phi = Some(c.center.1);
            report.amplitude = Some(c.amplitude);
            report.window_rate = c.window_rate;
            report.lyapunov = c.lyapunov.filter(|l| l.is_finite());
            if c.label == RegimeLabel::SingularTerminated {
                exit_code = exit::SINGULARITY;
            }
            Some(c.label)
        }
        Err(e) => {
            exit_code = crate::error::LabError::from(e.clone()).exit_code();
            note_err("classification", &e);
            None
        }
    };
    if traj.terminated_by == Termination::SingularityGuard {
        exit_code = exit::SINGULARITY;
    }

    let series = resample(traj, Channel::W, cfg.sample_dt)
        .and_then(|w| Ok((w, resample(traj, Channel::Phi, cfg.sample_dt)?)));
    let (w, phi) = match series {
        Ok(s) => s,
        Err(e) => {
            note_err("resampling", &e);
            report.diagnostic_errors = errors;
            return Ok(Analysis { report, exit_code });
        }
    };
    let (t0, t1) = (w.t0, w.t_end());
    let window_start = t1 - cfg.window_fraction * (t1 - t0);

    if matches!(
        label,
        Some(RegimeLabel::SustainedPeriodic | RegimeLabel::Chaotic)
    ) {
        match w
            .window(window_start, t1)
            .and_then(|s| dominant_frequency(&s))
        {
            Ok(f) => {
                report.dominant_frequency = Some(f.omega);
                if cfg.omega_p > 0.0 {
                    report.cmp_subharmonic = Some(Comparison::new(f.omega, cfg.omega_p / 2.0));
                }
            }
            Err(e) => note_err("dominant frequency", &e),
        }
    }

    if let Some(m) = mode {
        if cfg.h == 0.0 && m.damping == DampingSign::Decaying {
            if let Some(tau) = m.tau {
                let tb = (t0 + cfg.transient_decay_times * tau).min(t1);
                report.transient_window_end = Some(tb);
                match w.window(t0, tb) {
                    Ok(s) => {
                        match dominant_frequency(&s) {
                            Ok(f) => {
                                report.transient_frequency = Some(f.omega);
                                report.cmp_mode_frequency = Some(Comparison::new(f.omega, m.omega));
                            }
                            Err(e) => note_err("transient frequency", &e),
                        }
                        match envelope(&s) {
                            Ok(env) => {
                                report.transient_rate = Some(env.fitted_rate);
                                report.cmp_mode_rate =
                                    Some(Comparison::new(env.fitted_rate, m.envelope_rate()));
                            }
                            Err(e) => note_err("transient envelope", &e),
                        }
                    }
                    Err(e) => note_err("transient window", &e),
                }
            }
        }
        if m.damping == DampingSign::Growing {
            let center = mode_center(cfg.mode, lambda0, cfg.w0);
            let tb = w
                .values
                .iter()
                .position(|v| (v - center).abs() > cfg.linear_window_tol)
                .map_or(t1, |i| w.time(i));
            report.linear_window_end = Some(tb);
            match w.window(t0, tb).and_then(|s| envelope(&s)) {
                Ok(env) => {
                    report.linear_rate = Some(env.fitted_rate);
                    if cfg.h == 0.0 {
                        report.cmp_growth_rate =
                            Some(Comparison::new(env.fitted_rate, m.envelope_rate()));
                    }
                }
                Err(e) => note_err("linear growth", &e),
            }
        }
    }

    let natural_period = mode
        .map(|m| m.omega)
        .or(wj)
        .filter(|o| *o > 0.0)
        .map_or(std::f64::consts::TAU, |o| std::f64::consts::TAU / o);
    match detect_phase_slips(&phi, &cfg.phase_slips(natural_period)) {
        Ok(events) => {
            report.slip_count = events.len();
            for e in events {
                report.slip_t_mid.push(e.t_mid);
                report.slip_jump.push(e.jump);
                report.slip_pre_plateau.push(e.pre_plateau);
                report.slip_post_plateau.push(e.post_plateau);
            }
        }
        Err(e) => note_err("phase slips", &e),
    }

    early_and_late(&w, cfg.w0, window_start, &mut report, &mut note_err);

    report.diagnostic_errors = errors;
    Ok(Analysis { report, exit_code })
}

/// Mean imbalance before `w` first changes sign, and over the final window.
fn early_and_late(
    w: &UniformSeries,
    w0: f64,
    window_start: f64,
    report: &mut RunReport,
    note_err: &mut impl FnMut(&str, &dyn std::fmt::Display),
) {
    if w0 != 0.0 {
        let tb = w
            .values
            .iter()
            .position(|v| v * w0 <= 0.0)
            .map_or(w.t_end(), |i| w.time(i));
        report.early_window_end = Some(tb);
        match mean_imbalance(w, w.t0, tb) {
            Ok(m) => report.early_mean_w = Some(m),
            Err(e) => note_err("early mean", &e),
        }
    }
    match mean_imbalance(w, window_start, w.t_end()) {
        Ok(m) => report.late_mean_w = Some(m),
        Err(e) => note_err("late mean", &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset;

    #[test]
    fn mode_frequencies() {
        assert_eq!(omega_j(Mode::Zero, 5.0), Some(6f64.sqrt()));
        assert_eq!(omega_j(Mode::Pi, 2.0), None);
        assert_eq!(omega_j(Mode::SelfTrappedPi, 2.0), Some(3f64.sqrt()));
        assert!((mode_center(Mode::SelfTrappedPi, 2.0, 0.87) - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((mode_center(Mode::SelfTrappedPi, 2.0, -0.87) + 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(mode_center(Mode::Pi, 0.3, 0.1), 0.0);
    }

    #[test]
    fn kappa_conventions() {
        let mut cfg = preset::scenario("fig4a").unwrap();
        assert!((kappa(&cfg, 0.354) - 0.02 * 1.354).abs() < 1e-15);
        cfg.kappa_convention = KappaConvention::Linearization;
        assert!((kappa(&cfg, 0.354) - 0.02 * 0.646).abs() < 1e-15);
    }

    #[test]
    fn short_undriven_run_reports_transient() {
        let mut cfg = preset::scenario("fig1a").unwrap();
        cfg.t_end = 120.0;
        cfg.lyapunov = false;
        let (_, a) = run_scenario(&cfg).unwrap();
        let r = &a.report;
        assert_eq!(a.exit_code, exit::SUCCESS, "{:?}", r.diagnostic_errors);
        assert_eq!(r.label.as_deref(), Some("decay_to_fixed_point"));
        assert!(r.cmp_mode_frequency.unwrap().rel_error < 0.01);
        assert!(r.cmp_drive_threshold.is_some());
        assert!(r.lyapunov.is_none());
    }
}
