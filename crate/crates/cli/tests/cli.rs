//! End-to-end checks of the `bjj` binary and of the scenario pipeline.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bjj_lab::preset;
use bjj_lab::run::run_scenario;
use bjj_lab::sweep::{run_sweep, Simulate};

fn bjj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bjj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(out: &[u8]) -> String {
    String::from_utf8_lossy(out).into_owned()
}

fn run_into(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    bjj(&all)
}

#[test]
fn presets_are_listed() {
    let out = bjj(&["presets"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    for name in preset::RUN_PRESETS.iter().chain(preset::SWEEP_PRESETS) {
        assert!(s.contains(name), "{name} missing from\n{s}");
    }
}

#[test]
fn unknown_preset_lists_the_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--preset", "fig9z"]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(
        err.contains("fig9z") && err.contains("fig1a") && err.contains("fig7b"),
        "{err}"
    );
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad_key.json");
    fs::write(&bad_key, r#"{"preset": "fig1c", "omega": 3.0}"#).unwrap();
    let bad_value = dir.path().join("bad_value.cfg");
    fs::write(&bad_value, "preset = fig1c\nw0 = 1.5\n").unwrap();
    for cfg in [&bad_key, &bad_value] {
        let out = run_into(
            &dir.path().join("out"),
            &["--config", cfg.to_str().unwrap()],
        );
        assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    }
    let out = run_into(
        dir.path(),
        &["--preset", "fig1c", "--override", "no_such_field=1"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn guard_stop_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(
        dir.path(),
        &["--preset", "fig4c", "--override", "guard=stop"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("singular_terminated"), "{report}");
}

#[test]
fn runs_are_byte_identical_and_analyze_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run_into(d, &["--preset", "fig1c", "--tmax", "300"]);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    for f in ["timeseries.csv", "report.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let csv = fs::read_to_string(a.join("timeseries.csv")).unwrap();
    assert!(csv.starts_with("t,w,phi,lambda\n"));
    assert_eq!(csv.lines().count(), 1 + 6001);

    let out = bjj(&[
        "analyze",
        "--in",
        a.join("timeseries.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(
        text(&out.stdout),
        fs::read_to_string(a.join("report.json")).unwrap()
    );

    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"fig1c\"") && manifest.contains("timeseries.csv"));
}

#[test]
fn key_value_config_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(
        &cfg,
        "# fig1c at a shorter horizon\npreset = fig1c\nt_end = 300\n",
    )
    .unwrap();
    let from_cfg = dir.path().join("cfg");
    let from_preset = dir.path().join("preset");
    assert!(run_into(&from_cfg, &["--config", cfg.to_str().unwrap()])
        .status
        .success());
    assert!(
        run_into(&from_preset, &["--preset", "fig1c", "--tmax", "300"])
            .status
            .success()
    );
    assert_eq!(
        fs::read(from_cfg.join("timeseries.csv")).unwrap(),
        fs::read(from_preset.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn sweep_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = bjj(&[
        "sweep",
        "--preset",
        "fig6a",
        "--grid",
        "40x30",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let diagram = fs::read_to_string(dir.path().join("diagram.csv")).unwrap();
    assert!(diagram.starts_with("gamma,epsilon,lambda_plus,label\n"));
    assert_eq!(diagram.lines().count(), 1 + 40 * 30);
    let boundary = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(boundary.lines().nth(1), Some("0,0.25,0.25"));
    let marks = fs::read_to_string(dir.path().join("marks.csv")).unwrap();
    let labels: Vec<&str> = marks
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(
        labels,
        ["stable", "parametric_unstable", "parametric_unstable"]
    );
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn fig6a_line_switches_at_the_threshold_epsilon() {
    let cfg = preset::sweep("fig6a").unwrap();
    let base = cfg.base();
    let gamma = 0.245;
    let label = |e: f64| {
        bjj_core::slowflow::diagram_cell(&base, gamma, e)
            .label
            .as_str()
    };
    let switch = (1..2000)
        .map(|k| k as f64 * 5e-5)
        .find(|&e| label(e) == "parametric_unstable")
        .unwrap();
    // λ₊ = 0 with ρ = κ/(ω_p ε) and γ₁ = (γ − 1/4)/ε gives
    // ε² = (κ²/4ω_p² + (γ − 1/4)²) / (1/4 + (ω_p η/N)²/16).
    let (wp, k, rc) = (cfg.omega_p, cfg.kappa, cfg.omega_p * cfg.eta_over_n);
    let detuning = gamma - 0.25;
    let eps_min =
        ((k * k / (4.0 * wp * wp) + detuning * detuning) / (0.25 + rc * rc / 16.0)).sqrt();
    assert!(
        switch >= eps_min && switch - eps_min <= 5e-5,
        "switch {switch} vs {eps_min}"
    );
    // At the tip the switch sits at h_t/ω_p²; detuning pushes it up.
    let tip = (1..2000)
        .map(|k| k as f64 * 5e-5)
        .find(|&e| {
            bjj_core::slowflow::diagram_cell(&base, 0.25, e)
                .label
                .as_str()
                == "parametric_unstable"
        })
        .unwrap();
    assert!((tip - 0.594 / (wp * wp)).abs() < 1e-4, "tip switch {tip}");
    assert!(switch > tip);
}

#[test]
fn fig6b_simulated_points_are_periodic_then_chaotic() {
    let cfg = preset::sweep("fig6b").unwrap();
    let result = run_sweep(&cfg, &Simulate::Points(vec![(0.12, 0.24), (0.12, 0.37)])).unwrap();
    let labels: Vec<&str> = result.points.iter().map(|p| p.sim_label.as_str()).collect();
    assert_eq!(labels, ["sustained_periodic", "chaotic"]);
}

#[test]
fn simulation_agrees_with_slow_flow_near_the_tip() {
    for name in ["fig1b", "fig1c", "fig3b", "fig3c", "fig5b", "fig5c"] {
        let cfg = preset::scenario(name).unwrap();
        let (_, a) = run_scenario(&cfg).unwrap();
        let r = a.report;
        let gamma = r.gamma.unwrap();
        assert!((gamma - 0.25).abs() < 0.05, "{name}: γ {gamma}");
        let expected = match r.slow_flow_label.as_deref() {
            Some("parametric_unstable") => "sustained_periodic",
            Some("stable") => "decay_to_fixed_point",
            other => panic!("{name}: slow-flow label {other:?}"),
        };
        assert_eq!(r.label.as_deref(), Some(expected), "{name}");
    }
}

#[test]
fn fig3c_sustains_after_a_self_trapped_transient() {
    let (_, a) = run_scenario(&preset::scenario("fig3c").unwrap()).unwrap();
    assert_eq!(a.report.label.as_deref(), Some("sustained_periodic"));
    assert!(a.report.early_mean_w.unwrap() > 0.1);
}
