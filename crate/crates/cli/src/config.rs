//! Scenario configuration: a flat set of named fields, loadable from JSON or
//! `key = value` text, optionally layered on top of a preset.

use std::path::Path;

use bjj_core::diagnostics::{ClassifierSettings, PhaseSlipSettings};
use bjj_core::linear::ModeKind;
use bjj_core::model::{BjjSystem, PassageBranch};
use bjj_core::ode::{GuardPolicy, IntegratorSettings, Method};
use bjj_core::{Drive, RawParams, State, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{LabError, Result};
use crate::preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    /// End the run when `|w|` reaches the guard.
    Stop,
    /// Continue through the pole of the Bloch sphere.
    Continue,
}

/// Runge–Kutta pair used by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    Dopri5,
    Dop853,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Departure,
    Approach,
}

impl From<Branch> for PassageBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Departure => PassageBranch::Departure,
            Branch::Approach => PassageBranch::Approach,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Zero,
    Running,
    Pi,
    SelfTrappedPi,
}

impl Mode {
    pub fn kind(self) -> ModeKind {
        match self {
            Mode::Zero => ModeKind::ZeroPhase,
            Mode::Running => ModeKind::RunningPhase,
            Mode::Pi => ModeKind::PiPhase,
            Mode::SelfTrappedPi => ModeKind::SelfTrappedPi,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Zero => "zero",
            Mode::Running => "running",
            Mode::Pi => "pi",
            Mode::SelfTrappedPi => "self_trapped_pi",
        }
    }
}

/// Which damping rate enters the threshold and the slow flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConvention {
    /// `(η/N)(1 + Λ₀)`, the zero-state value.
    Zero,
    /// `(η/N)(1 − Λ₀)`, the π-state linearization.
    Linearization,
}

impl KappaConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaConvention::Zero => "zero",
            KappaConvention::Linearization => "linearization",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub preset: Option<String>,

    /// Interaction ratio used by the dynamics. Derived from `nu0 / (2 j)` when absent.
    pub lambda0: Option<f64>,
    pub j: Option<f64>,
    pub nu0: Option<f64>,
    pub n_atoms: Option<u64>,
    pub eta_over_n: f64,

    pub h: f64,
    pub zeta: Option<f64>,
    pub omega_p: f64,

    pub w0: f64,
    pub phi0: f64,

    pub t_end: f64,
    pub sample_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub guard_delta: f64,
    pub stepper: Stepper,
    pub guard: GuardMode,
    pub max_passages: usize,
    pub passage_branch: Branch,

    pub mode: Mode,
    pub kappa_convention: KappaConvention,
    pub window_fraction: f64,
    pub amplitude_tol: f64,
    pub lambda_tol: f64,
    pub decay_rate_tol: f64,
    pub min_drive_periods: f64,
    pub lyapunov: bool,
    pub lyapunov_horizon: Option<f64>,
    pub slip_min: f64,
    pub slip_window_periods: f64,
    pub plateau_periods: f64,
    /// Excursion from the mode's steady state that ends the linear (pre-slip) window.
    pub linear_window_tol: f64,
    /// Length of the transient window in linear decay times.
    pub transient_decay_times: f64,

    pub notes: Vec<String>,
    pub out_dir: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let integ = IntegratorSettings::default();
        let cls = ClassifierSettings::default();
        let slips = PhaseSlipSettings::for_period(1.0);
        ScenarioConfig {
            name: "custom".into(),
            preset: None,
            lambda0: None,
            j: None,
            nu0: None,
            n_atoms: None,
            eta_over_n: 0.0,
            h: 0.0,
            zeta: None,
            omega_p: 0.0,
            w0: 0.0,
            phi0: 0.0,
            t_end: integ.t_end,
            sample_dt: integ.sample_dt,
            rel_tol: integ.rel_tol,
            abs_tol: integ.abs_tol,
            max_step: None,
            guard_delta: integ.guard_delta,
            stepper: Stepper::Dopri5,
            guard: GuardMode::Stop,
            max_passages: 10_000,
            passage_branch: Branch::Departure,
            mode: Mode::Zero,
            kappa_convention: KappaConvention::Zero,
            window_fraction: cls.window_fraction,
            amplitude_tol: cls.amplitude_tol,
            lambda_tol: cls.lambda_tol,
            decay_rate_tol: cls.decay_rate_tol,
            min_drive_periods: cls.min_drive_periods,
            lyapunov: true,
            lyapunov_horizon: None,
            slip_min: slips.slip_min,
            slip_window_periods: slips.slip_window_periods,
            plateau_periods: slips.plateau_periods,
            linear_window_tol: 0.1,
            transient_decay_times: 10.0,
            notes: Vec::new(),
            out_dir: None,
        }
    }
}

/// Fields whose `key = value` form is always a string.
const STRING_KEYS: &[&str] = &[
    "name",
    "preset",
    "guard",
    "passage_branch",
    "mode",
    "kappa_convention",
    "out_dir",
];

fn parse_scalar(key: &str, raw: &str) -> Value {
    let raw = raw.trim();
    let unquoted = raw
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(raw);
    if STRING_KEYS.contains(&key) {
        return Value::String(unquoted.to_string());
    }
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(unquoted.to_string()))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            LabError::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(LabError::Config(format!("line {}: empty key", lineno + 1)));
        }
        if map.insert(k.to_string(), parse_scalar(k, v)).is_some() {
            return Err(LabError::Config(format!("duplicate key `{k}`")));
        }
    }
    Ok(map)
}

/// Parses a single `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    Ok((k.to_string(), parse_scalar(k, v)))
}

impl ScenarioConfig {
    /// Builds a config from raw fields, starting from the named preset when
    /// `preset` is among them.
    pub fn from_map(fields: Map<String, Value>) -> Result<Self> {
        let mut base = match fields.get("preset") {
            Some(Value::String(name)) => {
                let cfg = preset::scenario(name)?;
                match serde_json::to_value(cfg) {
                    Ok(Value::Object(m)) => m,
                    _ => unreachable!("configs serialize to objects"),
                }
            }
            Some(Value::Null) | None => Map::new(),
            Some(other) => {
                return Err(LabError::Config(format!(
                    "preset must be a string, got {other}"
                )))
            }
        };
        let explicit_h = fields.contains_key("h");
        for (k, v) in fields {
            base.insert(k, v);
        }
        let mut cfg: ScenarioConfig = serde_json::from_value(Value::Object(base))
            .map_err(|e| LabError::Config(e.to_string()))?;
        // `zeta` is the drive amplitude relative to Λ₀.
        if let Some(zeta) = cfg.zeta {
            let implied = cfg.lambda0()? * zeta;
            if !explicit_h {
                cfg.h = implied;
            } else if (cfg.h - implied).abs() > 1e-9 * (1.0 + implied.abs()) {
                return Err(LabError::Config(format!(
                    "h = {} disagrees with lambda0 * zeta = {implied}",
                    cfg.h
                )));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Accepts a JSON object or `key = value` text.
    pub fn parse(text: &str) -> Result<Self> {
        let fields = if text.trim_start().starts_with('{') {
            match serde_json::from_str::<Value>(text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(LabError::Config("JSON config must be an object".into())),
                Err(e) => return Err(LabError::Config(e.to_string())),
            }
        } else {
            parse_key_values(text)?
        };
        Self::from_map(fields)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value` overrides and re-validates.
    pub fn with_overrides(&self, overrides: &[(String, Value)]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut map = match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("configs serialize to objects"),
        };
        for (k, v) in overrides {
            if k == "preset" {
                return Err(LabError::Config("`preset` cannot be overridden".into()));
            }
            if !map.contains_key(k) {
                return Err(LabError::Config(format!("unknown field `{k}`")));
            }
            map.insert(k.clone(), v.clone());
        }
        let cfg: ScenarioConfig = serde_json::from_value(Value::Object(map))
            .map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn raw_params(&self) -> Option<RawParams> {
        let (j, nu0) = (self.j?, self.nu0?);
        Some(RawParams {
            j,
            nu0,
            n: self.n_atoms.unwrap_or(2),
            eta_over_n: self.eta_over_n,
            zeta: self.zeta.unwrap_or(0.0),
            omega_p: self.omega_p,
        })
    }

    /// Λ₀ implied by the raw energies, if given.
    pub fn lambda0_raw(&self) -> Option<f64> {
        let raw = self.raw_params()?;
        Some(raw.nu0 / (2.0 * raw.j))
    }

    pub fn lambda0(&self) -> Result<f64> {
        match (self.lambda0, self.lambda0_raw()) {
            (Some(l), _) => Ok(l),
            (None, Some(l)) => Ok(l),
            (None, None) => Err(LabError::Config(
                "either lambda0 or both j and nu0 must be given".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if let Some(raw) = self.raw_params() {
            raw.validate()?;
        }
        let lambda0 = self.lambda0()?;
        SystemParams::new(lambda0, self.eta_over_n)?;
        Drive::new(self.h, self.omega_p)?;
        if !(self.w0.abs() < 1.0 - self.guard_delta) || !self.phi0.is_finite() {
            return bad("initial state must satisfy |w0| < 1 - guard_delta");
        }
        self.integrator().validate()?;
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return bad("window_fraction must lie in (0, 1]");
        }
        if !(self.amplitude_tol > 0.0 && self.lambda_tol >= 0.0 && self.decay_rate_tol >= 0.0) {
            return bad("classifier tolerances must be positive");
        }
        if !(self.slip_min > 0.0 && self.slip_window_periods > 0.0 && self.plateau_periods > 0.0) {
            return bad("phase-slip settings must be positive");
        }
        if let Some(hz) = self.lyapunov_horizon {
            if !(hz > 0.0) {
                return bad("lyapunov_horizon must be positive");
            }
        }
        if !(self.linear_window_tol > 0.0 && self.transient_decay_times > 0.0) {
            return bad("linear_window_tol and transient_decay_times must be positive");
        }
        Ok(())
    }

    pub fn system(&self) -> Result<BjjSystem> {
        let params = SystemParams::new(self.lambda0()?, self.eta_over_n)?;
        let drive = Drive::new(self.h, self.omega_p)?;
        Ok(BjjSystem::new(params, drive).with_branch(self.passage_branch.into()))
    }

    pub fn initial_state(&self) -> State {
        State::new(self.w0, self.phi0)
    }

    pub fn integrator(&self) -> IntegratorSettings {
        let mut s = IntegratorSettings::for_drive(self.omega_p, self.t_end, self.sample_dt);
        s.rel_tol = self.rel_tol;
        s.abs_tol = self.abs_tol;
        s.guard_delta = self.guard_delta;
        if let Some(m) = self.max_step {
            s.max_step = m;
        }
        s.method = match self.stepper {
            Stepper::Dopri5 => Method::Dopri5,
            Stepper::Dop853 => Method::Dop853,
        };
        s.guard = match self.guard {
            GuardMode::Stop => GuardPolicy::Stop,
            GuardMode::Continue => GuardPolicy::Continue {
                max_passages: self.max_passages,
            },
        };
        s
    }

    pub fn classifier(&self) -> ClassifierSettings {
        ClassifierSettings {
            window_fraction: self.window_fraction,
            amplitude_tol: self.amplitude_tol,
            lambda_tol: self.lambda_tol,
            decay_rate_tol: self.decay_rate_tol,
            min_drive_periods: self.min_drive_periods,
        }
    }

    pub fn phase_slips(&self, natural_period: f64) -> PhaseSlipSettings {
        let mut s = PhaseSlipSettings::for_period(natural_period);
        s.slip_min = self.slip_min;
        s.slip_window_periods = self.slip_window_periods;
        s.plateau_periods = self.plateau_periods;
        s.ramp_tol = s.slip_min / (2.0 * s.slip_window_periods * natural_period);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_sets_the_drive_amplitude() {
        let cfg = ScenarioConfig::parse("preset = fig1c\nzeta = 0.1").unwrap();
        assert!((cfg.h - 0.1 * cfg.lambda0().unwrap()).abs() < 1e-15);
        assert_eq!(cfg.system().unwrap().drive.h, cfg.h);

        let l0 = cfg.lambda0().unwrap();
        let same = format!("preset = fig1c\nzeta = 0.1\nh = {}", 0.1 * l0);
        assert!(ScenarioConfig::parse(&same).is_ok());
        let clash = "preset = fig1c\nzeta = 0.1\nh = 0.01";
        assert!(matches!(
            ScenarioConfig::parse(clash),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn key_value_text_round_trips_through_json() {
        let text = "\
# explicit junction
name = probe
lambda0 = 5
eta_over_n = 0.02
h = 0.7
omega_p = 4.95
w0 = 0.5
mode = zero
guard = \"stop\"
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.name, "probe");
        assert_eq!(cfg.lambda0, Some(5.0));
        assert_eq!(cfg.guard, GuardMode::Stop);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::parse(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::parse("lambda0 = 1\nomega_p = 2\nbogus = 3").unwrap_err();
        assert!(
            matches!(err, LabError::Config(ref m) if m.contains("bogus")),
            "{err}"
        );
        let err = ScenarioConfig::parse(r#"{"lambda0": 1, "omega_p": 2, "bogus": 3}"#).unwrap_err();
        assert!(matches!(err, LabError::Config(_)));
    }

    #[test]
    fn preset_key_layers_fields() {
        let cfg = ScenarioConfig::parse("preset = fig1c\nh = 0.8").unwrap();
        assert_eq!(cfg.h, 0.8);
        assert_eq!(cfg.omega_p, 4.95);
        assert_eq!(cfg.preset.as_deref(), Some("fig1c"));
    }

    #[test]
    fn lambda_from_raw_energies() {
        let cfg =
            ScenarioConfig::parse("j = 0.024\nnu0 = 0.24\nn_atoms = 2000\nomega_p = 1").unwrap();
        assert!((cfg.lambda0().unwrap() - 5.0).abs() < 1e-12);
        let err = ScenarioConfig::parse("omega_p = 1").unwrap_err();
        assert!(matches!(err, LabError::Config(_)));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            "lambda0 = 1\nw0 = 1.0",
            "lambda0 = 1\nh = -0.1",
            "lambda0 = 1\nguard_delta = 0.01",
            "lambda0 = 1\nmode = sideways",
            "lambda0 = 1\nduplicate = 1\nduplicate = 2",
            "j = 0\nnu0 = 1",
        ] {
            let err = ScenarioConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), crate::error::exit::CONFIG, "{text}: {err}");
        }
    }

    #[test]
    fn overrides_apply_and_check_names() {
        let cfg = preset::scenario("fig1b").unwrap();
        let out = cfg
            .with_overrides(&[
                parse_override("h=0.65").unwrap(),
                parse_override("name=x").unwrap(),
            ])
            .unwrap();
        assert_eq!(out.h, 0.65);
        assert_eq!(out.name, "x");
        assert!(cfg
            .with_overrides(&[parse_override("nope=1").unwrap()])
            .is_err());
        assert!(parse_override("novalue").is_err());
    }
}
