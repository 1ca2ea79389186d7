use serde::{Deserialize, Serialize};

/// A measured quantity next to its closed-form expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub measured: f64,
    pub expected: f64,
    pub rel_error: f64,
}

impl Comparison {
    pub fn new(measured: f64, expected: f64) -> Self {
        Comparison {
            measured,
            expected,
            rel_error: (measured - expected).abs() / expected.abs(),
        }
    }
}

/// Everything `run` learns about one scenario. Serialized with a fixed field
/// order; quantities that could not be measured are `null`, and the reason
/// lands in `diagnostic_errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub preset: Option<String>,
    pub mode: String,
    pub kappa_convention: String,

    pub lambda0: f64,
    /// `N U₀ / 2J` from the raw energies, when they were given.
    pub lambda0_raw: Option<f64>,
    pub eta_over_n: f64,
    pub h: f64,
    pub omega_p: f64,
    pub w0: f64,
    pub phi0: f64,
    pub t_end: f64,

    pub kappa: f64,
    /// Undamped frequency of the analysed mode.
    pub omega_j: Option<f64>,
    pub mode_omega: Option<f64>,
    pub mode_tau: Option<f64>,
    pub mode_envelope_rate: Option<f64>,
    pub h_threshold: f64,
    /// Threshold with `Λ₀` taken from the raw energies.
    pub h_threshold_raw: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub slow_flow_label: Option<String>,
    pub slow_flow_lambda_plus: Option<f64>,

    pub termination: String,
    pub pole_passages: usize,
    pub samples: usize,

    pub label: Option<String>,
    pub center_w: Option<f64>,
    pub center_phi: Option<f64>,
    pub amplitude: Option<f64>,
    pub window_rate: Option<f64>,
    pub lyapunov: Option<f64>,
    pub dominant_frequency: Option<f64>,

    pub transient_window_end: Option<f64>,
    pub transient_frequency: Option<f64>,
    pub transient_rate: Option<f64>,
    pub linear_window_end: Option<f64>,
    pub linear_rate: Option<f64>,

    pub slip_count: usize,
    pub slip_t_mid: Vec<f64>,
    pub slip_jump: Vec<f64>,
    pub slip_pre_plateau: Vec<f64>,
    pub slip_post_plateau: Vec<f64>,

    pub early_window_end: Option<f64>,
    pub early_mean_w: Option<f64>,
    pub late_mean_w: Option<f64>,

    /// `h` against `h_t`.
    pub cmp_drive_threshold: Option<Comparison>,
    /// Sustained response frequency against `ω_p/2`.
    pub cmp_subharmonic: Option<Comparison>,
    /// Undriven transient frequency against the linear mode frequency.
    pub cmp_mode_frequency: Option<Comparison>,
    /// Undriven transient envelope rate against `−1/τ`.
    pub cmp_mode_rate: Option<Comparison>,
    /// Early growth away from an unstable state against `+1/τ`.
    pub cmp_growth_rate: Option<Comparison>,

    pub diagnostic_errors: Vec<String>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
