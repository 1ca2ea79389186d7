//! Closed-form linear theory against direct integration of the linearized
//! oscillator and against brute-force root finding.

use std::f64::consts::PI;

use bjj_core::linear::{
    mode_analysis, steady_states, threshold_amplitude, LinearOscillator, ModeKind,
};
use bjj_core::model::{rhs, Drive, State, SystemParams};
use bjj_core::ode::{integrate, IntegratorSettings};
use proptest::prelude::*;

fn run_linear(osc: &LinearOscillator, t_end: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let s = IntegratorSettings {
        rel_tol: 1e-11,
        abs_tol: 1e-14,
        max_step: 0.02,
        t_end,
        sample_dt: dt,
        ..IntegratorSettings::default()
    };
    let sol = integrate(osc, [1e-3, 0.0], &s).unwrap();
    (sol.times, sol.states.iter().map(|y| y[0]).collect())
}

/// Largest `|x|` on `[ta, tb)`.
fn peak(ts: &[f64], xs: &[f64], ta: f64, tb: f64) -> f64 {
    ts.iter()
        .zip(xs)
        .filter(|(t, _)| **t >= ta && **t < tb)
        .map(|(_, x)| x.abs())
        .fold(0.0, f64::max)
}

/// Envelope ratio between the last drive period and the first one after
/// five transient periods.
fn growth_over(osc: &LinearOscillator, periods: f64) -> f64 {
    let tp = 2.0 * PI / osc.drive.omega_p;
    let t_end = (5.0 + periods) * tp;
    let (ts, xs) = run_linear(osc, t_end, tp / 200.0);
    peak(&ts, &xs, t_end - tp, t_end + tp) / peak(&ts, &xs, 5.0 * tp, 6.0 * tp)
}

#[test]
fn threshold_brackets_parametric_growth() {
    for (lambda0, eta) in [(5.0, 0.02), (25.0, 0.008), (0.5, 0.01)] {
        let probe = LinearOscillator::zero_phase(lambda0, eta, Drive::NONE);
        let omega_p = 2.0 * probe.omega_j;
        let h_t = threshold_amplitude(probe.kappa, omega_p);
        for (factor, grows) in [(0.9, false), (1.1, true)] {
            let osc = LinearOscillator {
                drive: Drive::new(factor * h_t, omega_p).unwrap(),
                ..probe
            };
            let g = growth_over(&osc, 200.0);
            assert_eq!(
                g > 1.0,
                grows,
                "Λ₀ {lambda0}, h = {factor} h_t: envelope ratio {g}"
            );
        }
    }
}

/// Upward zero crossings by linear interpolation.
fn up_crossings(ts: &[f64], xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..xs.len() {
        if xs[i - 1] < 0.0 && xs[i] >= 0.0 {
            let f = xs[i - 1] / (xs[i - 1] - xs[i]);
            out.push(ts[i - 1] + f * (ts[i] - ts[i - 1]));
        }
    }
    out
}

#[test]
fn undriven_frequency_and_decay_follow_mode_laws() {
    for (lambda0, eta) in [(5.0, 0.02), (25.0, 0.008), (2.0, 0.05)] {
        let osc = LinearOscillator::zero_phase(lambda0, eta, Drive::NONE);
        let m = mode_analysis(ModeKind::ZeroPhase, lambda0, eta).unwrap();
        let tau = m.tau.unwrap();
        let (ts, xs) = run_linear(&osc, 2.0 * tau, 1e-3);

        let up = up_crossings(&ts, &xs);
        let n = up.len() - 1;
        let omega = 2.0 * PI * n as f64 / (up[n] - up[0]);
        assert!(
            (omega / m.omega - 1.0).abs() < 0.01,
            "ω {omega} vs {}",
            m.omega
        );

        // Envelope from peaks one period apart, early and late.
        let period = 2.0 * PI / m.omega;
        let (t1, t2) = (0.1 * tau, 1.8 * tau);
        let a1 = peak(&ts, &xs, t1, t1 + period);
        let a2 = peak(&ts, &xs, t2, t2 + period);
        let rate = (a2 / a1).ln() / (t2 - t1);
        assert!(
            (rate * tau + 1.0).abs() < 0.05,
            "rate {rate} vs {}",
            -1.0 / tau
        );
    }
}

/// Bisection on `dφ/dt` along `φ = π`, which vanishes at the self-trapped
/// steady state.
fn bisect_self_trapped(lambda0: f64) -> f64 {
    let p = SystemParams::new(lambda0, 0.0).unwrap();
    let f = |w: f64| rhs(&State::new(w, PI), 0.0, &p, &Drive::NONE).unwrap().1;
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-12);
    assert!(f(lo).signum() != f(hi).signum());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn self_trapped_state_matches_root_finder() {
    for lambda0 in [1.2, 2.0, 2.0833, 5.0, 25.0] {
        let states = steady_states(lambda0).unwrap();
        let ws = states.iter().map(|s| s.w).fold(f64::MIN, f64::max);
        let root = bisect_self_trapped(lambda0);
        assert!((ws - root).abs() < 1e-10, "Λ₀ {lambda0}: {ws} vs {root}");
    }
}

#[test]
fn steady_states_zero_the_field_exactly() {
    for lambda0 in [0.0, 0.354, 0.36, 2.0, 2.0833, 5.0] {
        let p = SystemParams::new(lambda0, 0.02).unwrap();
        for s in steady_states(lambda0).unwrap() {
            let (dw, dphi) = rhs(&s, 0.0, &p, &Drive::NONE).unwrap();
            assert!(
                dw.abs() < 1e-14 && dphi.abs() < 1e-14,
                "Λ₀ {lambda0} {s:?}: {dw} {dphi}"
            );
        }
    }
}

proptest! {
    #[test]
    fn threshold_increases_with_kappa_and_omega(
        kappa in 1e-4f64..1.0,
        omega_p in 0.1f64..20.0,
        bump in 1e-6f64..0.5,
    ) {
        let h = threshold_amplitude(kappa, omega_p);
        prop_assert!(threshold_amplitude(kappa * (1.0 + bump), omega_p) > h);
        prop_assert!(threshold_amplitude(kappa, omega_p * (1.0 + bump)) > h);
    }
}
