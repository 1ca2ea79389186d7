use std::f64::consts::{FRAC_PI_2, PI};

use bjj_core::model::{bjj_energy, BjjSystem, Drive, State, SystemParams, Termination};
use bjj_core::ode::{integrate, integrate_bjj, GuardPolicy, IntegratorSettings, Method, StepMode};
use proptest::prelude::*;

fn system(lambda0: f64, eta: f64, h: f64, omega_p: f64) -> BjjSystem {
    BjjSystem::new(
        SystemParams::new(lambda0, eta).unwrap(),
        Drive::new(h, omega_p).unwrap(),
    )
}

fn settings(t_end: f64, tol: f64) -> IntegratorSettings {
    IntegratorSettings {
        rel_tol: tol,
        abs_tol: tol * 1e-2,
        t_end,
        ..IntegratorSettings::default()
    }
}

/// Largest `|E(t) − E(0)| / (1 + |E(0)|)` over the samples.
fn max_energy_drift(lambda0: f64, s0: State, s: &IntegratorSettings) -> Option<f64> {
    let traj = integrate_bjj(&system(lambda0, 0.0, 0.0, 0.0), s0, s).unwrap();
    if traj.terminated_by != Termination::ReachedEnd {
        return None;
    }
    let e0 = bjj_energy(&s0, lambda0).unwrap();
    let drift = traj
        .states
        .iter()
        .map(|st| (bjj_energy(st, lambda0).unwrap() - e0).abs())
        .fold(0.0, f64::max);
    Some(drift / (1.0 + e0.abs()))
}

#[test]
fn energy_is_conserved_without_damping_or_drive() {
    let s = IntegratorSettings {
        method: Method::Dop853,
        ..settings(1000.0, 1e-10)
    };
    let drift = max_energy_drift(5.0, State::new(0.5, 0.0), &s).unwrap();
    assert!(drift < 1e-8, "relative drift {drift}");
}

#[test]
fn fifth_order_pair_drifts_secularly() {
    // Same run with the 5(4) pair: the drift grows with time, so the second
    // half of the run adds to the first.
    let half = max_energy_drift(5.0, State::new(0.5, 0.0), &settings(500.0, 1e-10)).unwrap();
    let full = max_energy_drift(5.0, State::new(0.5, 0.0), &settings(1000.0, 1e-10)).unwrap();
    assert!(full > 1.5 * half && full < 1e-6, "{half:e} {full:e}");
}

#[test]
fn mirrored_start_gives_mirrored_trajectory() {
    let sys = system(5.0, 0.02, 0.7, 4.95);
    let s = IntegratorSettings::for_drive(4.95, 100.0, 0.05);
    let a = integrate_bjj(&sys, State::new(0.5, 0.0), &s).unwrap();
    let b = integrate_bjj(&sys, State::new(0.5, 0.0).mirrored(), &s).unwrap();
    assert_eq!(a.times, b.times);
    let sup = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| (x.w + y.w).abs().max((x.phi + y.phi).abs()))
        .fold(0.0, f64::max);
    assert!(sup < 1e-9, "sup-norm {sup}");
}

#[test]
fn fixed_steps_converge_at_fifth_order() {
    let sys = system(2.0, 0.0, 0.0, 0.0);
    let y0 = State::new(0.4, 0.3).as_array();
    let reference = integrate(&sys, y0, &settings(10.0, 1e-13)).unwrap();
    let yr = *reference.final_state().unwrap();
    let err = |h: f64| {
        let s = IntegratorSettings {
            t_end: 10.0,
            sample_dt: 1.0,
            mode: StepMode::Fixed(h),
            ..IntegratorSettings::default()
        };
        let y = *integrate(&sys, y0, &s).unwrap().final_state().unwrap();
        ((y[0] - yr[0]).powi(2) + (y[1] - yr[1]).powi(2)).sqrt()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    assert!(
        (4.5..5.7).contains(&order),
        "observed order {order} ({e1:e}, {e2:e})"
    );
}

/// With `Λ₀ = 0`, `η = 0` and `φ(0) = π/2` the phase stays fixed and
/// `w(t) = −sin t`, reaching the pole at `t = π/2`.
#[test]
fn guard_stops_at_the_pole() {
    let sys = system(0.0, 0.0, 0.0, 0.0);
    let delta = 1e-9;
    let s = IntegratorSettings {
        t_end: 3.0,
        guard_delta: delta,
        ..settings(3.0, 1e-11)
    };
    let traj = integrate_bjj(&sys, State::new(0.0, FRAC_PI_2), &s).unwrap();
    assert_eq!(traj.terminated_by, Termination::SingularityGuard);
    let (t, last) = traj.last().unwrap();
    let t_hit = (1.0f64 - delta).asin();
    assert!((t - t_hit).abs() < 1e-6, "{t} vs {t_hit}");
    assert!((last.w.abs() - (1.0 - delta)).abs() < 1e-10);
    assert!(traj.times.windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn continuation_crosses_the_pole() {
    let sys = system(0.0, 0.0, 0.0, 0.0);
    let s = IntegratorSettings {
        guard_delta: 1e-9,
        guard: GuardPolicy::Continue { max_passages: 10 },
        ..settings(3.0, 1e-11)
    };
    let traj = integrate_bjj(&sys, State::new(0.0, FRAC_PI_2), &s).unwrap();
    assert_eq!(traj.terminated_by, Termination::ReachedEnd);
    assert_eq!(traj.passages.len(), 1);
    let p = traj.passages[0];
    assert!(((p.phi_after - p.phi_before).abs() - PI).abs() < 1e-12);
    // Past the pole the physical state follows w = −sin t again.
    let worst = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, st)| (st.w + t.sin()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn runs_are_bitwise_deterministic() {
    let sys = system(0.354, 0.02, 0.08, 2.3);
    let s = IntegratorSettings {
        guard_delta: 1e-8,
        guard: GuardPolicy::Continue { max_passages: 1000 },
        ..IntegratorSettings::for_drive(2.3, 800.0, 0.05)
    };
    let a = integrate_bjj(&sys, State::new(0.01, PI), &s).unwrap();
    let b = integrate_bjj(&sys, State::new(0.01, PI), &s).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_conserved_for_random_starts(
        lambda0 in 0.0f64..10.0,
        w0 in -0.9f64..0.9,
        phi0 in -3.0f64..3.0,
    ) {
        // Running-phase starts let |φ| grow, and with it the relative error
        // allowance on φ, hence the looser bound than for the bounded orbit.
        let s = IntegratorSettings { method: Method::Dop853, ..settings(50.0, 1e-10) };
        if let Some(drift) = max_energy_drift(lambda0, State::new(w0, phi0), &s) {
            prop_assert!(drift < 1e-7, "relative drift {}", drift);
        }
    }

    #[test]
    fn parity_holds_for_random_runs(
        lambda0 in 0.0f64..10.0,
        eta in 0.0f64..0.05,
        h in 0.0f64..1.0,
        omega_p in 0.5f64..6.0,
        w0 in -0.8f64..0.8,
        phi0 in -3.0f64..3.0,
    ) {
        let sys = system(lambda0, eta, h, omega_p);
        let s = IntegratorSettings::for_drive(omega_p, 30.0, 0.1);
        let s0 = State::new(w0, phi0);
        let a = integrate_bjj(&sys, s0, &s).unwrap();
        let b = integrate_bjj(&sys, s0.mirrored(), &s).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((x.w + y.w).abs() < 1e-9 && (x.phi + y.phi).abs() < 1e-9);
        }
    }

    #[test]
    fn trajectories_stay_in_the_domain(
        lambda0 in 0.0f64..10.0,
        eta in 0.0f64..0.05,
        h in 0.0f64..2.0,
        w0 in -0.95f64..0.95,
        phi0 in -3.2f64..3.2,
    ) {
        let sys = system(lambda0, eta, h, 2.3);
        let s = IntegratorSettings {
            guard_delta: 1e-8,
            guard: GuardPolicy::Continue { max_passages: 10_000 },
            ..IntegratorSettings::for_drive(2.3, 40.0, 0.05)
        };
        let traj = integrate_bjj(&sys, State::new(w0, phi0), &s).unwrap();
        prop_assert!(traj.states.iter().all(|st| st.w.abs() < 1.0 && st.phi.is_finite()));
    }
}
