//! Closed-form analysis around the steady states and the linearized,
//! parametrically driven oscillator
//!
//! `δẅ + [κ + (η/N) h sin ω_p t] δẇ + [ω_J² + h sin ω_p t + (η/N) h ω_p cos ω_p t] δw = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::model::{Drive, State};
use crate::ode::OdeSystem;
use crate::{Error, Result};

/// Steady states of the undriven junction.
///
/// `(0, 0)` and `(0, π)` always; the symmetry-broken pair
/// `(±√(1 − 1/Λ₀²), π)` once `Λ₀ > 1`.
pub fn steady_states(lambda0: f64) -> Result<Vec<State>> {
    if !(lambda0 >= 0.0) {
        return Err(Error::InvalidParameter("lambda0 must be non-negative"));
    }
    let mut out = vec![State::new(0.0, 0.0), State::new(0.0, PI)];
    if lambda0 > 1.0 {
        let ws = math::sqrt(1.0 - 1.0 / (lambda0 * lambda0));
        out.push(State::new(ws, PI));
        out.push(State::new(-ws, PI));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    ZeroPhase,
    /// Self-trapped with a running phase; shares the zero-phase formulas.
    RunningPhase,
    /// Oscillation about `(0, π)`, only a center while `Λ₀ < 1`.
    PiPhase,
    /// Oscillation about `(w_s, π)`, requires `Λ₀ > 1`.
    SelfTrappedPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingSign {
    Decaying,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAnalysis {
    pub omega: f64,
    /// Decay (or growth) time; `None` when undamped.
    pub tau: Option<f64>,
    pub damping: DampingSign,
}

impl ModeAnalysis {
    /// Signed amplitude rate: `−1/τ` when decaying, `+1/τ` when growing.
    pub fn envelope_rate(&self) -> f64 {
        match (self.tau, self.damping) {
            (None, _) => 0.0,
            (Some(t), DampingSign::Decaying) => -1.0 / t,
            (Some(t), DampingSign::Growing) => 1.0 / t,
        }
    }
}

/// Frequency and decay time of a damped linear mode with stiffness `k` and
/// damping magnitude `g`.
fn damped_mode(stiffness: f64, damping: f64, sign: DampingSign) -> Result<ModeAnalysis> {
    let radicand = stiffness - damping * damping / 4.0;
    if !(radicand >= 0.0) {
        return Err(Error::Domain("mode is overdamped (negative radicand)"));
    }
    Ok(ModeAnalysis {
        omega: math::sqrt(radicand),
        tau: (damping > 0.0).then(|| 2.0 / damping),
        damping: sign,
    })
}

pub fn mode_analysis(mode: ModeKind, lambda0: f64, eta_over_n: f64) -> Result<ModeAnalysis> {
    if !(lambda0 >= 0.0) || !(eta_over_n >= 0.0) {
        return Err(Error::InvalidParameter(
            "lambda0 and eta/N must be non-negative",
        ));
    }
    match mode {
        ModeKind::ZeroPhase | ModeKind::RunningPhase => damped_mode(
            1.0 + lambda0,
            eta_over_n * (1.0 + lambda0),
            DampingSign::Decaying,
        ),
        ModeKind::PiPhase => {
            if lambda0 >= 1.0 {
                return Err(Error::Domain("pi-phase mode requires lambda0 < 1"));
            }
            damped_mode(
                1.0 - lambda0,
                eta_over_n * (1.0 - lambda0),
                DampingSign::Growing,
            )
        }
        ModeKind::SelfTrappedPi => {
            if lambda0 <= 1.0 {
                return Err(Error::Domain("self-trapped pi mode requires lambda0 > 1"));
            }
            let k = lambda0 * lambda0 - 1.0;
            damped_mode(k, eta_over_n * lambda0 * k, DampingSign::Growing)
        }
    }
}

/// Drive amplitude at which parametric gain balances the loss `κ`:
/// `h_t = 2κω` with `ω = ω_p/2`.
pub fn threshold_amplitude(kappa: f64, omega_p: f64) -> f64 {
    2.0 * kappa * (omega_p / 2.0)
}

/// Oscillation frequency from the real-part balance at `ω_p = 2ω`:
/// the positive root of `ω² − (ηh/2N) ω − ω_J² = 0`.
///
/// `omega_p` is fixed to `2ω` by the resonance condition and does not enter.
pub fn corrected_frequency(omega_j: f64, eta_over_n: f64, h: f64, _omega_p: f64) -> f64 {
    let a = eta_over_n * h / 4.0;
    a + math::sqrt(omega_j * omega_j + a * a)
}

/// Parameters of the linearized, modulated oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOscillator {
    pub kappa: f64,
    pub omega_j: f64,
    pub eta_over_n: f64,
    pub drive: Drive,
}

impl LinearOscillator {
    /// Linearization about the zero-phase steady state.
    pub fn zero_phase(lambda0: f64, eta_over_n: f64, drive: Drive) -> Self {
        LinearOscillator {
            kappa: eta_over_n * (1.0 + lambda0),
            omega_j: math::sqrt(1.0 + lambda0),
            eta_over_n,
            drive,
        }
    }

    pub fn threshold(&self) -> f64 {
        threshold_amplitude(self.kappa, self.drive.omega_p)
    }
}

/// `(δẇ, δẅ)` for the state `x = (δw, δẇ)`.
pub fn linear_rhs(x: [f64; 2], t: f64, osc: &LinearOscillator) -> [f64; 2] {
    let LinearOscillator {
        kappa,
        omega_j,
        eta_over_n,
        drive,
    } = *osc;
    let (s, c) = (math::sin(drive.omega_p * t), math::cos(drive.omega_p * t));
    let friction = kappa + eta_over_n * drive.h * s;
    let stiffness = omega_j * omega_j + drive.h * s + eta_over_n * drive.h * drive.omega_p * c;
    [x[1], -friction * x[1] - stiffness * x[0]]
}

impl OdeSystem<2> for LinearOscillator {
    fn rates(&self, t: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        Some(linear_rhs(*y, t, self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rhs, SystemParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn steady_state_lists() {
        assert_eq!(steady_states(0.5).unwrap().len(), 2);
        let s = steady_states(2.0).unwrap();
        assert_eq!(s.len(), 4);
        assert_abs_diff_eq!(s[2].w, 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_abs_diff_eq!(s[3].w, -0.866_025_403_784_438_6, epsilon = 1e-15);
        let s = steady_states(25.0 / 12.0).unwrap();
        assert!((s[2].w - 0.87).abs() < 0.01);
        assert!(steady_states(-1.0).is_err());
    }

    #[test]
    fn steady_states_zero_the_field() {
        for lambda0 in [0.0, 0.354, 1.0, 2.0833, 5.0, 25.0] {
            let p = SystemParams::new(lambda0, 0.02).unwrap();
            for s in steady_states(lambda0).unwrap() {
                let (dw, dphi) = rhs(&s, 0.0, &p, &Drive::NONE).unwrap();
                // cancellation in Λw + w cosφ/√(1−w²) near |w| = 1 for large Λ₀
                assert!(
                    dw.abs() <= 1e-12 && dphi.abs() <= 1e-12,
                    "{lambda0}: {dw} {dphi}"
                );
            }
        }
    }

    #[test]
    fn zero_phase_modes() {
        let m = mode_analysis(ModeKind::ZeroPhase, 0.0, 0.0).unwrap();
        assert_eq!(m.omega, 1.0);
        assert_eq!(m.tau, None);

        let m = mode_analysis(ModeKind::ZeroPhase, 5.0, 0.02).unwrap();
        assert_abs_diff_eq!(m.omega, (6.0f64 - 0.0036).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m.omega, 2.448_754_786, epsilon = 1e-9);
        assert_abs_diff_eq!(m.tau.unwrap(), 50.0 / 3.0, epsilon = 1e-12);
        assert_eq!(m.damping, DampingSign::Decaying);

        let r = mode_analysis(ModeKind::RunningPhase, 5.0, 0.02).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn pi_and_self_trapped_modes() {
        let m = mode_analysis(ModeKind::PiPhase, 0.354, 0.02).unwrap();
        assert_abs_diff_eq!(m.omega, 0.803_715_29, epsilon = 1e-8);
        assert!((m.omega - 0.80373).abs() < 2e-5);
        assert_abs_diff_eq!(m.tau.unwrap(), 154.8, epsilon = 0.05);
        assert_eq!(m.damping, DampingSign::Growing);
        assert!(m.envelope_rate() > 0.0);

        let lambda0: f64 = 2.0;
        let m = mode_analysis(ModeKind::SelfTrappedPi, lambda0, 0.01).unwrap();
        let k = lambda0 * lambda0 - 1.0;
        let g = 0.01 * lambda0 * k;
        assert_abs_diff_eq!(m.omega, (k - g * g / 4.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m.tau.unwrap(), 2.0 / g, epsilon = 1e-12);

        assert!(mode_analysis(ModeKind::PiPhase, 1.0, 0.02).is_err());
        assert!(mode_analysis(ModeKind::SelfTrappedPi, 1.0, 0.02).is_err());
        assert!(matches!(
            mode_analysis(ModeKind::ZeroPhase, 1.0, 3.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn thresholds() {
        assert_abs_diff_eq!(threshold_amplitude(0.12, 4.95), 0.594, epsilon = 1e-12);
        assert_abs_diff_eq!(threshold_amplitude(0.208, 10.20), 2.1216, epsilon = 1e-12);
        assert_eq!(threshold_amplitude(0.0, 4.95), 0.0);
    }

    #[test]
    fn corrected_frequency_cases() {
        let wj = 6f64.sqrt();
        assert_eq!(corrected_frequency(wj, 0.02, 0.0, 4.95), wj);
        assert_eq!(corrected_frequency(wj, 0.0, 0.7, 4.95), wj);
        let w = corrected_frequency(wj, 0.02, 0.7, 4.95);
        // root of w^2 - 0.007 w - 6 = 0
        assert_abs_diff_eq!(w * w - 0.007 * w - 6.0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w, 2.452_992, epsilon = 1e-6);
    }

    #[test]
    fn linear_rhs_substitution() {
        let osc = LinearOscillator {
            kappa: 0.12,
            omega_j: 6f64.sqrt(),
            eta_over_n: 0.02,
            drive: Drive::NONE,
        };
        let r = linear_rhs([1.0, 0.0], 3.0, &osc);
        assert_eq!(r[0], 0.0);
        assert_abs_diff_eq!(r[1], -6.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_field_matches_nonlinear_near_origin() {
        // First-order agreement with the nonlinear field: φ̇ ≈ (1+Λ)δw, ẇ ≈ −δφ − (η/N)φ̇.
        let p = SystemParams::new(5.0, 0.02).unwrap();
        let (w, phi) = (8e-4, -6e-4);
        let (dw, dphi) = rhs(&State::new(w, phi), 0.0, &p, &Drive::NONE).unwrap();
        let lin_dphi = (1.0 + p.lambda0) * w;
        let lin_dw = -phi - p.eta_over_n * lin_dphi;
        assert!(((dphi - lin_dphi) / lin_dphi).abs() < 1e-3);
        assert!(((dw - lin_dw) / lin_dw).abs() < 1e-3);
    }
}
