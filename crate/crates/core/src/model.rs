//! The two-mode equations of a dissipative Josephson junction whose
//! interaction parameter is modulated as `Λ(t) = Λ₀ + h sin(ω_p t)`.
//!
//! Time is dimensionless throughout (`t · 2J/ħ → t`).

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::ode::OdeSystem;
use crate::{Error, Result};

/// Physical inputs as they appear in an experiment description.
///
/// Energies are in units of the axial trap quantum `ħω_z`; `omega_p` is
/// already dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub j: f64,
    pub nu0: f64,
    pub n: u64,
    pub eta_over_n: f64,
    pub zeta: f64,
    pub omega_p: f64,
}

impl RawParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) {
            return Err(Error::InvalidParameter(
                "tunneling energy J must be positive",
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter("atom number N must be at least 2"));
        }
        if !(self.nu0 >= 0.0) {
            return Err(Error::InvalidParameter("N*U0 must be non-negative"));
        }
        if !(self.eta_over_n >= 0.0) {
            return Err(Error::InvalidParameter("eta/N must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return Err(Error::InvalidParameter("zeta must lie in [0, 1)"));
        }
        if !(self.omega_p >= 0.0) {
            return Err(Error::InvalidParameter("omega_p must be non-negative"));
        }
        Ok(())
    }

    /// The drive implied by the modulation depth, `h = Λ₀ ζ`.
    pub fn drive(&self) -> Result<Drive> {
        let p = derive_params(self)?;
        Ok(Drive {
            h: p.lambda0 * self.zeta,
            omega_p: self.omega_p,
        })
    }
}

/// Dimensionless parameters used by the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub lambda0: f64,
    pub eta_over_n: f64,
    /// Damping of the zero (and running) phase mode, `(η/N)(1+Λ₀)`.
    pub kappa_zero: f64,
    /// Damping magnitude of the π mode linearization, `(η/N)(1−Λ₀)`; only
    /// present while `Λ₀ < 1`.
    pub kappa_pi: Option<f64>,
    pub omega_j_zero: f64,
    pub omega_j_pi: Option<f64>,
}

impl SystemParams {
    pub fn new(lambda0: f64, eta_over_n: f64) -> Result<Self> {
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(Error::InvalidParameter(
                "lambda0 must be finite and non-negative",
            ));
        }
        if !(eta_over_n >= 0.0) || !eta_over_n.is_finite() {
            return Err(Error::InvalidParameter(
                "eta/N must be finite and non-negative",
            ));
        }
        let below = lambda0 < 1.0;
        Ok(SystemParams {
            lambda0,
            eta_over_n,
            kappa_zero: eta_over_n * (1.0 + lambda0),
            kappa_pi: below.then_some(eta_over_n * (1.0 - lambda0)),
            omega_j_zero: math::sqrt(1.0 + lambda0),
            omega_j_pi: below.then(|| math::sqrt(1.0 - lambda0)),
        })
    }
}

pub fn derive_params(raw: &RawParams) -> Result<SystemParams> {
    raw.validate()?;
    SystemParams::new(raw.nu0 / (2.0 * raw.j), raw.eta_over_n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub h: f64,
    pub omega_p: f64,
}

impl Drive {
    pub const NONE: Drive = Drive {
        h: 0.0,
        omega_p: 0.0,
    };

    pub fn new(h: f64, omega_p: f64) -> Result<Self> {
        if !(h >= 0.0) || !(omega_p >= 0.0) {
            return Err(Error::InvalidParameter(
                "drive amplitude and frequency must be non-negative",
            ));
        }
        Ok(Drive { h, omega_p })
    }

    /// `Λ(t) = Λ₀ + h sin(ω_p t)`.
    pub fn lambda_at(&self, lambda0: f64, t: f64) -> f64 {
        lambda0 + self.h * math::sin(self.omega_p * t)
    }

    /// Drive period, or `None` when undriven.
    pub fn period(&self) -> Option<f64> {
        (self.omega_p > 0.0).then(|| math::TAU / self.omega_p)
    }
}

pub fn lambda_of_t(drive: &Drive, lambda0: f64, t: f64) -> f64 {
    drive.lambda_at(lambda0, t)
}

/// Population imbalance and unwrapped relative phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub w: f64,
    pub phi: f64,
}

impl State {
    pub const fn new(w: f64, phi: f64) -> Self {
        State { w, phi }
    }

    pub fn wrapped_phi(&self) -> f64 {
        math::wrap_angle(self.phi)
    }

    /// Mirror image under the parity symmetry `(w, φ) → (−w, −φ)`.
    pub fn mirrored(&self) -> Self {
        State::new(-self.w, -self.phi)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.w, self.phi]
    }

    pub fn from_array(y: [f64; 2]) -> Self {
        State::new(y[0], y[1])
    }

    /// Point on the unit (Bloch) sphere: `(√(1−w²)cos φ, √(1−w²)sin φ, w)`.
    pub fn bloch(&self) -> [f64; 3] {
        let s = math::sqrt((1.0 - self.w * self.w).max(0.0));
        [s * math::cos(self.phi), s * math::sin(self.phi), self.w]
    }
}

/// Right-hand side `(ẇ, φ̇)`.
///
/// The damping term of `ẇ` contains `φ̇`; it is substituted explicitly so
/// no implicit solve is needed.
pub fn rhs(s: &State, t: f64, p: &SystemParams, d: &Drive) -> Result<(f64, f64)> {
    let one_minus = 1.0 - s.w * s.w;
    if !(one_minus > 0.0) {
        return Err(Error::Singularity { w: s.w });
    }
    let root = math::sqrt(one_minus);
    let lambda = d.lambda_at(p.lambda0, t);
    let (sin_phi, cos_phi) = (math::sin(s.phi), math::cos(s.phi));
    let dphi = lambda * s.w + s.w * cos_phi / root;
    let dw = -root * sin_phi - p.eta_over_n * dphi;
    Ok((dw, dphi))
}

/// `E = Λ w²/2 − √(1−w²) cos φ`, conserved when `η = 0` and `h = 0`.
pub fn bjj_energy(s: &State, lambda: f64) -> Result<f64> {
    let one_minus = 1.0 - s.w * s.w;
    if !(one_minus >= 0.0) || s.w.abs() >= 1.0 {
        return Err(Error::Singularity { w: s.w });
    }
    Ok(0.5 * lambda * s.w * s.w - math::sqrt(one_minus) * math::cos(s.phi))
}

/// How the unwrapped phase is continued when a trajectory reaches `|w| = 1`.
///
/// At the pole of the Bloch sphere the azimuth is undefined; the trajectory
/// leaves along `φ* ± π`. Both choices describe the same physical state and
/// differ only in the 2π branch of the unwrapped phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PassageBranch {
    /// Shift in the direction the phase moves after the passage.
    #[default]
    Departure,
    /// Shift in the direction the phase was moving on approach.
    Approach,
}

/// The nonlinear junction as an ODE system on `[w, φ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BjjSystem {
    pub params: SystemParams,
    pub drive: Drive,
    pub branch: PassageBranch,
}

impl BjjSystem {
    pub fn new(params: SystemParams, drive: Drive) -> Self {
        BjjSystem {
            params,
            drive,
            branch: PassageBranch::default(),
        }
    }

    pub fn with_branch(mut self, branch: PassageBranch) -> Self {
        self.branch = branch;
        self
    }
}

impl OdeSystem<2> for BjjSystem {
    fn rates(&self, t: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let (dw, dphi) = rhs(&State::new(y[0], y[1]), t, &self.params, &self.drive).ok()?;
        (dw.is_finite() && dphi.is_finite()).then_some([dw, dphi])
    }

    fn margin(&self, y: &[f64; 2], guard_delta: f64) -> f64 {
        1.0 - guard_delta - y[0].abs()
    }

    fn pass_singularity(&self, t: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let (w, phi) = (y[0], y[1]);
        // Near the pole φ̇ ≈ w cos φ / √(1−w²); its sign fixes the approach direction.
        let lambda = self.drive.lambda_at(self.params.lambda0, t);
        let root = math::sqrt((1.0 - w * w).max(f64::MIN_POSITIVE));
        let approach = lambda * w + w * math::cos(phi) / root;
        let dir = if approach >= 0.0 { 1.0 } else { -1.0 };
        let shift = match self.branch {
            PassageBranch::Approach => dir * PI,
            PassageBranch::Departure => -dir * PI,
        };
        Some([w, phi + shift])
    }

    fn separation(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        let pa = State::from_array(*a).bloch();
        let pb = State::from_array(*b).bloch();
        let d: f64 = (0..3).map(|i| (pa[i] - pb[i]) * (pa[i] - pb[i])).sum();
        math::sqrt(d)
    }

    fn rescale(&self, reference: &[f64; 2], perturbed: &[f64; 2], factor: f64) -> [f64; 2] {
        // Scale the chord on the sphere, then project back; this stays valid
        // when one copy has just passed a pole and the other has not.
        let pr = State::from_array(*reference).bloch();
        let pp = State::from_array(*perturbed).bloch();
        let mut q = [0.0; 3];
        for i in 0..3 {
            q[i] = pr[i] + factor * (pp[i] - pr[i]);
        }
        let norm = math::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
        let w = (q[2] / norm).clamp(-1.0, 1.0);
        let phi = math::unwrap_near(math::atan2(q[1], q[0]), reference[1]);
        [w, phi]
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    SingularityGuard,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached_end",
            Termination::SingularityGuard => "singularity_guard",
        }
    }
}

/// A continuation through `|w| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolePassage {
    pub t: f64,
    pub w: f64,
    pub phi_before: f64,
    pub phi_after: f64,
}

/// Time-ordered samples of the junction state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub terminated_by: Termination,
    pub passages: Vec<PolePassage>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn channel(&self, c: Channel) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| match c {
                Channel::W => s.w,
                Channel::Phi => s.phi,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    W,
    Phi,
}
