//! Trap-to-interaction chain: double-well geometry to barrier height, axial
//! frequency, modulation depth and on-site interaction.

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::{Error, Result};

/// Trap geometry in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    pub chi0: f64,
    pub chi1: f64,
    /// Half-separation of the wells.
    pub b: f64,
    pub m: f64,
    pub a_s: f64,
    pub a_rho: f64,
    pub hbar: f64,
}

impl Default for TrapParams {
    fn default() -> Self {
        TrapParams {
            chi0: 1.0,
            chi1: 0.0,
            b: 1.0,
            m: 1.0,
            a_s: 1.0,
            a_rho: 1.0,
            hbar: 1.0,
        }
    }
}

/// Above this ratio the `χ₁ ≪ χ₀` expansion is flagged.
pub const WEAK_MODULATION_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapWarning {
    /// `χ₁/χ₀` exceeds [`WEAK_MODULATION_RATIO`].
    StrongModulation,
    /// The drive is not slow compared with the axial trap frequency.
    FastDrive,
}

impl TrapWarning {
    pub fn message(&self) -> &'static str {
        match self {
            TrapWarning::StrongModulation => {
                "chi1/chi0 > 0.3: weak-modulation expansion is doubtful"
            }
            TrapWarning::FastDrive => "omega_p is not much smaller than omega_z",
        }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi0 > 0.0) {
            return Err(Error::InvalidParameter("chi0 must be positive"));
        }
        if !(self.chi1 >= 0.0 && self.chi1 < self.chi0) {
            return Err(Error::InvalidParameter("chi1 must lie in [0, chi0)"));
        }
        if !(self.b > 0.0 && self.m > 0.0 && self.a_rho > 0.0 && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(
                "b, m, a_rho and hbar must be positive",
            ));
        }
        if !(self.a_s >= 0.0) {
            return Err(Error::InvalidParameter("a_s must be nonnegative"));
        }
        Ok(())
    }

    /// Validity conditions of the expansion; never fatal. `omega_p` in the
    /// same units as the trap frequency, "much smaller" meaning a tenth.
    pub fn warnings(&self, omega_p: f64) -> Vec<TrapWarning> {
        let mut out = Vec::new();
        if self.chi1 / self.chi0 > WEAK_MODULATION_RATIO {
            out.push(TrapWarning::StrongModulation);
        }
        let wz = 2.0 * self.b * self.chi0 / math::sqrt(self.m);
        if omega_p > 0.1 * wz {
            out.push(TrapWarning::FastDrive);
        }
        out
    }
}

/// `V₀ = χ₀² b⁴ / 2`.
pub fn barrier_height(trap: &TrapParams) -> f64 {
    let b2 = trap.b * trap.b;
    trap.chi0 * trap.chi0 * b2 * b2 / 2.0
}

/// `ω_z(t) = (2b/√m) √(χ₀² + χ₁² sin ω_p t)`.
pub fn axial_frequency(trap: &TrapParams, omega_p: f64, t: f64) -> Result<f64> {
    let radicand = trap.chi0 * trap.chi0 + trap.chi1 * trap.chi1 * math::sin(omega_p * t);
    if !(radicand > 0.0) {
        return Err(Error::Domain("axial frequency radicand is not positive"));
    }
    Ok(2.0 * trap.b / math::sqrt(trap.m) * math::sqrt(radicand))
}

/// `ζ = χ₁² / (4χ₀²)`.
pub fn modulation_depth(chi0: f64, chi1: f64) -> f64 {
    chi1 * chi1 / (4.0 * chi0 * chi0)
}

/// `χ₁/χ₀` giving depth `ζ`.
pub fn chi_ratio_for_depth(zeta: f64) -> f64 {
    math::sqrt(4.0 * zeta)
}

/// `U₀ = 2 a_s ħ^{3/2} √(b χ₀) / (π^{3/2} a_ρ² m^{3/4})`.
pub fn onsite_u0(trap: &TrapParams) -> f64 {
    let hbar32 = trap.hbar * math::sqrt(trap.hbar);
    let pi32 = PI * math::sqrt(PI);
    2.0 * trap.a_s * hbar32 * math::sqrt(trap.b * trap.chi0)
        / (pi32 * trap.a_rho * trap.a_rho * math::powf(trap.m, 0.75))
}

/// `U(t) = U₀ (1 + ζ sin ω_p t)`.
pub fn u_of_t(u0: f64, zeta: f64, omega_p: f64, t: f64) -> f64 {
    u0 * (1.0 + zeta * math::sin(omega_p * t))
}
