//! Two-time-scale reduction of the linearized oscillator near the 2:1
//! resonance. In the rescaled time `τ = ω_p t` the oscillator reads
//!
//! `δw'' + ερ[1 + c sin τ] δw' + [γ + ε sin τ + ερc cos τ] δw = 0`
//!
//! and the slow amplitudes `(A, B)` of `δw ≈ A cos(τ/2) + B sin(τ/2)` obey a
//! constant-coefficient 2×2 system whose eigenvalues decide stability.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Dimensionless groups of the rescaled oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFlowCoeffs {
    /// `h / ω_p²`
    pub epsilon: f64,
    /// `ω_p κ / h`
    pub rho: f64,
    /// `(η/N) h / κ`
    pub c: f64,
    /// `ω_J² / ω_p²`
    pub gamma: f64,
}

impl SlowFlowCoeffs {
    /// `ρc`, which equals `ω_p η/N` independently of `h` and `κ`.
    pub fn rho_c(&self) -> f64 {
        self.rho * self.c
    }

    /// Detuning in units of `ε`: `γ₁ = (γ − 1/4)/ε`.
    pub fn gamma1(&self) -> f64 {
        (self.gamma - 0.25) / self.epsilon
    }
}

pub fn slow_flow_coeffs(
    h: f64,
    omega_p: f64,
    kappa: f64,
    eta_over_n: f64,
    omega_j: f64,
) -> Result<SlowFlowCoeffs> {
    if !(h > 0.0) || !(kappa > 0.0) {
        return Err(Error::Domain("slow-flow groups need h > 0 and kappa > 0"));
    }
    if !(omega_p > 0.0) {
        return Err(Error::Domain("slow-flow groups need omega_p > 0"));
    }
    Ok(SlowFlowCoeffs {
        epsilon: h / (omega_p * omega_p),
        rho: omega_p * kappa / h,
        c: eta_over_n * h / kappa,
        gamma: omega_j * omega_j / (omega_p * omega_p),
    })
}

/// Eigenvalues `λ± = −ρ/2 ± √(ρ²c²/16 − γ₁² + 1/4)` of the slow flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFlowEigen {
    pub re_plus: f64,
    pub re_minus: f64,
    /// Imaginary part magnitude; zero when the eigenvalues are real.
    pub im: f64,
}

impl SlowFlowEigen {
    pub fn is_complex(&self) -> bool {
        self.im != 0.0
    }
}

fn discriminant(rho_c: f64, gamma1: f64) -> f64 {
    rho_c * rho_c / 16.0 - gamma1 * gamma1 + 0.25
}

pub fn slow_flow_eigenvalues(rho: f64, c: f64, gamma1: f64) -> SlowFlowEigen {
    eigen_from_product(rho, rho * c, gamma1)
}

fn eigen_from_product(rho: f64, rho_c: f64, gamma1: f64) -> SlowFlowEigen {
    let d = discriminant(rho_c, gamma1);
    if d >= 0.0 {
        let r = math::sqrt(d);
        SlowFlowEigen {
            re_plus: -rho / 2.0 + r,
            re_minus: -rho / 2.0 - r,
            im: 0.0,
        }
    } else {
        SlowFlowEigen {
            re_plus: -rho / 2.0,
            re_minus: -rho / 2.0,
            im: math::sqrt(-d),
        }
    }
}

/// Transition curves `γ = 1/4 ± ε √(ρ²c²/16 − ρ²/4 + 1/4)`; `None` where
/// damping closes the tongue at this `ε`.
pub fn tongue_boundaries(epsilon: f64, rho: f64, c: f64) -> Option<(f64, f64)> {
    boundaries_from_product(epsilon, rho, rho * c)
}

fn boundaries_from_product(epsilon: f64, rho: f64, rho_c: f64) -> Option<(f64, f64)> {
    let d = rho_c * rho_c / 16.0 - rho * rho / 4.0 + 0.25;
    if d < 0.0 {
        return None;
    }
    let half = epsilon * math::sqrt(d);
    Some((0.25 - half, 0.25 + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityLabel {
    Stable,
    ParametricUnstable,
}

impl StabilityLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityLabel::Stable => "stable",
            StabilityLabel::ParametricUnstable => "parametric_unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointClass {
    pub label: StabilityLabel,
    /// Real part of `λ₊`.
    pub lambda_plus: f64,
}

pub fn classify_point(gamma: f64, epsilon: f64, rho: f64, c: f64) -> PointClass {
    classify_with_product(gamma, epsilon, rho, rho * c)
}

fn classify_with_product(gamma: f64, epsilon: f64, rho: f64, rho_c: f64) -> PointClass {
    let gamma1 = (gamma - 0.25) / epsilon;
    let lambda_plus = eigen_from_product(rho, rho_c, gamma1).re_plus;
    PointClass {
        label: if lambda_plus > 0.0 {
            StabilityLabel::ParametricUnstable
        } else {
            StabilityLabel::Stable
        },
        lambda_plus,
    }
}

/// Smallest `ε` for which the tongue is open: `κ / (ω_p √(1 + (η ω_p/N)²/4))`.
pub fn closure_epsilon(omega_p: f64, kappa: f64, eta_over_n: f64) -> f64 {
    let rc = omega_p * eta_over_n;
    kappa / (omega_p * math::sqrt(1.0 + rc * rc / 4.0))
}

/// Fixed scenario quantities for a `(γ, ε)` scan. `ρ` and `c` depend on `ε`
/// only, through `h = ε ω_p²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramBase {
    pub omega_p: f64,
    pub kappa: f64,
    pub eta_over_n: f64,
}

impl DiagramBase {
    /// `(ρ, ρc)` at this `ε`. With `κ = 0` the flow is undamped and `ρ = 0`.
    pub fn groups(&self, epsilon: f64) -> (f64, f64) {
        let rho_c = self.omega_p * self.eta_over_n;
        if self.kappa == 0.0 {
            return (0.0, rho_c);
        }
        let h = epsilon * self.omega_p * self.omega_p;
        (self.omega_p * self.kappa / h, rho_c)
    }

    pub fn coeffs(&self, gamma: f64, epsilon: f64) -> SlowFlowCoeffs {
        let (rho, rho_c) = self.groups(epsilon);
        SlowFlowCoeffs {
            epsilon,
            rho,
            c: if rho == 0.0 { 0.0 } else { rho_c / rho },
            gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramSpec {
    pub gamma_range: (f64, f64),
    pub epsilon_range: (f64, f64),
    pub n_gamma: usize,
    pub n_epsilon: usize,
    pub base: DiagramBase,
}

impl DiagramSpec {
    pub fn validate(&self) -> Result<()> {
        let (g0, g1) = self.gamma_range;
        let (e0, e1) = self.epsilon_range;
        if self.n_gamma == 0 || self.n_epsilon == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive"));
        }
        if !(g1 > g0) || !(e1 > e0) || e0 < 0.0 {
            return Err(Error::InvalidParameter(
                "ranges must be nonempty with epsilon >= 0",
            ));
        }
        if !(self.base.omega_p > 0.0) || self.base.kappa < 0.0 || self.base.eta_over_n < 0.0 {
            return Err(Error::InvalidParameter(
                "diagram base parameters out of range",
            ));
        }
        if self.base.kappa == 0.0 && self.base.eta_over_n != 0.0 {
            return Err(Error::InvalidParameter("kappa = 0 requires eta/N = 0"));
        }
        Ok(())
    }

    /// Cell-centred axis values.
    pub fn gamma_axis(&self) -> Vec<f64> {
        centres(self.gamma_range, self.n_gamma)
    }

    pub fn epsilon_axis(&self) -> Vec<f64> {
        centres(self.epsilon_range, self.n_epsilon)
    }
}

fn centres((a, b): (f64, f64), n: usize) -> Vec<f64> {
    let d = (b - a) / n as f64;
    (0..n).map(|i| a + (i as f64 + 0.5) * d).collect()
}

/// Half-width of the band around `γ = 1/4` where first-order slow flow is trusted.
pub const VALIDITY_HALF_WIDTH: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramCell {
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda_plus: f64,
    pub label: StabilityLabel,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub epsilon: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityDiagram {
    pub gamma_axis: Vec<f64>,
    pub epsilon_axis: Vec<f64>,
    /// Row-major: `cells[i_eps * n_gamma + i_gamma]`.
    pub cells: Vec<DiagramCell>,
    pub boundary: Vec<BoundaryPoint>,
}

impl StabilityDiagram {
    pub fn cell(&self, i_eps: usize, i_gamma: usize) -> &DiagramCell {
        &self.cells[i_eps * self.gamma_axis.len() + i_gamma]
    }
}

/// Classifies one grid cell; independent of every other cell.
pub fn diagram_cell(base: &DiagramBase, gamma: f64, epsilon: f64) -> DiagramCell {
    let (rho, rho_c) = base.groups(epsilon);
    let pc = classify_with_product(gamma, epsilon, rho, rho_c);
    DiagramCell {
        gamma,
        epsilon,
        lambda_plus: pc.lambda_plus,
        label: pc.label,
        extrapolated: (gamma - 0.25).abs() > VALIDITY_HALF_WIDTH,
    }
}

/// Transition curves along `epsilons`, with the tip at `ε = 0` prepended.
pub fn boundary_polyline(base: &DiagramBase, epsilons: &[f64]) -> Vec<BoundaryPoint> {
    let mut out = Vec::with_capacity(epsilons.len() + 1);
    out.push(BoundaryPoint {
        epsilon: 0.0,
        gamma_minus: 0.25,
        gamma_plus: 0.25,
    });
    for &e in epsilons {
        if e <= 0.0 {
            continue;
        }
        let (rho, rho_c) = base.groups(e);
        if let Some((gm, gp)) = boundaries_from_product(e, rho, rho_c) {
            out.push(BoundaryPoint {
                epsilon: e,
                gamma_minus: gm,
                gamma_plus: gp,
            });
        }
    }
    out
}

/// Evaluates the whole grid. Cells are independent, so callers may also
/// evaluate them in any order (or in parallel) with [`diagram_cell`].
pub fn scan_diagram(spec: &DiagramSpec) -> Result<StabilityDiagram> {
    spec.validate()?;
    let gamma_axis = spec.gamma_axis();
    let epsilon_axis = spec.epsilon_axis();
    let mut cells = Vec::with_capacity(gamma_axis.len() * epsilon_axis.len());
    for &e in &epsilon_axis {
        for &g in &gamma_axis {
            cells.push(diagram_cell(&spec.base, g, e));
        }
    }
    let boundary = boundary_polyline(&spec.base, &epsilon_axis);
    Ok(StabilityDiagram {
        gamma_axis,
        epsilon_axis,
        cells,
        boundary,
    })
}
