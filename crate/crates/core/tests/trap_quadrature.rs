//! The modulated on-site interaction against direct quadrature of the axial
//! wave function.

use bjj_core::trap::{
    axial_frequency, chi_ratio_for_depth, modulation_depth, onsite_u0, u_of_t, TrapParams,
};
use std::f64::consts::PI;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson with relative tolerance `rel`.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let rough = simpson(a, b, fa, fm, fb);
    // A coarse pass fixes the absolute scale of the tolerance.
    let n = 64;
    let h = (b - a) / n as f64;
    let scale: f64 = (0..n)
        .map(|i| f(a + (i as f64 + 0.5) * h).abs() * h)
        .sum::<f64>()
        .max(rough.abs());
    adaptive(&f, a, b, fa, fm, fb, rough, rel * scale, 50)
}

/// `U(t)` from `2ħ²a_s/(m a_ρ²) ∫|ψ_1D|⁴ dz` with `ψ_1D = e^{−z²/2a_z²}/√(π a_z)`
/// and `a_z = √(ħ/(m ω_z))`, integrated over `±8 a_z`.
fn u_by_quadrature(trap: &TrapParams, omega_z: f64) -> f64 {
    let a_z = (trap.hbar / (trap.m * omega_z)).sqrt();
    let psi4 = |z: f64| {
        let psi = (-z * z / (2.0 * a_z * a_z)).exp() / (PI * a_z).sqrt();
        psi.powi(4)
    };
    let integral = integrate(psi4, -8.0 * a_z, 8.0 * a_z, 1e-10);
    2.0 * trap.hbar * trap.hbar * trap.a_s / (trap.m * trap.a_rho * trap.a_rho) * integral
}

/// `ω_z` with `χ₁² sin(ω_p t)` replaced by `x χ₀²`.
fn omega_z_at(trap: &TrapParams, x: f64) -> f64 {
    2.0 * trap.b / trap.m.sqrt() * (trap.chi0 * trap.chi0 * (1.0 + x)).sqrt()
}

#[test]
fn unperturbed_value_matches_quadrature() {
    for trap in [
        TrapParams::default(),
        TrapParams {
            chi0: 1.7,
            b: 0.6,
            m: 2.5,
            a_s: 0.03,
            a_rho: 0.4,
            hbar: 1.3,
            chi1: 0.0,
        },
    ] {
        let quad = u_by_quadrature(&trap, axial_frequency(&trap, 0.0, 0.0).unwrap());
        let closed = onsite_u0(&trap);
        assert!((quad / closed - 1.0).abs() < 1e-9, "{quad} vs {closed}");
    }
}

#[test]
fn first_order_expansion_matches_u_of_t() {
    let zeta = 0.05;
    let chi0 = 1.0;
    let trap = TrapParams {
        chi1: chi0 * chi_ratio_for_depth(zeta),
        ..TrapParams::default()
    };
    assert!((modulation_depth(trap.chi0, trap.chi1) - zeta).abs() < 1e-15);
    let ratio2 = (trap.chi1 / trap.chi0).powi(2);

    // First-order coefficient in x = (χ₁/χ₀)² sin(ω_p t), by central difference.
    let u0 = u_by_quadrature(&trap, omega_z_at(&trap, 0.0));
    let d = 1e-4;
    let slope = (u_by_quadrature(&trap, omega_z_at(&trap, d))
        - u_by_quadrature(&trap, omega_z_at(&trap, -d)))
        / (2.0 * d);

    let omega_p = 0.37;
    let mut worst_expanded: f64 = 0.0;
    let mut worst_full: f64 = 0.0;
    for k in 0..64 {
        let t = k as f64 * (2.0 * PI / omega_p) / 64.0;
        let x = ratio2 * (omega_p * t).sin();
        let expanded = u0 + slope * x;
        let full = u_by_quadrature(&trap, axial_frequency(&trap, omega_p, t).unwrap());
        let model = u_of_t(onsite_u0(&trap), zeta, omega_p, t);
        worst_expanded = worst_expanded.max((expanded / model - 1.0).abs());
        worst_full = worst_full.max((full / model - 1.0).abs());
    }
    assert!(
        worst_expanded <= zeta * zeta,
        "expanded error {worst_expanded}"
    );
    // Unexpanded, the fourth root (1+4ζs)^{1/4} departs from 1+ζs at second
    // order, ≈ 3ζ²s²/2, a bit more at s = −1.
    assert!(
        worst_full > zeta * zeta && worst_full < 2.0 * zeta * zeta,
        "{worst_full}"
    );
}

#[test]
fn onsite_u0_is_dimensionally_homogeneous() {
    // Lengths × L, energies × E: ħ ~ E T, m ~ E T² / L², χ₀ ~ √(E)/L² (V₀ = χ₀² b⁴/2 is an energy).
    let base = TrapParams {
        chi0: 1.3,
        b: 0.8,
        m: 1.7,
        a_s: 0.05,
        a_rho: 0.6,
        hbar: 0.9,
        chi1: 0.0,
    };
    let (l, e, tt) = (2.0f64, 3.0f64, 0.5f64);
    let scaled = TrapParams {
        chi0: base.chi0 * e.sqrt() / (l * l),
        b: base.b * l,
        m: base.m * e * tt * tt / (l * l),
        a_s: base.a_s * l,
        a_rho: base.a_rho * l,
        hbar: base.hbar * e * tt,
        chi1: 0.0,
    };
    let ratio = onsite_u0(&scaled) / onsite_u0(&base);
    assert!((ratio / e - 1.0).abs() < 1e-12, "{ratio}");
}
