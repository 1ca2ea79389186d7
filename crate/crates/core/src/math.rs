//! Floating point helpers that work without `std`.

pub use core::f64::consts::{PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut r = phi - TAU * floor(phi / TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Returns `target + 2πk` closest to `reference`.
pub fn unwrap_near(target: f64, reference: f64) -> f64 {
    target + TAU * round((reference - target) / TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_in_range() {
        for &x in &[-10.0, -PI, -1.0, 0.0, 1.0, PI, 3.5, 6.0, 19.0] {
            let w = wrap_angle(x);
            assert!(w > -PI - 1e-15 && w <= PI + 1e-15, "{x} -> {w}");
            assert!((cos(w) - cos(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn unwrap_picks_nearest_branch() {
        assert!((unwrap_near(0.1, 6.3) - (0.1 + TAU)).abs() < 1e-12);
        assert!((unwrap_near(3.0, -3.0) - (3.0 - TAU)).abs() < 1e-12);
    }
}
