//! Scalar helpers shared across modules. Trigonometry goes through `libm` so
//! the crate builds without `std`.

pub(crate) use libm::{acos, atan2, cos, exp, fabs, hypot, log2, pow, sin, sqrt};

/// Binary entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`, with `h(0) = h(1) = 0`.
///
/// Arguments are clamped to `[0, 1]`; tiny excursions from rounding are common
/// at the edges of the feasible domains.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * log2(x);
    }
    if x < 1.0 {
        h -= (1.0 - x) * log2(1.0 - x);
    }
    h
}

#[inline]
pub(crate) fn sq(x: f64) -> f64 {
    x * x
}

/// Wraps an angle into `(-π, π]`.
pub(crate) fn wrap_angle(phi: f64) -> f64 {
    use core::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut r = libm::fmod(phi, two_pi);
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// Uniform `f64` in `[0, 1)` from the top 53 bits of a `u64`.
#[inline]
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn entropy_endpoints_and_peak() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - binary_entropy(0.89)).abs() < 1e-15);
    }

    #[test]
    fn wrap_into_half_open_interval() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
    }
}
