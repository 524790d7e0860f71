//! Upper bound on Eve's Shannon information per correct bit from the
//! classical mutual-information chain
//! `I(E;A,B|c) ≤ I(A;B,E|c) + I(B;E|c)`, evaluated for `θ = 0`, `α' = α`.
//!
//! The bound shrinks as `α → 0` even when the noise is large, which is why
//! Eve's optimal gain falls off at large `ε` for small angles.

use core::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::math::{binary_entropy, cos, fabs, sin, sq, sqrt};

/// `P_conc = (T/4)[2 − (1−ε)(cos 2α + 1)]`.
pub fn p_conclusive(alpha: f64, epsilon: f64, transmission: f64) -> Result<f64> {
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    check_range("epsilon", epsilon, 0.0, 1.0, "0 <= epsilon <= 1")?;
    check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
    Ok(transmission / 4.0 * (2.0 - (1.0 - epsilon) * (cos(2.0 * alpha) + 1.0)))
}

/// `e = ε / (2 − (1−ε)(cos 2α + 1))`.
pub fn bit_error_rate(alpha: f64, epsilon: f64) -> Result<f64> {
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    check_range("epsilon", epsilon, 0.0, 1.0, "0 <= epsilon <= 1")?;
    let denom = 2.0 - (1.0 - epsilon) * (cos(2.0 * alpha) + 1.0);
    if denom <= 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok(epsilon / denom)
}

/// `g(x) = h(1/2 − (sin α / 4x)·√(1 − ((1−2x)/cos α)²))`, where `x` is the
/// probability that a photon gives a conclusive result.
pub fn g_function(x: f64, alpha: f64) -> Result<f64> {
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            expected: "0 < x <= 1",
        });
    }
    let ca = cos(alpha);
    let dev = 1.0 - 2.0 * x;
    let ratio = if ca > 0.0 {
        dev / ca
    } else if fabs(dev) < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    if fabs(ratio) > 1.0 + 1e-12 {
        return Err(Error::Domain {
            name: "x",
            value: x,
            expected: "|1 - 2x| <= cos(alpha)",
        });
    }
    let root = sqrt((1.0 - sq(ratio)).max(0.0));
    Ok(binary_entropy(0.5 - sin(alpha) / (4.0 * x) * root))
}

/// Terms of the bound at one `(α, ε, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub p_conc: f64,
    pub e: f64,
    /// Bound on `I(A;B,E|c)`: `[1 − h((1 − sin α)/2)] / P_conc`.
    pub term_abe: f64,
    /// Bound on `I(B;E|c)`: `1 − g(P_conc/T)`.
    pub term_be: f64,
    /// `term_abe + term_be`.
    pub nu: f64,
    /// `ν / (1 − e)`, unclamped.
    pub i_s_upper: f64,
    /// `min(1, i_s_upper)`.
    pub i_s_upper_clamped: f64,
    /// The raw bound is at least one bit and says nothing.
    pub vacuous: bool,
}

/// Assembles the chain for `θ = 0`, `α' = α`.
pub fn shannon_upper_bound(alpha: f64, epsilon: f64, transmission: f64) -> Result<BoundReport> {
    let p_conc = p_conclusive(alpha, epsilon, transmission)?;
    if !(p_conc > 0.0) {
        return Err(Error::Domain {
            name: "P_conc",
            value: p_conc,
            expected: "positive conclusive probability",
        });
    }
    let e = bit_error_rate(alpha, epsilon)?;
    let optimum = 1.0 - binary_entropy((1.0 - sqrt(1.0 - sq(cos(alpha)))) / 2.0);
    let term_abe = optimum / p_conc;
    let term_be = 1.0 - g_function(p_conc / transmission, alpha)?;
    let nu = term_abe + term_be;
    let i_s_upper = if e < 1.0 { nu / (1.0 - e) } else { f64::INFINITY };
    Ok(BoundReport {
        p_conc,
        e,
        term_abe,
        term_be,
        nu,
        i_s_upper,
        i_s_upper_clamped: i_s_upper.min(1.0),
        vacuous: i_s_upper >= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg;
    use approx::assert_abs_diff_eq;

    #[test]
    fn conclusive_probability_cases() {
        assert_abs_diff_eq!(p_conclusive(PI / 4.0, 0.0, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p_conclusive(PI / 2.0, 0.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        for a in [5.0, 30.0, 80.0] {
            assert_abs_diff_eq!(p_conclusive(deg(a), 1.0, 0.6).unwrap(), 0.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn error_rate_cases() {
        assert_eq!(bit_error_rate(deg(20.0), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bit_error_rate(deg(20.0), 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(bit_error_rate(0.0, 0.0), Err(Error::DegenerateChannel));
    }

    #[test]
    fn g_cases() {
        let a = deg(25.0);
        assert_abs_diff_eq!(
            g_function(0.5, a).unwrap(),
            binary_entropy(0.5 - sin(a) / 2.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(g_function(0.5, PI / 2.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g_function(0.5, 1e-9).unwrap(), 1.0, epsilon = 1e-12);
        // (1 − 2x)/cos α > 1
        assert!(g_function(0.01, deg(40.0)).is_err());
    }

    #[test]
    fn g_decreases_with_alpha_while_cos_squared_exceeds_offset() {
        // sin²α − d²tan²α grows with α exactly while cos²α > |d|, d = 1 − 2x
        let x = 0.45;
        let d = fabs(1.0 - 2.0 * x);
        let mut prev = f64::INFINITY;
        for k in 1..=1000 {
            let a = PI / 2.0 * k as f64 / 1001.0;
            if sq(cos(a)) <= d {
                break;
            }
            let g = g_function(x, a).unwrap();
            assert!(g <= prev + 1e-12);
            prev = g;
        }
        // beyond that it climbs back to 1 at the edge of feasibility
        let edge = libm::acos(d);
        assert!(g_function(x, edge - 1e-9).unwrap() > g_function(x, libm::acos(sqrt(d))).unwrap());
    }

    #[test]
    fn orthogonal_case_is_vacuous() {
        let r = shannon_upper_bound(PI / 2.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.term_abe, 2.0, epsilon = 1e-12);
        assert!(r.vacuous);
        assert_eq!(r.i_s_upper_clamped, 1.0);
    }

    #[test]
    fn chain_identities() {
        let r = shannon_upper_bound(deg(10.0), 0.3, 0.3).unwrap();
        assert_abs_diff_eq!(r.nu, r.term_abe + r.term_be, epsilon = 1e-15);
        assert_abs_diff_eq!(r.i_s_upper, r.nu / (1.0 - r.e), epsilon = 1e-15);
    }
}
