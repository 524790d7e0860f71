//! Secret key gain per pulse, angle optimization, the fiber link model and a
//! single-photon BB84 reference.
//!
//! Throughout Alice's and Bob's angles coincide (`α' = α`). Errors are
//! corrected at the Shannon limit with encrypted redundancy, and privacy
//! amplification treats correct and flipped bits separately:
//!
//! `G = P_conc[(1−e)(1−I^Gc) + e(1−I^Gf) − h(e)] − (s_c + s_f)/n`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::estimation::ChannelTriple;
use crate::eve_bound::{flipped_bit_gain, min_q, EveBoundResult};
use crate::math::{binary_entropy, cos, exp, log2, pow, sq};
use crate::polarization::{symmetrized_density, Bit, Outcome, Povm5};

/// Which information measure sizes privacy amplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EstimationMode {
    /// Collision-probability gain `log2(2 − Q²)`.
    #[default]
    Collision,
    /// Shannon gain `1 − h((1 − √(1−Q²))/2)`.
    Shannon,
}

impl EstimationMode {
    fn pick(self, r: &EveBoundResult) -> f64 {
        match self {
            EstimationMode::Collision => r.i_gc,
            EstimationMode::Shannon => r.i_gc_shannon,
        }
    }
}

/// Security parameters for a finite key of `n_total` pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiniteKey {
    pub s_c: f64,
    pub s_f: f64,
    pub n_total: f64,
}

/// Key gain at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeyGainReport {
    pub alpha: f64,
    pub p_conc: f64,
    pub e: f64,
    pub q_correct: f64,
    /// `None` when there are no flipped bits (`e = 0`).
    pub q_flipped: Option<f64>,
    pub i_gc: f64,
    pub i_gf: f64,
    /// `P_conc(1−e)(1−I^Gc) − s_c/n`.
    pub g_correct: f64,
    /// `P_conc·e·(1−I^Gf) − s_f/n`.
    pub g_flipped: f64,
    /// `g_correct + g_flipped − P_conc·h(e)`; may be negative.
    pub g_total: f64,
    pub estimation_mode: EstimationMode,
}

/// `P_conc` and the error rate `e` of conclusive bits for a symmetrized channel.
pub fn conclusive_statistics(alpha: f64, triple: &ChannelTriple) -> Result<(f64, f64)> {
    let povm = Povm5::new(alpha)?;
    let rho0 = symmetrized_density(triple, alpha, Bit::Zero)?;
    let rho1 = symmetrized_density(triple, alpha, Bit::One)?;
    let (zb, ob) = (Outcome::ZeroBar, Outcome::OneBar);
    let p_conc = 0.5
        * (povm.probability(zb, &rho0)
            + povm.probability(ob, &rho0)
            + povm.probability(zb, &rho1)
            + povm.probability(ob, &rho1));
    let errors = 0.5 * (povm.probability(zb, &rho0) + povm.probability(ob, &rho1));
    // roundoff from the POVM products must not invent flipped bits
    let e = if p_conc > 0.0 && errors > 1e-14 * triple.transmission {
        errors / p_conc
    } else {
        0.0
    };
    Ok((p_conc, e))
}

/// Long-key gain `G` with `α' = α`.
pub fn secret_key_gain(alpha: f64, triple: &ChannelTriple, mode: EstimationMode) -> Result<KeyGainReport> {
    secret_key_gain_finite(alpha, triple, mode, None)
}

/// [`secret_key_gain`] with optional finite-key security terms.
pub fn secret_key_gain_finite(
    alpha: f64,
    triple: &ChannelTriple,
    mode: EstimationMode,
    finite: Option<FiniteKey>,
) -> Result<KeyGainReport> {
    let (p_conc, e) = conclusive_statistics(alpha, triple)?;
    if e >= 1.0 {
        return Err(Error::Domain {
            name: "e",
            value: e,
            expected: "bit error rate below 1",
        });
    }
    let correct = min_q(alpha, alpha, triple)?;
    let i_gc = mode.pick(&correct);
    let (q_flipped, i_gf) = if e > 0.0 {
        let flipped = flipped_bit_gain(alpha, alpha, triple)?;
        (Some(flipped.q_min_abs), mode.pick(&flipped))
    } else {
        (None, 1.0)
    };
    let (pen_c, pen_f) = match finite {
        Some(f) => (f.s_c / f.n_total, f.s_f / f.n_total),
        None => (0.0, 0.0),
    };
    let g_correct = p_conc * (1.0 - e) * (1.0 - i_gc) - pen_c;
    let g_flipped = p_conc * e * (1.0 - i_gf) - pen_f;
    Ok(KeyGainReport {
        alpha,
        p_conc,
        e,
        q_correct: correct.q_min_abs,
        q_flipped,
        i_gc,
        i_gf,
        g_correct,
        g_flipped,
        g_total: g_correct + g_flipped - p_conc * binary_entropy(e),
        estimation_mode: mode,
    })
}

/// Noiseless gain `(T/4)(1 − cos 2α)[1 − log2(2 − ((cos α − 1 + T)/(T cos α))²)]`,
/// valid where `cos α ≥ 1 − T`.
pub fn point_a_gain(alpha: f64, transmission: f64) -> Result<f64> {
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
    let ca = cos(alpha);
    if !(transmission > 0.0 && ca - 1.0 + transmission >= -1e-12) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "cos(alpha) >= 1 - T",
        });
    }
    let q = ((ca - 1.0 + transmission) / (transmission * ca)).max(0.0);
    Ok(transmission / 4.0 * (1.0 - cos(2.0 * alpha)) * (1.0 - log2(2.0 - sq(q))))
}

/// Result of [`optimal_angle`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimalAngle {
    /// 0 when no angle gives a positive gain.
    pub alpha: f64,
    pub gain: f64,
}

/// Points of the coarse angle scan, 1° apart.
pub const ANGLE_SCAN_POINTS: usize = 90;

/// Golden-section tolerance on the angle.
pub const ANGLE_TOLERANCE: f64 = 1e-6;

fn gain_or_none(alpha: f64, triple: &ChannelTriple, mode: EstimationMode) -> Option<f64> {
    secret_key_gain(alpha, triple, mode).ok().map(|r| r.g_total)
}

/// Maximizes `G` over `α ∈ (0, π/2]` for a fixed channel.
pub fn optimal_angle(triple: &ChannelTriple, mode: EstimationMode) -> Result<OptimalAngle> {
    triple.validate()?;
    let step = PI / 2.0 / ANGLE_SCAN_POINTS as f64;
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=ANGLE_SCAN_POINTS {
        if let Some(g) = gain_or_none(k as f64 * step, triple, mode) {
            if g > 0.0 && best.is_none_or(|(_, bg)| g > bg) {
                best = Some((k, g));
            }
        }
    }
    let Some((k, g_coarse)) = best else {
        return Ok(OptimalAngle { alpha: 0.0, gain: 0.0 });
    };
    let f = |a: f64| gain_or_none(a, triple, mode).unwrap_or(f64::NEG_INFINITY);
    let (mut lo, mut hi) = ((k - 1) as f64 * step, ((k + 1) as f64 * step).min(PI / 2.0));
    let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > ANGLE_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut out = OptimalAngle {
        alpha: k as f64 * step,
        gain: g_coarse,
    };
    for (a, g) in [(mid, f(mid)), (x1, f1), (x2, f2)] {
        if g > out.gain {
            out = OptimalAngle { alpha: a, gain: g };
        }
    }
    Ok(out)
}

/// Largest `ε` (at `θ = 0`) with a positive optimized gain, and the optimal
/// angle just below it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BPoint {
    pub epsilon: f64,
    pub alpha: f64,
}

/// Bisection on `ε` for the point where the optimized gain vanishes.
pub fn b_point(transmission: f64, mode: EstimationMode, tolerance: f64) -> Result<BPoint> {
    check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
    let at = |eps: f64| -> Result<OptimalAngle> { optimal_angle(&ChannelTriple::new(0.0, eps, transmission)?, mode) };
    let first = at(0.0)?;
    if first.gain <= 0.0 {
        return Ok(BPoint {
            epsilon: 0.0,
            alpha: 0.0,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut alpha = first.alpha;
    if at(hi)?.gain > 0.0 {
        return Ok(BPoint {
            epsilon: 1.0,
            alpha: at(hi)?.alpha,
        });
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let r = at(mid)?;
        if r.gain > 0.0 {
            lo = mid;
            alpha = r.alpha;
        } else {
            hi = mid;
        }
    }
    Ok(BPoint { epsilon: lo, alpha })
}

/// Fiber link between Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalLink {
    pub length_km: f64,
    /// dB/km.
    pub channel_loss: f64,
    /// dB.
    pub receiver_loss: f64,
    /// Mean dark counts per pulse.
    pub dark_mean: f64,
    pub det_efficiency: f64,
}

impl PhysicalLink {
    /// Detector and fiber figures of the KTH experiment.
    pub const fn kth(length_km: f64) -> Self {
        Self {
            length_km,
            channel_loss: 0.2,
            receiver_loss: 1.0,
            dark_mean: 2e-4,
            det_efficiency: 0.18,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v| check_range(name, v, 0.0, f64::MAX, "non-negative");
        nonneg("length_km", self.length_km)?;
        nonneg("channel_loss", self.channel_loss)?;
        nonneg("receiver_loss", self.receiver_loss)?;
        nonneg("dark_mean", self.dark_mean)?;
        check_range("det_efficiency", self.det_efficiency, 0.0, 1.0, "0 <= eta <= 1")
    }

    pub fn with_length(&self, length_km: f64) -> Self {
        Self { length_km, ..*self }
    }

    /// `10^{−(l·L_c + L_r)/10}`.
    pub fn attenuation(&self) -> f64 {
        pow(10.0, -(self.length_km * self.channel_loss + self.receiver_loss) / 10.0)
    }
}

/// `T = e^{−ν}η·10^{−x} + e^{−ν}ν(1 − 10^{−x})`, `ε = e^{−ν}ν(1 − 10^{−x})/T`.
pub fn link_to_channel(link: &PhysicalLink) -> Result<ChannelTriple> {
    link.validate()?;
    let d = link.attenuation();
    let signal = exp(-link.dark_mean) * link.det_efficiency * d;
    let dark = exp(-link.dark_mean) * link.dark_mean * (1.0 - d);
    let t = signal + dark;
    if !(t > 0.0) {
        return Err(Error::DegenerateLink);
    }
    ChannelTriple::new(0.0, (dark / t).min(1.0), t.min(1.0))
}

/// Single-photon BB84 reference gain.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bb84Gain {
    pub gain: f64,
    pub error_rate: f64,
    /// `e ≥ 1/2`; the gain is reported as 0.
    pub saturated: bool,
}

/// `G = (T/2)[1 − log2(1 + 4e − 4e²) − h(e)]` with `e = ν/(2T)`.
pub fn bb84_key_gain(transmission: f64, dark_mean: f64) -> Result<Bb84Gain> {
    check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
    check_range("nu", dark_mean, 0.0, f64::MAX, "non-negative")?;
    let e = if transmission > 0.0 {
        dark_mean / (2.0 * transmission)
    } else {
        f64::INFINITY
    };
    if e >= 0.5 {
        return Ok(Bb84Gain {
            gain: 0.0,
            error_rate: e,
            saturated: true,
        });
    }
    let gain = transmission / 2.0 * (1.0 - log2(1.0 + 4.0 * e - 4.0 * e * e) - binary_entropy(e));
    Ok(Bb84Gain {
        gain,
        error_rate: e,
        saturated: false,
    })
}

/// One row of [`distance_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceRow {
    pub l_km: f64,
    pub transmission: f64,
    pub epsilon: f64,
    pub g_b92: f64,
    pub g_bb84: f64,
    pub bb84_saturated: bool,
}

/// B92 (at fixed `α`) and BB84 gains along a range of fiber lengths.
pub fn distance_sweep(
    template: &PhysicalLink,
    lengths_km: &[f64],
    alpha: f64,
    mode: EstimationMode,
) -> Result<Vec<DistanceRow>> {
    let row = |&l: &f64| -> Result<DistanceRow> {
        let link = template.with_length(l);
        let triple = link_to_channel(&link)?;
        let b92 = secret_key_gain(alpha, &triple, mode)?;
        let bb84 = bb84_key_gain(triple.transmission, link.dark_mean)?;
        Ok(DistanceRow {
            l_km: l,
            transmission: triple.transmission,
            epsilon: triple.epsilon,
            g_b92: b92.g_total,
            g_bb84: bb84.gain,
            bb84_saturated: bb84.saturated,
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        lengths_km.par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        lengths_km.iter().map(row).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg;
    use crate::math::sin;
    use approx::assert_abs_diff_eq;

    #[test]
    fn undisturbed_gain() {
        let a = deg(25.0);
        let r = secret_key_gain(
            a,
            &ChannelTriple::new(0.0, 0.0, 1.0).unwrap(),
            EstimationMode::Collision,
        )
        .unwrap();
        assert_abs_diff_eq!(r.g_total, sq(sin(a)) / 2.0, epsilon = 1e-14);
        assert_eq!(r.e, 0.0);
        assert_eq!(r.q_flipped, None);
    }

    #[test]
    fn closed_form_at_zero_noise() {
        for (a, t) in [(10.0, 0.8), (30.0, 0.5), (20.0, 0.95)] {
            let r = secret_key_gain(
                deg(a),
                &ChannelTriple::new(0.0, 0.0, t).unwrap(),
                EstimationMode::Collision,
            )
            .unwrap();
            assert_abs_diff_eq!(r.g_total, point_a_gain(deg(a), t).unwrap(), epsilon = 1e-12);
        }
        assert!(point_a_gain(deg(80.0), 0.3).is_err());
    }

    #[test]
    fn decomposition_and_conventional_statistics() {
        let (a, eps, t) = (deg(12.0), 0.07, 0.3);
        let triple = ChannelTriple::new(0.0, eps, t).unwrap();
        let r = secret_key_gain(a, &triple, EstimationMode::Collision).unwrap();
        assert_abs_diff_eq!(
            r.p_conc,
            crate::bounds::p_conclusive(a, eps, t).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(r.e, crate::bounds::bit_error_rate(a, eps).unwrap(), epsilon = 1e-14);
        assert_eq!(r.g_total, r.g_correct + r.g_flipped - r.p_conc * binary_entropy(r.e));
    }

    #[test]
    fn finite_key_penalty() {
        let triple = ChannelTriple::new(0.0, 0.02, 0.9).unwrap();
        let a = deg(20.0);
        let inf = secret_key_gain(a, &triple, EstimationMode::Collision).unwrap();
        let fin = secret_key_gain_finite(
            a,
            &triple,
            EstimationMode::Collision,
            Some(FiniteKey {
                s_c: 30.0,
                s_f: 10.0,
                n_total: 1e6,
            }),
        )
        .unwrap();
        assert_abs_diff_eq!(inf.g_total - fin.g_total, 40.0 / 1e6, epsilon = 1e-15);
    }

    #[test]
    fn shannon_not_below_collision() {
        let a = deg(12.0);
        for k in 0..20 {
            let triple = ChannelTriple::new(0.0, 0.01 * k as f64, 0.3).unwrap();
            let c = secret_key_gain(a, &triple, EstimationMode::Collision).unwrap();
            let s = secret_key_gain(a, &triple, EstimationMode::Shannon).unwrap();
            assert!(s.g_total >= c.g_total - 1e-15);
        }
    }

    #[test]
    fn optimum_is_zero_without_gain() {
        let r = optimal_angle(&ChannelTriple::new(0.0, 0.6, 0.3).unwrap(), EstimationMode::Collision).unwrap();
        assert_eq!(r, OptimalAngle { alpha: 0.0, gain: 0.0 });
        let r = optimal_angle(&ChannelTriple::new(0.0, 0.0, 0.8).unwrap(), EstimationMode::Collision).unwrap();
        assert!(r.alpha > 0.0 && r.gain > 0.0);
        // the coarse scan never beats the refined optimum
        for k in 1..=90 {
            if let Some(g) = gain_or_none(
                deg(k as f64),
                &ChannelTriple::new(0.0, 0.0, 0.8).unwrap(),
                EstimationMode::Collision,
            ) {
                assert!(g <= r.gain + 1e-15);
            }
        }
    }

    #[test]
    fn link_model() {
        let l0 = PhysicalLink {
            length_km: 0.0,
            channel_loss: 0.2,
            receiver_loss: 1.0,
            dark_mean: 0.0,
            det_efficiency: 0.18,
        };
        let t = link_to_channel(&l0).unwrap();
        assert_abs_diff_eq!(t.transmission, 0.18 * pow(10.0, -0.1), epsilon = 1e-15);
        assert_eq!(t.epsilon, 0.0);
        let far = link_to_channel(&l0.with_length(80.0)).unwrap();
        assert_eq!(far.epsilon, 0.0);
        let kth = link_to_channel(&PhysicalLink::kth(20.0)).unwrap();
        let d = pow(10.0, -0.5);
        let want_t = exp(-2e-4) * (0.18 * d + 2e-4 * (1.0 - d));
        assert_abs_diff_eq!(kth.transmission, want_t, epsilon = 1e-15);
        assert_abs_diff_eq!(kth.epsilon, exp(-2e-4) * 2e-4 * (1.0 - d) / want_t, epsilon = 1e-15);
        let dead = PhysicalLink {
            det_efficiency: 0.0,
            dark_mean: 0.0,
            ..l0
        };
        assert_eq!(link_to_channel(&dead), Err(Error::DegenerateLink));
    }

    #[test]
    fn bb84_cases() {
        let g = bb84_key_gain(0.4, 0.0).unwrap();
        assert_abs_diff_eq!(g.gain, 0.2, epsilon = 1e-15);
        assert!(!g.saturated);
        let s = bb84_key_gain(1e-4, 2e-4).unwrap();
        assert!(s.saturated);
        assert_eq!(s.gain, 0.0);
    }

    #[test]
    fn kth_ordering() {
        let grid: Vec<f64> = (0..=12).map(|k| 5.0 * k as f64).collect();
        let rows = distance_sweep(&PhysicalLink::kth(0.0), &grid, deg(11.0), EstimationMode::Collision).unwrap();
        assert!(rows[0].g_b92 > 0.0);
        for r in &rows {
            assert!(r.g_b92 < r.g_bb84, "{r:?}");
        }
    }
}
