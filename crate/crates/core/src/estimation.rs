//! From Bob's disclosed event counts to the symmetrized channel `(θ, ε, T)`.

use core::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::math::{atan2, cos, hypot, sin, sqrt};
use crate::polarization::{symmetrized_density, Bit, Outcome, Povm5, SignalDensity};

/// Parameters of the symmetrized channel.
///
/// `theta` is the clockwise tilt of the received states, `epsilon` the
/// depolarization (`1−ε` is the Bloch length) and `transmission` the
/// one-photon detection probability `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelTriple {
    pub theta: f64,
    pub epsilon: f64,
    pub transmission: f64,
}

impl ChannelTriple {
    pub fn new(theta: f64, epsilon: f64, transmission: f64) -> Result<Self> {
        let t = Self {
            theta,
            epsilon,
            transmission,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::Domain {
                name: "theta",
                value: self.theta,
                expected: "finite angle",
            });
        }
        check_range("epsilon", self.epsilon, 0.0, 1.0, "0 <= epsilon <= 1")?;
        check_range("T", self.transmission, 0.0, 1.0, "0 <= T <= 1")
    }
}

/// Event counts `n_{j,μ}` for `μ ∈ {0, 1, 0̄, 1̄}`; the rest of `n_total` were V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservedCounts {
    /// Indexed `[j][μ]` with `μ` in [`Outcome::RECORDED`] order.
    pub n: [[u64; 4]; 2],
    pub n_total: u64,
}

impl ObservedCounts {
    pub fn new(n: [[u64; 4]; 2], n_total: u64) -> Result<Self> {
        let c = Self { n, n_total };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::Domain {
                name: "n_total",
                value: 0.0,
                expected: "n_total >= 1",
            });
        }
        if self.recorded() > self.n_total {
            return Err(Error::Domain {
                name: "sum n[j][mu]",
                value: self.recorded() as f64,
                expected: "sum of recorded events <= n_total",
            });
        }
        Ok(())
    }

    /// `n_{j,μ}`; the V count is not tracked per bit and reads as 0.
    pub fn get(&self, bit: Bit, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::Vacuum => 0,
            o => self.n[bit.index()][o.index()],
        }
    }

    /// Events with a non-V outcome.
    pub fn recorded(&self) -> u64 {
        self.n.iter().flatten().sum()
    }

    /// Conclusive events `n_{·,0̄} + n_{·,1̄}`.
    pub fn conclusive(&self) -> u64 {
        let (zb, ob) = (Outcome::ZeroBar.index(), Outcome::OneBar.index());
        self.n[0][zb] + self.n[0][ob] + self.n[1][zb] + self.n[1][ob]
    }

    /// Conclusive events where Bob's bit differs from Alice's: `(0, 0̄)` and `(1, 1̄)`.
    pub fn conclusive_errors(&self) -> u64 {
        self.n[0][Outcome::ZeroBar.index()] + self.n[1][Outcome::OneBar.index()]
    }
}

/// Relative frequencies `n_{j,μ}/n_total`. Exact expectations are
/// `Tr(F_μ ρ_j)/2` because Alice picks each bit with probability 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventFrequencies {
    pub f: [[f64; 4]; 2],
}

impl EventFrequencies {
    pub fn from_counts(counts: &ObservedCounts) -> Self {
        let total = counts.n_total as f64;
        let mut f = [[0.0; 4]; 2];
        for (row, nrow) in f.iter_mut().zip(&counts.n) {
            for (x, &n) in row.iter_mut().zip(nrow) {
                *x = n as f64 / total;
            }
        }
        Self { f }
    }

    /// Expected frequencies for given received states.
    pub fn from_states(povm: &Povm5, rho: &[SignalDensity; 2]) -> Self {
        let mut f = [[0.0; 4]; 2];
        for bit in Bit::BOTH {
            for o in Outcome::RECORDED {
                f[bit.index()][o.index()] = 0.5 * povm.probability(o, &rho[bit.index()]);
            }
        }
        Self { f }
    }

    /// Expected frequencies for the symmetrized channel `params` at Bob's angle `alpha`.
    pub fn expected(params: &ChannelTriple, alpha: f64) -> Result<Self> {
        let povm = Povm5::new(alpha)?;
        let rho = [
            symmetrized_density(params, alpha, Bit::Zero)?,
            symmetrized_density(params, alpha, Bit::One)?,
        ];
        Ok(Self::from_states(&povm, &rho))
    }

    fn at(&self, bit: Bit, o: Outcome) -> f64 {
        self.f[bit.index()][o.index()]
    }
}

/// Result of [`estimate_channel`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelEstimate {
    pub triple: ChannelTriple,
    /// `ε` came out slightly negative and was set to 0.
    pub clamped: bool,
}

/// Slack on `ε < 0` for exact frequencies.
pub const EXACT_CLAMP_TOLERANCE: f64 = 1e-9;

/// Estimates `(θ, ε, T)` from counts.
///
/// Statistical noise can push `ε` a little below zero; values within
/// `4/√n_total` are clamped to 0 and flagged, anything worse is rejected.
pub fn estimate_channel(counts: &ObservedCounts, alpha: f64) -> Result<ChannelEstimate> {
    counts.validate()?;
    let tol = EXACT_CLAMP_TOLERANCE.max(4.0 / sqrt(counts.n_total as f64));
    estimate_from_frequencies(&EventFrequencies::from_counts(counts), alpha, tol)
}

/// Closed-form inversion of
/// `(1−ε)cos θ = 2X₁/T`, `(1−ε)cos(θ+2α) = 2X₂/T`, `T = Σ f_{j,μ}`,
/// with `X₁ = f₀₀ − f₀₀̄ + f₁₁ − f₁₁̄` and `X₂ = f₀₁ − f₀₁̄ + f₁₀ − f₁₀̄`.
pub fn estimate_from_frequencies(freq: &EventFrequencies, alpha: f64, clamp_tolerance: f64) -> Result<ChannelEstimate> {
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 < alpha < pi/2")?;
    let (s2a, c2a) = (sin(2.0 * alpha), cos(2.0 * alpha));
    if s2a < 1e-9 {
        return Err(Error::DegenerateAngle { alpha });
    }

    use Bit::{One, Zero};
    use Outcome as O;
    let t: f64 = freq.f.iter().flatten().sum();
    if !(t > 0.0) {
        return Err(Error::EstimationInfeasible {
            reason: "no recorded events (T = 0)",
        });
    }
    let x1 = freq.at(Zero, O::Zero) - freq.at(Zero, O::ZeroBar) + freq.at(One, O::One) - freq.at(One, O::OneBar);
    let x2 = freq.at(Zero, O::One) - freq.at(Zero, O::OneBar) + freq.at(One, O::Zero) - freq.at(One, O::ZeroBar);
    let along = 2.0 * x1 / t;
    let across = (along * c2a - 2.0 * x2 / t) / s2a;
    let len = hypot(along, across);
    let mut epsilon = 1.0 - len;
    let mut clamped = false;
    if epsilon < 0.0 {
        if epsilon >= -clamp_tolerance {
            epsilon = 0.0;
            clamped = true;
        } else {
            return Err(Error::EstimationInfeasible {
                reason: "counts imply a Bloch vector longer than 1",
            });
        }
    }
    let theta = if len > 0.0 { atan2(across, along) } else { 0.0 };
    Ok(ChannelEstimate {
        triple: ChannelTriple {
            theta,
            epsilon,
            transmission: t.min(1.0),
        },
        clamped,
    })
}

/// Averages the four conjugations `{1, Z_W, R, Z_W R}` of the raw received
/// states. `Z_W` (complex conjugation in the `z` basis) flips the y component;
/// `R = σ_z ⊕ 1` swaps the roles of the two bits.
///
/// Returns the symmetrized pair and the triple that parametrizes it at Bob's
/// angle `alpha`.
pub fn symmetrize_densities(
    rho0: &SignalDensity,
    rho1: &SignalDensity,
    alpha: f64,
) -> Result<(ChannelTriple, [SignalDensity; 2])> {
    let (t0, t1) = (rho0.transmission(), rho1.transmission());
    let t = (t0 + t1) / 2.0;
    if t == 0.0 {
        let vac = SignalDensity::vacuum();
        return Ok((ChannelTriple::new(0.0, 1.0, 0.0)?, [vac, vac]));
    }
    let (r0, r1) = (rho0.bloch(), rho1.bloch());
    let x = (t0 * r0[0] - t1 * r1[0]) / (2.0 * t);
    let z = (t0 * r0[2] + t1 * r1[2]) / (2.0 * t);
    let s0 = SignalDensity::new(t, [x, 0.0, z])?;
    let s1 = SignalDensity::new(t, [-x, 0.0, z])?;
    let len = hypot(x, z);
    let theta = if len > 0.0 {
        crate::math::wrap_angle(-atan2(x, z) - alpha)
    } else {
        0.0
    };
    let triple = ChannelTriple::new(theta, (1.0 - len).clamp(0.0, 1.0), t)?;
    Ok((triple, [s0, s1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg;
    use crate::polarization::BlochState;
    use approx::assert_abs_diff_eq;

    fn scaled_counts(freq: &EventFrequencies, n_total: u64) -> ObservedCounts {
        let mut n = [[0u64; 4]; 2];
        for j in 0..2 {
            for m in 0..4 {
                n[j][m] = libm::round(freq.f[j][m] * n_total as f64) as u64;
            }
        }
        ObservedCounts::new(n, n_total).unwrap()
    }

    #[test]
    fn noiseless_identification() {
        let alpha = deg(30.0);
        for t in [1.0, 0.6, 0.05] {
            let params = ChannelTriple::new(0.0, 0.0, t).unwrap();
            let freq = EventFrequencies::expected(&params, alpha).unwrap();
            let est = estimate_from_frequencies(&freq, alpha, EXACT_CLAMP_TOLERANCE).unwrap();
            assert_abs_diff_eq!(est.triple.theta, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(est.triple.epsilon, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(est.triple.transmission, t, epsilon = 1e-15);
            // X₁ ∝ 1, X₂ ∝ cos 60° = 0.5 at these settings
            let x1 = freq.f[0][0] - freq.f[0][2] + freq.f[1][1] - freq.f[1][3];
            let x2 = freq.f[0][1] - freq.f[0][3] + freq.f[1][0] - freq.f[1][2];
            assert_abs_diff_eq!(x2 / x1, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn total_loss_is_infeasible() {
        let counts = ObservedCounts::new([[0; 4]; 2], 1000).unwrap();
        assert!(matches!(
            estimate_channel(&counts, deg(20.0)),
            Err(Error::EstimationInfeasible { .. })
        ));
    }

    #[test]
    fn degenerate_angles_are_refused() {
        let counts = ObservedCounts::new([[10; 4]; 2], 1000).unwrap();
        assert!(matches!(
            estimate_channel(&counts, 0.0),
            Err(Error::DegenerateAngle { .. })
        ));
        assert!(matches!(
            estimate_channel(&counts, PI / 2.0),
            Err(Error::DegenerateAngle { .. })
        ));
        assert!(estimate_channel(&counts, 2.0).is_err());
    }

    #[test]
    fn recovers_triple_from_rounded_counts() {
        let alpha = deg(10.0);
        let params = ChannelTriple::new(deg(15.0), 0.05, 0.8).unwrap();
        let freq = EventFrequencies::expected(&params, alpha).unwrap();
        let counts = scaled_counts(&freq, 1_000_000);
        let est = estimate_channel(&counts, alpha).unwrap().triple;
        assert!((est.theta - params.theta).abs() < 5e-4, "{est:?}");
        assert!((est.epsilon - params.epsilon).abs() < 5e-4);
        assert!((est.transmission - params.transmission).abs() < 5e-5);
    }

    #[test]
    fn rejects_overlong_bloch_vector() {
        // every photon lands on the "wrong" inconclusive pattern of a Bloch
        // vector with length 2
        let alpha = deg(30.0);
        let mut f = [[0.0; 4]; 2];
        f[0][0] = 0.5;
        f[1][1] = 0.5;
        f[0][1] = 0.0;
        f[1][0] = 0.0;
        let freq = EventFrequencies { f };
        assert!(matches!(
            estimate_from_frequencies(&freq, alpha, 1e-9),
            Err(Error::EstimationInfeasible { .. })
        ));
    }

    #[test]
    fn small_negative_epsilon_is_clamped_and_flagged() {
        let alpha = deg(30.0);
        let params = ChannelTriple::new(0.1, 0.0, 1.0).unwrap();
        let mut freq = EventFrequencies::expected(&params, alpha).unwrap();
        // lengthen the Bloch vector by a hair
        freq.f[0][0] += 1e-7;
        freq.f[1][1] += 1e-7;
        freq.f[0][2] -= 1e-7;
        freq.f[1][3] -= 1e-7;
        assert!(estimate_from_frequencies(&freq, alpha, 1e-9).is_err());
        let est = estimate_from_frequencies(&freq, alpha, 1e-5).unwrap();
        assert!(est.clamped);
        assert_eq!(est.triple.epsilon, 0.0);
    }

    #[test]
    fn symmetrization_fixes_symmetric_inputs() {
        let alpha = deg(12.0);
        let params = ChannelTriple::new(deg(-7.0), 0.2, 0.6).unwrap();
        let r0 = symmetrized_density(&params, alpha, Bit::Zero).unwrap();
        let r1 = symmetrized_density(&params, alpha, Bit::One).unwrap();
        let (triple, [s0, s1]) = symmetrize_densities(&r0, &r1, alpha).unwrap();
        assert_eq!(s0, r0);
        assert_eq!(s1, r1);
        assert_abs_diff_eq!(triple.theta, params.theta, epsilon = 1e-12);
        assert_abs_diff_eq!(triple.epsilon, params.epsilon, epsilon = 1e-12);
        assert_abs_diff_eq!(triple.transmission, params.transmission, epsilon = 1e-15);
    }

    #[test]
    fn symmetrization_kills_y_component() {
        let rho = SignalDensity::new(0.9, [0.0, 1.0, 0.0]).unwrap();
        let (_, [s0, s1]) = symmetrize_densities(&rho, &rho, 0.2).unwrap();
        assert_eq!(s0.bloch()[1], 0.0);
        assert_eq!(s1.bloch()[1], 0.0);
    }

    #[test]
    fn symmetrized_transmission_is_mean() {
        let (a, b) = (BlochState::wrapped(-0.4), BlochState::wrapped(0.4));
        let r0 = SignalDensity::pure(0.6, a).unwrap();
        let r1 = SignalDensity::pure(1.0, b).unwrap();
        let (triple, [s0, s1]) = symmetrize_densities(&r0, &r1, 0.4).unwrap();
        assert_abs_diff_eq!(triple.transmission, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(s0.transmission(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(s0.bloch()[0], -s1.bloch()[0], epsilon = 1e-15);
        assert_abs_diff_eq!(s0.bloch()[2], s1.bloch()[2], epsilon = 1e-15);
    }

    #[test]
    fn counts_bookkeeping() {
        let c = ObservedCounts::new([[1, 2, 3, 4], [5, 6, 7, 8]], 100).unwrap();
        assert_eq!(c.recorded(), 36);
        assert_eq!(c.conclusive(), 3 + 4 + 7 + 8);
        assert_eq!(c.conclusive_errors(), 3 + 8);
        assert_eq!(c.get(Bit::One, Outcome::ZeroBar), 7);
        assert!(ObservedCounts::new([[50; 4]; 2], 100).is_err());
        assert!(ObservedCounts::new([[0; 4]; 2], 0).is_err());
    }
}
