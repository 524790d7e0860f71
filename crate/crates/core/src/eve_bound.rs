//! Eve's optimal individual attack on the symmetrized channel.
//!
//! After symmetrization her probe states for the two correct-bit values are
//! related by a real orthogonal `ξ̂`. On the two-dimensional span of the
//! one-photon Schmidt vectors everything reduces to two real symmetric
//! matrices:
//!
//! - `Q(ξ̂) = Tr[Â ξ̂]`, the overlap of her conditional probe states;
//! - `B(ξ̂) = Tr[B̂ ξ̂]`, fixed by unitarity through
//!   `|T·B(ξ̂) − cos α'| ≤ 1 − T`.
//!
//! `Q_min(B)` (smallest `|Q|` at fixed `B`) vanishes on `|B| ≤ B₀` and grows
//! monotonically to `B_max`. Stationarity of the constrained problem leaves
//! three families of `ξ̂` restricted to that plane:
//!
//! - Type 1, reflections `[[cos η, sin η], [sin η, −cos η]]`, tracing ellipses
//!   in the `(B, Q)` plane;
//! - Type 2, rotations, which never beat Type 1/3 and are only exposed for
//!   checking that claim;
//! - Type 3, `±(P̂_a + cos η (1 − P̂_a))` where `P̂_a ∝ Â − κB̂` is the rank-one
//!   combination, tracing straight segments.
//!
//! Every root of `B(η) = B` and `Q(η) = 0` on these curves has a closed form.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::estimation::ChannelTriple;
use crate::math::{acos, atan2, binary_entropy, cos, fabs, hypot, log2, sin, sq, sqrt};

/// Below this noise level the Type-3 family is singular and the ε = 0 closed
/// form is used.
pub const ZERO_NOISE: f64 = 1e-9;

/// Slack allowed above `B_max` before a target is declared unreachable.
pub const B_MAX_GRACE: f64 = 1e-9;

/// Real symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymMat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl SymMat2 {
    pub const fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Self { m11, m12, m22 }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mid = self.trace() / 2.0;
        let r = hypot((self.m11 - self.m22) / 2.0, self.m12);
        [mid - r, mid + r]
    }

    /// `Tr[M X]` for an arbitrary (not necessarily symmetric) `X`.
    pub fn trace_with(&self, x: &[[f64; 2]; 2]) -> f64 {
        self.m11 * x[0][0] + self.m12 * (x[0][1] + x[1][0]) + self.m22 * x[1][1]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(k * self.m11, k * self.m12, k * self.m22)
    }

    pub fn sub(&self, o: &SymMat2) -> Self {
        Self::new(self.m11 - o.m11, self.m12 - o.m12, self.m22 - o.m22)
    }

    /// `Tr[M N]` for symmetric `N`.
    pub fn dot(&self, o: &SymMat2) -> f64 {
        self.m11 * o.m11 + 2.0 * self.m12 * o.m12 + self.m22 * o.m22
    }
}

/// `Â` (overlap of Eve's conditional probe states) and `B̂` (inner-product
/// constraint), in the basis of Eve's one-photon Schmidt vectors.
pub fn build_ab(alpha: f64, theta: f64, epsilon: f64) -> Result<(SymMat2, SymMat2)> {
    check_range("epsilon", epsilon, 0.0, 1.0, "0 <= epsilon <= 1")?;
    if !(alpha.is_finite() && theta.is_finite()) {
        return Err(Error::Domain {
            name: "alpha/theta",
            value: alpha + theta,
            expected: "finite angles",
        });
    }
    let denom = 1.0 - (1.0 - epsilon) * cos(2.0 * alpha + theta);
    if denom <= 1e-15 {
        return Err(Error::DegenerateChannel);
    }
    let half = alpha + theta / 2.0;
    let a = SymMat2::new(
        (2.0 - epsilon) * sq(sin(half)) / denom,
        -sqrt(epsilon * (2.0 - epsilon)) * sin(2.0 * alpha + theta) / (2.0 * denom),
        epsilon * sq(cos(half)) / denom,
    );
    let (cb, sb) = (cos(alpha + theta), sin(alpha + theta));
    let b = SymMat2::new(
        (1.0 - epsilon / 2.0) * cb,
        sqrt((1.0 - epsilon / 2.0) * epsilon / 2.0) * sb,
        -epsilon / 2.0 * cb,
    );
    Ok((a, b))
}

/// Largest `Tr[B̂ ξ̂]` over orthogonal `ξ̂`: `√((B₁₁−B₂₂)² + 4B₁₂²)`, which is
/// the nuclear norm of an indefinite `B̂`.
pub fn b_max(b: &SymMat2) -> Result<f64> {
    let det = b.det();
    if det > 1e-12 {
        return Err(Error::DefiniteB { det });
    }
    Ok(hypot(b.m11 - b.m22, 2.0 * b.m12))
}

/// Stationary family of `ξ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    Type1,
    Type3Plus,
    Type3Minus,
}

/// A point on one of the stationary families.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryCandidate {
    pub family: Family,
    pub eta: f64,
}

/// `Q(η) = q.0 cos η + q.1 sin η`, `B(η) = b.0 cos η + b.1 sin η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type1Curve {
    pub q: (f64, f64),
    pub b: (f64, f64),
}

impl Type1Curve {
    pub fn new(a: &SymMat2, b: &SymMat2) -> Self {
        Self {
            q: (a.m11 - a.m22, 2.0 * a.m12),
            b: (b.m11 - b.m22, 2.0 * b.m12),
        }
    }

    pub fn q_at(&self, eta: f64) -> f64 {
        self.q.0 * cos(eta) + self.q.1 * sin(eta)
    }

    pub fn b_at(&self, eta: f64) -> f64 {
        self.b.0 * cos(eta) + self.b.1 * sin(eta)
    }

    /// The two `η` with `B(η) = target` (`R cos(η − δ) = target`).
    pub fn roots_of_b(&self, target: f64) -> Option<[f64; 2]> {
        let r = hypot(self.b.0, self.b.1);
        if r == 0.0 {
            return None;
        }
        let ratio = target / r;
        if fabs(ratio) > 1.0 + 1e-12 {
            return None;
        }
        let delta = atan2(self.b.1, self.b.0);
        let spread = acos(ratio.clamp(-1.0, 1.0));
        Some([delta + spread, delta - spread])
    }

    /// `η*` with `Q(η*) = 0`; the other zero is `η* + π`.
    pub fn q_zero(&self) -> f64 {
        atan2(self.q.0, -self.q.1)
    }
}

/// `Q(η) = ±[t(1−cos η) + cos η]`, `B(η) = ±[s(1−cos η) + cos η·Tr B̂]`
/// with `t = Tr(Â P̂_a)`, `s = Tr(B̂ P̂_a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type3Branch {
    pub sign: f64,
    pub projector: SymMat2,
    pub tr_a_p: f64,
    pub tr_b_p: f64,
    pub tr_a: f64,
    pub tr_b: f64,
}

impl Type3Branch {
    pub fn family(&self) -> Family {
        if self.sign > 0.0 {
            Family::Type3Plus
        } else {
            Family::Type3Minus
        }
    }

    pub fn q_of_cos(&self, c: f64) -> f64 {
        self.sign * (self.tr_a_p * (1.0 - c) + c * self.tr_a)
    }

    pub fn b_of_cos(&self, c: f64) -> f64 {
        self.sign * (self.tr_b_p * (1.0 - c) + c * self.tr_b)
    }

    pub fn q_at(&self, eta: f64) -> f64 {
        self.q_of_cos(cos(eta))
    }

    pub fn b_at(&self, eta: f64) -> f64 {
        self.b_of_cos(cos(eta))
    }

    /// `cos η ∈ [−1, 1]` with `B = target`, if any.
    pub fn cos_for_b(&self, target: f64) -> Option<f64> {
        let slope = self.tr_b - self.tr_b_p;
        if fabs(slope) < 1e-15 {
            return None;
        }
        let c = (self.sign * target - self.tr_b_p) / slope;
        in_unit(c)
    }

    /// `cos η ∈ [−1, 1]` with `Q = 0`, if any.
    pub fn cos_for_q_zero(&self) -> Option<f64> {
        let slope = self.tr_a - self.tr_a_p;
        if fabs(slope) < 1e-15 {
            return None;
        }
        in_unit(-self.tr_a_p / slope)
    }
}

fn in_unit(c: f64) -> Option<f64> {
    if (-1.0 - 1e-12..=1.0 + 1e-12).contains(&c) {
        Some(c.clamp(-1.0, 1.0))
    } else {
        None
    }
}

/// Type 2, `ξ̂` a rotation: `Q = Tr Â cos η`, `B = Tr B̂ cos η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2Curve {
    pub tr_a: f64,
    pub tr_b: f64,
}

impl Type2Curve {
    pub fn q_at(&self, eta: f64) -> f64 {
        self.tr_a * cos(eta)
    }

    pub fn b_at(&self, eta: f64) -> f64 {
        self.tr_b * cos(eta)
    }
}

/// The stationary families for one `(Â, B̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCurves {
    pub type1: Type1Curve,
    pub type2: Type2Curve,
    /// Zero, one or two Type-3 branches that exist as valid projectors.
    pub type3: Vec<Type3Branch>,
}

impl CandidateCurves {
    pub fn q_at(&self, c: StationaryCandidate) -> Option<f64> {
        match c.family {
            Family::Type1 => Some(self.type1.q_at(c.eta)),
            f => self.type3.iter().find(|b| b.family() == f).map(|b| b.q_at(c.eta)),
        }
    }

    pub fn b_at(&self, c: StationaryCandidate) -> Option<f64> {
        match c.family {
            Family::Type1 => Some(self.type1.b_at(c.eta)),
            f => self.type3.iter().find(|b| b.family() == f).map(|b| b.b_at(c.eta)),
        }
    }
}

/// `κ = (A₁₁B₂₂ + A₂₂B₁₁ − 2A₁₂B₁₂)/(B₁₁B₂₂ − B₁₂²)`, making `Â − κB̂` rank one.
pub fn kappa(a: &SymMat2, b: &SymMat2) -> Result<f64> {
    let det_b = b.det();
    if fabs(det_b) < ZERO_NOISE / 2.0 {
        return Err(Error::ZeroNoise);
    }
    Ok((a.m11 * b.m22 + a.m22 * b.m11 - 2.0 * a.m12 * b.m12) / det_b)
}

/// Builds the Type-1 curve and the Type-3 branches that exist.
///
/// Fails with [`Error::ZeroNoise`] when `B̂` is (numerically) rank one, which
/// happens exactly at ε = 0; there `Q(B) = B / cos(α+θ)` applies instead.
pub fn candidate_curves(a: &SymMat2, b: &SymMat2) -> Result<CandidateCurves> {
    let type1 = Type1Curve::new(a, b);
    let type2 = Type2Curve {
        tr_a: a.trace(),
        tr_b: b.trace(),
    };
    let k = kappa(a, b)?;
    let m = a.sub(&b.scaled(k));
    let tr = m.trace();
    let mut type3 = Vec::new();
    if fabs(tr) > 1e-12 {
        let p = m.scaled(1.0 / tr);
        let [lo, hi] = p.eigenvalues();
        if lo >= -1e-9 && hi <= 1.0 + 1e-9 {
            for sign in [1.0, -1.0] {
                type3.push(Type3Branch {
                    sign,
                    projector: p,
                    tr_a_p: a.dot(&p),
                    tr_b_p: b.dot(&p),
                    tr_a: a.trace(),
                    tr_b: b.trace(),
                });
            }
        }
    }
    Ok(CandidateCurves { type1, type2, type3 })
}

/// `B₀`: the largest `|B|` at which some stationary `ξ̂` has `Q = 0`.
pub fn compute_b0(a: &SymMat2, b: &SymMat2) -> f64 {
    let type1 = Type1Curve::new(a, b);
    let mut b0 = fabs(type1.b_at(type1.q_zero()));
    if let Ok(curves) = candidate_curves(a, b) {
        for branch in &curves.type3 {
            if let Some(c) = branch.cos_for_q_zero() {
                b0 = b0.max(fabs(branch.b_of_cos(c)));
            }
        }
    }
    b0
}

/// `Q_min(B)` together with the stationary point attaining it (`None` in the
/// free region `|B| ≤ B₀`).
pub fn q_min_of_b(a: &SymMat2, b: &SymMat2, target_b: f64) -> Result<(f64, Option<StationaryCandidate>)> {
    let bmax = b_max(b)?;
    let mut target = fabs(target_b);
    if !(target <= bmax + B_MAX_GRACE) {
        return Err(Error::Unreachable {
            target: target_b,
            b_max: bmax,
        });
    }
    target = target.min(bmax);
    if target <= compute_b0(a, b) {
        return Ok((0.0, None));
    }

    let mut best: Option<(f64, StationaryCandidate)> = None;
    let mut offer = |q: f64, cand: StationaryCandidate| {
        let q = fabs(q);
        // ties go to whichever came first (Type 1)
        if best.is_none_or(|(bq, _)| q < bq - 1e-14) {
            best = Some((q, cand));
        }
    };

    let type1 = Type1Curve::new(a, b);
    if let Some(roots) = type1.roots_of_b(target) {
        for eta in roots {
            offer(
                type1.q_at(eta),
                StationaryCandidate {
                    family: Family::Type1,
                    eta,
                },
            );
        }
    }
    match candidate_curves(a, b) {
        Ok(curves) => {
            for branch in &curves.type3 {
                if let Some(c) = branch.cos_for_b(target) {
                    offer(
                        branch.q_of_cos(c),
                        StationaryCandidate {
                            family: branch.family(),
                            eta: acos(c),
                        },
                    );
                }
            }
        }
        Err(Error::ZeroNoise) => {}
        Err(e) => return Err(e),
    }
    let (q, cand) = best.ok_or(Error::Unreachable {
        target: target_b,
        b_max: bmax,
    })?;
    Ok((q.min(1.0), Some(cand)))
}

/// How the reported minimum is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Achiever {
    /// `B` target inside `|B| ≤ B₀`: Eve learns the bit completely.
    Free,
    Candidate(StationaryCandidate),
}

/// Eve's optimum for one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EveBoundResult {
    /// Minimum `|Q|` under the loss-slackened unitarity constraint.
    pub q_min_abs: f64,
    pub b0: f64,
    pub b_max: f64,
    /// Smallest admissible `B`, `(cos α' − (1−T))/T`, clamped into `[−B_max, B_max]`.
    pub b_target: f64,
    pub achieving: Achiever,
    /// Collision-probability gain `log2(2 − Q²)`.
    pub i_gc: f64,
    /// Shannon gain `1 − h((1 − √(1−Q²))/2)`.
    pub i_gc_shannon: f64,
}

/// `log2(2 − |Q|²)`.
pub fn collision_gain(q: f64) -> f64 {
    log2(2.0 - sq(q.clamp(0.0, 1.0)))
}

/// `1 − h((1 − √(1 − |Q|²))/2)`.
pub fn shannon_gain(q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    1.0 - binary_entropy((1.0 - sqrt(1.0 - q * q)) / 2.0)
}

/// Minimum `|Q|` over attacks reproducing the observed channel, under
/// `|T·Tr[B̂ξ̂] − cos α'| ≤ 1 − T`, and the resulting information gains on
/// correct bits.
pub fn min_q(alpha_prime: f64, alpha: f64, triple: &ChannelTriple) -> Result<EveBoundResult> {
    check_range("alpha_prime", alpha_prime, 0.0, PI / 2.0, "0 <= alpha' <= pi/2")?;
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    triple.validate()?;
    let ChannelTriple {
        theta,
        epsilon,
        transmission: t,
    } = *triple;

    let (a, b) = build_ab(alpha, theta, epsilon)?;
    let bmax = b_max(&b)?;
    let lowest = if t > 0.0 {
        (cos(alpha_prime) - (1.0 - t)) / t
    } else {
        f64::NEG_INFINITY
    };
    if lowest > bmax + B_MAX_GRACE {
        return Err(Error::Unreachable {
            target: lowest,
            b_max: bmax,
        });
    }
    let target = lowest.clamp(-bmax, bmax);

    let (q, b0, achieving) = if epsilon < ZERO_NOISE {
        let scale = fabs(cos(alpha + theta));
        if target <= 0.0 || scale == 0.0 {
            (0.0, 0.0, Achiever::Free)
        } else {
            let q = (target / scale).min(1.0);
            let eta = acos((target / b.m11).clamp(-1.0, 1.0));
            (
                q,
                0.0,
                Achiever::Candidate(StationaryCandidate {
                    family: Family::Type1,
                    eta,
                }),
            )
        }
    } else {
        let b0 = compute_b0(&a, &b);
        if target <= b0 {
            (0.0, b0, Achiever::Free)
        } else {
            let (q, cand) = q_min_of_b(&a, &b, target)?;
            (q, b0, cand.map_or(Achiever::Free, Achiever::Candidate))
        }
    };

    Ok(EveBoundResult {
        q_min_abs: q,
        b0,
        b_max: bmax,
        b_target: target,
        achieving,
        i_gc: collision_gain(q),
        i_gc_shannon: shannon_gain(q),
    })
}

/// The same bound for flipped bits: `θ → −2α − θ`.
pub fn flipped_bit_gain(alpha_prime: f64, alpha: f64, triple: &ChannelTriple) -> Result<EveBoundResult> {
    let flipped = ChannelTriple {
        theta: -2.0 * alpha - triple.theta,
        ..*triple
    };
    min_q(alpha_prime, alpha, &flipped)
}
