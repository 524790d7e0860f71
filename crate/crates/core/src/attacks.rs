//! Explicit individual attacks that give Eve complete knowledge of the
//! correct bits, as finite mixtures of rotations, weak measurements,
//! depolarization and loss.
//!
//! Every stage maps a pure x–z state (or the vacuum) to a pure x–z state (or
//! the vacuum) with some probability, optionally leaving Eve a guess of the
//! correct bit. Rotation by `+2α` sends `|0⟩` onto `|1⟩`, so every correct bit
//! surviving it is 1; rotation by `−2α` leaves only correct 0s.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{check_range, Error, Result};
use crate::estimation::{symmetrize_densities, ChannelTriple};
use crate::eve_bound::min_q;
use crate::math::{acos, atan2, fabs, pow, sin, sq, sqrt};
use crate::polarization::{make_alice_states, Bit, BlochState, SignalDensity};

/// What travels from Eve to Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PulseState {
    Photon(BlochState),
    Vacuum,
}

/// One elementary operation on the pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AttackStage {
    Identity,
    /// Rotate by `−2α` or `+2α` with probability 1/2 each.
    Rotation {
        alpha: f64,
    },
    /// Weak `x`-basis measurement of strength `q`, then the rotation that
    /// maps the post-measurement `|0⟩` onto `|1⟩` (outcome `+`) or `|1⟩` onto
    /// `|0⟩` (outcome `−`).
    WeakMeasurement {
        q: f64,
        alpha: f64,
    },
    /// Weak measurement with probability `lambda`, plain rotation otherwise.
    Mixed {
        q: f64,
        lambda: f64,
        alpha: f64,
    },
    /// Replace the state by its orthogonal partner with probability `ε/2`.
    Depolarize {
        epsilon: f64,
    },
    /// Keep the photon with probability `transmission`.
    Loss {
        transmission: f64,
    },
}

/// A possible result of a stage: probability, output, and Eve's bit guess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackBranch {
    pub weight: f64,
    pub state: PulseState,
    pub eve_guess: Option<Bit>,
}

impl AttackStage {
    pub fn validate(&self) -> Result<()> {
        let alpha_ok = |a: f64| check_range("alpha", a, 0.0, PI / 2.0, "0 <= alpha <= pi/2");
        match *self {
            AttackStage::Identity => Ok(()),
            AttackStage::Rotation { alpha } => alpha_ok(alpha),
            AttackStage::WeakMeasurement { q, alpha } => {
                check_range("q", q, 0.0, 0.5, "0 <= q <= 1/2")?;
                alpha_ok(alpha)
            }
            AttackStage::Mixed { q, lambda, alpha } => {
                check_range("q", q, 0.0, 0.5, "0 <= q <= 1/2")?;
                check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
                alpha_ok(alpha)
            }
            AttackStage::Depolarize { epsilon } => check_range("epsilon", epsilon, 0.0, 1.0, "0 <= epsilon <= 1"),
            AttackStage::Loss { transmission } => check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1"),
        }
    }

    /// All outcomes of this stage on `input`; weights sum to 1.
    pub fn branches(&self, input: PulseState) -> Vec<AttackBranch> {
        let keep = |state| AttackBranch {
            weight: 1.0,
            state,
            eve_guess: None,
        };
        let PulseState::Photon(s) = input else {
            return vec![keep(input)];
        };
        match *self {
            AttackStage::Identity => vec![keep(input)],
            AttackStage::Rotation { alpha } => rotation_branches(s, alpha, 1.0),
            AttackStage::WeakMeasurement { q, alpha } => weak_branches(s, q, alpha, 1.0),
            AttackStage::Mixed { q, lambda, alpha } => {
                let mut out = weak_branches(s, q, alpha, lambda);
                out.extend(rotation_branches(s, alpha, 1.0 - lambda));
                out
            }
            AttackStage::Depolarize { epsilon } => vec![
                AttackBranch {
                    weight: 1.0 - epsilon / 2.0,
                    state: input,
                    eve_guess: None,
                },
                AttackBranch {
                    weight: epsilon / 2.0,
                    state: PulseState::Photon(s.rotated(PI)),
                    eve_guess: None,
                },
            ],
            AttackStage::Loss { transmission } => vec![
                AttackBranch {
                    weight: transmission,
                    state: input,
                    eve_guess: None,
                },
                AttackBranch {
                    weight: 1.0 - transmission,
                    state: PulseState::Vacuum,
                    eve_guess: None,
                },
            ],
        }
    }
}

fn rotation_branches(s: BlochState, alpha: f64, weight: f64) -> Vec<AttackBranch> {
    vec![
        AttackBranch {
            weight: weight / 2.0,
            state: PulseState::Photon(s.rotated(-2.0 * alpha)),
            eve_guess: Some(Bit::Zero),
        },
        AttackBranch {
            weight: weight / 2.0,
            state: PulseState::Photon(s.rotated(2.0 * alpha)),
            eve_guess: Some(Bit::One),
        },
    ]
}

/// `√Â± |ψ⟩` for the `x` basis: probability and resulting state.
fn weak_kraus(s: BlochState, q: f64, plus: bool) -> (f64, BlochState) {
    let k = s.ket();
    let xp = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let xm = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
    let (wp, wm) = if plus {
        (sqrt(1.0 - q), sqrt(q))
    } else {
        (sqrt(q), sqrt(1.0 - q))
    };
    let cp = wp * (k[0] * xp[0] + k[1] * xp[1]);
    let cm = wm * (k[0] * xm[0] + k[1] * xm[1]);
    let y = [cp * xp[0] + cm * xm[0], cp * xp[1] + cm * xm[1]];
    let p = sq(y[0]) + sq(y[1]);
    (p, BlochState::wrapped(2.0 * atan2(y[1], y[0])))
}

fn weak_branches(s: BlochState, q: f64, alpha: f64, weight: f64) -> Vec<AttackBranch> {
    let zero = BlochState::wrapped(-alpha);
    let one = BlochState::wrapped(alpha);
    let mut out = Vec::with_capacity(2);
    // "+": post-measurement |0⟩ goes to |1⟩
    let (p, st) = weak_kraus(s, q, true);
    let turn = alpha - weak_kraus(zero, q, true).1.phi();
    out.push(AttackBranch {
        weight: weight * p,
        state: PulseState::Photon(st.rotated(turn)),
        eve_guess: Some(Bit::One),
    });
    // "−": post-measurement |1⟩ goes to |0⟩
    let (p, st) = weak_kraus(s, q, false);
    let turn = -alpha - weak_kraus(one, q, false).1.phi();
    out.push(AttackBranch {
        weight: weight * p,
        state: PulseState::Photon(st.rotated(turn)),
        eve_guess: Some(Bit::Zero),
    });
    out
}

/// A sequence of stages applied in order.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttackChannel {
    pub stages: Vec<AttackStage>,
}

impl AttackChannel {
    pub fn new(stages: Vec<AttackStage>) -> Result<Self> {
        for s in &stages {
            s.validate()?;
        }
        Ok(Self { stages })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Every path through the stages. A later guess overrides an earlier one.
    pub fn branches(&self, input: PulseState) -> Vec<AttackBranch> {
        let mut paths = vec![AttackBranch {
            weight: 1.0,
            state: input,
            eve_guess: None,
        }];
        for stage in &self.stages {
            let mut next = Vec::with_capacity(paths.len() * 2);
            for p in &paths {
                for b in stage.branches(p.state) {
                    if b.weight > 0.0 {
                        next.push(AttackBranch {
                            weight: p.weight * b.weight,
                            state: b.state,
                            eve_guess: b.eve_guess.or(p.eve_guess),
                        });
                    }
                }
            }
            paths = next;
        }
        paths
    }

    /// Draws one path; `uniform` yields independent samples from `[0, 1)`.
    pub fn sample(&self, input: PulseState, mut uniform: impl FnMut() -> f64) -> (PulseState, Option<Bit>) {
        let mut state = input;
        let mut guess = None;
        for stage in &self.stages {
            let branches = stage.branches(state);
            let u = uniform();
            let mut acc = 0.0;
            let mut chosen = branches[branches.len() - 1];
            for b in &branches {
                acc += b.weight;
                if u < acc {
                    chosen = *b;
                    break;
                }
            }
            state = chosen.state;
            guess = chosen.eve_guess.or(guess);
        }
        (state, guess)
    }

    /// Averaged state delivered to Bob for a pure input.
    pub fn output_density(&self, input: BlochState) -> Result<SignalDensity> {
        let mut t = 0.0;
        let mut r = [0.0; 3];
        for b in self.branches(PulseState::Photon(input)) {
            if let PulseState::Photon(s) = b.state {
                t += b.weight;
                let n = s.bloch();
                for k in 0..3 {
                    r[k] += b.weight * n[k];
                }
            }
        }
        if t > 0.0 {
            for x in &mut r {
                *x /= t;
            }
        }
        SignalDensity::new(t.min(1.0), r)
    }

    /// Symmetrized channel seen by Bob when Alice uses angle `alpha_prime`.
    pub fn symmetrized_triple(&self, alpha_prime: f64, alpha: f64) -> Result<ChannelTriple> {
        let (s0, s1) = make_alice_states(alpha_prime)?;
        let rho0 = self.output_density(s0)?;
        let rho1 = self.output_density(s1)?;
        Ok(symmetrize_densities(&rho0, &rho1, alpha)?.0)
    }
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < PI / 2.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "0 < alpha < pi/2",
        })
    }
}

/// The `±2α` rotation attack and the channel it produces, `(0, 2 sin²α, 1)`.
pub fn rotation_attack(alpha: f64) -> Result<(AttackChannel, ChannelTriple)> {
    check_alpha_open(alpha)?;
    let channel = AttackChannel::new(vec![AttackStage::Rotation { alpha }])?;
    Ok((channel, ChannelTriple::new(0.0, 2.0 * sq(sin(alpha)), 1.0)?))
}

/// `p_{0+}`, `p_{1+}` of the weak measurement.
pub fn weak_probabilities(q: f64, alpha: f64) -> (f64, f64) {
    let s = sin(alpha);
    let p0 = (1.0 - q) * (1.0 - s) / 2.0 + q * (1.0 + s) / 2.0;
    let p1 = (1.0 - q) * (1.0 + s) / 2.0 + q * (1.0 - s) / 2.0;
    (p0, p1)
}

/// Angle between the two post-measurement states:
/// `cos²(β/2) = |⟨0|Â₊|1⟩|²/(p₀₊p₁₊)` with `⟨0|Â₊|1⟩ = cos α / 2`.
pub fn beta_of_q(q: f64, alpha: f64) -> Result<f64> {
    check_range("q", q, 0.0, 0.5, "0 <= q <= 1/2")?;
    check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
    let (p0, p1) = weak_probabilities(q, alpha);
    let c2 = sq(libm::cos(alpha)) / (4.0 * p0 * p1);
    Ok(2.0 * acos(sqrt(c2.clamp(0.0, 1.0))))
}

/// `sin β / sin 2α − p₁₋/p₁₊`; zero when the attack yields an untilted channel.
pub fn weak_residual(q: f64, alpha: f64) -> Result<f64> {
    let beta = beta_of_q(q, alpha)?;
    let (_, p1) = weak_probabilities(q, alpha);
    Ok(sin(beta) / sin(2.0 * alpha) - (1.0 - p1) / p1)
}

/// The nontrivial root `q₀(α)` of [`weak_residual`] (the other is `q = 1/2`).
///
/// `q₀` becomes tiny at large `α` (below 1e-6 beyond roughly 70°), so the
/// bracket is located on a log-spaced scan starting far below that.
pub fn solve_q0(alpha: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    let (lo_exp, hi_q) = (-300.0_f64, 0.5 - 1e-6);
    let steps = 3000;
    let at = |k: usize| {
        let t = k as f64 / steps as f64;
        pow(10.0, lo_exp + t * (libm::log10(hi_q) - lo_exp))
    };
    let mut prev_q = at(0);
    let mut prev_r = weak_residual(prev_q, alpha)?;
    let mut bracket = None;
    for k in 1..=steps {
        let q = at(k);
        let r = weak_residual(q, alpha)?;
        if prev_r < 0.0 && r >= 0.0 {
            bracket = Some((prev_q, q));
            break;
        }
        prev_q = q;
        prev_r = r;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::RootNotFound { lo: at(0), hi: hi_q })?;
    for _ in 0..400 {
        if hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
        let mid = if hi / lo > 4.0 { sqrt(lo * hi) } else { 0.5 * (lo + hi) };
        if weak_residual(mid, alpha)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ε = 1 − sin(2α+β)/(sin 2α + sin β)` for a weak measurement meeting the
/// no-tilt condition.
pub fn epsilon_of_attack(q: f64, alpha: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    let r = weak_residual(q, alpha)?;
    if fabs(r) > 1e-8 {
        return Err(Error::Domain {
            name: "q",
            value: q,
            expected: "root of sin(beta)/sin(2 alpha) = p1-/p1+",
        });
    }
    let beta = beta_of_q(q, alpha)?;
    Ok(1.0 - sin(2.0 * alpha + beta) / (sin(2.0 * alpha) + sin(beta)))
}

/// Noise of the `λ`-mixture of the `q₀` weak-measurement attack with the plain
/// rotation; both deliver untilted states so `ε` mixes linearly.
pub fn mixed_epsilon(lambda: f64, alpha: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    let q0 = solve_q0(alpha)?;
    Ok(lambda * epsilon_of_attack(q0, alpha)? + (1.0 - lambda) * epsilon_of_attack(0.5, alpha)?)
}

/// `region[i][k]`: Eve's optimal attack at `α = alpha_grid[i]` (`α' = α`,
/// `θ = 0`) and `ε = epsilon_grid[k]` leaves `min|Q| = 0` within 1e-9.
/// Points outside the domain of the bound count as outside the region.
pub fn full_info_region(alpha_grid: &[f64], epsilon_grid: &[f64], transmission: f64) -> Vec<Vec<bool>> {
    let row = |&alpha: &f64| -> Vec<bool> {
        epsilon_grid
            .iter()
            .map(|&eps| {
                ChannelTriple::new(0.0, eps, transmission)
                    .and_then(|t| min_q(alpha, alpha, &t))
                    .is_ok_and(|r| r.q_min_abs <= 1e-9)
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        alpha_grid.par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        alpha_grid.iter().map(row).collect()
    }
}
