//! Polarization qubits on the x–z great circle of the Bloch sphere, Alice's
//! two signal states, Bob's five-outcome POVM, and the `qubit ⊕ vacuum`
//! density operators the rest of the crate consumes.
//!
//! Operators on the one-photon sector are stored in the Pauli basis,
//! `c0·1 + cx·σx + cy·σy + cz·σz`, so every trace reduces to a dot product.
//! The vacuum sector is a single scalar weight.

use core::f64::consts::PI;

use crate::error::{check_range, Result};
use crate::estimation::ChannelTriple;
use crate::math::{cos, sin, sq};

/// Alice's bit value `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flipped(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

/// A pure polarization state `|σ_φ⟩ = cos(φ/2)|z+⟩ + sin(φ/2)|z−⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochState {
    phi: f64,
}

impl BlochState {
    /// `phi` must lie in `(-π, π]`.
    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() && phi > -PI && phi <= PI {
            Ok(Self { phi })
        } else {
            Err(crate::Error::Domain {
                name: "phi",
                value: phi,
                expected: "-pi < phi <= pi",
            })
        }
    }

    /// Any finite angle, wrapped into `(-π, π]`.
    pub fn wrapped(phi: f64) -> Self {
        Self {
            phi: crate::math::wrap_angle(phi),
        }
    }

    pub fn phi(self) -> f64 {
        self.phi
    }

    /// Amplitudes on `(|z+⟩, |z−⟩)`.
    pub fn ket(self) -> [f64; 2] {
        [cos(self.phi / 2.0), sin(self.phi / 2.0)]
    }

    /// Amplitudes of the orthogonal state `|σ̄_φ⟩`. The overall sign switches
    /// between `φ ≥ 0` and `φ < 0`; only the projector is ever observable.
    pub fn bar_ket(self) -> [f64; 2] {
        let (c, s) = (cos(self.phi / 2.0), sin(self.phi / 2.0));
        if self.phi >= 0.0 {
            [s, -c]
        } else {
            [-s, c]
        }
    }

    /// Unit Bloch vector `(sin φ, 0, cos φ)`.
    pub fn bloch(self) -> [f64; 3] {
        [sin(self.phi), 0.0, cos(self.phi)]
    }

    /// `|⟨σ_a|σ_b⟩|²`.
    pub fn overlap_sq(self, other: BlochState) -> f64 {
        let (a, b) = (self.ket(), other.ket());
        sq(a[0] * b[0] + a[1] * b[1])
    }

    /// Rotation by `angle` about the y axis of the Bloch sphere.
    pub fn rotated(self, angle: f64) -> Self {
        Self::wrapped(self.phi + angle)
    }
}

/// Alice's states `(|0⟩, |1⟩) = (|σ_{-α'}⟩, |σ_{α'}⟩)` with `⟨0|1⟩ = cos α'`.
pub fn make_alice_states(alpha_prime: f64) -> Result<(BlochState, BlochState)> {
    check_range("alpha_prime", alpha_prime, 0.0, PI / 2.0, "0 <= alpha' <= pi/2")?;
    Ok((BlochState::wrapped(-alpha_prime), BlochState::wrapped(alpha_prime)))
}

/// Hermitian qubit operator `c0·1 + c·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliOp {
    pub c0: f64,
    pub c: [f64; 3],
}

impl core::ops::Add for PauliOp {
    type Output = PauliOp;

    fn add(self, o: PauliOp) -> PauliOp {
        PauliOp {
            c0: self.c0 + o.c0,
            c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]],
        }
    }
}

impl PauliOp {
    pub const ZERO: PauliOp = PauliOp { c0: 0.0, c: [0.0; 3] };

    /// `|v⟩⟨v|` for a real ket `v`, scaled by `weight`.
    pub fn projector(v: [f64; 2], weight: f64) -> Self {
        Self {
            c0: weight * (sq(v[0]) + sq(v[1])) / 2.0,
            c: [weight * v[0] * v[1], 0.0, weight * (sq(v[0]) - sq(v[1])) / 2.0],
        }
    }

    pub fn trace(self) -> f64 {
        2.0 * self.c0
    }

    /// Eigenvalues `c0 ∓ |c|`, ascending.
    pub fn eigenvalues(self) -> [f64; 2] {
        let r = crate::math::sqrt(sq(self.c[0]) + sq(self.c[1]) + sq(self.c[2]));
        [self.c0 - r, self.c0 + r]
    }
}

/// A signal after the channel: `T·ρ̃ ⊕ (1−T)|vac⟩⟨vac|` with `ρ̃ = (1 + r·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignalDensity {
    transmission: f64,
    bloch: [f64; 3],
}

impl SignalDensity {
    pub fn new(transmission: f64, bloch: [f64; 3]) -> Result<Self> {
        check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
        let norm = crate::math::sqrt(bloch.iter().map(|x| x * x).sum());
        check_range("|bloch|", norm, 0.0, 1.0 + 1e-12, "Bloch norm <= 1")?;
        Ok(Self { transmission, bloch })
    }

    pub fn pure(transmission: f64, state: BlochState) -> Result<Self> {
        Self::new(transmission, state.bloch())
    }

    pub fn vacuum() -> Self {
        Self {
            transmission: 0.0,
            bloch: [0.0; 3],
        }
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    /// Bloch vector of the normalized one-photon block.
    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// The unnormalized one-photon block `T·ρ̃`.
    pub fn qubit_block(&self) -> PauliOp {
        let t = self.transmission;
        PauliOp {
            c0: t / 2.0,
            c: [
                t * self.bloch[0] / 2.0,
                t * self.bloch[1] / 2.0,
                t * self.bloch[2] / 2.0,
            ],
        }
    }

    /// Full trace; 1 for every valid state.
    pub fn trace(&self) -> f64 {
        self.qubit_block().trace() + (1.0 - self.transmission)
    }
}

/// Bob's measurement outcomes. `ZeroBar`/`OneBar` are conclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    Zero,
    One,
    ZeroBar,
    OneBar,
    Vacuum,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Zero,
        Outcome::One,
        Outcome::ZeroBar,
        Outcome::OneBar,
        Outcome::Vacuum,
    ];

    /// Outcomes Bob reports together with Alice's bit (everything except V).
    pub const RECORDED: [Outcome; 4] = [Outcome::Zero, Outcome::One, Outcome::ZeroBar, Outcome::OneBar];

    /// Position in [`Outcome::ALL`].
    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
            Outcome::ZeroBar => 2,
            Outcome::OneBar => 3,
            Outcome::Vacuum => 4,
        }
    }

    /// Bob's raw-key bit: `1̄ → 0`, `0̄ → 1`, anything else is inconclusive.
    pub fn key_bit(self) -> Option<Bit> {
        match self {
            Outcome::OneBar => Some(Bit::Zero),
            Outcome::ZeroBar => Some(Bit::One),
            _ => None,
        }
    }

    pub fn is_conclusive(self) -> bool {
        self.key_bit().is_some()
    }
}

/// One POVM element: a qubit-block operator and a weight on the vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effect {
    pub qubit: PauliOp,
    pub vacuum: f64,
}

impl Effect {
    /// `Tr(F ρ)`.
    pub fn probability(&self, state: &SignalDensity) -> f64 {
        let q = self.qubit;
        let r = state.bloch;
        let t = state.transmission;
        t * (q.c0 + q.c[0] * r[0] + q.c[1] * r[1] + q.c[2] * r[2]) + self.vacuum * (1.0 - t)
    }
}

/// Bob's POVM: the two bases `{|σ_{∓α}⟩, |σ̄_{∓α}⟩}` chosen with probability
/// 1/2 each, plus the vacuum / multi-photon outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Povm5 {
    alpha: f64,
}

impl Povm5 {
    pub fn new(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn effect(&self, outcome: Outcome) -> Effect {
        let minus = BlochState::wrapped(-self.alpha);
        let plus = BlochState::wrapped(self.alpha);
        let qubit = match outcome {
            Outcome::Zero => PauliOp::projector(minus.ket(), 0.5),
            Outcome::ZeroBar => PauliOp::projector(minus.bar_ket(), 0.5),
            Outcome::One => PauliOp::projector(plus.ket(), 0.5),
            Outcome::OneBar => PauliOp::projector(plus.bar_ket(), 0.5),
            Outcome::Vacuum => {
                // 1 − ΣF on the one-photon sector
                let sum = Outcome::RECORDED
                    .iter()
                    .map(|&o| self.effect(o).qubit)
                    .fold(PauliOp::ZERO, core::ops::Add::add);
                PauliOp {
                    c0: 1.0 - sum.c0,
                    c: [-sum.c[0], -sum.c[1], -sum.c[2]],
                }
            }
        };
        let vacuum = if outcome == Outcome::Vacuum { 1.0 } else { 0.0 };
        Effect { qubit, vacuum }
    }

    /// `Tr(F_μ ρ)`.
    pub fn probability(&self, outcome: Outcome, state: &SignalDensity) -> f64 {
        self.effect(outcome).probability(state)
    }

    /// Probabilities in [`Outcome::ALL`] order.
    pub fn probabilities(&self, state: &SignalDensity) -> [f64; 5] {
        let mut p = [0.0; 5];
        for o in Outcome::ALL {
            p[o.index()] = self.probability(o, state);
        }
        p
    }
}

/// The symmetrized state `ρ_j^s`: weight `T(1−ε/2)` on `|σ_{∓(α+θ)}⟩`, `Tε/2` on
/// its orthogonal partner, `1−T` on vacuum (`−` for bit 0, `+` for bit 1).
pub fn symmetrized_density(params: &ChannelTriple, alpha: f64, bit: Bit) -> Result<SignalDensity> {
    params.validate()?;
    let angle = match bit {
        Bit::Zero => -(alpha + params.theta),
        Bit::One => alpha + params.theta,
    };
    let len = 1.0 - params.epsilon;
    let n = BlochState::wrapped(angle).bloch();
    SignalDensity::new(params.transmission, [len * n[0], 0.0, len * n[2]])
}
