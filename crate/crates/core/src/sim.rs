//! Seeded Monte-Carlo run of the protocol: Alice picks a bit, the pulse goes
//! through the attack channel, Bob samples his POVM, and the disclosed counts
//! are fed back into channel estimation.
//!
//! Pulse `i` draws from ChaCha8 with the run seed and stream `i`, so results
//! do not depend on how pulses are split into blocks or threads.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::attacks::{AttackChannel, PulseState};
use crate::error::{check_range, Error, Result};
use crate::estimation::{estimate_channel, ChannelEstimate, ObservedCounts};
use crate::keyrate::{secret_key_gain, EstimationMode, KeyGainReport};
use crate::math::unit_f64;
use crate::polarization::{make_alice_states, Bit, BlochState, Effect, Outcome, Povm5, SignalDensity};

/// Pulses per parallel work unit.
pub const DEFAULT_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub n_total: u64,
    pub alpha_prime: f64,
    pub alpha: f64,
    pub attack: AttackChannel,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::Domain {
                name: "n_total",
                value: 0.0,
                expected: "n_total >= 1",
            });
        }
        check_range("alpha_prime", self.alpha_prime, 0.0, PI / 2.0, "0 <= alpha' <= pi/2")?;
        check_range("alpha", self.alpha, 0.0, PI / 2.0, "0 <= alpha <= pi/2")?;
        for s in &self.attack.stages {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimResult {
    pub counts: ObservedCounts,
    /// Pulses ending in the V outcome.
    pub vacuum: u64,
    pub conclusive: u64,
    /// Conclusive bits where Bob disagrees with Alice.
    pub errors: u64,
    pub conclusive_error_rate: f64,
    /// Share of correct conclusive bits whose value Eve guessed; `None` if she
    /// never recorded a guess on one.
    pub eve_accuracy_correct: Option<f64>,
    /// `None` when the counts admit no symmetrized channel.
    pub estimated: Option<ChannelEstimate>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: [[u64; 4]; 2],
    vacuum: u64,
    correct: u64,
    errors: u64,
    eve_right: u64,
    eve_labeled: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        for j in 0..2 {
            for m in 0..4 {
                self.n[j][m] += o.n[j][m];
            }
        }
        self.vacuum += o.vacuum;
        self.correct += o.correct;
        self.errors += o.errors;
        self.eve_right += o.eve_right;
        self.eve_labeled += o.eve_labeled;
        self
    }
}

struct Setup<'a> {
    seed: u64,
    states: [BlochState; 2],
    effects: [Effect; 4],
    attack: &'a AttackChannel,
}

impl Setup<'_> {
    fn run(&self, start: u64, end: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut tally = Tally::default();
        for i in start..end {
            rng.set_stream(i);
            rng.set_word_pos(0);
            let mut uniform = || unit_f64(rng.next_u64());
            let bit = if uniform() < 0.5 { Bit::Zero } else { Bit::One };
            let (state, guess) = self
                .attack
                .sample(PulseState::Photon(self.states[bit.index()]), &mut uniform);
            let u = uniform();
            let outcome = match state {
                PulseState::Vacuum => Outcome::Vacuum,
                PulseState::Photon(s) => self.measure(s, u),
            };
            if outcome == Outcome::Vacuum {
                tally.vacuum += 1;
                continue;
            }
            tally.n[bit.index()][outcome.index()] += 1;
            match outcome.key_bit() {
                Some(b) if b == bit => {
                    tally.correct += 1;
                    if let Some(g) = guess {
                        tally.eve_labeled += 1;
                        if g == bit {
                            tally.eve_right += 1;
                        }
                    }
                }
                Some(_) => tally.errors += 1,
                None => {}
            }
        }
        tally
    }

    fn measure(&self, s: BlochState, u: f64) -> Outcome {
        let rho = SignalDensity::pure(1.0, s).unwrap_or_else(|_| SignalDensity::vacuum());
        let mut acc = 0.0;
        for (o, eff) in Outcome::RECORDED.iter().zip(&self.effects) {
            acc += eff.probability(&rho);
            if u < acc {
                return *o;
            }
        }
        Outcome::Vacuum
    }
}

/// Runs the protocol with the default block size.
pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    run_simulation_blocked(config, DEFAULT_BLOCK)
}

/// Runs the protocol splitting pulses into blocks of `block` (the result is
/// the same for every block size).
pub fn run_simulation_blocked(config: &SimConfig, block: u64) -> Result<SimResult> {
    config.validate()?;
    let povm = Povm5::new(config.alpha)?;
    let (s0, s1) = make_alice_states(config.alpha_prime)?;
    let effects = Outcome::RECORDED.map(|o| povm.effect(o));
    let setup = Setup {
        seed: config.seed,
        states: [s0, s1],
        effects,
        attack: &config.attack,
    };
    let block = block.max(1);
    let n_blocks = config.n_total.div_ceil(block);
    let span = |b: u64| (b * block, ((b + 1) * block).min(config.n_total));

    #[cfg(feature = "parallel")]
    let tally = {
        use rayon::prelude::*;
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let (s, e) = span(b);
                setup.run(s, e)
            })
            .reduce(Tally::default, Tally::merge)
    };
    #[cfg(not(feature = "parallel"))]
    let tally = (0..n_blocks).fold(Tally::default(), |acc, b| {
        let (s, e) = span(b);
        acc.merge(setup.run(s, e))
    });

    let counts = ObservedCounts::new(tally.n, config.n_total)?;
    let conclusive = tally.correct + tally.errors;
    Ok(SimResult {
        counts,
        vacuum: tally.vacuum,
        conclusive,
        errors: tally.errors,
        conclusive_error_rate: if conclusive > 0 {
            tally.errors as f64 / conclusive as f64
        } else {
            0.0
        },
        eve_accuracy_correct: (tally.eve_labeled > 0 && tally.correct > 0)
            .then(|| tally.eve_right as f64 / tally.correct as f64),
        estimated: estimate_channel(&counts, config.alpha).ok(),
    })
}

/// Simulation followed by the key gain of the estimated channel.
pub fn closed_loop_report(config: &SimConfig, mode: EstimationMode) -> Result<(SimResult, KeyGainReport)> {
    let sim = run_simulation(config)?;
    let est = estimate_channel(&sim.counts, config.alpha)?;
    let report = secret_key_gain(config.alpha, &est.triple, mode)?;
    Ok((sim, report))
}
