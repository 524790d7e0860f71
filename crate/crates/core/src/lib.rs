//! Eavesdropper information bounds and secret-key gain for the modified B92
//! quantum key distribution protocol with single-photon polarization states.
//!
//! Alice encodes bits in `|σ_{-α'}⟩` and `|σ_{α'}⟩`; Bob measures a five-outcome
//! POVM that also reports inconclusive events. Because the inconclusive
//! statistics are disclosed, Bob can symmetrize the received states and pin the
//! channel down to three numbers `(θ, ε, T)`. From those the crate computes
//!
//! - the smallest overlap `|Q|` of Eve's probe states for correct (and flipped)
//!   bits under individual attack, hence her maximum collision and Shannon
//!   information gains ([`eve_bound`]);
//! - a brute-force contraction search used to check those minima ([`oracle`]);
//! - the mutual-information upper bound that explains the drop of Eve's gain
//!   at large noise ([`bounds`]);
//! - the rotation and weak-measurement attacks reaching full information
//!   ([`attacks`]);
//! - the long-key secret key gain, angle optimization, the fiber link model and
//!   a BB84 comparison ([`keyrate`]);
//! - a seeded Monte-Carlo run of the protocol ([`sim`]).
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature spreads oracle grids and simulation blocks
//! over rayon.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod attacks;
pub mod bounds;
mod error;
pub mod estimation;
pub mod eve_bound;
pub mod keyrate;
mod math;
pub mod oracle;
pub mod polarization;
pub mod sim;

pub use error::{Error, Result};
pub use estimation::{ChannelEstimate, ChannelTriple, EventFrequencies, ObservedCounts};
pub use eve_bound::{EveBoundResult, SymMat2};
pub use math::binary_entropy;
pub use polarization::{BlochState, Outcome, Povm5, SignalDensity};

/// Degrees to radians.
#[inline]
pub fn deg(x: f64) -> f64 {
    x * core::f64::consts::PI / 180.0
}

/// Radians to degrees.
#[inline]
pub fn to_deg(x: f64) -> f64 {
    x * 180.0 / core::f64::consts::PI
}
