#![allow(dead_code, clippy::needless_range_loop)]

use b92_core::estimation::{estimate_from_frequencies, EventFrequencies, EXACT_CLAMP_TOLERANCE};
use b92_core::{ChannelTriple, ObservedCounts};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

/// Estimate as `[θ, ε, T]`.
pub fn invert(freq: &EventFrequencies, alpha: f64) -> [f64; 3] {
    let t = estimate_from_frequencies(freq, alpha, 1.0).unwrap().triple;
    [t.theta, t.epsilon, t.transmission]
}

/// Multinomial standard deviations of the estimated `[θ, ε, T]` after `n`
/// pulses, by the delta method around the exact frequencies.
pub fn delta_sd(triple: &ChannelTriple, alpha: f64, n: f64) -> [f64; 3] {
    let p = EventFrequencies::expected(triple, alpha).unwrap();
    let h = 1e-7;
    let mut jac = [[0.0; 8]; 3];
    for c in 0..8 {
        let (j, m) = (c / 4, c % 4);
        let mut up = p;
        let mut dn = p;
        up.f[j][m] += h;
        dn.f[j][m] -= h;
        let (a, b) = (invert(&up, alpha), invert(&dn, alpha));
        for k in 0..3 {
            jac[k][c] = (a[k] - b[k]) / (2.0 * h);
        }
    }
    let mut sd = [0.0; 3];
    for k in 0..3 {
        let mut second = 0.0;
        let mut first = 0.0;
        for c in 0..8 {
            let pc = p.f[c / 4][c % 4];
            second += jac[k][c] * jac[k][c] * pc;
            first += jac[k][c] * pc;
        }
        sd[k] = ((second - first * first) / n).sqrt();
    }
    sd
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` categorical draws over the eight recorded cells plus V.
pub fn sample_counts(freq: &EventFrequencies, n: u64, rng: &mut ChaCha8Rng) -> ObservedCounts {
    let mut cdf = [0.0; 8];
    let mut acc = 0.0;
    for c in 0..8 {
        acc += freq.f[c / 4][c % 4];
        cdf[c] = acc;
    }
    let mut counts = [[0u64; 4]; 2];
    for _ in 0..n {
        let u = uniform(rng);
        if let Some(c) = cdf.iter().position(|&x| u < x) {
            counts[c / 4][c % 4] += 1;
        }
    }
    ObservedCounts::new(counts, n).unwrap()
}

pub fn exact_estimate(triple: &ChannelTriple, alpha: f64) -> ChannelTriple {
    let f = EventFrequencies::expected(triple, alpha).unwrap();
    estimate_from_frequencies(&f, alpha, EXACT_CLAMP_TOLERANCE)
        .unwrap()
        .triple
}
