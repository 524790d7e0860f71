mod common;

use b92_core::attacks::{AttackChannel, AttackStage, PulseState};
use b92_core::eve_bound::{flipped_bit_gain, min_q};
use b92_core::keyrate::{secret_key_gain, EstimationMode};
use b92_core::polarization::symmetrized_density;
use b92_core::polarization::Bit;
use b92_core::{deg, BlochState, ChannelTriple, Povm5, SignalDensity};
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = ChannelTriple> {
    (-30.0..30.0f64, 0.01..0.9f64, 0.2..1.0f64).prop_map(|(th, e, t)| ChannelTriple::new(deg(th), e, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn povm_outcomes_sum_to_one(alpha in 1.0..89.0f64, phi in -180.0..180.0f64, t in 0.0..1.0f64) {
        let povm = Povm5::new(deg(alpha)).unwrap();
        let rho = SignalDensity::pure(t, BlochState::wrapped(deg(phi))).unwrap();
        let p = povm.probabilities(&rho);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
    }

    #[test]
    fn exact_counts_invert(alpha in 2.0..80.0f64, t in triple()) {
        let e = common::exact_estimate(&t, deg(alpha));
        prop_assert!((e.theta - t.theta).abs() < 1e-10);
        prop_assert!((e.epsilon - t.epsilon).abs() < 1e-10);
        prop_assert!((e.transmission - t.transmission).abs() < 1e-10);
    }

    #[test]
    fn symmetrized_states_are_physical(alpha in 2.0..80.0f64, t in triple()) {
        for bit in [Bit::Zero, Bit::One] {
            let rho = symmetrized_density(&t, deg(alpha), bit).unwrap();
            let r = rho.bloch();
            prop_assert!((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn eve_gains_are_bits(alpha in 2.0..80.0f64, t in triple()) {
        if let Ok(r) = min_q(deg(alpha), deg(alpha), &t) {
            prop_assert!((0.0..=1.0).contains(&r.q_min_abs));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r.i_gc));
            prop_assert!(r.i_gc_shannon <= r.i_gc + 1e-12);
        }
    }

    #[test]
    fn more_loss_never_helps_alice(alpha in 2.0..80.0f64, th in -30.0..30.0f64, e in 0.01..0.9f64, t in 0.2..0.95f64) {
        let a = deg(alpha);
        let lossy = min_q(a, a, &ChannelTriple::new(deg(th), e, t).unwrap());
        let clearer = min_q(a, a, &ChannelTriple::new(deg(th), e, t + 0.05).unwrap());
        if let (Ok(l), Ok(c)) = (lossy, clearer) {
            prop_assert!(l.q_min_abs <= c.q_min_abs + 1e-9);
        }
    }

    #[test]
    fn flipped_bound_is_the_mirrored_channel(alpha in 2.0..80.0f64, t in triple()) {
        let a = deg(alpha);
        let mirrored = ChannelTriple { theta: -2.0 * a - t.theta, ..t };
        match (flipped_bit_gain(a, a, &t), min_q(a, a, &mirrored)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn shannon_gain_dominates_collision_gain(alpha in 2.0..80.0f64, e in 0.0..0.5f64, t in 0.2..1.0f64) {
        let tr = ChannelTriple::new(0.0, e, t).unwrap();
        let a = deg(alpha);
        if let (Ok(c), Ok(s)) = (
            secret_key_gain(a, &tr, EstimationMode::Collision),
            secret_key_gain(a, &tr, EstimationMode::Shannon),
        ) {
            prop_assert!(s.g_total >= c.g_total - 1e-12);
        }
    }

    #[test]
    fn attack_branches_are_normalized(alpha in 1.0..80.0f64, q in 0.0..0.5f64, lambda in 0.0..1.0f64,
                                      eps in 0.0..1.0f64, t in 0.0..1.0f64, phi in -90.0..90.0f64) {
        let a = deg(alpha);
        let ch = AttackChannel::new(vec![
            AttackStage::Mixed { q, lambda, alpha: a },
            AttackStage::Depolarize { epsilon: eps },
            AttackStage::Loss { transmission: t },
        ]).unwrap();
        let w: f64 = ch.branches(PulseState::Photon(BlochState::wrapped(deg(phi)))).iter().map(|b| b.weight).sum();
        prop_assert!((w - 1.0).abs() < 1e-12);
    }
}
