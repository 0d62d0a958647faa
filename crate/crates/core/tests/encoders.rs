use proptest::prelude::*;
use spikeclass_core::encode::{
    bin_amplitude, encode_observation, encode_rate, encode_spikes, spike_count, EncoderSpec,
    Scheme, VariableRange,
};

fn grid() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| i as f64 / 100.0)
}

#[test]
fn full_scale_gives_tau_spikes() {
    assert_eq!(encode_rate(1.0, 10).len(), 10);
    assert_eq!(encode_spikes(1.0, 10).len(), 10);
}

#[test]
fn counts_monotone_in_amplitude() {
    for scheme in [Scheme::Rate, Scheme::Spikes] {
        let spec = EncoderSpec::new(scheme, 10, vec![VariableRange::new(0.0, 1.0).unwrap()]);
        let counts: Vec<usize> = grid()
            .map(|x| encode_observation(&[x], &spec).unwrap().counts()[0])
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }
}

#[test]
fn flip_flop_complement() {
    for bins in 1..=4u32 {
        for xn in grid() {
            for bin in (0..bins).step_by(2) {
                let flipped = spike_count(bin_amplitude(xn, bin, bins, true), 10);
                let plain = spike_count(1.0 - bin_amplitude(xn, bin, bins, false), 10);
                assert_eq!(flipped, plain, "xn={xn} bin={bin}/{bins}");
            }
            for bin in (1..bins).step_by(2) {
                assert_eq!(
                    bin_amplitude(xn, bin, bins, true),
                    bin_amplitude(xn, bin, bins, false)
                );
            }
        }
    }
}

/// Placement rule checked against its definition by brute force: the j-th
/// spike lands at the largest cycle c with c * k <= j * tau.
fn rate_oracle(k: u32, tau: u32) -> Vec<u32> {
    (0..k)
        .map(|j| (0..tau).filter(|&c| c * k <= j * tau).max().unwrap())
        .collect()
}

proptest! {
    #[test]
    fn trains_are_sorted_distinct_and_bounded(xn in 0.0f64..=1.0, tau in 1u32..=64) {
        for train in [encode_rate(xn, tau), encode_spikes(xn, tau)] {
            prop_assert!(train.len() as u32 <= tau);
            prop_assert!(train.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(train.iter().all(|&c| c < tau));
            prop_assert_eq!(train.len() as u32, spike_count(xn, tau));
        }
    }

    #[test]
    fn rate_placement_matches_oracle(xn in 0.0f64..=1.0, tau in 1u32..=64) {
        let k = spike_count(xn, tau);
        prop_assert_eq!(encode_rate(xn, tau), rate_oracle(k, tau));
    }

    #[test]
    fn count_is_rounded_product(xn in 0.0f64..=1.0, tau in 1u32..=64) {
        let exact = xn * tau as f64;
        let k = spike_count(xn, tau) as f64;
        prop_assert!((k - exact).abs() <= 0.5);
        if (exact - exact.floor() - 0.5).abs() < 1e-12 {
            prop_assert_eq!(k, exact.ceil());
        }
    }

    #[test]
    fn encoding_is_pure(x in -5.0f64..15.0, bins in 1u32..4, flip in any::<bool>()) {
        let spec = EncoderSpec::new(Scheme::Rate, 16, vec![VariableRange::new(0.0, 10.0).unwrap()])
            .with_bins(bins, flip);
        let a = encode_observation(&[x], &spec).unwrap();
        prop_assert_eq!(a.len(), bins as usize);
        prop_assert_eq!(a, encode_observation(&[x], &spec).unwrap());
    }
}
