use spikeclass_core::encode::{EncoderSpec, Scheme, VariableRange};
use spikeclass_core::inference::{
    classify_dataset, classify_run, rolling_sums, threshold, trace_from_counts, window_steps,
    ClassifierConfig, Run,
};
use spikeclass_core::network::{Network, Neuron, NeuronId, Synapse};

fn relay() -> Network {
    Network {
        neurons: vec![
            Neuron {
                id: NeuronId(0),
                threshold: 0,
                axon_delay: 0,
            },
            Neuron {
                id: NeuronId(1),
                threshold: 0,
                axon_delay: 0,
            },
        ],
        synapses: vec![Synapse {
            pre: NeuronId(0),
            post: NeuronId(1),
            weight: 1,
        }],
        input_order: vec![NeuronId(0)],
        output: NeuronId(1),
    }
}

fn spec() -> EncoderSpec {
    EncoderSpec::new(Scheme::Rate, 8, vec![VariableRange::new(0.0, 1.0).unwrap()])
}

fn run(values: &[f64]) -> Run {
    Run {
        id: "r".into(),
        observations: values.iter().map(|&v| vec![v]).collect(),
        labels: values.iter().map(|&v| v > 0.5).collect(),
        stride_seconds: 0.5,
        snr: None,
    }
}

#[test]
fn threshold_examples() {
    let cfg = ClassifierConfig {
        theta: 2,
        window: 0,
    };
    assert_eq!(
        trace_from_counts(vec![0, 3, 0], &cfg).y,
        vec![false, true, false]
    );
    let cfg = ClassifierConfig {
        theta: 2,
        window: 2,
    };
    assert_eq!(
        trace_from_counts(vec![1, 1, 1], &cfg).y,
        vec![false, false, false]
    );
}

#[test]
fn window_one_equals_no_window() {
    let z = [3, 0, 7, 1, 1, 9];
    assert_eq!(rolling_sums(&z, 1), rolling_sums(&z, 0));
}

#[test]
fn window_from_seconds() {
    assert_eq!(window_steps(20.0, 0.5), 40);
    assert_eq!(window_steps(0.0, 0.5), 0);
}

#[test]
fn raising_theta_never_adds_alarms() {
    let z: Vec<u32> = (0..60).map(|i| (i * 7 % 11) as u32).collect();
    for theta in 0..12 {
        let lo = threshold(&z, theta);
        let hi = threshold(&z, theta + 1);
        assert!(lo.iter().zip(&hi).all(|(&a, &b)| a || !b));
    }
}

#[test]
fn silent_network_predicts_nothing() {
    let mut net = relay();
    net.synapses.clear();
    let t = classify_run(
        &net,
        &spec(),
        &run(&[1.0, 0.2, 0.9]),
        &ClassifierConfig::default(),
    )
    .unwrap();
    assert_eq!(t.z, vec![0, 0, 0]);
    assert!(t.y.iter().all(|&y| !y));
}

#[test]
fn relay_counts_follow_input() {
    let t = classify_run(
        &relay(),
        &spec(),
        &run(&[1.0, 0.5, 0.0]),
        &ClassifierConfig::default(),
    )
    .unwrap();
    // Full scale is 8 spikes; the last one is delivered in the next window.
    assert_eq!(t.z, vec![7, 5, 0]);
}

#[test]
fn dataset_matches_serial_runs() {
    let runs: Vec<Run> = (0..100)
        .map(|i| {
            run(&(0..12)
                .map(|t| ((i * 13 + t * 5) % 17) as f64 / 16.0)
                .collect::<Vec<_>>())
        })
        .collect();
    let cfg = ClassifierConfig {
        theta: 3,
        window: 4,
    };
    let all = classify_dataset(&relay(), &spec(), &runs, &cfg).unwrap();
    let serial: Vec<_> = runs
        .iter()
        .map(|r| classify_run(&relay(), &spec(), r, &cfg).unwrap())
        .collect();
    assert_eq!(all, serial);
    assert!(classify_dataset(&relay(), &spec(), &[], &cfg)
        .unwrap()
        .is_empty());
}
