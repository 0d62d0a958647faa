use std::collections::BTreeSet;

use spikeclass_core::evolution::{
    crossover, init_population, mutate, random_network, sample_batch, tournament_select,
    EonsParams, ScoredNetwork, TrainConfig,
};
use spikeclass_core::inference::Run;
use spikeclass_core::metrics::ConfusionMatrix;
use spikeclass_core::network::{Network, NeuronId, MAX_NEURONS};
use spikeclass_core::rng;

fn only(rate: &str) -> EonsParams {
    let mut p = EonsParams {
        add_node_rate: 0.0,
        delete_node_rate: 0.0,
        add_edge_rate: 0.0,
        delete_edge_rate: 0.0,
        node_params_rate: 0.0,
        edge_params_rate: 0.0,
        ..EonsParams::default()
    };
    match rate {
        "add_node" => p.add_node_rate = 1.0,
        "edge_params" => p.edge_params_rate = 1.0,
        _ => unreachable!(),
    }
    p
}

#[test]
fn hundred_thousand_mutations_stay_valid() {
    let p = EonsParams::default();
    let mut r = rng::stream(&[0xa1]);
    let mut ops = 0;
    let mut net = random_network(&p, 16, &mut r).unwrap();
    while ops < 100_000 {
        net = mutate(net, &p, &mut r);
        ops += p.num_mutations;
        assert!(net.is_valid(), "after {ops} ops: {:?}", net.validate());
        if ops % 20_000 == 0 {
            net = random_network(&p, 16, &mut r).unwrap();
        }
    }
}

#[test]
fn add_node_respects_neuron_cap() {
    let p = only("add_node");
    let mut r = rng::stream(&[0xa2]);
    let mut net = random_network(&p, 8, &mut r).unwrap();
    for _ in 0..100 {
        net = mutate(net, &p, &mut r);
        assert!(net.neurons.len() <= MAX_NEURONS);
        assert!(net.is_valid());
    }
    assert_eq!(net.neurons.len(), MAX_NEURONS);
}

#[test]
fn edge_params_only_keeps_topology() {
    let p = only("edge_params");
    let mut r = rng::stream(&[0xa3]);
    let net = random_network(&EonsParams::default(), 8, &mut r)
        .unwrap()
        .canonical();
    let child = mutate(net.clone(), &p, &mut r);
    let shape = |n: &Network| {
        (
            n.neurons.iter().map(|x| x.id).collect::<Vec<_>>(),
            n.synapses
                .iter()
                .map(|s| (s.pre, s.post))
                .collect::<Vec<_>>(),
        )
    };
    assert_eq!(shape(&net), shape(&child));
    assert_ne!(net, child);
}

#[test]
fn init_sizes() {
    let p = EonsParams {
        population_size: 3,
        ..EonsParams::default()
    };
    for net in init_population(&p, 32, 1).unwrap() {
        assert_eq!((net.neurons.len(), net.synapses.len()), (50, 50));
        assert_eq!(net.hidden_ids().len(), 17);
    }
    for net in init_population(&p, 64, 1).unwrap() {
        assert_eq!(net.neurons.len(), 65);
    }
    assert_eq!(
        init_population(&p, 32, 1).unwrap(),
        init_population(&p, 32, 1).unwrap()
    );
}

#[test]
fn disjoint_hidden_sets_are_binomial() {
    let p = EonsParams {
        starting_nodes: 20,
        starting_edges: 0,
        ..EonsParams::default()
    };
    let mut r = rng::stream(&[0xa4]);
    let a = random_network(&p, 4, &mut r).unwrap();
    let mut b = random_network(&p, 4, &mut r).unwrap();
    // Move b's 15 hidden neurons to ids disjoint from a's.
    for n in &mut b.neurons {
        if n.id.0 >= 5 {
            n.id = NeuronId(n.id.0 + 100);
        }
    }
    let trials = 1000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..trials {
        let h = crossover(&a, &b, &mut r).unwrap().hidden_ids().len() as f64;
        sum += h;
        sq += h * h;
    }
    // Binomial(30, 1/2): mean 15, variance 7.5.
    let mean = sum / trials as f64;
    let var = sq / trials as f64 - mean * mean;
    assert!((mean - 15.0).abs() < 0.3, "mean {mean}");
    assert!((var - 7.5).abs() < 1.5, "variance {var}");
}

#[test]
fn selection_favors_the_top() {
    let p = EonsParams {
        tournament_best_net_factor: 1.0,
        ..EonsParams::default()
    };
    let scored: Vec<ScoredNetwork> = (0..100)
        .map(|i| ScoredNetwork {
            network: Network::single(0),
            fitness: i as f64,
            confusion: ConfusionMatrix::default(),
        })
        .collect();
    let mut r = rng::stream(&[0xa5]);
    let (mut top, mut bottom) = (0, 0);
    for _ in 0..10_000 {
        let i = tournament_select(&scored, &p, &mut r);
        if i >= 90 {
            top += 1;
        } else if i < 10 {
            bottom += 1;
        }
    }
    assert!(top > bottom, "top {top} bottom {bottom}");
}

fn runs(n: usize) -> Vec<Run> {
    (0..n)
        .map(|i| Run {
            id: format!("r{i}"),
            observations: vec![vec![0.0]],
            labels: vec![false],
            stride_seconds: 1.0,
            snr: if i == 0 { None } else { Some(i as f64) },
        })
        .collect()
}

#[test]
fn strong_bias_picks_top_snr() {
    let data = runs(20);
    let cfg = TrainConfig {
        batch_fraction: 0.05,
        snr_gamma0: 40.0,
        ..TrainConfig::default()
    };
    let mut r = rng::stream(&[0xa6]);
    let mut top = 0;
    for _ in 0..1000 {
        let pick = sample_batch(&data, 0, 100, &cfg, &mut r);
        if pick[0] >= 17 {
            top += 1;
        }
    }
    assert!(top > 900, "{top}");
}

#[test]
fn full_batch_is_whole_dataset() {
    let data = runs(30);
    let cfg = TrainConfig {
        batch_fraction: 1.0,
        ..TrainConfig::default()
    };
    let mut r = rng::stream(&[0xa7]);
    let picks: BTreeSet<usize> = sample_batch(&data, 3, 10, &cfg, &mut r)
        .into_iter()
        .collect();
    assert_eq!(picks, (0..30).collect());
}
