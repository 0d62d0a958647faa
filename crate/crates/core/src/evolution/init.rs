use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::EonsParams;
use crate::network::{
    Network, Neuron, NeuronId, Synapse, MAX_AXON_DELAY, MAX_NEURONS, MAX_SYNAPSES, MAX_THRESHOLD,
    MAX_WEIGHT, MIN_WEIGHT,
};
use crate::rng::{self, Rng};
use crate::{Error, Result};

const INIT_STREAM: u64 = 0x1417;

/// Neuron count of a fresh network: `starting_nodes`, but never fewer than
/// the inputs plus one output.
pub fn starting_size(params: &EonsParams, n_inputs: usize) -> usize {
    params.starting_nodes.max(n_inputs + 1).min(MAX_NEURONS)
}

pub(crate) fn random_neuron(id: NeuronId, rng: &mut Rng) -> Neuron {
    Neuron {
        id,
        threshold: rng.random_range(0..=MAX_THRESHOLD),
        axon_delay: rng.random_range(0..=MAX_AXON_DELAY),
    }
}

pub(crate) fn random_weight(rng: &mut Rng) -> i32 {
    rng.random_range(MIN_WEIGHT..=MAX_WEIGHT)
}

/// A random network: inputs `0..n_inputs`, output `n_inputs`, hidden neurons
/// after that, and `starting_edges` distinct random synapses.
pub fn random_network(params: &EonsParams, n_inputs: usize, rng: &mut Rng) -> Result<Network> {
    if n_inputs == 0 || n_inputs + 1 > MAX_NEURONS {
        return Err(Error::InvalidParameter("input count must be in 1..=255"));
    }
    let total = starting_size(params, n_inputs);
    let neurons: Vec<Neuron> = (0..total as u16)
        .map(|i| random_neuron(NeuronId(i), rng))
        .collect();

    let pairs = total * total;
    let edges = params.starting_edges.min(pairs).min(MAX_SYNAPSES);
    let mut chosen = BTreeSet::new();
    if edges * 2 > pairs {
        let mut all: Vec<usize> = (0..pairs).collect();
        all.shuffle(rng);
        chosen.extend(all.into_iter().take(edges));
    } else {
        while chosen.len() < edges {
            chosen.insert(rng.random_range(0..pairs));
        }
    }
    // Draw weights in sorted edge order so the result only depends on the rng.
    let synapses = chosen
        .into_iter()
        .map(|k| Synapse {
            pre: NeuronId((k / total) as u16),
            post: NeuronId((k % total) as u16),
            weight: random_weight(rng),
        })
        .collect();

    Ok(Network {
        neurons,
        synapses,
        input_order: (0..n_inputs as u16).map(NeuronId).collect(),
        output: NeuronId(n_inputs as u16),
    })
}

/// `population_size` random networks, each from its own seed stream.
pub fn init_population(params: &EonsParams, n_inputs: usize, seed: u64) -> Result<Vec<Network>> {
    (0..params.population_size)
        .map(|slot| {
            random_network(
                params,
                n_inputs,
                &mut rng::stream(&[seed, INIT_STREAM, slot as u64]),
            )
        })
        .collect()
}
