use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;

use crate::network::{Network, Neuron, NeuronId, Synapse, MAX_NEURONS, MAX_SYNAPSES};
use crate::rng::Rng;
use crate::{Error, Result};

/// Picks a donor between two optional genes. A gene owned by both parents is
/// always inherited (donor chosen by a fair coin); a gene owned by one parent
/// is inherited with probability one half.
fn inherit<T: Copy>(a: Option<T>, b: Option<T>, rng: &mut Rng) -> Option<T> {
    let from_first = rng.random::<bool>();
    match (a, b) {
        (Some(x), Some(y)) => Some(if from_first { x } else { y }),
        (Some(x), None) if from_first => Some(x),
        (None, Some(y)) if !from_first => Some(y),
        _ => None,
    }
}

/// Node-aligned uniform crossover. Neurons are matched by id; inputs and the
/// output are always kept. Synapses survive only when both endpoints did.
/// Excess neurons or synapses beyond the hardware caps are pruned at random.
pub fn crossover(a: &Network, b: &Network, rng: &mut Rng) -> Result<Network> {
    if a.input_order != b.input_order || a.output != b.output {
        return Err(Error::InterfaceMismatch);
    }
    let na: BTreeMap<NeuronId, Neuron> = a.neurons.iter().map(|n| (n.id, *n)).collect();
    let nb: BTreeMap<NeuronId, Neuron> = b.neurons.iter().map(|n| (n.id, *n)).collect();
    let ids: BTreeSet<NeuronId> = na.keys().chain(nb.keys()).copied().collect();

    let mut neurons = Vec::with_capacity(ids.len());
    for &id in &ids {
        let (ga, gb) = (na.get(&id).copied(), nb.get(&id).copied());
        let gene = if a.is_hidden(id) {
            inherit(ga, gb, rng)
        } else {
            // Interface neurons exist in both valid parents.
            inherit(ga.or(gb), gb.or(ga), rng)
        };
        if let Some(n) = gene {
            neurons.push(n);
        }
    }

    if neurons.len() > MAX_NEURONS {
        let hidden: Vec<usize> = (0..neurons.len())
            .filter(|&i| a.is_hidden(neurons[i].id))
            .collect();
        let excess = neurons.len() - MAX_NEURONS;
        let drop: BTreeSet<usize> = index::sample(rng, hidden.len(), excess)
            .into_iter()
            .map(|k| hidden[k])
            .collect();
        neurons = neurons
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, n)| n)
            .collect();
    }
    let alive: BTreeSet<NeuronId> = neurons.iter().map(|n| n.id).collect();

    let sa: BTreeMap<(NeuronId, NeuronId), Synapse> =
        a.synapses.iter().map(|s| ((s.pre, s.post), *s)).collect();
    let sb: BTreeMap<(NeuronId, NeuronId), Synapse> =
        b.synapses.iter().map(|s| ((s.pre, s.post), *s)).collect();
    let keys: BTreeSet<(NeuronId, NeuronId)> = sa.keys().chain(sb.keys()).copied().collect();
    let mut synapses = Vec::new();
    for key in keys {
        let gene = inherit(sa.get(&key).copied(), sb.get(&key).copied(), rng);
        if let Some(s) = gene {
            if alive.contains(&s.pre) && alive.contains(&s.post) {
                synapses.push(s);
            }
        }
    }
    if synapses.len() > MAX_SYNAPSES {
        let keep: BTreeSet<usize> = index::sample(rng, synapses.len(), MAX_SYNAPSES)
            .into_iter()
            .collect();
        synapses = synapses
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, s)| s)
            .collect();
    }

    Ok(Network {
        neurons,
        synapses,
        input_order: a.input_order.clone(),
        output: a.output,
    })
}
