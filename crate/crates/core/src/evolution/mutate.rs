use alloc::vec::Vec;

use rand::Rng as _;

use super::init::{random_neuron, random_weight};
use super::EonsParams;
use crate::network::{
    Network, NeuronId, Synapse, MAX_AXON_DELAY, MAX_NEURONS, MAX_SYNAPSES, MAX_THRESHOLD,
};
use crate::rng::Rng;

/// Redraws allowed when a drawn operation cannot apply to the network.
const MAX_REDRAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    AddNode,
    DeleteNode,
    AddEdge,
    DeleteEdge,
    NodeParams,
    EdgeParams,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::AddNode,
        MutationKind::DeleteNode,
        MutationKind::AddEdge,
        MutationKind::DeleteEdge,
        MutationKind::NodeParams,
        MutationKind::EdgeParams,
    ];

    fn weight(self, p: &EonsParams) -> f64 {
        match self {
            MutationKind::AddNode => p.add_node_rate,
            MutationKind::DeleteNode => p.delete_node_rate,
            MutationKind::AddEdge => p.add_edge_rate,
            MutationKind::DeleteEdge => p.delete_edge_rate,
            MutationKind::NodeParams => p.node_params_rate,
            MutationKind::EdgeParams => p.edge_params_rate,
        }
    }

    /// Draws a kind with probability proportional to its rate.
    pub fn draw(params: &EonsParams, rng: &mut Rng) -> Option<MutationKind> {
        let total: f64 = Self::ALL.iter().map(|k| k.weight(params)).sum();
        if !(total > 0.0) {
            return None;
        }
        let mut u = rng.random::<f64>() * total;
        for k in Self::ALL {
            let w = k.weight(params);
            if u < w {
                return Some(k);
            }
            u -= w;
        }
        Self::ALL
            .iter()
            .rev()
            .copied()
            .find(|k| k.weight(params) > 0.0)
    }
}

fn pick<T: Copy>(items: &[T], rng: &mut Rng) -> Option<T> {
    (!items.is_empty()).then(|| items[rng.random_range(0..items.len())])
}

fn free_pair(net: &Network, rng: &mut Rng) -> Option<(NeuronId, NeuronId)> {
    let ids: Vec<NeuronId> = net.neurons.iter().map(|n| n.id).collect();
    let pairs = ids.len() * ids.len();
    if net.synapses.len() >= pairs.min(MAX_SYNAPSES) {
        return None;
    }
    // Rejection sampling is fine while sparse; fall back to enumeration.
    for _ in 0..32 {
        let (a, b) = (pick(&ids, rng)?, pick(&ids, rng)?);
        if net.synapse(a, b).is_none() {
            return Some((a, b));
        }
    }
    let free: Vec<(NeuronId, NeuronId)> = ids
        .iter()
        .flat_map(|&a| ids.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| net.synapse(a, b).is_none())
        .collect();
    pick(&free, rng)
}

fn add_edge(net: &mut Network, pre: NeuronId, post: NeuronId, rng: &mut Rng) {
    net.synapses.push(Synapse {
        pre,
        post,
        weight: random_weight(rng),
    });
}

/// Applies one operation; returns false when it cannot apply.
fn apply(net: &mut Network, kind: MutationKind, params: &EonsParams, rng: &mut Rng) -> bool {
    match kind {
        MutationKind::AddNode => {
            if net.neurons.len() >= MAX_NEURONS {
                return false;
            }
            let Some(id) = net.free_id() else {
                return false;
            };
            let peers: Vec<NeuronId> = net.neurons.iter().map(|n| n.id).collect();
            net.neurons.push(random_neuron(id, rng));
            if net.synapses.len() < MAX_SYNAPSES {
                if let Some(pre) = pick(&peers, rng) {
                    add_edge(net, pre, id, rng);
                }
            }
            if net.synapses.len() < MAX_SYNAPSES {
                if let Some(post) = pick(&peers, rng) {
                    add_edge(net, id, post, rng);
                }
            }
            true
        }
        MutationKind::DeleteNode => match pick(&net.hidden_ids(), rng) {
            Some(id) => {
                net.remove_neuron(id);
                true
            }
            None => false,
        },
        MutationKind::AddEdge => match free_pair(net, rng) {
            Some((pre, post)) if params.multi_edges || net.synapse(pre, post).is_none() => {
                add_edge(net, pre, post, rng);
                true
            }
            _ => false,
        },
        MutationKind::DeleteEdge => {
            if net.synapses.is_empty() {
                return false;
            }
            let i = rng.random_range(0..net.synapses.len());
            net.synapses.remove(i);
            true
        }
        MutationKind::NodeParams => {
            // Every neuron is eligible, inputs included: an input's threshold
            // decides how many encoder spikes it passes on.
            let i = rng.random_range(0..net.neurons.len());
            net.neurons[i].threshold = rng.random_range(0..=MAX_THRESHOLD);
            true
        }
        MutationKind::EdgeParams => {
            if net.synapses.is_empty() {
                return false;
            }
            let i = rng.random_range(0..net.synapses.len());
            let total = params.edge_weight_weight + params.edge_delay_weight;
            let weight = !(total > 0.0) || rng.random::<f64>() * total < params.edge_weight_weight;
            if weight {
                net.synapses[i].weight = random_weight(rng);
            } else {
                // Delay lives on the presynaptic axon.
                let pre = net.synapses[i].pre;
                if let Some(n) = net.neuron_mut(pre) {
                    n.axon_delay = rng.random_range(0..=MAX_AXON_DELAY);
                }
            }
            true
        }
    }
}

/// Applies `num_mutations` operations, each drawn by rate. An operation that
/// cannot apply is redrawn a few times, then skipped. The result is in
/// canonical order.
pub fn mutate(mut net: Network, params: &EonsParams, rng: &mut Rng) -> Network {
    for _ in 0..params.num_mutations {
        for _ in 0..MAX_REDRAWS {
            let Some(kind) = MutationKind::draw(params, rng) else {
                break;
            };
            if apply(&mut net, kind, params, rng) {
                break;
            }
        }
    }
    net.canonical()
}
