//! The quantized network genome.
//!
//! A [`Network`] is both what evolution mutates and what gets deployed, so it
//! can hold out-of-range values (a corrupted file, a buggy operator) and
//! [`Network::validate`] reports them as data. Only a network with no
//! violations can be compiled for simulation.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

/// Maximum neurons the hardware core can hold.
pub const MAX_NEURONS: usize = 256;
/// Maximum synapses the hardware core can hold.
pub const MAX_SYNAPSES: usize = 4096;
/// Thresholds are unsigned 8-bit.
pub const MAX_THRESHOLD: i32 = 255;
/// Axon delays are 4-bit.
pub const MAX_AXON_DELAY: i32 = 15;
pub const MIN_WEIGHT: i32 = -128;
pub const MAX_WEIGHT: i32 = 127;

/// Neuron identifier; legal ids are `0..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeuronId(pub u16);

impl NeuronId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role of a neuron, derived from the network's input list and output id.
///
/// A single neuron may serve as both input and output (the smallest legal
/// network), which is why the role is not stored on the neuron itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronKind {
    Input,
    Hidden,
    Output,
    InputOutput,
}

impl NeuronKind {
    pub fn is_input(self) -> bool {
        matches!(self, NeuronKind::Input | NeuronKind::InputOutput)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NeuronKind::Input => "input",
            NeuronKind::Hidden => "hidden",
            NeuronKind::Output => "output",
            NeuronKind::InputOutput => "input+output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neuron {
    pub id: NeuronId,
    /// Firing threshold in charge units (fires when charge exceeds it).
    pub threshold: i32,
    /// Cycles added to every spike this neuron emits.
    pub axon_delay: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub weight: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub neurons: Vec<Neuron>,
    pub synapses: Vec<Synapse>,
    /// Input neurons in encoder order (variable-major, bin-minor).
    pub input_order: Vec<NeuronId>,
    pub output: NeuronId,
}

/// A reason a network cannot run on the hardware core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NeuronCapExceeded {
        count: usize,
    },
    SynapseCapExceeded {
        count: usize,
    },
    NeuronIdOutOfRange {
        id: NeuronId,
    },
    DuplicateNeuron {
        id: NeuronId,
    },
    ThresholdOutOfRange {
        id: NeuronId,
        value: i32,
    },
    DelayOutOfRange {
        id: NeuronId,
        value: i32,
    },
    WeightOutOfRange {
        pre: NeuronId,
        post: NeuronId,
        value: i32,
    },
    DanglingSynapse {
        pre: NeuronId,
        post: NeuronId,
    },
    MultiEdge {
        pre: NeuronId,
        post: NeuronId,
    },
    NoInputs,
    UnknownInput {
        id: NeuronId,
    },
    DuplicateInput {
        id: NeuronId,
    },
    UnknownOutput {
        id: NeuronId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NeuronCapExceeded { count } => {
                write!(f, "neuron cap exceeded ({count} > {MAX_NEURONS})")
            }
            SynapseCapExceeded { count } => {
                write!(f, "synapse cap exceeded ({count} > {MAX_SYNAPSES})")
            }
            NeuronIdOutOfRange { id } => write!(f, "neuron id {id} out of range"),
            DuplicateNeuron { id } => write!(f, "duplicate neuron {id}"),
            ThresholdOutOfRange { id, value } => {
                write!(f, "threshold out of range on neuron {id}: {value}")
            }
            DelayOutOfRange { id, value } => {
                write!(f, "axon delay out of range on neuron {id}: {value}")
            }
            WeightOutOfRange { pre, post, value } => {
                write!(f, "weight out of range on synapse {pre}->{post}: {value}")
            }
            DanglingSynapse { pre, post } => {
                write!(f, "synapse {pre}->{post} references a missing neuron")
            }
            MultiEdge { pre, post } => write!(f, "multi-edge {pre}->{post}"),
            NoInputs => f.write_str("no input neurons"),
            UnknownInput { id } => write!(f, "input {id} is not a neuron"),
            DuplicateInput { id } => write!(f, "input {id} listed twice"),
            UnknownOutput { id } => write!(f, "output {id} is not a neuron"),
        }
    }
}

impl Network {
    /// The smallest legal network: one neuron that is both input and output.
    pub fn single(threshold: i32) -> Self {
        let id = NeuronId(0);
        Network {
            neurons: alloc::vec![Neuron {
                id,
                threshold,
                axon_delay: 0
            }],
            synapses: Vec::new(),
            input_order: alloc::vec![id],
            output: id,
        }
    }

    pub fn neuron(&self, id: NeuronId) -> Option<&Neuron> {
        self.neurons.iter().find(|n| n.id == id)
    }

    pub fn neuron_mut(&mut self, id: NeuronId) -> Option<&mut Neuron> {
        self.neurons.iter_mut().find(|n| n.id == id)
    }

    pub fn contains(&self, id: NeuronId) -> bool {
        self.neuron(id).is_some()
    }

    pub fn synapse(&self, pre: NeuronId, post: NeuronId) -> Option<&Synapse> {
        self.synapses
            .iter()
            .find(|s| s.pre == pre && s.post == post)
    }

    pub fn kind(&self, id: NeuronId) -> NeuronKind {
        let input = self.input_order.contains(&id);
        match (input, id == self.output) {
            (true, true) => NeuronKind::InputOutput,
            (true, false) => NeuronKind::Input,
            (false, true) => NeuronKind::Output,
            (false, false) => NeuronKind::Hidden,
        }
    }

    pub fn is_hidden(&self, id: NeuronId) -> bool {
        self.kind(id) == NeuronKind::Hidden
    }

    pub fn hidden_ids(&self) -> Vec<NeuronId> {
        self.neurons
            .iter()
            .map(|n| n.id)
            .filter(|&id| self.is_hidden(id))
            .collect()
    }

    /// Removes a neuron and every synapse touching it.
    pub fn remove_neuron(&mut self, id: NeuronId) {
        self.neurons.retain(|n| n.id != id);
        self.synapses.retain(|s| s.pre != id && s.post != id);
    }

    /// Lowest id in `0..=255` not used by any neuron.
    pub fn free_id(&self) -> Option<NeuronId> {
        let used: BTreeSet<u16> = self.neurons.iter().map(|n| n.id.0).collect();
        (0..MAX_NEURONS as u16)
            .find(|i| !used.contains(i))
            .map(NeuronId)
    }

    /// Sorts neurons by id and synapses by `(pre, post)`. Two networks with the
    /// same genes compare equal after canonicalization.
    pub fn canonicalize(&mut self) {
        self.neurons.sort_by_key(|n| n.id);
        self.synapses.sort_by_key(|s| (s.pre, s.post));
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Every cap, range and reference violation. Empty means the network can
    /// be simulated and serialized for the hardware core.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.neurons.len() > MAX_NEURONS {
            out.push(Violation::NeuronCapExceeded {
                count: self.neurons.len(),
            });
        }
        if self.synapses.len() > MAX_SYNAPSES {
            out.push(Violation::SynapseCapExceeded {
                count: self.synapses.len(),
            });
        }

        let mut ids = BTreeSet::new();
        for n in &self.neurons {
            if n.id.index() >= MAX_NEURONS {
                out.push(Violation::NeuronIdOutOfRange { id: n.id });
            }
            if !ids.insert(n.id) {
                out.push(Violation::DuplicateNeuron { id: n.id });
            }
            if !(0..=MAX_THRESHOLD).contains(&n.threshold) {
                out.push(Violation::ThresholdOutOfRange {
                    id: n.id,
                    value: n.threshold,
                });
            }
            if !(0..=MAX_AXON_DELAY).contains(&n.axon_delay) {
                out.push(Violation::DelayOutOfRange {
                    id: n.id,
                    value: n.axon_delay,
                });
            }
        }

        let mut edges = BTreeSet::new();
        for s in &self.synapses {
            if !(MIN_WEIGHT..=MAX_WEIGHT).contains(&s.weight) {
                out.push(Violation::WeightOutOfRange {
                    pre: s.pre,
                    post: s.post,
                    value: s.weight,
                });
            }
            if !ids.contains(&s.pre) || !ids.contains(&s.post) {
                out.push(Violation::DanglingSynapse {
                    pre: s.pre,
                    post: s.post,
                });
            }
            if !edges.insert((s.pre, s.post)) {
                out.push(Violation::MultiEdge {
                    pre: s.pre,
                    post: s.post,
                });
            }
        }

        if self.input_order.is_empty() {
            out.push(Violation::NoInputs);
        }
        let mut seen = BTreeSet::new();
        for &id in &self.input_order {
            if !ids.contains(&id) {
                out.push(Violation::UnknownInput { id });
            }
            if !seen.insert(id) {
                out.push(Violation::DuplicateInput { id });
            }
        }
        if !ids.contains(&self.output) {
            out.push(Violation::UnknownOutput { id: self.output });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn chain(n: u16) -> Network {
        let neurons = (0..n)
            .map(|i| Neuron {
                id: NeuronId(i),
                threshold: 0,
                axon_delay: 0,
            })
            .collect();
        let synapses = (1..n)
            .map(|i| Synapse {
                pre: NeuronId(i - 1),
                post: NeuronId(i),
                weight: 1,
            })
            .collect();
        Network {
            neurons,
            synapses,
            input_order: vec![NeuronId(0)],
            output: NeuronId(n - 1),
        }
    }

    #[test]
    fn minimal_graph_is_valid() {
        let net = Network::single(0);
        assert!(net.validate().is_empty());
        assert_eq!(net.kind(NeuronId(0)), NeuronKind::InputOutput);
    }

    #[test]
    fn neuron_cap() {
        let net = chain(257);
        let v = net.validate();
        assert!(v.contains(&Violation::NeuronCapExceeded { count: 257 }));
        assert!(v
            .iter()
            .any(|v| v.to_string().contains("neuron cap exceeded")));
        assert!(chain(256).validate().is_empty());
    }

    #[test]
    fn synapse_cap() {
        let mut net = chain(65);
        net.synapses.clear();
        'outer: for pre in 0..65 {
            for post in 0..65 {
                if net.synapses.len() == 4097 {
                    break 'outer;
                }
                net.synapses.push(Synapse {
                    pre: NeuronId(pre),
                    post: NeuronId(post),
                    weight: 0,
                });
            }
        }
        assert_eq!(
            net.validate(),
            vec![Violation::SynapseCapExceeded { count: 4097 }]
        );
        net.synapses.pop();
        assert!(net.validate().is_empty());
    }

    #[test]
    fn multi_edge() {
        let mut net = chain(3);
        net.synapses.push(Synapse {
            pre: NeuronId(0),
            post: NeuronId(1),
            weight: -3,
        });
        let v = net.validate();
        assert_eq!(
            v,
            vec![Violation::MultiEdge {
                pre: NeuronId(0),
                post: NeuronId(1)
            }]
        );
        assert_eq!(v[0].to_string(), "multi-edge 0->1");
    }

    #[test]
    fn self_connection_allowed() {
        let mut net = chain(2);
        net.synapses.push(Synapse {
            pre: NeuronId(1),
            post: NeuronId(1),
            weight: -1,
        });
        assert!(net.is_valid());
    }

    #[test]
    fn parameter_ranges() {
        let mut net = chain(3);
        net.neurons[0].threshold = 256;
        net.neurons[1].axon_delay = 16;
        net.neurons[2].threshold = -1;
        net.synapses[0].weight = 128;
        net.synapses[1].weight = -129;
        let v = net.validate();
        assert_eq!(v.len(), 5, "{v:?}");
        net.neurons[0].threshold = 255;
        net.neurons[1].axon_delay = 15;
        net.neurons[2].threshold = 0;
        net.synapses[0].weight = 127;
        net.synapses[1].weight = -128;
        assert!(net.is_valid());
    }

    #[test]
    fn references() {
        let mut net = chain(2);
        net.synapses.push(Synapse {
            pre: NeuronId(0),
            post: NeuronId(9),
            weight: 1,
        });
        net.input_order.push(NeuronId(0));
        net.input_order.push(NeuronId(7));
        net.output = NeuronId(8);
        let v = net.validate();
        assert!(v.contains(&Violation::DanglingSynapse {
            pre: NeuronId(0),
            post: NeuronId(9)
        }));
        assert!(v.contains(&Violation::DuplicateInput { id: NeuronId(0) }));
        assert!(v.contains(&Violation::UnknownInput { id: NeuronId(7) }));
        assert!(v.contains(&Violation::UnknownOutput { id: NeuronId(8) }));
        net.input_order.clear();
        assert!(net.validate().contains(&Violation::NoInputs));
    }

    #[test]
    fn canonical_order() {
        let mut a = chain(4);
        let mut b = a.clone();
        b.neurons.reverse();
        b.synapses.reverse();
        assert_ne!(a, b);
        a.canonicalize();
        b.canonicalize();
        assert_eq!(a, b);
    }

    #[test]
    fn free_id_and_removal() {
        let mut net = chain(4);
        assert_eq!(net.free_id(), Some(NeuronId(4)));
        net.remove_neuron(NeuronId(1));
        assert_eq!(net.free_id(), Some(NeuronId(1)));
        assert_eq!(net.synapses.len(), 1);
        assert_eq!(net.hidden_ids(), vec![NeuronId(2)]);
    }
}
