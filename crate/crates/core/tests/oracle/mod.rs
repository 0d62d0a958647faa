//! Slow, obviously-correct reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng as _;
use spikeclass_core::network::{Network, Neuron, NeuronId, Synapse};
use spikeclass_core::rng::Rng;

/// Dense per-cycle integrate-and-fire simulator. Scans every neuron every
/// cycle and keeps pending deliveries in a flat list.
#[derive(Debug, Clone, Default)]
pub struct DenseSim {
    pub charge: BTreeMap<u16, i64>,
    /// (absolute deliver cycle, post, weight)
    pub pending: Vec<(u64, u16, i64)>,
    pub cycle: u64,
}

impl DenseSim {
    /// Runs `tau` cycles; returns the output spike count and the fired cycles
    /// (window-relative) per neuron.
    pub fn run(
        &mut self,
        net: &Network,
        inputs: &[Vec<u32>],
        tau: u32,
    ) -> (u32, BTreeMap<u16, Vec<u32>>) {
        let mut raster: BTreeMap<u16, Vec<u32>> = BTreeMap::new();
        let start = self.cycle;
        for local in 0..tau {
            let c = start + local as u64;
            let mut add: BTreeMap<u16, i64> = BTreeMap::new();
            self.pending.retain(|&(at, post, w)| {
                if at == c {
                    *add.entry(post).or_default() += w;
                    false
                } else {
                    true
                }
            });
            for (k, train) in inputs.iter().enumerate() {
                if train.contains(&local) {
                    *add.entry(net.input_order[k].0).or_default() += 1;
                }
            }
            for (id, delta) in add {
                let q = self.charge.entry(id).or_default();
                *q = (*q + delta).clamp(i16::MIN as i64, i16::MAX as i64);
            }
            for n in &net.neurons {
                let q = self.charge.entry(n.id.0).or_default();
                if *q > n.threshold as i64 {
                    *q = 0;
                    raster.entry(n.id.0).or_default().push(local);
                    for s in net.synapses.iter().filter(|s| s.pre == n.id) {
                        self.pending
                            .push((c + 1 + n.axon_delay as u64, s.post.0, s.weight as i64));
                    }
                }
            }
        }
        self.cycle += tau as u64;
        let z = raster.get(&net.output.0).map_or(0, Vec::len) as u32;
        (z, raster)
    }
}

/// A random valid network with `n` neurons (first `inputs` are inputs,
/// the output is drawn from all neurons) and up to `edges` synapses.
pub fn random_network(rng: &mut Rng, n: usize, inputs: usize, edges: usize) -> Network {
    let neurons = (0..n as u16)
        .map(|i| Neuron {
            id: NeuronId(i),
            // Low thresholds keep the network busy.
            threshold: if rng.random_bool(0.7) {
                rng.random_range(0..6)
            } else {
                rng.random_range(0..=255)
            },
            axon_delay: rng.random_range(0..=15),
        })
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut synapses = Vec::new();
    for _ in 0..edges {
        let pre = rng.random_range(0..n as u16);
        let post = rng.random_range(0..n as u16);
        if seen.insert((pre, post)) {
            let weight = if rng.random_bool(0.1) {
                if rng.random_bool(0.5) {
                    -128
                } else {
                    127
                }
            } else {
                rng.random_range(-40..=100)
            };
            synapses.push(Synapse {
                pre: NeuronId(pre),
                post: NeuronId(post),
                weight,
            });
        }
    }
    Network {
        neurons,
        synapses,
        input_order: (0..inputs as u16).map(NeuronId).collect(),
        output: NeuronId(rng.random_range(0..n as u16)),
    }
}

/// Random sorted, distinct spike cycles per input.
pub fn random_inputs(rng: &mut Rng, inputs: usize, tau: u32) -> Vec<Vec<u32>> {
    (0..inputs)
        .map(|_| {
            let p = rng.random_range(0.0..0.8);
            (0..tau).filter(|_| rng.random_bool(p)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

pub fn naive_sample(y: &[bool], labels: &[bool]) -> Counts {
    let mut c = Counts::default();
    for i in 0..y.len() {
        if y[i] && labels[i] {
            c.tp += 1;
        } else if !y[i] && !labels[i] {
            c.tn += 1;
        } else if y[i] {
            c.fp += 1;
        } else {
            c.fn_ += 1;
        }
    }
    c
}

/// Event scoring by explicit block enumeration: a block is `[start, end)`.
pub fn naive_event(y: &[bool], labels: &[bool]) -> Counts {
    fn runs_of(v: &[bool], value: bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < v.len() {
            if v[i] == value {
                let s = i;
                while i < v.len() && v[i] == value {
                    i += 1;
                }
                out.push((s, i));
            } else {
                i += 1;
            }
        }
        out
    }
    let mut c = Counts::default();
    for (s, e) in runs_of(labels, true) {
        if (s..e).any(|i| y[i]) {
            c.tp += 1;
        } else {
            c.fn_ += 1;
        }
    }
    let alarms: Vec<(usize, usize)> = runs_of(y, true)
        .into_iter()
        .filter(|&(s, e)| (s..e).all(|i| !labels[i]))
        .collect();
    c.fp = alarms.len() as u64;
    for (s, e) in runs_of(labels, false) {
        if !alarms.iter().any(|&(a, b)| a >= s && b <= e) {
            c.tn += 1;
        }
    }
    c
}

pub fn naive_mcc(c: Counts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let d = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if d == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / d.sqrt()
    }
}

pub fn naive_f1(c: Counts) -> f64 {
    let (tp, fp, fn_) = (c.tp as f64, c.fp as f64, c.fn_ as f64);
    if 2.0 * tp + fp + fn_ == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fn_)
    }
}

pub fn naive_rolling(z: &[u32], w: usize) -> Vec<u32> {
    let w = w.max(1);
    (0..z.len())
        .map(|t| z[(t + 1).saturating_sub(w)..=t].iter().sum())
        .collect()
}
