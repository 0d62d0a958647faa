//! Event-driven integrate-and-fire execution.
//!
//! One cycle at absolute time `c`:
//!
//! 1. Every pending delivery due at `c` and every input spike scheduled at `c`
//!    (unit charge) is summed per target neuron, and the sum is added to the
//!    neuron's charge with 16-bit saturation.
//! 2. Every neuron whose charge exceeds its threshold fires: its charge
//!    resets to zero and each outgoing synapse schedules a delivery at
//!    `c + 1 + axon_delay`.
//!
//! There is no leak. Only neurons that received charge in a cycle can start
//! firing, so work per cycle is proportional to activity, not network size.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::mem;

use crate::encode::SpikeTrain;
use crate::network::{Network, NeuronId, Synapse, MAX_NEURONS};
use crate::{Error, Result};

/// Deliveries are at most `1 + 15` cycles out, so a 16-slot wheel suffices.
const WHEEL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Delivery {
    post: u8,
    weight: i8,
}

/// Charges plus in-flight spikes: everything a network remembers between
/// windows.
#[derive(Debug, Clone)]
pub struct SimulatorState {
    charge: [i16; MAX_NEURONS],
    wheel: [Vec<Delivery>; WHEEL],
    cycle: u64,
    scratch: Scratch,
}

/// Per-cycle work buffers. `acc` and `marked` are all zero between cycles,
/// so they never need clearing; the rest are overwritten before use.
#[derive(Debug, Clone)]
struct Scratch {
    acc: [i32; MAX_NEURONS],
    marked: [bool; MAX_NEURONS],
    touched: [u8; MAX_NEURONS],
    fired: [u8; MAX_NEURONS],
    // Input spikes bucketed by cycle: targets of cycle `c` are
    // `injected[starts[c]..starts[c + 1]]`.
    starts: Vec<u32>,
    injected: Vec<u8>,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            acc: [0; MAX_NEURONS],
            marked: [false; MAX_NEURONS],
            touched: [0; MAX_NEURONS],
            fired: [0; MAX_NEURONS],
            starts: Vec::new(),
            injected: Vec::new(),
        }
    }
}

impl Default for SimulatorState {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SimulatorState {
    fn eq(&self, other: &Self) -> bool {
        self.cycle == other.cycle
            && self.charge == other.charge
            && self.pending() == other.pending()
    }
}

impl SimulatorState {
    pub fn new() -> Self {
        SimulatorState {
            charge: [0; MAX_NEURONS],
            wheel: Default::default(),
            cycle: 0,
            scratch: Scratch::new(),
        }
    }

    /// Zeroes every charge, drops in-flight spikes and rewinds the clock.
    pub fn reset(&mut self) {
        self.charge = [0; MAX_NEURONS];
        for slot in &mut self.wheel {
            slot.clear();
        }
        self.cycle = 0;
    }

    /// Next cycle to be executed.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn charge(&self, id: NeuronId) -> i16 {
        self.charge[id.index()]
    }

    pub fn set_charge(&mut self, id: NeuronId, charge: i16) {
        self.charge[id.index()] = charge;
    }

    /// Pending deliveries as sorted `(deliver_cycle, post, weight)` triples.
    pub fn pending(&self) -> Vec<(u64, NeuronId, i8)> {
        let mut out = Vec::new();
        let base = (self.cycle % WHEEL as u64) as usize;
        for (slot, entries) in self.wheel.iter().enumerate() {
            let ahead = (slot + WHEEL - base) % WHEEL;
            for d in entries {
                out.push((self.cycle + ahead as u64, NeuronId(d.post as u16), d.weight));
            }
        }
        out.sort_unstable();
        out
    }

    /// Queues a delivery. `deliver_cycle` must lie in `cycle..cycle + 16`.
    pub fn schedule(&mut self, deliver_cycle: u64, post: NeuronId, weight: i8) -> Result<()> {
        if deliver_cycle < self.cycle || deliver_cycle >= self.cycle + WHEEL as u64 {
            return Err(Error::InvalidParameter(
                "delivery outside the 16-cycle horizon",
            ));
        }
        if post.index() >= MAX_NEURONS {
            return Err(Error::InvalidParameter("delivery target out of range"));
        }
        let slot = (deliver_cycle % WHEEL as u64) as usize;
        self.wheel[slot].push(Delivery {
            post: post.0 as u8,
            weight,
        });
        Ok(())
    }

    pub fn is_quiescent(&self) -> bool {
        self.wheel.iter().all(Vec::is_empty)
    }
}

/// Per-neuron firing cycles, relative to the start of a window.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeRaster {
    pub fired: BTreeMap<NeuronId, Vec<u32>>,
}

impl SpikeRaster {
    pub fn is_empty(&self) -> bool {
        self.fired.is_empty()
    }

    pub fn count(&self, id: NeuronId) -> usize {
        self.fired.get(&id).map_or(0, Vec::len)
    }

    /// Flattened `(neuron, cycle)` pairs in neuron-then-cycle order.
    pub fn events(&self) -> impl Iterator<Item = (NeuronId, u32)> + '_ {
        self.fired
            .iter()
            .flat_map(|(&id, cycles)| cycles.iter().map(move |&c| (id, c)))
    }

    /// Appends `other`, shifting its cycles by `offset`.
    pub fn extend_shifted(&mut self, other: &SpikeRaster, offset: u32) {
        for (&id, cycles) in &other.fired {
            self.fired
                .entry(id)
                .or_default()
                .extend(cycles.iter().map(|c| c + offset));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowOutput {
    /// Output neuron spike count over the window.
    pub z: u32,
    pub raster: SpikeRaster,
}

/// A validated network laid out for fast execution.
#[derive(Debug, Clone)]
pub struct Executable {
    threshold: [i16; MAX_NEURONS],
    delay: [u8; MAX_NEURONS],
    // CSR fan-out indexed by neuron id.
    offsets: Vec<u32>,
    fanout: Vec<Delivery>,
    inputs: Vec<u8>,
    neurons: Vec<u8>,
    output: u8,
}

impl Executable {
    pub fn new(network: &Network) -> Result<Self> {
        let violations = network.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidNetwork(violations));
        }
        let mut threshold = [0i16; MAX_NEURONS];
        let mut delay = [0u8; MAX_NEURONS];
        let mut neurons = Vec::with_capacity(network.neurons.len());
        for n in &network.neurons {
            threshold[n.id.index()] = n.threshold as i16;
            delay[n.id.index()] = n.axon_delay as u8;
            neurons.push(n.id.0 as u8);
        }
        let mut degree = [0u32; MAX_NEURONS];
        for s in &network.synapses {
            degree[s.pre.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(MAX_NEURONS + 1);
        let mut acc = 0u32;
        offsets.push(0);
        for d in degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor: Vec<u32> = offsets[..MAX_NEURONS].to_vec();
        let mut fanout = alloc::vec![Delivery { post: 0, weight: 0 }; network.synapses.len()];
        for s in &network.synapses {
            let at = &mut cursor[s.pre.index()];
            fanout[*at as usize] = Delivery {
                post: s.post.0 as u8,
                weight: s.weight as i8,
            };
            *at += 1;
        }
        Ok(Executable {
            threshold,
            delay,
            offsets,
            fanout,
            inputs: network.input_order.iter().map(|id| id.0 as u8).collect(),
            neurons,
            output: network.output.0 as u8,
        })
    }

    /// Like [`Executable::new`], but drops every synapse that is not on a
    /// path from an input to the output. Output counts from a fresh state are
    /// unchanged; rasters of other neurons are not.
    pub fn counting(network: &Network) -> Result<Self> {
        let mut exe = Executable::new(network)?;
        let forward = reach(network, &network.input_order, |s| (s.pre, s.post));
        let backward = reach(network, &[network.output], |s| (s.post, s.pre));
        let mut pruned = network.clone();
        pruned
            .synapses
            .retain(|s| forward[s.pre.index()] && backward[s.post.index()]);
        if pruned.synapses.len() < network.synapses.len() {
            let lean = Executable::new(&pruned)?;
            exe.offsets = lean.offsets;
            exe.fanout = lean.fanout;
        }
        Ok(exe)
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Runs `tau` cycles and records every spike.
    pub fn run_window(
        &self,
        state: &mut SimulatorState,
        inputs: &SpikeTrain,
        tau: u32,
    ) -> Result<WindowOutput> {
        let mut raster = SpikeRaster::default();
        let z = self.execute(state, inputs, tau, |id, cycle| {
            raster
                .fired
                .entry(NeuronId(id as u16))
                .or_default()
                .push(cycle);
        })?;
        Ok(WindowOutput { z, raster })
    }

    /// Runs `tau` cycles and returns only the output spike count.
    pub fn run_count(
        &self,
        state: &mut SimulatorState,
        inputs: &SpikeTrain,
        tau: u32,
    ) -> Result<u32> {
        self.execute(state, inputs, tau, |_, _| {})
    }

    fn execute<F: FnMut(u8, u32)>(
        &self,
        state: &mut SimulatorState,
        inputs: &SpikeTrain,
        tau: u32,
        mut on_fire: F,
    ) -> Result<u32> {
        let trains = inputs.trains();
        if trains.len() != self.inputs.len() {
            return Err(Error::InputCountMismatch {
                expected: self.inputs.len(),
                found: trains.len(),
            });
        }
        for (k, train) in trains.iter().enumerate() {
            if let Some(&cycle) = train.iter().find(|&&c| c >= tau) {
                return Err(Error::SpikeOutsideWindow {
                    neuron: NeuronId(self.inputs[k] as u16),
                    cycle,
                    tau,
                });
            }
        }

        let Scratch {
            acc,
            marked,
            touched,
            fired,
            starts,
            injected,
        } = &mut state.scratch;
        starts.clear();
        starts.resize(tau as usize + 1, 0);
        for train in trains {
            for &c in train {
                starts[c as usize + 1] += 1;
            }
        }
        for c in 0..tau as usize {
            starts[c + 1] += starts[c];
        }
        injected.clear();
        injected.resize(starts[tau as usize] as usize, 0);
        for (k, train) in trains.iter().enumerate() {
            for &c in train {
                // Bump the bucket start as a fill cursor, undone below.
                injected[starts[c as usize] as usize] = self.inputs[k];
                starts[c as usize] += 1;
            }
        }
        for c in (1..=tau as usize).rev() {
            starts[c] = starts[c - 1];
        }
        starts[0] = 0;
        let mut n_touched = 0usize;

        // A caller-supplied state may already sit above threshold.
        for &n in &self.neurons {
            if state.charge[n as usize] > self.threshold[n as usize] {
                marked[n as usize] = true;
                touched[n_touched] = n;
                n_touched += 1;
            }
        }

        let mut z = 0u32;
        for local in 0..tau {
            let slot = (state.cycle % WHEEL as u64) as usize;
            let mut due = mem::take(&mut state.wheel[slot]);
            for d in &due {
                let p = d.post as usize;
                if !marked[p] {
                    marked[p] = true;
                    touched[n_touched] = d.post;
                    n_touched += 1;
                }
                acc[p] = acc[p].saturating_add(d.weight as i32);
            }
            for &n in
                &injected[starts[local as usize] as usize..starts[local as usize + 1] as usize]
            {
                let p = n as usize;
                if !marked[p] {
                    marked[p] = true;
                    touched[n_touched] = n;
                    n_touched += 1;
                }
                acc[p] = acc[p].saturating_add(1);
            }

            let mut n_fired = 0usize;
            for &n in &touched[..n_touched] {
                let i = n as usize;
                let sum = (state.charge[i] as i32).saturating_add(acc[i]);
                let charge = sum.clamp(i16::MIN as i32, i16::MAX as i32) as i16;
                acc[i] = 0;
                marked[i] = false;
                if charge > self.threshold[i] {
                    state.charge[i] = 0;
                    fired[n_fired] = n;
                    n_fired += 1;
                } else {
                    state.charge[i] = charge;
                }
            }
            n_touched = 0;

            for &n in &fired[..n_fired] {
                let i = n as usize;
                on_fire(n, local);
                if n == self.output {
                    z += 1;
                }
                let target = ((state.cycle + 1 + self.delay[i] as u64) % WHEEL as u64) as usize;
                let span = self.offsets[i] as usize..self.offsets[i + 1] as usize;
                state.wheel[target].extend_from_slice(&self.fanout[span]);
            }

            // Reuse the drained buffer unless a delay-15 spike already refilled the slot.
            if state.wheel[slot].is_empty() {
                due.clear();
                state.wheel[slot] = due;
            }
            state.cycle += 1;
        }
        Ok(z)
    }
}

/// Neurons reachable from `roots` following synapses as `(from, to)` edges.
fn reach(
    network: &Network,
    roots: &[NeuronId],
    edge: impl Fn(&Synapse) -> (NeuronId, NeuronId),
) -> [bool; MAX_NEURONS] {
    let mut seen = [false; MAX_NEURONS];
    let mut stack: Vec<NeuronId> = roots.to_vec();
    while let Some(id) = stack.pop() {
        if core::mem::replace(&mut seen[id.index()], true) {
            continue;
        }
        for s in &network.synapses {
            let (from, to) = edge(s);
            if from == id && !seen[to.index()] {
                stack.push(to);
            }
        }
    }
    seen
}

/// Runs one window of `tau` cycles on `network`, carrying `state` forward.
pub fn run_window(
    network: &Network,
    state: &mut SimulatorState,
    inputs: &SpikeTrain,
    tau: u32,
) -> Result<WindowOutput> {
    Executable::new(network)?.run_window(state, inputs, tau)
}
