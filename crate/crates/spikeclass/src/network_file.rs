//! Canonical text form of a trained network.
//!
//! ```text
//! spikeclass-network 1
//! encoder scheme=rate tau=16 bins=1 flip_flop=false variables=2
//! range 0 0 23
//! range 1 0 17
//! provenance seed=7 epoch=99 fitness=0.97
//! input_order 0 1
//! output 2
//! neuron 0 input 3 0
//! neuron 1 input 0 2
//! neuron 2 output 12 0
//! synapse 0 2 40
//! synapse 1 2 -7
//! ```
//!
//! Neurons and synapses are written sorted by id, so two networks with the
//! same content always produce the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spikeclass_core::encode::{EncoderSpec, Scheme, VariableRange};
use spikeclass_core::network::{
    Network, Neuron, NeuronId, Synapse, MAX_AXON_DELAY, MAX_NEURONS, MAX_THRESHOLD, MAX_WEIGHT,
    MIN_WEIGHT,
};

use crate::error::{Error, Result};
use crate::text::Reader;

pub const NETWORK_FORMAT: u32 = 1;
const MAGIC: &str = "spikeclass-network";

/// Where a saved network came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    /// Last completed training epoch.
    pub epoch: u64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub network: Network,
    pub encoder: EncoderSpec,
    pub provenance: Provenance,
}

impl NetworkFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {NETWORK_FORMAT}");
        write_encoder(&mut out, &self.encoder);
        let p = &self.provenance;
        let _ = writeln!(
            out,
            "provenance seed={} epoch={} fitness={}",
            p.seed, p.epoch, p.fitness
        );
        write_body(&mut out, &self.network);
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut r = Reader::new(text, origin);
        r.header(MAGIC, "network", NETWORK_FORMAT)?;
        let encoder = read_encoder(&mut r)?;
        let rec = r.expect("provenance")?;
        let provenance = Provenance {
            seed: rec.kv("seed")?,
            epoch: rec.kv("epoch")?,
            fitness: rec.kv("fitness")?,
        };
        let network = read_body(&mut r, origin)?;
        r.finish()?;
        check_interface(&network, &encoder, origin)?;
        Ok(NetworkFile {
            network,
            encoder,
            provenance,
        })
    }
}

pub fn save_network(path: &Path, file: &NetworkFile) -> Result<()> {
    fs::write(path, file.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<NetworkFile> {
    let text = read_text(path)?;
    NetworkFile::parse(&text, &path.display().to_string())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_encoder(out: &mut String, spec: &EncoderSpec) {
    let _ = writeln!(
        out,
        "encoder scheme={} tau={} bins={} flip_flop={} variables={}",
        spec.scheme.as_str(),
        spec.tau,
        spec.bins,
        spec.flip_flop,
        spec.ranges.len()
    );
    for (i, r) in spec.ranges.iter().enumerate() {
        let _ = writeln!(out, "range {i} {} {}", r.min, r.max);
    }
}

pub(crate) fn read_encoder(r: &mut Reader<'_>) -> Result<EncoderSpec> {
    let rec = r.expect("encoder")?;
    let scheme_name: String = rec.kv("scheme")?;
    let scheme = Scheme::parse(&scheme_name)
        .ok_or_else(|| rec.error("scheme", format!("unknown scheme `{scheme_name}`")))?;
    let tau: u32 = rec.kv("tau")?;
    let bins: u32 = rec.kv("bins")?;
    let flip_flop: bool = rec.kv("flip_flop")?;
    let n: usize = rec.kv("variables")?;
    let ranges = read_ranges(r, n)?;
    let spec = EncoderSpec::new(scheme, tau, ranges).with_bins(bins, flip_flop);
    spec.check()
        .map_err(|e| rec.error("encoder", e.to_string()))?;
    Ok(spec)
}

pub(crate) fn read_ranges(r: &mut Reader<'_>, n: usize) -> Result<Vec<VariableRange>> {
    (0..n)
        .map(|i| {
            let rec = r.expect("range")?;
            rec.arity(&["index", "min", "max"])?;
            let index: usize = rec.at(0, "index")?;
            if index != i {
                return Err(rec.error("index", format!("expected range {i}, found {index}")));
            }
            let range = VariableRange {
                min: rec.at(1, "min")?,
                max: rec.at(2, "max")?,
            };
            range.check().map_err(|e| rec.error("max", e.to_string()))?;
            Ok(range)
        })
        .collect()
}

/// Interface, neurons and synapses of `net` in canonical order.
pub(crate) fn write_body(out: &mut String, net: &Network) {
    let net = net.clone().canonical();
    out.push_str("input_order");
    for id in &net.input_order {
        let _ = write!(out, " {id}");
    }
    out.push('\n');
    let _ = writeln!(out, "output {}", net.output);
    for n in &net.neurons {
        let _ = writeln!(
            out,
            "neuron {} {} {} {}",
            n.id,
            net.kind(n.id).as_str(),
            n.threshold,
            n.axon_delay
        );
    }
    for s in &net.synapses {
        let _ = writeln!(out, "synapse {} {} {}", s.pre, s.post, s.weight);
    }
}

pub(crate) fn read_body(r: &mut Reader<'_>, origin: &str) -> Result<Network> {
    let max_id = MAX_NEURONS as i64 - 1;
    let rec = r.expect("input_order")?;
    let input_order = (0..rec.fields.len())
        .map(|i| {
            rec.int_in(i, "input_order", 0, max_id)
                .map(|v| NeuronId(v as u16))
        })
        .collect::<Result<Vec<_>>>()?;
    let rec = r.expect("output")?;
    rec.arity(&["id"])?;
    let output = NeuronId(rec.int_in(0, "id", 0, max_id)? as u16);
    let mut net = Network {
        neurons: Vec::new(),
        synapses: Vec::new(),
        input_order,
        output,
    };

    let mut kinds = Vec::new();
    while r.peek_key() == Some("neuron") {
        let rec = r.expect("neuron")?;
        rec.arity(&["id", "kind", "threshold", "axon_delay"])?;
        let id = NeuronId(rec.int_in(0, "id", 0, max_id)? as u16);
        kinds.push((rec.clone(), id));
        net.neurons.push(Neuron {
            id,
            threshold: rec.int_in(2, "threshold", 0, MAX_THRESHOLD as i64)?,
            axon_delay: rec.int_in(3, "axon_delay", 0, MAX_AXON_DELAY as i64)?,
        });
    }
    while r.peek_key() == Some("synapse") {
        let rec = r.expect("synapse")?;
        rec.arity(&["pre", "post", "weight"])?;
        net.synapses.push(Synapse {
            pre: NeuronId(rec.int_in(0, "pre", 0, max_id)? as u16),
            post: NeuronId(rec.int_in(1, "post", 0, max_id)? as u16),
            weight: rec.int_in(2, "weight", MIN_WEIGHT as i64, MAX_WEIGHT as i64)?,
        });
    }
    for (rec, id) in kinds {
        let expected = net.kind(id).as_str();
        let found: String = rec.at(1, "kind")?;
        if found != expected {
            return Err(rec.error(
                "kind",
                format!("neuron {id} is {expected}, file says `{found}`"),
            ));
        }
    }
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(Error::data(
            origin,
            spikeclass_core::Error::InvalidNetwork(violations).to_string(),
        ));
    }
    Ok(net)
}

pub(crate) fn check_interface(net: &Network, spec: &EncoderSpec, origin: &str) -> Result<()> {
    if net.input_order.len() != spec.input_neurons() {
        return Err(Error::data(
            origin,
            format!(
                "network has {} input neurons but the encoder produces {}",
                net.input_order.len(),
                spec.input_neurons()
            ),
        ));
    }
    Ok(())
}
