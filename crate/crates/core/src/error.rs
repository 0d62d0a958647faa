use alloc::vec::Vec;

use crate::network::{NeuronId, Violation};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid network: {}", join(.0))]
    InvalidNetwork(Vec<Violation>),
    #[error("input spike at cycle {cycle} on neuron {neuron} is outside the {tau}-cycle window")]
    SpikeOutsideWindow {
        neuron: NeuronId,
        cycle: u32,
        tau: u32,
    },
    #[error("expected {expected} input spike trains, got {found}")]
    InputCountMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error("invalid variable range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("no background-labeled time to compute a false alarm rate")]
    ZeroBackgroundTime,
    #[error("parents have different input/output interfaces")]
    InterfaceMismatch,
    #[error("need at least {needed} networks, got {found}")]
    TooFewNetworks { needed: usize, found: usize },
    #[error("vote needs {expected} member predictions, got {found}")]
    VoteArity {
        expected: &'static str,
        found: usize,
    },
    #[error("injection window [{start}, {end}) does not fit a run of {len} steps")]
    WindowOverflow {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset needs both classes for training")]
    SingleClass,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

fn join(violations: &[Violation]) -> alloc::string::String {
    use core::fmt::Write;
    let mut out = alloc::string::String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{v}");
    }
    out
}
