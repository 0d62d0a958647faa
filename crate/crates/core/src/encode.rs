//! Observation-to-spike encoders.
//!
//! Each variable is normalized against its range, optionally split across `b`
//! bins covering equal subranges, and each bin becomes one input neuron whose
//! spike count is proportional to the bin-local amplitude (at most `tau`).

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableRange {
    pub min: f64,
    pub max: f64,
}

impl VariableRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let range = VariableRange { min, max };
        range.check()?;
        Ok(range)
    }

    pub fn check(&self) -> Result<()> {
        if self.min.is_finite() && self.max.is_finite() && self.max > self.min {
            Ok(())
        } else {
            Err(Error::InvalidRange {
                min: self.min,
                max: self.max,
            })
        }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Spikes spread evenly over the window.
    Rate,
    /// Spikes packed at the start of the window, one per cycle.
    Spikes,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Rate => "rate",
            Scheme::Spikes => "spikes",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rate" => Some(Scheme::Rate),
            "spikes" => Some(Scheme::Spikes),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderSpec {
    pub scheme: Scheme,
    /// Window length in cycles; also the maximum spike count per neuron.
    pub tau: u32,
    pub bins: u32,
    /// Even-numbered bins fire most at the bottom of their subrange.
    pub flip_flop: bool,
    pub ranges: Vec<VariableRange>,
}

impl EncoderSpec {
    pub fn new(scheme: Scheme, tau: u32, ranges: Vec<VariableRange>) -> Self {
        EncoderSpec {
            scheme,
            tau,
            bins: 1,
            flip_flop: false,
            ranges,
        }
    }

    pub fn with_bins(mut self, bins: u32, flip_flop: bool) -> Self {
        self.bins = bins;
        self.flip_flop = flip_flop;
        self
    }

    pub fn variables(&self) -> usize {
        self.ranges.len()
    }

    pub fn input_neurons(&self) -> usize {
        self.ranges.len() * self.bins as usize
    }

    pub fn check(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::InvalidParameter("tau must be at least 1"));
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter("bins must be at least 1"));
        }
        self.ranges.iter().try_for_each(VariableRange::check)
    }
}

/// Spike cycles for each input neuron over one window.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeTrain {
    trains: Vec<Vec<u32>>,
}

impl SpikeTrain {
    pub fn new(trains: Vec<Vec<u32>>) -> Self {
        SpikeTrain { trains }
    }

    pub fn trains(&self) -> &[Vec<u32>] {
        &self.trains
    }

    pub fn counts(&self) -> Vec<usize> {
        self.trains.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.trains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trains.is_empty()
    }
}

/// Maps `x` into `[0, 1]` against `range`; out-of-range values saturate.
pub fn normalize(x: f64, range: &VariableRange) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    range.check()?;
    Ok(((x - range.min) / range.span()).clamp(0.0, 1.0))
}

/// Number of spikes for a normalized amplitude, rounding half away from zero.
pub fn spike_count(xn: f64, tau: u32) -> u32 {
    let k = libm::round(xn.clamp(0.0, 1.0) * tau as f64);
    (k as u32).min(tau)
}

/// `round(xn * tau)` spikes, evenly spaced: the j-th at `floor(j * tau / k)`.
pub fn encode_rate(xn: f64, tau: u32) -> Vec<u32> {
    let k = spike_count(xn, tau) as u64;
    (0..k).map(|j| (j * tau as u64 / k) as u32).collect()
}

/// `round(xn * tau)` spikes on consecutive cycles from the start of the window.
pub fn encode_spikes(xn: f64, tau: u32) -> Vec<u32> {
    (0..spike_count(xn, tau)).collect()
}

fn encode_one(xn: f64, spec: &EncoderSpec) -> Vec<u32> {
    match spec.scheme {
        Scheme::Rate => encode_rate(xn, spec.tau),
        Scheme::Spikes => encode_spikes(xn, spec.tau),
    }
}

/// Encodes one observation vector into `n * bins` spike trains, ordered
/// variable-major.
pub fn encode_observation(x: &[f64], spec: &EncoderSpec) -> Result<SpikeTrain> {
    if x.len() != spec.variables() {
        return Err(Error::DimensionMismatch {
            expected: spec.variables(),
            found: x.len(),
        });
    }
    let mut trains = Vec::with_capacity(spec.input_neurons());
    for (&value, range) in x.iter().zip(&spec.ranges) {
        let xn = normalize(value, range)?;
        for bin in 0..spec.bins {
            let amplitude = bin_amplitude(xn, bin, spec.bins, spec.flip_flop);
            trains.push(encode_one(amplitude, spec));
        }
    }
    Ok(SpikeTrain::new(trains))
}

/// Bin-local amplitude of a globally normalized value. Values outside the
/// bin's subrange clamp to its ends.
pub fn bin_amplitude(xn: f64, bin: u32, bins: u32, flip_flop: bool) -> f64 {
    let b = bins as f64;
    let local = (xn * b - bin as f64).clamp(0.0, 1.0);
    if flip_flop && bin.is_multiple_of(2) {
        1.0 - local
    } else {
        local
    }
}
