//! Step-wise classification of labeled runs.
//!
//! A network sees one encoded observation per step, runs for `tau` cycles and
//! emits an output spike count `z_t`. State carries across every step of a run
//! and is reset between runs. The prediction thresholds either `z_t` itself or
//! a rolling sum of the last `W` counts.

use alloc::string::String;
use alloc::vec::Vec;

use crate::encode::{encode_observation, EncoderSpec, SpikeTrain, VariableRange};
use crate::network::Network;
use crate::par;
use crate::sim::{Executable, SimulatorState};
use crate::{Error, Result};

/// One labeled multivariate recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub id: String,
    /// `T` rows of `n` values each.
    pub observations: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    /// Wall-clock seconds per step.
    pub stride_seconds: f64,
    /// Signal-to-noise ratio of the injected source, if any.
    pub snr: Option<f64>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn variables(&self) -> usize {
        self.observations.first().map_or(0, Vec::len)
    }

    pub fn check(&self) -> Result<()> {
        if self.labels.len() != self.observations.len() {
            return Err(Error::LengthMismatch {
                left: self.observations.len(),
                right: self.labels.len(),
            });
        }
        let n = self.variables();
        for row in &self.observations {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if !(self.stride_seconds.is_finite() && self.stride_seconds > 0.0) {
            return Err(Error::InvalidParameter("stride must be positive"));
        }
        Ok(())
    }

    pub fn has_positive(&self) -> bool {
        self.labels.iter().any(|&l| l)
    }
}

/// A set of runs sharing variables, ranges and sampling stride.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ranges: Vec<VariableRange>,
    pub stride_seconds: f64,
    pub runs: Vec<Run>,
}

impl Dataset {
    pub fn variables(&self) -> usize {
        self.ranges.len()
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Per-variable `[min, max]` over every observation. Constant variables
    /// get a unit-wide range so they still normalize.
    pub fn observed_ranges(runs: &[Run]) -> Vec<VariableRange> {
        let n = runs.iter().map(Run::variables).max().unwrap_or(0);
        let mut lo = alloc::vec![f64::INFINITY; n];
        let mut hi = alloc::vec![f64::NEG_INFINITY; n];
        for row in runs.iter().flat_map(|r| &r.observations) {
            for (i, &v) in row.iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        lo.into_iter()
            .zip(hi)
            .map(|(min, max)| {
                if !min.is_finite() {
                    VariableRange { min: 0.0, max: 1.0 }
                } else if max > min {
                    VariableRange { min, max }
                } else {
                    VariableRange {
                        min,
                        max: min + 1.0,
                    }
                }
            })
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        for range in &self.ranges {
            range.check()?;
        }
        for run in &self.runs {
            run.check()?;
            if !run.is_empty() && run.variables() != self.variables() {
                return Err(Error::DimensionMismatch {
                    expected: self.variables(),
                    found: run.variables(),
                });
            }
        }
        Ok(())
    }

    /// Background-labeled time in hours.
    pub fn background_hours(&self) -> f64 {
        self.runs
            .iter()
            .map(|r| background_hours(&r.labels, r.stride_seconds))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassifierConfig {
    /// Predict 1 when the (windowed) count exceeds this.
    pub theta: u32,
    /// Rolling-sum length in steps; 0 and 1 both mean no window.
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepTrace {
    pub z: Vec<u32>,
    pub y: Vec<bool>,
}

/// A run whose observations have already been turned into spike trains.
/// Encoding does not depend on the network, so training encodes each batch
/// once and reuses it for the whole population.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedRun {
    pub steps: Vec<SpikeTrain>,
    pub labels: Vec<bool>,
    pub stride_seconds: f64,
}

pub fn encode_run(run: &Run, spec: &EncoderSpec) -> Result<EncodedRun> {
    run.check()?;
    let steps = run
        .observations
        .iter()
        .map(|x| encode_observation(x, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedRun {
        steps,
        labels: run.labels.clone(),
        stride_seconds: run.stride_seconds,
    })
}

pub fn encode_runs(runs: &[Run], spec: &EncoderSpec) -> Result<Vec<EncodedRun>> {
    par::map(runs, |_, r| encode_run(r, spec))
        .into_iter()
        .collect()
}

/// Output spike count at every step, starting from a fresh state.
pub fn step_counts(exe: &Executable, run: &EncodedRun, tau: u32) -> Result<Vec<u32>> {
    let mut state = SimulatorState::new();
    run.steps
        .iter()
        .map(|s| exe.run_count(&mut state, s, tau))
        .collect()
}

/// Sum of the last `window` counts at each step (shorter at the start).
pub fn rolling_sums(z: &[u32], window: usize) -> Vec<u32> {
    if window <= 1 {
        return z.to_vec();
    }
    let mut out = Vec::with_capacity(z.len());
    let mut sum = 0u32;
    for t in 0..z.len() {
        sum += z[t];
        if t >= window {
            sum -= z[t - window];
        }
        out.push(sum);
    }
    out
}

pub fn threshold(counts: &[u32], theta: u32) -> Vec<bool> {
    counts.iter().map(|&c| c > theta).collect()
}

pub fn trace_from_counts(z: Vec<u32>, cfg: &ClassifierConfig) -> StepTrace {
    let y = threshold(&rolling_sums(&z, cfg.window), cfg.theta);
    StepTrace { z, y }
}

/// Converts a window length in seconds to steps.
pub fn window_steps(seconds: f64, stride_seconds: f64) -> usize {
    if seconds <= 0.0 || stride_seconds <= 0.0 {
        return 0;
    }
    libm::round(seconds / stride_seconds) as usize
}

/// Hours of background-labeled time in a label sequence.
pub fn background_hours(labels: &[bool], stride_seconds: f64) -> f64 {
    labels.iter().filter(|&&l| !l).count() as f64 * stride_seconds / 3600.0
}

fn check_interface(exe: &Executable, spec: &EncoderSpec) -> Result<()> {
    spec.check()?;
    if exe.input_count() != spec.input_neurons() {
        return Err(Error::InputCountMismatch {
            expected: spec.input_neurons(),
            found: exe.input_count(),
        });
    }
    Ok(())
}

/// Classifies every step of `run`, resetting state at the start.
pub fn classify_run(
    network: &Network,
    spec: &EncoderSpec,
    run: &Run,
    cfg: &ClassifierConfig,
) -> Result<StepTrace> {
    let exe = Executable::counting(network)?;
    check_interface(&exe, spec)?;
    if !run.is_empty() && run.variables() != spec.variables() {
        return Err(Error::DimensionMismatch {
            expected: spec.variables(),
            found: run.variables(),
        });
    }
    let encoded = encode_run(run, spec)?;
    Ok(trace_from_counts(
        step_counts(&exe, &encoded, spec.tau)?,
        cfg,
    ))
}

/// [`classify_run`] over many runs, in order, each from a fresh state.
pub fn classify_dataset(
    network: &Network,
    spec: &EncoderSpec,
    runs: &[Run],
    cfg: &ClassifierConfig,
) -> Result<Vec<StepTrace>> {
    let exe = Executable::counting(network)?;
    check_interface(&exe, spec)?;
    for run in runs {
        if !run.is_empty() && run.variables() != spec.variables() {
            return Err(Error::DimensionMismatch {
                expected: spec.variables(),
                found: run.variables(),
            });
        }
    }
    par::map(runs, |_, run| {
        let encoded = encode_run(run, spec)?;
        Ok(trace_from_counts(
            step_counts(&exe, &encoded, spec.tau)?,
            cfg,
        ))
    })
    .into_iter()
    .collect()
}

/// Output counts for pre-encoded runs.
pub fn count_encoded(exe: &Executable, runs: &[EncodedRun], tau: u32) -> Result<Vec<Vec<u32>>> {
    runs.iter().map(|r| step_counts(exe, r, tau)).collect()
}
