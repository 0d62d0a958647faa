//! Synthetic labeled count data.
//!
//! Background is Poisson per channel with a slow sinusoidal drift. A source
//! encounter adds Poisson counts shaped by a Gaussian envelope in time and a
//! fixed channel profile, scaled so the encounter has a requested
//! `SNR = S / sqrt(S + B)`, where `B` is the expected background in the
//! encounter window and `S` the expected source counts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use crate::inference::{Dataset, Run};
use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    /// Mean counts per step for each channel.
    pub base_rate: Vec<f64>,
    /// Fractional amplitude of the sinusoidal drift.
    pub drift_amplitude: f64,
    /// Drift period in steps.
    pub drift_period: f64,
}

impl BackgroundModel {
    pub fn channels(&self) -> usize {
        self.base_rate.len()
    }

    fn check(&self) -> Result<()> {
        if self.base_rate.is_empty() || self.base_rate.iter().any(|&r| !(r > 0.0 && r.is_finite()))
        {
            return Err(Error::InvalidParameter("background rates must be positive"));
        }
        if !(self.drift_amplitude >= 0.0) || !(self.drift_period > 0.0) {
            return Err(Error::InvalidParameter("drift amplitude and period"));
        }
        Ok(())
    }

    /// Expected background counts summed over channels across `steps` steps,
    /// ignoring drift.
    pub fn expected_counts(&self, steps: usize) -> f64 {
        steps as f64 * self.base_rate.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// Gaussian centered on the window, standard deviation as a fraction of
    /// the window length.
    Gaussian { sigma_fraction: f64 },
}

impl Envelope {
    /// Per-step weights over a window of `duration` steps, summing to 1.
    pub fn weights(&self, duration: usize) -> Vec<f64> {
        match *self {
            Envelope::Gaussian { sigma_fraction } => {
                let sigma = (sigma_fraction * duration as f64).max(1e-9);
                let center = (duration as f64 - 1.0) / 2.0;
                let w: Vec<f64> = (0..duration)
                    .map(|t| {
                        let d = (t as f64 - center) / sigma;
                        libm::exp(-0.5 * d * d)
                    })
                    .collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|x| x / total).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceTemplate {
    /// Share of source counts per channel; sums to 1.
    pub channel_profile: Vec<f64>,
    pub duration: usize,
    pub envelope: Envelope,
}

impl SourceTemplate {
    fn check(&self) -> Result<()> {
        let total: f64 = self.channel_profile.iter().sum();
        if self.channel_profile.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "channel profile must be non-negative and sum to 1",
            ));
        }
        if self.duration == 0 {
            return Err(Error::InvalidParameter("source duration must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionSpec {
    pub snr: f64,
    pub start: usize,
}

/// Source counts `S` that give `snr` against `background` expected counts:
/// the positive root of `S^2 - snr^2 S - snr^2 B = 0`.
pub fn source_counts(snr: f64, background: f64) -> f64 {
    (snr * snr + snr * libm::sqrt(snr * snr + 4.0 * background)) / 2.0
}

pub fn snr_of(source: f64, background: f64) -> f64 {
    if source + background <= 0.0 {
        0.0
    } else {
        source / libm::sqrt(source + background)
    }
}

fn poisson(rng: &mut Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // Poisson::new only rejects non-positive or non-finite means.
    Poisson::new(mean).map_or(0.0, |d| d.sample(rng))
}

/// A background-only run of `steps` steps.
pub fn gen_background(
    model: &BackgroundModel,
    steps: usize,
    stride_seconds: f64,
    seed: u64,
) -> Result<Run> {
    model.check()?;
    if steps == 0 {
        return Err(Error::InvalidParameter("run needs at least one step"));
    }
    if !(stride_seconds > 0.0) {
        return Err(Error::InvalidParameter("stride must be positive"));
    }
    let mut rng = rng::stream(&[seed, 0xb6]);
    let phases: Vec<f64> = (0..model.channels())
        .map(|_| rng.random::<f64>() * 2.0 * PI)
        .collect();
    let mut observations = Vec::with_capacity(steps);
    for t in 0..steps {
        let row = model
            .base_rate
            .iter()
            .zip(&phases)
            .map(|(&rate, &phase)| {
                let drift = libm::sin(2.0 * PI * t as f64 / model.drift_period + phase);
                let mean = (rate * (1.0 + model.drift_amplitude * drift)).max(0.0);
                poisson(&mut rng, mean)
            })
            .collect();
        observations.push(row);
    }
    Ok(Run {
        id: format!("bg-{seed:016x}"),
        observations,
        labels: alloc::vec![false; steps],
        stride_seconds,
        snr: None,
    })
}

/// Adds a source encounter to `run` and labels its window.
pub fn inject_source(
    run: &Run,
    model: &BackgroundModel,
    template: &SourceTemplate,
    spec: &InjectionSpec,
    seed: u64,
) -> Result<Run> {
    template.check()?;
    if template.channel_profile.len() != run.variables() {
        return Err(Error::DimensionMismatch {
            expected: run.variables(),
            found: template.channel_profile.len(),
        });
    }
    if !(spec.snr >= 0.0) || !spec.snr.is_finite() {
        return Err(Error::InvalidParameter("snr must be non-negative"));
    }
    let end = spec.start + template.duration;
    if end > run.len() {
        return Err(Error::WindowOverflow {
            start: spec.start,
            end,
            len: run.len(),
        });
    }
    let background = model.expected_counts(template.duration);
    let total = source_counts(spec.snr, background);
    let envelope = template.envelope.weights(template.duration);
    let mut rng = rng::stream(&[seed, 0x5c]);
    let mut out = run.clone();
    for (k, &w) in envelope.iter().enumerate() {
        let t = spec.start + k;
        for (c, &share) in template.channel_profile.iter().enumerate() {
            out.observations[t][c] += poisson(&mut rng, total * w * share);
        }
        out.labels[t] = true;
    }
    out.snr = Some(spec.snr);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Easy,
    Hard,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "easy" => Some(Preset::Easy),
            "hard" => Some(Preset::Hard),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Easy => "easy",
            Preset::Hard => "hard",
        }
    }

    pub fn config(self) -> PresetConfig {
        match self {
            // A falling spectrum with a source line in the two quietest
            // channels.
            Preset::Easy => PresetConfig {
                model: BackgroundModel {
                    base_rate: alloc::vec![10.0, 6.0, 4.0, 2.0, 1.0, 0.5, 0.1, 0.05],
                    drift_amplitude: 0.1,
                    drift_period: 64.0,
                },
                template: SourceTemplate {
                    channel_profile: alloc::vec![0.0, 0.0, 0.02, 0.03, 0.05, 0.1, 0.2, 0.6],
                    duration: 8,
                    envelope: Envelope::Gaussian {
                        sigma_fraction: 0.5,
                    },
                },
                steps: 100,
                stride_seconds: 0.5,
                snr_grid: (8..=16).map(f64::from).collect(),
            },
            Preset::Hard => PresetConfig {
                model: BackgroundModel {
                    base_rate: alloc::vec![10.0, 7.0, 5.0, 4.0, 3.0, 2.0, 1.5, 1.0],
                    drift_amplitude: 0.5,
                    drift_period: 40.0,
                },
                template: SourceTemplate {
                    channel_profile: alloc::vec![0.05, 0.05, 0.1, 0.1, 0.15, 0.2, 0.2, 0.15],
                    duration: 12,
                    envelope: Envelope::Gaussian {
                        sigma_fraction: 0.3,
                    },
                },
                steps: 100,
                stride_seconds: 0.5,
                snr_grid: (1..=8).map(|k| 2.0 * k as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetConfig {
    pub model: BackgroundModel,
    pub template: SourceTemplate,
    /// Steps per run.
    pub steps: usize,
    pub stride_seconds: f64,
    pub snr_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetCounts {
    pub background: usize,
    pub source: usize,
}

/// Generates a dataset: background-only runs first, then source runs cycling
/// through the preset's SNR grid. Ranges are the observed min/max.
pub fn build_dataset(preset: Preset, counts: DatasetCounts, seed: u64) -> Result<Dataset> {
    generate(&preset.config(), counts, seed)
}

pub fn generate(cfg: &PresetConfig, counts: DatasetCounts, seed: u64) -> Result<Dataset> {
    let mut runs = Vec::with_capacity(counts.background + counts.source);
    let margin = 2usize;
    let span = cfg
        .steps
        .checked_sub(cfg.template.duration + 2 * margin)
        .ok_or(Error::WindowOverflow {
            start: margin,
            end: margin + cfg.template.duration,
            len: cfg.steps,
        })?;
    for i in 0..counts.background + counts.source {
        let run_seed = rng::derive(&[seed, i as u64]);
        let mut run = gen_background(&cfg.model, cfg.steps, cfg.stride_seconds, run_seed)?;
        let id: String;
        if i < counts.background {
            id = format!("bg{i:04}");
        } else {
            let k = i - counts.background;
            let snr = cfg.snr_grid[k % cfg.snr_grid.len()];
            let mut placement = rng::stream(&[run_seed, 0x57]);
            let start = margin + placement.random_range(0..=span);
            run = inject_source(
                &run,
                &cfg.model,
                &cfg.template,
                &InjectionSpec { snr, start },
                run_seed,
            )?;
            id = format!("src{k:04}");
        }
        run.id = id;
        runs.push(run);
    }
    Ok(Dataset {
        ranges: Dataset::observed_ranges(&runs),
        stride_seconds: cfg.stride_seconds,
        runs,
    })
}
