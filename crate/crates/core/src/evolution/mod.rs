//! Evolutionary training of network topology and parameters.
//!
//! Each epoch evaluates the whole population on a freshly sampled batch,
//! then builds the next generation from elites, a few fresh random networks
//! and children bred by tournament selection, crossover and mutation.
//!
//! All randomness is drawn from streams keyed by `(seed, epoch, slot)`, so a
//! run is reproducible regardless of how many threads evaluate fitness.

mod crossover;
mod curriculum;
mod generation;
mod init;
mod mutate;
mod select;

use alloc::vec::Vec;

pub use crossover::crossover;
pub use curriculum::{sample_batch, snr_gamma};
pub use generation::{next_generation, rank};
pub use init::{init_population, random_network, starting_size};
pub use mutate::{mutate, MutationKind};
pub use select::{tournament_select, tournament_size};

use crate::encode::{EncoderSpec, Scheme};
use crate::inference::{count_encoded, encode_runs, Dataset, EncodedRun};
use crate::metrics::{self, ConfusionMatrix, LabeledCounts, ScoringMode};
use crate::network::Network;
use crate::sim::Executable;
use crate::{par, rng, Error, Result};

/// Evolution hyperparameters. Defaults are the values used for every
/// application: 50 starting nodes and edges, population 100, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct EonsParams {
    pub starting_nodes: usize,
    pub starting_edges: usize,
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size_factor: f64,
    pub tournament_best_net_factor: f64,
    pub random_factor: f64,
    pub num_mutations: usize,
    pub num_best: usize,
    pub add_node_rate: f64,
    pub delete_node_rate: f64,
    pub add_edge_rate: f64,
    pub delete_edge_rate: f64,
    pub node_params_rate: f64,
    pub edge_params_rate: f64,
    /// Relative weight of threshold among node parameters.
    pub node_threshold_weight: f64,
    pub edge_weight_weight: f64,
    pub edge_delay_weight: f64,
    pub merge_rate: f64,
    pub multi_edges: bool,
}

impl Default for EonsParams {
    fn default() -> Self {
        EonsParams {
            starting_nodes: 50,
            starting_edges: 50,
            population_size: 100,
            crossover_rate: 0.5,
            mutation_rate: 0.9,
            tournament_size_factor: 0.1,
            tournament_best_net_factor: 0.9,
            random_factor: 0.05,
            num_mutations: 4,
            num_best: 3,
            add_node_rate: 0.5,
            delete_node_rate: 0.25,
            add_edge_rate: 0.75,
            delete_edge_rate: 0.25,
            node_params_rate: 2.5,
            edge_params_rate: 2.5,
            node_threshold_weight: 1.0,
            edge_weight_weight: 0.7,
            edge_delay_weight: 0.3,
            merge_rate: 0.0,
            multi_edges: false,
        }
    }
}

impl EonsParams {
    pub fn check(&self) -> Result<()> {
        let rates = [
            self.crossover_rate,
            self.mutation_rate,
            self.tournament_size_factor,
            self.tournament_best_net_factor,
            self.random_factor,
            self.add_node_rate,
            self.delete_node_rate,
            self.add_edge_rate,
            self.delete_edge_rate,
            self.node_params_rate,
            self.edge_params_rate,
            self.node_threshold_weight,
            self.edge_weight_weight,
            self.edge_delay_weight,
            self.merge_rate,
        ];
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(
                "rates must be finite and non-negative",
            ));
        }
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(
                "population size must be at least 2",
            ));
        }
        if self.multi_edges {
            return Err(Error::InvalidParameter(
                "multi-edges are not supported by the hardware",
            ));
        }
        if self.merge_rate > 0.0 {
            return Err(Error::InvalidParameter("merge_rate > 0 is not supported"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessKind {
    /// Matthews correlation at threshold 0.
    Mcc,
    /// F1 at threshold 0 plus the squared TPR at zero false alarms.
    F1PlusTpr0Sq,
}

impl FitnessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FitnessKind::Mcc => "mcc",
            FitnessKind::F1PlusTpr0Sq => "f1_tpr0sq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mcc" => Some(FitnessKind::Mcc),
            "f1_tpr0sq" | "f1_plus_tpr0sq" => Some(FitnessKind::F1PlusTpr0Sq),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Share of the dataset drawn for each epoch's batch.
    pub batch_fraction: f64,
    /// Initial exponent of the high-SNR sampling bias.
    pub snr_gamma0: f64,
    /// Share of the epochs over which the bias decays to uniform.
    pub snr_ramp_fraction: f64,
    pub fitness: FitnessKind,
    pub seed: u64,
    pub tau: u32,
    pub scheme: Scheme,
    pub bins: u32,
    pub flip_flop: bool,
    pub mode: ScoringMode,
    /// Re-score the elites on the previous batch each epoch.
    pub audit_elitism: bool,
    /// Stop early once the best fitness on a batch reaches this value.
    pub target_fitness: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_fraction: 0.01,
            snr_gamma0: 3.0,
            snr_ramp_fraction: 0.5,
            fitness: FitnessKind::Mcc,
            seed: 0,
            tau: 16,
            scheme: Scheme::Rate,
            bins: 1,
            flip_flop: false,
            mode: ScoringMode::Sample,
            audit_elitism: true,
            target_fitness: None,
        }
    }
}

impl TrainConfig {
    pub fn encoder(&self, dataset: &Dataset) -> EncoderSpec {
        EncoderSpec::new(self.scheme, self.tau, dataset.ranges.clone())
            .with_bins(self.bins, self.flip_flop)
    }

    fn check(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1"));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::InvalidParameter("batch fraction must be in (0, 1]"));
        }
        if !(self.snr_ramp_fraction > 0.0 && self.snr_ramp_fraction <= 1.0) {
            return Err(Error::InvalidParameter(
                "snr ramp fraction must be in (0, 1]",
            ));
        }
        if !(self.snr_gamma0 >= 0.0) {
            return Err(Error::InvalidParameter("snr gamma must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredNetwork {
    pub network: Network,
    pub fitness: f64,
    /// Confusion matrix at the training threshold on the scoring batch.
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_neurons: usize,
    pub best_synapses: usize,
    pub batch_size: usize,
    /// Best fitness among the next generation's elites on this epoch's batch.
    pub elite_refit: Option<f64>,
}

impl EpochStats {
    /// Whether elitism held: the next generation scores at least as well on
    /// this epoch's batch. `None` when not audited.
    pub fn elitism_held(&self) -> Option<bool> {
        self.elite_refit.map(|f| f >= self.best_fitness)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Final population, scored on the last batch.
    pub population: Vec<ScoredNetwork>,
    pub best: ScoredNetwork,
    pub history: Vec<EpochStats>,
    pub encoder: EncoderSpec,
}

/// Fitness of one network on pre-encoded runs, with threshold 0 and no window.
pub fn evaluate(
    network: &Network,
    batch: &[EncodedRun],
    cfg: &TrainConfig,
) -> Result<ScoredNetwork> {
    let exe = Executable::counting(network)?;
    let counts = count_encoded(&exe, batch, cfg.tau)?;
    let series: Vec<LabeledCounts<'_>> = counts
        .iter()
        .zip(batch)
        .map(|(z, r)| LabeledCounts::new(z, &r.labels))
        .collect();
    let confusion = metrics::confusion_at(&series, 0, 0, cfg.mode)?;
    let fitness = match cfg.fitness {
        FitnessKind::Mcc => metrics::fitness_mcc(&confusion),
        FitnessKind::F1PlusTpr0Sq => {
            let hours: f64 = batch
                .iter()
                .map(|r| crate::inference::background_hours(&r.labels, r.stride_seconds))
                .sum();
            metrics::fitness_rad(&series, cfg.mode, hours)?
        }
    };
    Ok(ScoredNetwork {
        network: network.clone(),
        fitness,
        confusion,
    })
}

fn evaluate_all(
    pop: &[Network],
    batch: &[EncodedRun],
    cfg: &TrainConfig,
) -> Result<Vec<ScoredNetwork>> {
    par::map(pop, |_, net| evaluate(net, batch, cfg))
        .into_iter()
        .collect()
}

const BATCH_STREAM: u64 = 0xba7c;
const BREED_STREAM: u64 = 0xb2ee;

/// Trains a population, calling `observe` after every epoch.
pub fn train_with<F>(
    dataset: &Dataset,
    params: &EonsParams,
    cfg: &TrainConfig,
    mut observe: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochStats, &[ScoredNetwork]),
{
    params.check()?;
    cfg.check()?;
    dataset.check()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let has_pos = dataset.runs.iter().any(|r| r.labels.iter().any(|&l| l));
    let has_neg = dataset.runs.iter().any(|r| r.labels.iter().any(|&l| !l));
    if !(has_pos && has_neg) {
        return Err(Error::SingleClass);
    }
    let encoder = cfg.encoder(dataset);
    encoder.check()?;
    let n_inputs = encoder.input_neurons();

    let mut population = init_population(params, n_inputs, cfg.seed)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut scored = Vec::new();
    for epoch in 0..cfg.epochs {
        let mut batch_rng = rng::stream(&[cfg.seed, epoch as u64, BATCH_STREAM]);
        let picks = sample_batch(&dataset.runs, epoch, cfg.epochs, cfg, &mut batch_rng);
        let runs: Vec<_> = picks.iter().map(|&i| dataset.runs[i].clone()).collect();
        let batch = encode_runs(&runs, &encoder)?;

        scored = evaluate_all(&population, &batch, cfg)?;
        let order = rank(&scored);
        let best = &scored[order[0]];
        let mut stats = EpochStats {
            epoch,
            best_fitness: best.fitness,
            mean_fitness: scored.iter().map(|s| s.fitness).sum::<f64>() / scored.len() as f64,
            best_neurons: best.network.neurons.len(),
            best_synapses: best.network.synapses.len(),
            batch_size: batch.len(),
            elite_refit: None,
        };

        let done =
            epoch + 1 == cfg.epochs || cfg.target_fitness.is_some_and(|t| stats.best_fitness >= t);
        if !done {
            let seed = rng::derive(&[cfg.seed, epoch as u64, BREED_STREAM]);
            population = next_generation(&scored, params, n_inputs, seed)?;
            if cfg.audit_elitism {
                let elites = params.num_best.min(population.len());
                let refit = evaluate_all(&population[..elites], &batch, cfg)?;
                stats.elite_refit = refit.iter().map(|s| s.fitness).reduce(f64::max);
            }
        }
        observe(&stats, &scored);
        history.push(stats);
        if done {
            break;
        }
    }

    let best = scored[rank(&scored)[0]].clone();
    Ok(TrainOutcome {
        population: scored,
        best,
        history,
        encoder,
    })
}

pub fn train(dataset: &Dataset, params: &EonsParams, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, params, cfg, |_, _| {})
}
