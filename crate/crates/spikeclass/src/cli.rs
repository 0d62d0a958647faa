//! The `spikeclass` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 a requested quality threshold was not met.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use spikeclass_core::datagen::{build_dataset, DatasetCounts, Preset};
use spikeclass_core::encode::{EncoderSpec, Scheme};
use spikeclass_core::ensemble::{evaluate_ensemble, search_ensembles, Ensemble, Member};
use spikeclass_core::evolution::{
    rank, train_with, EonsParams, FitnessKind, ScoredNetwork, TrainConfig,
};
use spikeclass_core::inference::{
    classify_dataset, window_steps, ClassifierConfig, Dataset, Run, StepTrace,
};
use spikeclass_core::metrics::{self, EvalReport, LabeledCounts, RocCurve, ScoringMode};
use spikeclass_core::network::Network;
use spikeclass_core::sim::{Executable, SimulatorState, SpikeRaster};

use crate::dataset::{load_dataset, load_run, save_dataset, DATASET_FORMAT};
use crate::ensemble_file::{save_ensemble, EnsembleFile, ENSEMBLE_FORMAT};
use crate::network_file::{load_network, save_network, NetworkFile, Provenance, NETWORK_FORMAT};
use crate::population::{load_population, save_population, PopulationFile, POPULATION_FORMAT};
use crate::report::format_report;
use crate::tables::{roc_gnuplot, write_history, write_raster, write_roc, write_traces};
use crate::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_THRESHOLD: u8 = 3;

/// Default dataset directory when `--data` is not given.
pub const DATA_ENV: &str = "SPIKECLASS_DATA";

#[derive(Debug, Parser)]
#[command(
    name = "spikeclass",
    version,
    about = "Evolve and evaluate spiking-network time series classifiers"
)]
pub struct Cli {
    /// Evaluation worker threads [default: available parallelism]
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled dataset
    Datagen(DatagenArgs),
    /// Evolve a population of networks on a dataset
    Train(TrainArgs),
    /// Score a network on a dataset
    Eval(EvalArgs),
    /// Write the threshold sweep of a network as CSV
    Roc(RocArgs),
    /// Classify every step of one run file
    Predict(PredictArgs),
    /// Search pairs and trios of the best networks for a voting ensemble
    EnsembleSearch(EnsembleSearchArgs),
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    /// easy or hard
    #[arg(long, value_parser = parse_preset)]
    pub preset: Preset,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Runs without a source
    #[arg(long, default_value_t = 10)]
    pub background: usize,
    /// Runs with one injected source
    #[arg(long, default_value_t = 20)]
    pub source: usize,
}

#[derive(Debug, Args)]
pub struct ScoringArgs {
    /// Rolling window over output counts, in seconds (0 disables)
    #[arg(long, default_value_t = 0.0)]
    pub window_seconds: f64,
    /// sample or event
    #[arg(long, default_value = "sample", value_parser = parse_mode)]
    pub mode: ScoringMode,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = DATA_ENV)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// mcc or f1_tpr0sq
    #[arg(long, default_value = "mcc", value_parser = parse_fitness)]
    pub fitness: FitnessKind,
    /// Simulator cycles per time step
    #[arg(long, default_value_t = 16)]
    pub tau: u32,
    /// Output directory for best.net, population.pop and history.csv
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub population_size: usize,
    /// Share of runs drawn for each epoch
    #[arg(long, default_value_t = TrainConfig::default().batch_fraction)]
    pub batch_fraction: f64,
    /// Stop once the best fitness on a batch reaches this value
    #[arg(long)]
    pub target_fitness: Option<f64>,
    /// rate or spikes
    #[arg(long, default_value = "rate", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Input neurons per variable
    #[arg(long, default_value_t = 1)]
    pub bins: u32,
    /// Invert the amplitude mapping of even bins
    #[arg(long)]
    pub flip_flop: bool,
    /// sample or event
    #[arg(long, default_value = "sample", value_parser = parse_mode)]
    pub mode: ScoringMode,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, env = DATA_ENV)]
    pub data: PathBuf,
    /// Predict 1 when the windowed count exceeds this
    #[arg(long, conflicts_with = "auto_theta")]
    pub theta: Option<u32>,
    /// Use the threshold with the best MCC on this data
    #[arg(long)]
    pub auto_theta: bool,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Exit with code 3 when MCC is below this
    #[arg(long)]
    pub min_mcc: Option<f64>,
    /// Also write per-step traces to this CSV
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, env = DATA_ENV)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Also write a gnuplot script plotting the CSV
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// A `t,x_1..x_n,label` run file
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub theta: u32,
    #[arg(long, default_value_t = 0.0)]
    pub window_seconds: f64,
    /// Seconds per step [default: inferred from the time column]
    #[arg(long)]
    pub stride_seconds: Option<f64>,
    /// Trace CSV path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write every neuron firing as `neuron_id,cycle` CSV
    #[arg(long)]
    pub raster: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleSearchArgs {
    #[arg(long)]
    pub population: PathBuf,
    #[arg(long, env = DATA_ENV)]
    pub data: PathBuf,
    /// Share of the ranked population considered (at least 3 networks)
    #[arg(long, default_value_t = 0.1)]
    pub top_fraction: f64,
    /// False alarms per hour allowed on the calibration data
    #[arg(long, default_value_t = 1.0)]
    pub far_target: f64,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Output directory for ranking.csv, best.ens and best_single.net
    #[arg(long)]
    pub out: PathBuf,
    /// Exit with code 3 when the selected TPR is below this
    #[arg(long)]
    pub min_tpr: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("unknown preset `{s}` (expected easy or hard)"))
}

fn parse_mode(s: &str) -> Result<ScoringMode, String> {
    ScoringMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected sample or event)"))
}

fn parse_fitness(s: &str) -> Result<FitnessKind, String> {
    FitnessKind::parse(s)
        .ok_or_else(|| format!("unknown fitness `{s}` (expected mcc or f1_tpr0sq)"))
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}` (expected rate or spikes)"))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Model(spikeclass_core::Error::InvalidParameter(m)) => {
                Failure::Usage(m.to_string())
            }
            e => Failure::Data(e),
        }
    }
}

impl From<spikeclass_core::Error> for Failure {
    fn from(e: spikeclass_core::Error) -> Self {
        Error::Model(e).into()
    }
}

fn io_fail(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| {
        Failure::Data(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
        {
            Ok(pool) => {
                // Worker pools need a Send sink, so stdout is buffered.
                let mut buf = Vec::new();
                let result = pool.install(|| dispatch(cli.command, &mut buf));
                let _ = out.write_all(&buf);
                result
            }
            Err(e) => Err(Failure::Usage(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
        Err(Failure::Threshold(m)) => {
            let _ = writeln!(err, "threshold not met: {m}");
            EXIT_THRESHOLD
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Datagen(a) => datagen(&a, out),
        Command::Train(a) => train(&a, out),
        Command::Eval(a) => eval(&a, out),
        Command::Roc(a) => roc(&a, out),
        Command::Predict(a) => predict(&a, out),
        Command::EnsembleSearch(a) => ensemble_search(&a, out),
    }
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Outcome {
    writeln!(out, "{line}").map_err(io_fail(Path::new("<stdout>")))
}

fn banner(out: &mut dyn Write, command: &str, seed: u64) -> Outcome {
    say(
        out,
        format_args!(
            "spikeclass {} {command}: seed={seed} network_format={NETWORK_FORMAT} population_format={POPULATION_FORMAT} \
             ensemble_format={ENSEMBLE_FORMAT} dataset_format={DATASET_FORMAT}",
            env!("CARGO_PKG_VERSION")
        ),
    )
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(io_fail(dir))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(io_fail(path))
}

fn datagen(a: &DatagenArgs, out: &mut dyn Write) -> Outcome {
    banner(out, "datagen", a.seed)?;
    if a.background + a.source == 0 {
        return Err(Failure::Usage("need at least one run".into()));
    }
    let dataset = build_dataset(
        a.preset,
        DatasetCounts {
            background: a.background,
            source: a.source,
        },
        a.seed,
    )?;
    save_dataset(&dataset, &a.out)?;
    say(
        out,
        format_args!(
            "preset {}: {} runs ({} background, {} source), {} variables, written to {}",
            a.preset.as_str(),
            dataset.len(),
            a.background,
            a.source,
            dataset.variables(),
            a.out.display()
        ),
    )
}

fn train(a: &TrainArgs, out: &mut dyn Write) -> Outcome {
    banner(out, "train", a.seed)?;
    let params = EonsParams {
        population_size: a.population_size,
        ..EonsParams::default()
    };
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_fraction: a.batch_fraction,
        fitness: a.fitness,
        seed: a.seed,
        tau: a.tau,
        scheme: a.scheme,
        bins: a.bins,
        flip_flop: a.flip_flop,
        mode: a.mode,
        target_fitness: a.target_fitness,
        ..TrainConfig::default()
    };
    params.check()?;
    let dataset = load_dataset(&a.data)?;
    let outcome = train_with(&dataset, &params, &cfg, |_, _| {})?;

    create_dir(&a.out)?;
    let last_epoch = outcome.history.last().map_or(0, |s| s.epoch) as u64;
    let best = NetworkFile {
        network: outcome.best.network.clone(),
        encoder: outcome.encoder.clone(),
        provenance: Provenance {
            seed: a.seed,
            epoch: last_epoch,
            fitness: outcome.best.fitness,
        },
    };
    save_network(&a.out.join("best.net"), &best)?;
    let population = PopulationFile {
        encoder: outcome.encoder.clone(),
        seed: a.seed,
        epoch: last_epoch,
        fitness: a.fitness,
        members: outcome.population.clone(),
    };
    save_population(&a.out.join("population.pop"), &population)?;
    let mut history = Vec::new();
    write_history(&mut history, &outcome.history)?;
    write_file(&a.out.join("history.csv"), &history)?;

    say(out, format_args!("epochs: {}", outcome.history.len()))?;
    say(
        out,
        format_args!(
            "best: {} neurons, {} synapses",
            outcome.best.network.neurons.len(),
            outcome.best.network.synapses.len()
        ),
    )?;
    say(
        out,
        format_args!(
            "best fitness ({}): {:.6}",
            a.fitness.as_str(),
            outcome.best.fitness
        ),
    )
}

/// Raw output counts of `network` on every run, from a fresh state.
fn counts(network: &Network, spec: &EncoderSpec, runs: &[Run]) -> Result<Vec<StepTrace>, Failure> {
    Ok(classify_dataset(
        network,
        spec,
        runs,
        &ClassifierConfig::default(),
    )?)
}

fn check_variables(file: &NetworkFile, dataset: &Dataset, origin: &Path) -> Outcome {
    if file.encoder.variables() != dataset.variables() {
        return Err(Failure::Data(Error::data(
            origin.display().to_string(),
            format!(
                "network encodes {} variables but the dataset has {}",
                file.encoder.variables(),
                dataset.variables()
            ),
        )));
    }
    Ok(())
}

fn series<'a>(traces: &'a [StepTrace], runs: &'a [Run]) -> Vec<LabeledCounts<'a>> {
    traces
        .iter()
        .zip(runs)
        .map(|(t, r)| LabeledCounts::new(&t.z, &r.labels))
        .collect()
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> Outcome {
    let file = load_network(&a.network)?;
    banner(out, "eval", file.provenance.seed)?;
    let dataset = load_dataset(&a.data)?;
    check_variables(&file, &dataset, &a.data)?;
    let window = window_steps(a.scoring.window_seconds, dataset.stride_seconds);
    let raw = counts(&file.network, &file.encoder, &dataset.runs)?;
    let s = series(&raw, &dataset.runs);
    let theta = if a.auto_theta {
        metrics::best_mcc_threshold(&s, a.scoring.mode, window)?.0
    } else {
        a.theta.unwrap_or(0)
    };
    let cm = metrics::confusion_at(&s, theta, window, a.scoring.mode)?;
    let report = EvalReport::new(
        cm,
        a.scoring.mode,
        theta,
        window,
        dataset.background_hours(),
    );
    out.write_all(format_report(&report).as_bytes())
        .map_err(io_fail(Path::new("<stdout>")))?;

    if let Some(path) = &a.trace {
        let cfg = ClassifierConfig { theta, window };
        let traces: Vec<StepTrace> = raw
            .into_iter()
            .map(|t| spikeclass_core::inference::trace_from_counts(t.z, &cfg))
            .collect();
        let mut buf = Vec::new();
        write_traces(&mut buf, &dataset.runs, &traces)?;
        write_file(path, &buf)?;
    }
    match a.min_mcc {
        Some(min) if report.mcc.is_nan() || report.mcc < min => {
            Err(Failure::Threshold(format!("mcc {:.6} < {min}", report.mcc)))
        }
        _ => Ok(()),
    }
}

fn roc_of(
    file: &NetworkFile,
    dataset: &Dataset,
    scoring: &ScoringArgs,
) -> Result<RocCurve, Failure> {
    let window = window_steps(scoring.window_seconds, dataset.stride_seconds);
    let raw = counts(&file.network, &file.encoder, &dataset.runs)?;
    Ok(metrics::roc_sweep(
        &series(&raw, &dataset.runs),
        scoring.mode,
        dataset.background_hours(),
        window,
    )?)
}

fn roc(a: &RocArgs, out: &mut dyn Write) -> Outcome {
    let file = load_network(&a.network)?;
    banner(out, "roc", file.provenance.seed)?;
    let dataset = load_dataset(&a.data)?;
    check_variables(&file, &dataset, &a.data)?;
    let curve = roc_of(&file, &dataset, &a.scoring)?;
    let mut buf = Vec::new();
    write_roc(&mut buf, &curve)?;
    write_file(&a.out, &buf)?;
    if let Some(script) = &a.gnuplot {
        let name = a.out.file_name().map_or_else(
            || a.out.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        write_file(script, roc_gnuplot(&name).as_bytes())?;
    }
    say(
        out,
        format_args!(
            "window_steps: {}",
            window_steps(a.scoring.window_seconds, dataset.stride_seconds)
        ),
    )?;
    say(out, format_args!("points: {}", curve.points.len()))?;
    say(
        out,
        format_args!("tpr_at_far_0: {:.6}", metrics::tpr_at_far(&curve, 0.0)),
    )?;
    say(
        out,
        format_args!("tpr_at_far_1: {:.6}", metrics::tpr_at_far(&curve, 1.0)),
    )
}

fn predict(a: &PredictArgs, out: &mut dyn Write) -> Outcome {
    let file = load_network(&a.network)?;
    let run = load_run(&a.run, a.stride_seconds)?;
    if !run.is_empty() && run.variables() != file.encoder.variables() {
        return Err(Failure::Data(Error::data(
            a.run.display().to_string(),
            format!(
                "run has {} variables, network encodes {}",
                run.variables(),
                file.encoder.variables()
            ),
        )));
    }
    let cfg = ClassifierConfig {
        theta: a.theta,
        window: window_steps(a.window_seconds, run.stride_seconds),
    };
    let trace = spikeclass_core::inference::classify_run(&file.network, &file.encoder, &run, &cfg)?;
    let mut buf = Vec::new();
    write_traces(
        &mut buf,
        std::slice::from_ref(&run),
        std::slice::from_ref(&trace),
    )?;
    match &a.out {
        Some(path) => {
            write_file(path, &buf)?;
            banner(out, "predict", file.provenance.seed)?;
            let positives = trace.y.iter().filter(|&&y| y).count();
            say(
                out,
                format_args!("steps: {}, predicted positive: {positives}", trace.y.len()),
            )?;
        }
        None => out
            .write_all(&buf)
            .map_err(io_fail(Path::new("<stdout>")))?,
    }
    if let Some(path) = &a.raster {
        let raster = full_raster(&file.network, &file.encoder, &run)?;
        let mut buf = Vec::new();
        write_raster(&mut buf, &raster)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

/// Every firing over the whole run, cycles counted from the run start.
fn full_raster(network: &Network, spec: &EncoderSpec, run: &Run) -> Result<SpikeRaster, Failure> {
    let exe = Executable::new(network)?;
    let encoded = spikeclass_core::inference::encode_run(run, spec)?;
    let mut state = SimulatorState::new();
    let mut raster = SpikeRaster::default();
    for (i, step) in encoded.steps.iter().enumerate() {
        let w = exe.run_window(&mut state, step, spec.tau)?;
        raster.extend_shifted(&w.raster, i as u32 * spec.tau);
    }
    Ok(raster)
}

/// Number of top-ranked networks an ensemble search considers.
pub fn top_count(population: usize, fraction: f64) -> usize {
    let by_fraction = (fraction * population as f64).ceil() as usize;
    by_fraction.max(3).min(population)
}

struct Row {
    members: Vec<usize>,
    vote: &'static str,
    thetas: Vec<u32>,
    far_per_hour: f64,
    tpr: f64,
    reached: bool,
}

fn ensemble_search(a: &EnsembleSearchArgs, out: &mut dyn Write) -> Outcome {
    if !(a.top_fraction > 0.0 && a.top_fraction <= 1.0) {
        return Err(Failure::Usage("--top-fraction must be in (0, 1]".into()));
    }
    if a.far_target.is_nan() || a.far_target < 0.0 {
        return Err(Failure::Usage("--far-target must be non-negative".into()));
    }
    let pop = load_population(&a.population)?;
    banner(out, "ensemble-search", pop.seed)?;
    if pop.members.len() < 2 {
        return Err(Failure::Data(Error::data(
            a.population.display().to_string(),
            format!(
                "ensembles need at least 2 networks, population has {}",
                pop.members.len()
            ),
        )));
    }
    let dataset = load_dataset(&a.data)?;
    if pop.encoder.variables() != dataset.variables() {
        return Err(Failure::Data(Error::data(
            a.data.display().to_string(),
            format!(
                "population encodes {} variables but the dataset has {}",
                pop.encoder.variables(),
                dataset.variables()
            ),
        )));
    }
    let mode = a.scoring.mode;
    let window = window_steps(a.scoring.window_seconds, dataset.stride_seconds);
    let order = rank(&pop.members);
    let k = top_count(pop.members.len(), a.top_fraction);
    let top_idx = &order[..k];
    let top: Vec<ScoredNetwork> = top_idx.iter().map(|&i| pop.members[i].clone()).collect();

    let results = search_ensembles(
        &top,
        &pop.encoder,
        &dataset.runs,
        mode,
        window,
        a.far_target,
    )?;
    let hours = dataset.background_hours();
    let mut rows: Vec<Row> = results
        .iter()
        .map(|r| Row {
            members: r.candidate.members.iter().map(|&i| top_idx[i]).collect(),
            vote: r.candidate.vote.as_str(),
            thetas: r.calibration.thetas.clone(),
            far_per_hour: r.calibration.far_per_hour,
            tpr: r.calibration.tpr,
            reached: r.calibration.reached,
        })
        .collect();

    // Single networks at the same target: the smallest threshold within it.
    let mut best_single: Option<(usize, u32, f64, f64)> = None;
    for (slot, s) in top.iter().enumerate() {
        let raw = counts(&s.network, &pop.encoder, &dataset.runs)?;
        let curve = metrics::roc_sweep(&series(&raw, &dataset.runs), mode, hours, window)?;
        let point = curve
            .points
            .iter()
            .filter(|p| p.far_per_hour <= a.far_target)
            .min_by_key(|p| p.theta);
        let (theta, far, tpr, reached) = match point {
            Some(p) => (p.theta, p.far_per_hour, p.tpr, true),
            None => (
                curve.points.last().map_or(0, |p| p.theta),
                f64::NAN,
                0.0,
                false,
            ),
        };
        rows.push(Row {
            members: vec![top_idx[slot]],
            vote: "single",
            thetas: vec![theta],
            far_per_hour: far,
            tpr,
            reached,
        });
        if reached && best_single.is_none_or(|(_, _, _, t)| tpr > t) {
            best_single = Some((slot, theta, far, tpr));
        }
    }
    rows.sort_by(|x, y| y.reached.cmp(&x.reached).then(y.tpr.total_cmp(&x.tpr)));

    create_dir(&a.out)?;
    let mut table = csv::Writer::from_writer(Vec::new());
    let csv_fail = |e: csv::Error| Failure::Data(Error::data("ranking.csv", e.to_string()));
    table
        .write_record([
            "rank",
            "members",
            "vote",
            "thetas",
            "far_per_hour",
            "tpr",
            "reached",
        ])
        .map_err(csv_fail)?;
    for (i, r) in rows.iter().enumerate() {
        let join = |v: Vec<String>| v.join(";");
        table
            .write_record([
                (i + 1).to_string(),
                join(r.members.iter().map(ToString::to_string).collect()),
                r.vote.to_string(),
                join(r.thetas.iter().map(ToString::to_string).collect()),
                r.far_per_hour.to_string(),
                r.tpr.to_string(),
                r.reached.to_string(),
            ])
            .map_err(csv_fail)?;
    }
    let bytes = table
        .into_inner()
        .map_err(|e| Failure::Data(Error::data("ranking.csv", e.to_string())))?;
    write_file(&a.out.join("ranking.csv"), &bytes)?;

    let mut sets: Vec<&[usize]> = results
        .iter()
        .map(|r| r.candidate.members.as_slice())
        .collect();
    sets.sort_unstable();
    sets.dedup();
    say(
        out,
        format_args!(
            "population: {}, considered: {k}, member sets: {}, vote configurations: {}",
            pop.members.len(),
            sets.len(),
            results.len()
        ),
    )?;
    say(
        out,
        format_args!(
            "far_target: {} per hour, window_steps: {window}, mode: {}",
            a.far_target,
            mode.as_str()
        ),
    )?;

    let best_ensemble = results.iter().find(|r| r.calibration.reached);
    let mut selected_tpr = 0.0;
    if let Some((slot, theta, far, tpr)) = best_single {
        let file = NetworkFile {
            network: top[slot].network.clone(),
            encoder: pop.encoder.clone(),
            provenance: Provenance {
                seed: pop.seed,
                epoch: pop.epoch,
                fitness: top[slot].fitness,
            },
        };
        save_network(&a.out.join("best_single.net"), &file)?;
        say(
            out,
            format_args!(
                "best single: network {} theta={theta} far_per_hour={far:.6} tpr={tpr:.6}",
                top_idx[slot]
            ),
        )?;
        selected_tpr = tpr;
    } else {
        say(out, format_args!("best single: none meets the target"))?;
    }
    if let Some(r) = best_ensemble {
        let members = r
            .candidate
            .members
            .iter()
            .zip(&r.calibration.thetas)
            .map(|(&i, &theta)| Member {
                network: top[i].network.clone(),
                theta,
            })
            .collect();
        let ensemble = Ensemble::new(members, r.candidate.vote, window)?;
        save_ensemble(
            &a.out.join("best.ens"),
            &EnsembleFile {
                ensemble: ensemble.clone(),
                encoder: pop.encoder.clone(),
            },
        )?;
        let ids: Vec<String> = r
            .candidate
            .members
            .iter()
            .map(|&i| top_idx[i].to_string())
            .collect();
        say(
            out,
            format_args!(
                "best ensemble: networks {} vote={} thetas={:?} far_per_hour={:.6} tpr={:.6}",
                ids.join(","),
                r.candidate.vote.as_str(),
                r.calibration.thetas,
                r.calibration.far_per_hour,
                r.calibration.tpr
            ),
        )?;
        let report = evaluate_ensemble(&ensemble, &pop.encoder, &dataset.runs, mode)?;
        out.write_all(format_report(&report).as_bytes())
            .map_err(io_fail(Path::new("<stdout>")))?;
        let single_tpr = best_single.map_or(f64::NEG_INFINITY, |b| b.3);
        if r.calibration.tpr >= single_tpr {
            say(out, format_args!("selected: ensemble"))?;
            selected_tpr = r.calibration.tpr;
        } else {
            say(out, format_args!("selected: single"))?;
        }
    } else {
        say(out, format_args!("best ensemble: none meets the target"))?;
        say(out, format_args!("selected: single"))?;
    }
    match a.min_tpr {
        Some(min) if selected_tpr.is_nan() || selected_tpr < min => {
            Err(Failure::Threshold(format!("tpr {selected_tpr:.6} < {min}")))
        }
        _ => Ok(()),
    }
}
