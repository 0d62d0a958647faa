//! CSV tables: ROC sweeps, training history, step traces and spike rasters.

use std::io::{Read, Write};

use spikeclass_core::evolution::EpochStats;
use spikeclass_core::inference::{Run, StepTrace};
use spikeclass_core::metrics::{RocCurve, RocPoint};
use spikeclass_core::sim::SpikeRaster;

use crate::error::{Error, Result};

pub const ROC_HEADER: [&str; 3] = ["theta", "far_per_hour", "tpr"];
pub const HISTORY_HEADER: [&str; 5] = [
    "epoch",
    "best_fitness",
    "mean_fitness",
    "best_neurons",
    "best_synapses",
];
pub const TRACE_HEADER: [&str; 5] = ["run_id", "t", "z", "y", "label"];
pub const RASTER_HEADER: [&str; 2] = ["neuron_id", "cycle"];

fn csv_err(origin: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::data(origin, e.to_string())
}

fn write_rows<W: Write, R>(out: W, origin: &str, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err(origin))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(origin))?;
    }
    w.flush().map_err(|e| Error::data(origin, e.to_string()))
}

/// Reads rows after checking the header, calling `row` with each record and its line.
fn read_rows<R: Read, T>(
    input: R,
    origin: &str,
    header: &[&str],
    mut row: impl FnMut(&csv::StringRecord, usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let head = rdr.headers().map_err(csv_err(origin))?.clone();
    if head.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            origin: origin.to_string(),
            line: 1,
            field: "header".to_string(),
            message: format!("expected `{}`", header.join(",")),
        });
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(origin))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            row(&rec, line)
        })
        .collect()
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
    origin: &str,
    line: usize,
) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        origin: origin.to_string(),
        line,
        field: name.to_string(),
        message: format!("cannot parse `{raw}`"),
    })
}

pub fn write_roc<W: Write>(out: W, roc: &RocCurve) -> Result<()> {
    let rows = roc.points.iter().map(|p| {
        vec![
            p.theta.to_string(),
            p.far_per_hour.to_string(),
            p.tpr.to_string(),
        ]
    });
    write_rows(out, "roc", &ROC_HEADER, rows)
}

pub fn read_roc<R: Read>(input: R, origin: &str) -> Result<RocCurve> {
    let points = read_rows(input, origin, &ROC_HEADER, |rec, line| {
        Ok(RocPoint {
            theta: field(rec, 0, "theta", origin, line)?,
            far_per_hour: field(rec, 1, "far_per_hour", origin, line)?,
            tpr: field(rec, 2, "tpr", origin, line)?,
        })
    })?;
    Ok(RocCurve { points })
}

pub fn write_history<W: Write>(out: W, history: &[EpochStats]) -> Result<()> {
    let rows = history.iter().map(|s| {
        vec![
            s.epoch.to_string(),
            s.best_fitness.to_string(),
            s.mean_fitness.to_string(),
            s.best_neurons.to_string(),
            s.best_synapses.to_string(),
        ]
    });
    write_rows(out, "history", &HISTORY_HEADER, rows)
}

/// One row of a history file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_neurons: usize,
    pub best_synapses: usize,
}

impl From<&EpochStats> for HistoryRow {
    fn from(s: &EpochStats) -> Self {
        HistoryRow {
            epoch: s.epoch,
            best_fitness: s.best_fitness,
            mean_fitness: s.mean_fitness,
            best_neurons: s.best_neurons,
            best_synapses: s.best_synapses,
        }
    }
}

pub fn read_history<R: Read>(input: R, origin: &str) -> Result<Vec<HistoryRow>> {
    read_rows(input, origin, &HISTORY_HEADER, |rec, line| {
        Ok(HistoryRow {
            epoch: field(rec, 0, "epoch", origin, line)?,
            best_fitness: field(rec, 1, "best_fitness", origin, line)?,
            mean_fitness: field(rec, 2, "mean_fitness", origin, line)?,
            best_neurons: field(rec, 3, "best_neurons", origin, line)?,
            best_synapses: field(rec, 4, "best_synapses", origin, line)?,
        })
    })
}

/// Per-step output counts and decisions, one row per step of each run.
pub fn write_traces<W: Write>(out: W, runs: &[Run], traces: &[StepTrace]) -> Result<()> {
    if runs.len() != traces.len() {
        return Err(Error::data(
            "trace",
            format!("{} runs but {} traces", runs.len(), traces.len()),
        ));
    }
    let rows = runs.iter().zip(traces).flat_map(|(run, tr)| {
        (0..tr.z.len()).map(move |i| {
            vec![
                run.id.clone(),
                (i as f64 * run.stride_seconds).to_string(),
                tr.z[i].to_string(),
                u8::from(tr.y[i]).to_string(),
                run.labels
                    .get(i)
                    .map_or_else(String::new, |&l| u8::from(l).to_string()),
            ]
        })
    });
    write_rows(out, "trace", &TRACE_HEADER, rows)
}

/// Firing events with cycles counted from the start of the run.
pub fn write_raster<W: Write>(out: W, raster: &SpikeRaster) -> Result<()> {
    let mut events: Vec<(u16, u32)> = raster.events().map(|(id, c)| (id.0, c)).collect();
    events.sort_unstable();
    write_rows(
        out,
        "raster",
        &RASTER_HEADER,
        events
            .into_iter()
            .map(|(n, c)| vec![n.to_string(), c.to_string()]),
    )
}

pub fn read_raster<R: Read>(input: R, origin: &str) -> Result<SpikeRaster> {
    let events = read_rows(input, origin, &RASTER_HEADER, |rec, line| {
        Ok((
            field::<u16>(rec, 0, "neuron_id", origin, line)?,
            field::<u32>(rec, 1, "cycle", origin, line)?,
        ))
    })?;
    let mut raster = SpikeRaster::default();
    for (n, c) in events {
        raster
            .fired
            .entry(spikeclass_core::network::NeuronId(n))
            .or_default()
            .push(c);
    }
    Ok(raster)
}

/// A gnuplot script plotting TPR against FAR from a ROC CSV.
pub fn roc_gnuplot(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'false alarms per hour'\n\
         set ylabel 'true positive rate'\n\
         set yrange [0:1]\n\
         plot '{csv_name}' using 2:3 with linespoints title 'ROC'\n"
    )
}
