//! Dataset directories: a manifest plus one CSV file per run.
//!
//! ```text
//! data/
//!   manifest.txt
//!   runs/bg0000.csv      t,x_1,...,x_n,label
//!   runs/src0000.csv
//! ```
//!
//! Run files hold raw observations. Normalization ranges live only in the
//! manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use spikeclass_core::encode::VariableRange;
use spikeclass_core::inference::{Dataset, Run};

use crate::error::{Error, Result};
use crate::network_file::{read_ranges, read_text};
use crate::text::Reader;

pub const DATASET_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const RUNS_DIR: &str = "runs";
const MAGIC: &str = "spikeclass-dataset";

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub id: String,
    pub steps: usize,
    /// Number of steps labeled 1.
    pub positives: usize,
    pub snr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub ranges: Vec<VariableRange>,
    pub stride_seconds: f64,
    pub runs: Vec<RunEntry>,
}

impl DatasetManifest {
    pub fn of(dataset: &Dataset) -> Self {
        DatasetManifest {
            ranges: dataset.ranges.clone(),
            stride_seconds: dataset.stride_seconds,
            runs: dataset
                .runs
                .iter()
                .map(|r| RunEntry {
                    id: r.id.clone(),
                    steps: r.len(),
                    positives: r.labels.iter().filter(|&&l| l).count(),
                    snr: r.snr,
                })
                .collect(),
        }
    }

    pub fn variables(&self) -> usize {
        self.ranges.len()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {DATASET_FORMAT}");
        let _ = writeln!(
            out,
            "variables {} stride_seconds={}",
            self.ranges.len(),
            self.stride_seconds
        );
        for (i, r) in self.ranges.iter().enumerate() {
            let _ = writeln!(out, "range {i} {} {}", r.min, r.max);
        }
        let _ = writeln!(out, "runs {}", self.runs.len());
        for r in &self.runs {
            let snr = r.snr.map_or_else(|| "none".to_string(), |s| s.to_string());
            let _ = writeln!(
                out,
                "run {} steps={} positives={} snr={snr}",
                r.id, r.steps, r.positives
            );
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut r = Reader::new(text, origin);
        r.header(MAGIC, "dataset", DATASET_FORMAT)?;
        let rec = r.expect("variables")?;
        let n: usize = rec.at(0, "variables")?;
        let stride_seconds: f64 = rec.kv("stride_seconds")?;
        if !(stride_seconds.is_finite() && stride_seconds > 0.0) {
            return Err(rec.error("stride_seconds", "stride must be positive"));
        }
        let ranges = read_ranges(&mut r, n)?;
        let rec = r.expect("runs")?;
        rec.arity(&["count"])?;
        let count: usize = rec.at(0, "count")?;
        let mut runs = Vec::new();
        for _ in 0..count {
            let rec = r.expect("run")?;
            let id: String = rec.at(0, "id")?;
            check_id(&id).map_err(|m| rec.error("id", m))?;
            let snr_raw: String = rec.kv("snr")?;
            let snr = if snr_raw == "none" {
                None
            } else {
                Some(rec.kv("snr")?)
            };
            runs.push(RunEntry {
                id,
                steps: rec.kv("steps")?,
                positives: rec.kv("positives")?,
                snr,
            });
        }
        r.finish()?;
        Ok(DatasetManifest {
            ranges,
            stride_seconds,
            runs,
        })
    }
}

fn check_id(id: &str) -> std::result::Result<(), String> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(format!(
            "run id `{id}` must be non-empty ASCII letters, digits, `_`, `-` or `.`"
        ))
    }
}

pub fn run_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(RUNS_DIR).join(format!("{id}.csv"))
}

pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    let origin = dir.display().to_string();
    dataset
        .check()
        .map_err(|e| Error::data(&origin, e.to_string()))?;
    for run in &dataset.runs {
        check_id(&run.id).map_err(|m| Error::data(&origin, m))?;
        if run.stride_seconds != dataset.stride_seconds {
            return Err(Error::data(
                &origin,
                format!("run {} has a different stride than the dataset", run.id),
            ));
        }
    }
    let runs_dir = dir.join(RUNS_DIR);
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    for run in &dataset.runs {
        let path = run_path(dir, &run.id);
        let mut buf = Vec::new();
        write_run_csv(&mut buf, run, dataset.variables())?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, DatasetManifest::of(dataset).to_text()).map_err(|e| Error::io(&path, e))
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let path = dir.join(MANIFEST_FILE);
    let manifest = DatasetManifest::parse(&read_text(&path)?, &path.display().to_string())?;
    let n = manifest.variables();
    let mut runs = Vec::with_capacity(manifest.runs.len());
    for entry in &manifest.runs {
        let path = run_path(dir, &entry.id);
        let origin = path.display().to_string();
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut run = read_run_csv(file, &origin, Some(n), manifest.stride_seconds)?;
        if run.len() != entry.steps {
            return Err(Error::data(
                &origin,
                format!(
                    "manifest lists {} steps, file has {}",
                    entry.steps,
                    run.len()
                ),
            ));
        }
        let positives = run.labels.iter().filter(|&&l| l).count();
        if positives != entry.positives {
            return Err(Error::data(
                &origin,
                format!(
                    "manifest lists {} positive steps, file has {positives}",
                    entry.positives
                ),
            ));
        }
        run.id = entry.id.clone();
        run.snr = entry.snr;
        runs.push(run);
    }
    Ok(Dataset {
        ranges: manifest.ranges,
        stride_seconds: manifest.stride_seconds,
        runs,
    })
}

fn header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x_{i}")));
    h.push("label".to_string());
    h
}

/// Writes `t,x_1..x_n,label`, with `t` in seconds from the run start.
pub fn write_run_csv<W: Write>(out: W, run: &Run, variables: usize) -> Result<()> {
    let origin = format!("run {}", run.id);
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::data(&origin, e.to_string());
    w.write_record(header(variables)).map_err(csv_err)?;
    for (i, (row, &label)) in run.observations.iter().zip(&run.labels).enumerate() {
        if row.len() != variables {
            return Err(Error::data(
                &origin,
                format!("step {i} has {} values, expected {variables}", row.len()),
            ));
        }
        let mut rec = Vec::with_capacity(variables + 2);
        rec.push((i as f64 * run.stride_seconds).to_string());
        rec.extend(row.iter().map(f64::to_string));
        rec.push(if label { "1" } else { "0" }.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::data(&origin, e.to_string()))
}

/// Reads one run file. `variables` pins the expected column count; the
/// stride is taken as given since run files only carry time stamps.
pub fn read_run_csv<R: Read>(
    input: R,
    origin: &str,
    variables: Option<usize>,
    stride_seconds: f64,
) -> Result<Run> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, field: &str, message: String| Error::Parse {
        origin: origin.to_string(),
        line: line as usize,
        field: field.to_string(),
        message,
    };
    let head: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::data(origin, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let found_vars = head.iter().filter(|h| h.starts_with("x_")).count();
    let n = variables.unwrap_or(found_vars);
    let expected = header(n);
    if let Some(missing) = expected.iter().find(|c| !head.contains(c)) {
        return Err(parse_err(1, missing, format!("missing column `{missing}`")));
    }
    if head != expected {
        return Err(parse_err(
            1,
            "header",
            format!(
                "expected {} columns `{}`, found `{}`",
                expected.len(),
                expected.join(","),
                head.join(",")
            ),
        ));
    }

    let mut observations = Vec::new();
    let mut labels = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::data(origin, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let value = |i: usize| -> Result<f64> {
            let raw = &rec[i];
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, &expected[i], format!("cannot parse `{raw}`")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    &expected[i],
                    format!("non-finite value `{raw}`"),
                ));
            }
            Ok(v)
        };
        let t = value(0)?;
        if t <= last_t {
            return Err(parse_err(
                line,
                "t",
                format!("time {t} does not increase (previous {last_t})"),
            ));
        }
        last_t = t;
        observations.push((1..=n).map(value).collect::<Result<Vec<f64>>>()?);
        labels.push(match &rec[n + 1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(
                    line,
                    "label",
                    format!("label must be 0 or 1, found `{other}`"),
                ))
            }
        });
    }
    let run = Run {
        id: String::new(),
        observations,
        labels,
        stride_seconds,
        snr: None,
    };
    run.check()
        .map_err(|e| Error::data(origin, e.to_string()))?;
    Ok(run)
}

/// Loads a standalone run file. Without an explicit stride it is inferred
/// from the first two time stamps.
pub fn load_run(path: &Path, stride_seconds: Option<f64>) -> Result<Run> {
    let origin = path.display().to_string();
    let text = read_text(path)?;
    let mut run = read_run_csv(text.as_bytes(), &origin, None, 1.0)?;
    run.stride_seconds = match stride_seconds {
        Some(s) => s,
        None => {
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            let ts: Vec<f64> = rdr
                .records()
                .take(2)
                .filter_map(|r| {
                    r.ok()
                        .and_then(|r| r.get(0).and_then(|t| t.trim().parse().ok()))
                })
                .collect();
            match ts[..] {
                [a, b] => b - a,
                _ => {
                    return Err(Error::data(
                        &origin,
                        "cannot infer the stride from fewer than two steps",
                    ))
                }
            }
        }
    };
    run.id = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    run.check()
        .map_err(|e| Error::data(&origin, e.to_string()))?;
    Ok(run)
}
