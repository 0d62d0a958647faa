//! Population checkpoints: every scored network of one generation.
//!
//! ```text
//! spikeclass-population 1
//! encoder scheme=rate tau=16 bins=1 flip_flop=false variables=8
//! range 0 0 23
//! ...
//! provenance seed=7 epoch=99 fitness=mcc
//! networks 100
//! network 0 fitness=0.97 tp=40 tn=2900 fp=3 fn=57
//! input_order ...
//! output ...
//! neuron ...
//! synapse ...
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spikeclass_core::encode::EncoderSpec;
use spikeclass_core::evolution::{FitnessKind, ScoredNetwork};
use spikeclass_core::metrics::ConfusionMatrix;

use crate::error::{Error, Result};
use crate::network_file::{
    check_interface, read_body, read_encoder, read_text, write_body, write_encoder,
};
use crate::text::Reader;

pub const POPULATION_FORMAT: u32 = 1;
const MAGIC: &str = "spikeclass-population";

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFile {
    pub encoder: EncoderSpec,
    pub seed: u64,
    pub epoch: u64,
    pub fitness: FitnessKind,
    /// In population order, not ranked.
    pub members: Vec<ScoredNetwork>,
}

impl PopulationFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {POPULATION_FORMAT}");
        write_encoder(&mut out, &self.encoder);
        let _ = writeln!(
            out,
            "provenance seed={} epoch={} fitness={}",
            self.seed,
            self.epoch,
            self.fitness.as_str()
        );
        let _ = writeln!(out, "networks {}", self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            let c = &m.confusion;
            let _ = writeln!(
                out,
                "network {i} fitness={} tp={} tn={} fp={} fn={}",
                m.fitness, c.tp, c.tn, c.fp, c.fn_
            );
            write_body(&mut out, &m.network);
            out.push_str("end\n");
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut r = Reader::new(text, origin);
        r.header(MAGIC, "population", POPULATION_FORMAT)?;
        let encoder = read_encoder(&mut r)?;
        let rec = r.expect("provenance")?;
        let name: String = rec.kv("fitness")?;
        let fitness = FitnessKind::parse(&name)
            .ok_or_else(|| rec.error("fitness", format!("unknown fitness `{name}`")))?;
        let (seed, epoch) = (rec.kv("seed")?, rec.kv("epoch")?);
        let rec = r.expect("networks")?;
        rec.arity(&["count"])?;
        let count: usize = rec.at(0, "count")?;
        let mut members = Vec::with_capacity(count.min(1 << 16));
        for i in 0..count {
            let rec = r.expect("network")?;
            let index: usize = rec.at(0, "index")?;
            if index != i {
                return Err(rec.error("index", format!("expected network {i}, found {index}")));
            }
            let confusion =
                ConfusionMatrix::new(rec.kv("tp")?, rec.kv("tn")?, rec.kv("fp")?, rec.kv("fn")?);
            let fitness: f64 = rec.kv("fitness")?;
            let network = read_body(&mut r, origin)?;
            r.expect("end")?;
            check_interface(&network, &encoder, origin)?;
            members.push(ScoredNetwork {
                network,
                fitness,
                confusion,
            });
        }
        r.finish()?;
        Ok(PopulationFile {
            encoder,
            seed,
            epoch,
            fitness,
            members,
        })
    }
}

pub fn save_population(path: &Path, file: &PopulationFile) -> Result<()> {
    fs::write(path, file.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_population(path: &Path) -> Result<PopulationFile> {
    let text = read_text(path)?;
    PopulationFile::parse(&text, &path.display().to_string())
}
