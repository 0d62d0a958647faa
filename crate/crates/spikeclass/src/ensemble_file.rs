//! Calibrated ensembles: member networks, their thresholds and the vote.
//!
//! ```text
//! spikeclass-ensemble 1
//! vote majority window=40
//! encoder scheme=rate tau=16 bins=1 flip_flop=false variables=8
//! range 0 0 23
//! ...
//! members 3
//! member 0 theta=4
//! input_order ...
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spikeclass_core::encode::EncoderSpec;
use spikeclass_core::ensemble::{Ensemble, Member, Vote};

use crate::error::{Error, Result};
use crate::network_file::{
    check_interface, read_body, read_encoder, read_text, write_body, write_encoder,
};
use crate::text::Reader;

pub const ENSEMBLE_FORMAT: u32 = 1;
const MAGIC: &str = "spikeclass-ensemble";

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFile {
    pub ensemble: Ensemble,
    pub encoder: EncoderSpec,
}

impl EnsembleFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {ENSEMBLE_FORMAT}");
        let _ = writeln!(
            out,
            "vote {} window={}",
            self.ensemble.vote.as_str(),
            self.ensemble.window
        );
        write_encoder(&mut out, &self.encoder);
        let _ = writeln!(out, "members {}", self.ensemble.members.len());
        for (i, m) in self.ensemble.members.iter().enumerate() {
            let _ = writeln!(out, "member {i} theta={}", m.theta);
            write_body(&mut out, &m.network);
            out.push_str("end\n");
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut r = Reader::new(text, origin);
        r.header(MAGIC, "ensemble", ENSEMBLE_FORMAT)?;
        let rec = r.expect("vote")?;
        let name: String = rec.at(0, "vote")?;
        let vote = Vote::parse(&name)
            .ok_or_else(|| rec.error("vote", format!("unknown vote `{name}`")))?;
        let window: usize = rec.kv("window")?;
        let encoder = read_encoder(&mut r)?;
        let rec = r.expect("members")?;
        rec.arity(&["count"])?;
        let count: usize = rec.at(0, "count")?;
        if !(2..=3).contains(&count) {
            return Err(rec.error(
                "count",
                format!("ensembles have 2 or 3 members, found {count}"),
            ));
        }
        let mut members = Vec::new();
        for i in 0..count {
            let rec = r.expect("member")?;
            let index: usize = rec.at(0, "index")?;
            if index != i {
                return Err(rec.error("index", format!("expected member {i}, found {index}")));
            }
            let theta: u32 = rec.kv("theta")?;
            let network = read_body(&mut r, origin)?;
            r.expect("end")?;
            check_interface(&network, &encoder, origin)?;
            members.push(Member { network, theta });
        }
        r.finish()?;
        let ensemble =
            Ensemble::new(members, vote, window).map_err(|e| rec.error("count", e.to_string()))?;
        Ok(EnsembleFile { ensemble, encoder })
    }
}

pub fn save_ensemble(path: &Path, file: &EnsembleFile) -> Result<()> {
    fs::write(path, file.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_ensemble(path: &Path) -> Result<EnsembleFile> {
    let text = read_text(path)?;
    EnsembleFile::parse(&text, &path.display().to_string())
}
