//! File formats, dataset directories and the command line for the
//! `spikeclass-core` classifier.
//!
//! All text formats are canonical: saving the same content twice produces
//! the same bytes, and loading a saved file gives back the original values.
//!
//! * [`network_file`]: a trained network with its encoder and provenance.
//! * [`population`]: a checkpoint of every scored network in a generation.
//! * [`ensemble_file`]: calibrated voting ensembles.
//! * [`dataset`]: a manifest plus one `t,x_1..x_n,label` CSV per run.
//! * [`tables`]: ROC, history, trace and raster CSVs.
//! * [`cli`]: the `spikeclass` command.

pub mod cli;
pub mod dataset;
pub mod ensemble_file;
mod error;
pub mod network_file;
pub mod population;
pub mod report;
pub mod tables;
mod text;

pub use error::{Error, Result};
pub use spikeclass_core as core;
