//! Evolved spiking neural networks for step-wise binary classification of
//! multivariate time series.
//!
//! The crate is `no_std` (with `alloc`) so the simulator and encoders can run
//! on the same microcontroller that drives the neuromorphic core. File formats,
//! the command line and other IO live in the `spikeclass` crate.
//!
//! Pipeline overview:
//!
//! * [`encode`] turns an observation vector into per-input-neuron spike trains.
//! * [`sim`] executes a quantized [`network::Network`] cycle by cycle with
//!   integrate-and-fire semantics, carrying state between windows.
//! * [`inference`] runs a network over a labeled run and thresholds the
//!   output spike counts.
//! * [`metrics`] scores predictions (MCC, F1, ROC sweeps, false alarm rates).
//! * [`evolution`] trains a population of networks.
//! * [`ensemble`] combines the top networks by voting.
//! * [`datagen`] synthesizes labeled Poisson count data for experiments.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod datagen;
pub mod encode;
pub mod ensemble;
mod error;
pub mod evolution;
pub mod inference;
pub mod metrics;
pub mod network;
mod par;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
