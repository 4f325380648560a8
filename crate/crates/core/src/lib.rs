//! Radar modulation dataset synthesis and a from-scratch stacked LSTM
//! classifier.
//!
//! The crate is organized bottom-up:
//!
//! * [`signal`]: complex baseband primitives (power normalization, SNR
//!   calibrated noise, band-limited resampling, autocorrelation).
//! * [`waveforms`]: the 23 radar modulation families and the 8-class
//!   comparison set.
//! * [`dataset`]: balanced (class, SNR) grids, the binary split format and
//!   external-data import.
//! * [`lstm`]: stacked LSTM forward pass, backpropagation through time,
//!   Adam with a cyclical learning rate, and the training loop.
//! * [`eval`]: accuracy versus SNR, 90% sensitivity and confusion matrices,
//!   with CSV/SVG reports.
//! * [`cli`]: the `deepradar` command-line driver.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod lstm;
pub mod rng;
pub mod signal;
pub mod waveforms;
