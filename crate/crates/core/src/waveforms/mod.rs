//! Radar waveform synthesis for the 23-class radar set and the 8-class
//! comparison set.
//!
//! Every generator returns a unit-power, 1024-sample complex baseband
//! sequence at 100 MHz before any noise is added.

mod codes;
mod eightclass;
mod spec;
mod synth;

pub use codes::{
    all_costas_arrays, barker_sequence, costas_array, gcd, huffman_sequence, is_costas,
    polyphase_code, polytime_phases, polytime_raw_phases, zadoff_chu, CodeSequence,
    PolyphaseVariant, PolytimeParams, PolytimeVariant, BARKER_LENGTHS, COSTAS_ORDERS,
};
pub use eightclass::{synthesize_8class, EightClass, EightClassConfig};
pub use spec::{sample_spec, RadarClass, WaveformSpec};
pub use synth::{chip_waveform, synthesize, synthesize_with_length};

use thiserror::Error;

use crate::signal::SignalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveformError {
    #[error("code sequence is empty")]
    EmptyCode,
    #[error("unsupported value {value} for parameter `{name}`")]
    UnsupportedParameter { name: &'static str, value: f64 },
    #[error("Zadoff-Chu root {r} is not coprime with length {m}")]
    NotCoprime { m: usize, r: usize },
    #[error("parameter `{0}` is required for this class but unset")]
    MissingParameter(&'static str),
    #[error(transparent)]
    Signal(#[from] SignalError),
}
