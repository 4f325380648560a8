//! Balanced (class, SNR) datasets, the binary split format, and import of
//! external IQ recordings.

mod build;
mod format;
mod import;
mod manifest;

pub use build::{build_dataset, generate_example, generate_split, Generator, Split};
pub use format::{
    read_split, read_split_header, write_split, SplitData, SplitHeader, SplitReader, SplitWriter,
    FORMAT_VERSION, HEADER_BYTES, MAGIC,
};
pub use import::{import_external, ExternalLayout, SampleOrdering};
pub use manifest::{DatasetKind, DatasetManifest, SplitCounts};

use thiserror::Error;

use crate::config::ConfigError;
use crate::signal::{IqSignal, SignalError, SAMPLE_RATE_HZ};
use crate::waveforms::WaveformError;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad magic: expected \"DRAD\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("format version mismatch: file has {found}, reader supports {supported}")]
    VersionMismatch { found: u16, supported: u16 },
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("class index {index} out of range for {n_classes} classes (record {record})")]
    ClassOutOfRange {
        index: u16,
        n_classes: u16,
        record: u64,
    },
    #[error("no examples to write")]
    Empty,
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("record length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("external data: {0}")]
    External(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One labeled example, stored as interleaved single-precision I/Q.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub class_index: u16,
    pub snr_db: i16,
    pub iq: Vec<f32>,
}

impl LabeledExample {
    pub fn signal_length(&self) -> usize {
        self.iq.len() / 2
    }

    pub fn signal(&self) -> Result<IqSignal, SignalError> {
        IqSignal::from_interleaved(&self.iq, SAMPLE_RATE_HZ)
    }
}
