//! Binary split files.
//!
//! ```text
//! header (32 bytes, little endian)
//!   0  magic           "DRAD"
//!   4  format_version  u16
//!   6  n_classes       u16
//!   8  signal_length   u32
//!  12  record_count    u64
//!  20  reserved        12 zero bytes
//! record (4 + 8 * signal_length bytes)
//!   0  class_index     u16
//!   2  snr_db          i16
//!   4  samples         signal_length x (I f32, Q f32)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::{DatasetError, LabeledExample};

pub const MAGIC: [u8; 4] = *b"DRAD";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitHeader {
    pub format_version: u16,
    pub n_classes: u16,
    pub signal_length: u32,
    pub record_count: u64,
}

impl SplitHeader {
    pub fn record_bytes(&self) -> usize {
        4 + 8 * self.signal_length as usize
    }

    pub fn file_bytes(&self) -> u64 {
        HEADER_BYTES as u64 + self.record_count * self.record_bytes() as u64
    }

    fn encode(&self) -> [u8; HEADER_BYTES] {
        let mut b = [0u8; HEADER_BYTES];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.format_version.to_le_bytes());
        b[6..8].copy_from_slice(&self.n_classes.to_le_bytes());
        b[8..12].copy_from_slice(&self.signal_length.to_le_bytes());
        b[12..20].copy_from_slice(&self.record_count.to_le_bytes());
        b
    }

    fn decode(b: &[u8; HEADER_BYTES]) -> Result<Self, DatasetError> {
        let magic: [u8; 4] = b[0..4].try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(DatasetError::BadMagic(magic));
        }
        let format_version = u16::from_le_bytes([b[4], b[5]]);
        if format_version != FORMAT_VERSION {
            return Err(DatasetError::VersionMismatch {
                found: format_version,
                supported: FORMAT_VERSION,
            });
        }
        Ok(Self {
            format_version,
            n_classes: u16::from_le_bytes([b[6], b[7]]),
            signal_length: u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")),
            record_count: u64::from_le_bytes(b[12..20].try_into().expect("8 bytes")),
        })
    }
}

/// A fully loaded split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub n_classes: usize,
    pub signal_length: usize,
    pub examples: Vec<LabeledExample>,
}

impl SplitData {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Sorted distinct SNR values present.
    pub fn snr_values(&self) -> Vec<i16> {
        let mut v: Vec<i16> = self.examples.iter().map(|e| e.snr_db).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Keep only examples whose SNR is in `[lo, hi]`.
    pub fn filter_snr(&self, lo: i16, hi: i16) -> SplitData {
        SplitData {
            n_classes: self.n_classes,
            signal_length: self.signal_length,
            examples: self
                .examples
                .iter()
                .filter(|e| (lo..=hi).contains(&e.snr_db))
                .cloned()
                .collect(),
        }
    }
}

/// Streaming writer; the record count is patched into the header by
/// [`SplitWriter::finish`].
pub struct SplitWriter {
    out: BufWriter<File>,
    header: SplitHeader,
}

impl SplitWriter {
    pub fn create(path: &Path, n_classes: u16, signal_length: u32) -> Result<Self, DatasetError> {
        let header = SplitHeader {
            format_version: FORMAT_VERSION,
            n_classes,
            signal_length,
            record_count: 0,
        };
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&header.encode())?;
        Ok(Self { out, header })
    }

    pub fn push(&mut self, ex: &LabeledExample) -> Result<(), DatasetError> {
        if ex.class_index >= self.header.n_classes {
            return Err(DatasetError::ClassOutOfRange {
                index: ex.class_index,
                n_classes: self.header.n_classes,
                record: self.header.record_count,
            });
        }
        let len = self.header.signal_length as usize;
        if ex.iq.len() != 2 * len {
            return Err(DatasetError::LengthMismatch {
                expected: len,
                found: ex.iq.len() / 2,
            });
        }
        let mut rec = Vec::with_capacity(self.header.record_bytes());
        rec.extend_from_slice(&ex.class_index.to_le_bytes());
        rec.extend_from_slice(&ex.snr_db.to_le_bytes());
        for v in &ex.iq {
            rec.extend_from_slice(&v.to_le_bytes());
        }
        self.out.write_all(&rec)?;
        self.header.record_count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<SplitHeader, DatasetError> {
        if self.header.record_count == 0 {
            return Err(DatasetError::Empty);
        }
        self.out.seek(SeekFrom::Start(0))?;
        self.out.write_all(&self.header.encode())?;
        self.out.flush()?;
        Ok(self.header)
    }
}

pub fn write_split(
    examples: &[LabeledExample],
    n_classes: u16,
    path: &Path,
) -> Result<SplitHeader, DatasetError> {
    let first = examples.first().ok_or(DatasetError::Empty)?;
    let mut w = SplitWriter::create(path, n_classes, first.signal_length() as u32)?;
    for ex in examples {
        w.push(ex)?;
    }
    w.finish()
}

/// Streaming reader over the records of a split file.
pub struct SplitReader {
    input: BufReader<File>,
    header: SplitHeader,
    next: u64,
    buf: Vec<u8>,
}

impl SplitReader {
    pub fn open(path: &Path) -> Result<Self, DatasetError> {
        let file = File::open(path)?;
        let actual = file.metadata()?.len();
        let mut input = BufReader::new(file);
        let mut hb = [0u8; HEADER_BYTES];
        input
            .read_exact(&mut hb)
            .map_err(|_| DatasetError::Truncated(format!("header shorter than {HEADER_BYTES} bytes")))?;
        let header = SplitHeader::decode(&hb)?;
        if actual < header.file_bytes() {
            return Err(DatasetError::Truncated(format!(
                "{} records need {} bytes, file has {actual}",
                header.record_count,
                header.file_bytes()
            )));
        }
        let buf = vec![0u8; header.record_bytes()];
        Ok(Self {
            input,
            header,
            next: 0,
            buf,
        })
    }

    pub fn header(&self) -> &SplitHeader {
        &self.header
    }

    fn read_record(&mut self) -> Result<LabeledExample, DatasetError> {
        self.input.read_exact(&mut self.buf).map_err(|_| {
            DatasetError::Truncated(format!("record {} is incomplete", self.next))
        })?;
        let class_index = u16::from_le_bytes([self.buf[0], self.buf[1]]);
        if class_index >= self.header.n_classes {
            return Err(DatasetError::ClassOutOfRange {
                index: class_index,
                n_classes: self.header.n_classes,
                record: self.next,
            });
        }
        let snr_db = i16::from_le_bytes([self.buf[2], self.buf[3]]);
        let iq = self.buf[4..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        self.next += 1;
        Ok(LabeledExample {
            class_index,
            snr_db,
            iq,
        })
    }
}

impl Iterator for SplitReader {
    type Item = Result<LabeledExample, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        (self.next < self.header.record_count).then(|| self.read_record())
    }
}

pub fn read_split_header(path: &Path) -> Result<SplitHeader, DatasetError> {
    Ok(*SplitReader::open(path)?.header())
}

/// Load a whole split. Any malformed record fails the whole read.
pub fn read_split(path: &Path) -> Result<SplitData, DatasetError> {
    let reader = SplitReader::open(path)?;
    let header = *reader.header();
    let examples = reader.collect::<Result<Vec<_>, _>>()?;
    Ok(SplitData {
        n_classes: header.n_classes as usize,
        signal_length: header.signal_length as usize,
        examples,
    })
}
