//! Conversion of raw external IQ recordings into the native split format.
//!
//! An external dataset is a raw file of fixed-length float32 records plus a
//! text label file, described by a key/value layout descriptor:
//!
//! ```text
//! signal_length = 1024          # complex samples per record
//! ordering = interleaved        # interleaved (IQIQ...) or planar (I...I Q...Q)
//! endianness = little           # little or big
//! n_classes = 24
//! labels = labels.txt           # one `class_index[,snr_db]` line per record
//! ```
//!
//! A relative `labels` path is resolved against the descriptor's directory.

use std::fs;
use std::path::{Path, PathBuf};

use super::format::SplitWriter;
use super::{DatasetError, LabeledExample};
use crate::config::{ConfigError, KvDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOrdering {
    Interleaved,
    Planar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalLayout {
    pub signal_length: usize,
    pub ordering: SampleOrdering,
    pub big_endian: bool,
    pub n_classes: u16,
    pub labels: PathBuf,
}

impl ExternalLayout {
    pub fn from_kv(doc: &KvDoc, base_dir: &Path) -> Result<Self, DatasetError> {
        doc.check_keys(&["signal_length", "ordering", "endianness", "n_classes", "labels"])?;
        let ordering = match doc.get("ordering").unwrap_or("interleaved") {
            "interleaved" => SampleOrdering::Interleaved,
            "planar" => SampleOrdering::Planar,
            other => return Err(ConfigError::invalid("ordering", other, "expected interleaved or planar").into()),
        };
        let big_endian = match doc.get("endianness").unwrap_or("little") {
            "little" => false,
            "big" => true,
            other => return Err(ConfigError::invalid("endianness", other, "expected little or big").into()),
        };
        let labels = PathBuf::from(doc.require("labels")?);
        Ok(Self {
            signal_length: doc.parse_required("signal_length")?,
            ordering,
            big_endian,
            n_classes: doc.parse_required("n_classes")?,
            labels: if labels.is_relative() { base_dir.join(labels) } else { labels },
        })
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&KvDoc::load(path)?, base)
    }
}

fn parse_labels(text: &str) -> Result<Vec<(u16, i16)>, DatasetError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, line)| {
            let mut parts = line.split(',').map(str::trim);
            let bad = || DatasetError::External(format!("label line {}: `{line}`", i + 1));
            let class = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let snr = match parts.next() {
                Some(v) => v.parse().map_err(|_| bad())?,
                None => 0,
            };
            Ok((class, snr))
        })
        .collect()
}

/// Convert `data_path` (raw records per `layout`) into a native split at
/// `out_path`. Records must already have `expected_length` samples.
pub fn import_external(
    data_path: &Path,
    layout: &ExternalLayout,
    expected_length: usize,
    out_path: &Path,
) -> Result<usize, DatasetError> {
    if layout.signal_length != expected_length {
        return Err(DatasetError::LengthMismatch {
            expected: expected_length,
            found: layout.signal_length,
        });
    }
    let raw = fs::read(data_path)?;
    if raw.is_empty() {
        return Err(DatasetError::External("input data file is empty".into()));
    }
    let rec_bytes = layout.signal_length * 8;
    if raw.len() % rec_bytes != 0 {
        return Err(DatasetError::External(format!(
            "data size {} is not a multiple of the {rec_bytes}-byte record",
            raw.len()
        )));
    }
    let labels = parse_labels(&fs::read_to_string(&layout.labels)?)?;
    let n = raw.len() / rec_bytes;
    if labels.len() != n {
        return Err(DatasetError::External(format!(
            "{n} records but {} labels",
            labels.len()
        )));
    }
    let mut writer = SplitWriter::create(out_path, layout.n_classes, layout.signal_length as u32)?;
    let len = layout.signal_length;
    for (rec, &(class_index, snr_db)) in raw.chunks_exact(rec_bytes).zip(&labels) {
        let vals: Vec<f32> = rec
            .chunks_exact(4)
            .map(|b| {
                let b: [u8; 4] = b.try_into().expect("4 bytes");
                if layout.big_endian {
                    f32::from_be_bytes(b)
                } else {
                    f32::from_le_bytes(b)
                }
            })
            .collect();
        let iq = match layout.ordering {
            SampleOrdering::Interleaved => vals,
            SampleOrdering::Planar => (0..len).flat_map(|i| [vals[i], vals[len + i]]).collect(),
        };
        writer.push(&LabeledExample {
            class_index,
            snr_db,
            iq,
        })?;
    }
    writer.finish()?;
    Ok(n)
}
