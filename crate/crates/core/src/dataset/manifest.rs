use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::DatasetError;
use crate::config::{join, KvDoc};
use crate::signal::{SAMPLE_RATE_HZ, SIGNAL_LENGTH};
use crate::waveforms::{EightClass, RadarClass};

use super::format::FORMAT_VERSION;

/// Which generator produces the examples of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    DeepRadar2022,
    EightClass,
    Imported,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DeepRadar2022 => "deepradar2022",
            Self::EightClass => "eightclass",
            Self::Imported => "imported",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deepradar2022" => Ok(Self::DeepRadar2022),
            "eightclass" => Ok(Self::EightClass),
            "imported" => Ok(Self::Imported),
            _ => Err(format!("unknown dataset `{s}` (deepradar2022, eightclass, imported)")),
        }
    }
}

/// Examples per (class, SNR) cell in each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub kind: DatasetKind,
    pub class_names: Vec<String>,
    pub snr_grid_db: Vec<i16>,
    pub per_cell_counts: SplitCounts,
    pub master_seed: u64,
    pub sample_rate_hz: f64,
    pub signal_length: usize,
    pub format_version: u16,
}

pub(crate) fn snr_range(lo: i16, hi: i16, step: i16) -> Vec<i16> {
    (lo..=hi).step_by(step as usize).collect()
}

impl DatasetManifest {
    /// The full 23-class radar set: 17 SNRs from -12 to 20 dB, 1200/400/400
    /// examples per cell.
    pub fn deepradar2022(master_seed: u64) -> Self {
        Self {
            dataset_name: "deepradar2022".into(),
            kind: DatasetKind::DeepRadar2022,
            class_names: RadarClass::ALL.iter().map(|c| c.name().to_string()).collect(),
            snr_grid_db: snr_range(-12, 20, 2),
            per_cell_counts: SplitCounts {
                train: 1200,
                val: 400,
                test: 400,
            },
            master_seed,
            sample_rate_hz: SAMPLE_RATE_HZ,
            signal_length: SIGNAL_LENGTH,
            format_version: FORMAT_VERSION,
        }
    }

    /// The 8-class comparison set over -20..=20 dB.
    pub fn eight_class(master_seed: u64) -> Self {
        Self {
            dataset_name: "eightclass".into(),
            kind: DatasetKind::EightClass,
            class_names: EightClass::ALL.iter().map(|c| c.name().to_string()).collect(),
            snr_grid_db: snr_range(-20, 20, 2),
            ..Self::deepradar2022(master_seed)
        }
    }

    /// Desk-scale set: NM, LFM and Noise at 10 and 20 dB, 64 training
    /// examples per cell.
    pub fn smoke(master_seed: u64) -> Self {
        Self {
            dataset_name: "smoke".into(),
            class_names: vec!["NM".into(), "LFM".into(), "Noise".into()],
            snr_grid_db: vec![10, 20],
            per_cell_counts: SplitCounts {
                train: 64,
                val: 32,
                test: 32,
            },
            ..Self::deepradar2022(master_seed)
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_cells(&self) -> usize {
        self.class_names.len() * self.snr_grid_db.len()
    }

    pub fn split_total(&self, per_cell: usize) -> usize {
        self.n_cells() * per_cell
    }

    pub fn totals(&self) -> SplitCounts {
        let c = self.per_cell_counts;
        SplitCounts {
            train: self.split_total(c.train),
            val: self.split_total(c.val),
            test: self.split_total(c.test),
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidManifest(m));
        if self.class_names.is_empty() {
            return bad("class list is empty".into());
        }
        if self.class_names.len() > u16::MAX as usize {
            return bad("too many classes".into());
        }
        if self.snr_grid_db.is_empty() {
            return bad("SNR grid is empty".into());
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return bad("SNR grid must be strictly increasing".into());
        }
        if self.signal_length < 2 {
            return bad(format!("signal length {} too short", self.signal_length));
        }
        if self.format_version != FORMAT_VERSION {
            return bad(format!("unsupported format version {}", self.format_version));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &self.class_names {
            if !seen.insert(name.as_str()) {
                return bad(format!("duplicate class `{name}`"));
            }
            let known = match self.kind {
                DatasetKind::DeepRadar2022 => name.parse::<RadarClass>().is_ok(),
                DatasetKind::EightClass => name.parse::<EightClass>().is_ok(),
                DatasetKind::Imported => true,
            };
            if !known {
                return bad(format!("class `{name}` is not part of the {} generator", self.kind));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.set("dataset_name", &self.dataset_name);
        doc.set("generator", self.kind);
        doc.set("class_names", join(&self.class_names));
        doc.set("snr_grid_db", join(&self.snr_grid_db));
        doc.set("train_per_cell", self.per_cell_counts.train);
        doc.set("val_per_cell", self.per_cell_counts.val);
        doc.set("test_per_cell", self.per_cell_counts.test);
        doc.set("master_seed", self.master_seed);
        doc.set("sample_rate_hz", self.sample_rate_hz);
        doc.set("signal_length", self.signal_length);
        doc.set("format_version", self.format_version);
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self, DatasetError> {
        let m = Self {
            dataset_name: doc.require("dataset_name")?.to_string(),
            kind: doc.parse_required("generator")?,
            class_names: doc
                .parse_list::<String>("class_names")?
                .ok_or_else(|| crate::config::ConfigError::Missing("class_names".into()))?,
            snr_grid_db: doc
                .parse_list::<i16>("snr_grid_db")?
                .ok_or_else(|| crate::config::ConfigError::Missing("snr_grid_db".into()))?,
            per_cell_counts: SplitCounts {
                train: doc.parse_required("train_per_cell")?,
                val: doc.parse_required("val_per_cell")?,
                test: doc.parse_required("test_per_cell")?,
            },
            master_seed: doc.parse_required("master_seed")?,
            sample_rate_hz: doc.parse_value("sample_rate_hz")?.unwrap_or(SAMPLE_RATE_HZ),
            signal_length: doc.parse_value("signal_length")?.unwrap_or(SIGNAL_LENGTH),
            format_version: doc.parse_value("format_version")?.unwrap_or(FORMAT_VERSION),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        std::fs::write(path, self.to_kv().to_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Self::from_kv(&KvDoc::load(path)?)
    }
}
