use std::path::PathBuf;

use crate::config::{join, ConfigError, KvDoc};
use crate::dataset::{DatasetError, DatasetKind, DatasetManifest, Split};
use crate::eval::DEFAULT_THRESHOLD;
use crate::lstm::{CellUpdate, InputDomain, TrainConfig};

pub const PRESET_SMOKE: &str = include_str!("../../presets/smoke.cfg");
pub const PRESET_FULL: &str = include_str!("../../presets/full.cfg");
pub const PRESET_EIGHTCLASS: &str = include_str!("../../presets/eightclass.cfg");

/// Built-in preset text by name (`smoke`, `full`, `eightclass`, with or
/// without a `preset-` prefix).
pub fn preset(name: &str) -> Option<&'static str> {
    match name.strip_prefix("preset-").unwrap_or(name) {
        "smoke" => Some(PRESET_SMOKE),
        "full" => Some(PRESET_FULL),
        "eightclass" => Some(PRESET_EIGHTCLASS),
        _ => None,
    }
}

const MANIFEST_KEYS: [&str; 9] = [
    "dataset_name",
    "class_names",
    "snr_grid_db",
    "train_per_cell",
    "val_per_cell",
    "test_per_cell",
    "master_seed",
    "sample_rate_hz",
    "signal_length",
];

const RUN_KEYS: [&str; 20] = [
    "dataset",
    "layers",
    "hidden",
    "input_domain",
    "cell_update",
    "epochs",
    "batch_size",
    "lr_min",
    "lr_max",
    "cycle_epochs",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "clip_norm",
    "seed",
    "train_snr_range",
    "threshold",
    "import_descriptor",
    "import_data",
    "import_split",
];

pub fn parse_cell_update(key: &str, v: &str) -> Result<CellUpdate, ConfigError> {
    match v.to_ascii_lowercase().replace('_', "-").as_str() {
        "standard" => Ok(CellUpdate::Standard),
        "swapped" => Ok(CellUpdate::Swapped),
        _ => Err(ConfigError::invalid(key, v, "expected standard or swapped")),
    }
}

pub fn cell_update_name(u: CellUpdate) -> &'static str {
    match u {
        CellUpdate::Standard => "standard",
        CellUpdate::Swapped => "swapped",
    }
}

/// `lo:hi` in dB, inclusive.
pub fn parse_snr_range(key: &str, v: &str) -> Result<(i16, i16), ConfigError> {
    let bad = || ConfigError::invalid(key, v, "expected `lo:hi` in dB");
    let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
    let lo: i16 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i16 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(ConfigError::invalid(key, v, "lower bound above upper bound"));
    }
    Ok((lo, hi))
}

fn parse_split(key: &str, v: &str) -> Result<Split, ConfigError> {
    Split::ALL
        .into_iter()
        .find(|s| s.name() == v)
        .ok_or_else(|| ConfigError::invalid(key, v, "expected train, val or test"))
}

/// Resolved settings of one CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: DatasetManifest,
    pub layers: usize,
    pub hidden: usize,
    pub input_domain: InputDomain,
    pub cell_update: CellUpdate,
    pub train: TrainConfig,
    /// Restrict training and validation examples to this SNR span.
    pub train_snr_range: Option<(i16, i16)>,
    pub threshold: f64,
    pub import_descriptor: Option<PathBuf>,
    pub import_data: Option<PathBuf>,
    pub import_split: Split,
}

impl RunConfig {
    pub fn from_doc(doc: &KvDoc) -> Result<Self, ConfigError> {
        let allowed: Vec<&str> = MANIFEST_KEYS.iter().chain(RUN_KEYS.iter()).copied().collect();
        doc.check_keys(&allowed)?;

        let kind: DatasetKind = doc.parse_value("dataset")?.unwrap_or(DatasetKind::DeepRadar2022);
        let master_seed = doc.parse_value("master_seed")?.unwrap_or(0);
        let mut manifest = match kind {
            DatasetKind::EightClass => DatasetManifest::eight_class(master_seed),
            DatasetKind::DeepRadar2022 => DatasetManifest::deepradar2022(master_seed),
            DatasetKind::Imported => DatasetManifest {
                dataset_name: "imported".into(),
                kind,
                ..DatasetManifest::deepradar2022(master_seed)
            },
        };
        if let Some(v) = doc.get("dataset_name") {
            manifest.dataset_name = v.to_string();
        }
        if let Some(v) = doc.parse_list("class_names")? {
            manifest.class_names = v;
        }
        if let Some(v) = doc.parse_list("snr_grid_db")? {
            manifest.snr_grid_db = v;
        }
        let c = &mut manifest.per_cell_counts;
        c.train = doc.parse_value("train_per_cell")?.unwrap_or(c.train);
        c.val = doc.parse_value("val_per_cell")?.unwrap_or(c.val);
        c.test = doc.parse_value("test_per_cell")?.unwrap_or(c.test);
        manifest.sample_rate_hz = doc.parse_value("sample_rate_hz")?.unwrap_or(manifest.sample_rate_hz);
        manifest.signal_length = doc.parse_value("signal_length")?.unwrap_or(manifest.signal_length);
        manifest.validate().map_err(|e| match e {
            DatasetError::Config(c) => c,
            other => ConfigError::invalid("dataset", kind, other),
        })?;

        let defaults = TrainConfig::default();
        let train = TrainConfig {
            batch_size: doc.parse_value("batch_size")?.unwrap_or(defaults.batch_size),
            epochs: doc.parse_value("epochs")?.unwrap_or(defaults.epochs),
            lr_min: doc.parse_value("lr_min")?.unwrap_or(defaults.lr_min),
            lr_max: doc.parse_value("lr_max")?.unwrap_or(defaults.lr_max),
            cycle_epochs: doc.parse_value("cycle_epochs")?.unwrap_or(defaults.cycle_epochs),
            adam_beta1: doc.parse_value("adam_beta1")?.unwrap_or(defaults.adam_beta1),
            adam_beta2: doc.parse_value("adam_beta2")?.unwrap_or(defaults.adam_beta2),
            adam_eps: doc.parse_value("adam_eps")?.unwrap_or(defaults.adam_eps),
            seed: doc.parse_value("seed")?.unwrap_or(defaults.seed),
            clip_norm: match doc.get("clip_norm") {
                None | Some("none") => None,
                Some(_) => doc.parse_value("clip_norm")?,
            },
        };
        train.validate().map_err(|e| ConfigError::invalid("training", "", e))?;

        let layers: usize = doc.parse_value("layers")?.unwrap_or(3);
        if layers == 0 {
            return Err(ConfigError::invalid("layers", layers, "must be at least 1"));
        }
        let hidden: usize = doc.parse_value("hidden")?.unwrap_or(128);
        if hidden == 0 {
            return Err(ConfigError::invalid("hidden", hidden, "must be positive"));
        }
        let threshold: f64 = doc.parse_value("threshold")?.unwrap_or(DEFAULT_THRESHOLD);
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ConfigError::invalid("threshold", threshold, "must lie in [0, 1]"));
        }
        Ok(Self {
            manifest,
            layers,
            hidden,
            input_domain: doc.parse_value("input_domain")?.unwrap_or_default(),
            cell_update: doc
                .get("cell_update")
                .map(|v| parse_cell_update("cell_update", v))
                .transpose()?
                .unwrap_or_default(),
            train,
            train_snr_range: doc
                .get("train_snr_range")
                .map(|v| parse_snr_range("train_snr_range", v))
                .transpose()?,
            threshold,
            import_descriptor: doc.get("import_descriptor").map(PathBuf::from),
            import_data: doc.get("import_data").map(PathBuf::from),
            import_split: doc
                .get("import_split")
                .map(|v| parse_split("import_split", v))
                .transpose()?
                .unwrap_or(Split::Test),
        })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        vec![self.hidden; self.layers]
    }

    /// Everything that influences a run, in config-file form.
    pub fn to_doc(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        let m = &self.manifest;
        doc.set("dataset", m.kind);
        doc.set("dataset_name", &m.dataset_name);
        doc.set("class_names", join(&m.class_names));
        doc.set("snr_grid_db", join(&m.snr_grid_db));
        doc.set("train_per_cell", m.per_cell_counts.train);
        doc.set("val_per_cell", m.per_cell_counts.val);
        doc.set("test_per_cell", m.per_cell_counts.test);
        doc.set("master_seed", m.master_seed);
        doc.set("layers", self.layers);
        doc.set("hidden", self.hidden);
        doc.set("input_domain", self.input_domain);
        doc.set("cell_update", cell_update_name(self.cell_update));
        let t = &self.train;
        doc.set("epochs", t.epochs);
        doc.set("batch_size", t.batch_size);
        doc.set("lr_min", t.lr_min);
        doc.set("lr_max", t.lr_max);
        doc.set("cycle_epochs", t.cycle_epochs);
        doc.set("adam_beta1", t.adam_beta1);
        doc.set("adam_beta2", t.adam_beta2);
        doc.set("adam_eps", t.adam_eps);
        doc.set("clip_norm", t.clip_norm.map_or_else(|| "none".to_string(), |c| c.to_string()));
        doc.set("seed", t.seed);
        if let Some((lo, hi)) = self.train_snr_range {
            doc.set("train_snr_range", format!("{lo}:{hi}"));
        }
        doc.set("threshold", self.threshold);
        doc
    }
}
