use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::format::SplitWriter;
use super::manifest::{DatasetKind, DatasetManifest};
use super::{DatasetError, LabeledExample};
use crate::rng::{self, Stream};
use crate::signal::{apply_snr, NoiseSpec};
use crate::waveforms::{
    sample_spec, synthesize_8class, synthesize_with_length, EightClass, EightClassConfig, RadarClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    /// Seed-domain id; each split draws from its own domain.
    pub fn id(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Val => 1,
            Split::Test => 2,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.bin", self.name())
    }
}

/// Resolved class generators for a manifest.
#[derive(Debug, Clone)]
pub enum Generator {
    Radar(Vec<RadarClass>),
    Eight(Vec<EightClass>, EightClassConfig),
}

impl Generator {
    pub fn from_manifest(m: &DatasetManifest) -> Result<Self, DatasetError> {
        m.validate()?;
        let parse_err = |e: String| DatasetError::InvalidManifest(e);
        match m.kind {
            DatasetKind::DeepRadar2022 => Ok(Self::Radar(
                m.class_names
                    .iter()
                    .map(|n| n.parse().map_err(parse_err))
                    .collect::<Result<_, _>>()?,
            )),
            DatasetKind::EightClass => Ok(Self::Eight(
                m.class_names
                    .iter()
                    .map(|n| n.parse().map_err(parse_err))
                    .collect::<Result<_, _>>()?,
                EightClassConfig::default(),
            )),
            DatasetKind::Imported => Err(DatasetError::InvalidManifest(
                "imported datasets cannot be generated".into(),
            )),
        }
    }
}

/// Example `index` of cell (`class_index`, `snr_db`) in `split`. The result
/// depends only on these coordinates and the master seed.
pub fn generate_example(
    generator: &Generator,
    manifest: &DatasetManifest,
    class_index: usize,
    snr_db: i16,
    split: Split,
    index: usize,
) -> Result<LabeledExample, DatasetError> {
    let seed = rng::derive_seed(
        manifest.master_seed,
        &[class_index as u64, snr_db as i64 as u64, split.id(), index as u64],
    );
    let mut wrng = rng::stream_rng(seed, Stream::Waveform);
    let clean = match generator {
        Generator::Radar(classes) => {
            let spec = sample_spec(classes[class_index], &mut wrng);
            synthesize_with_length(&spec, manifest.signal_length, &mut wrng)?
        }
        Generator::Eight(classes, cfg) => {
            if manifest.signal_length != crate::signal::SIGNAL_LENGTH {
                return Err(DatasetError::InvalidManifest(
                    "the 8-class generator only produces 1024-sample signals".into(),
                ));
            }
            synthesize_8class(classes[class_index], cfg, &mut wrng)?
        }
    };
    let mut nrng = rng::stream_rng(seed, Stream::Noise);
    let noisy = apply_snr(&clean, &NoiseSpec::unit_sigma(snr_db as f64), &mut nrng)?;
    Ok(LabeledExample {
        class_index: class_index as u16,
        snr_db,
        iq: noisy.iter().flat_map(|s| [s.re as f32, s.im as f32]).collect(),
    })
}

const CHUNK: usize = 2048;

/// Generate one split, in (class, SNR, index) order, handing each example
/// to `sink`. Work is parallel within chunks; output order is fixed.
pub fn generate_split<F>(manifest: &DatasetManifest, split: Split, mut sink: F) -> Result<usize, DatasetError>
where
    F: FnMut(LabeledExample) -> Result<(), DatasetError>,
{
    let generator = Generator::from_manifest(manifest)?;
    let per_cell = match split {
        Split::Train => manifest.per_cell_counts.train,
        Split::Val => manifest.per_cell_counts.val,
        Split::Test => manifest.per_cell_counts.test,
    };
    let n_snr = manifest.snr_grid_db.len();
    let total = manifest.n_cells() * per_cell;
    let coords = |k: usize| {
        let i = k % per_cell;
        let cell = k / per_cell;
        (cell / n_snr, manifest.snr_grid_db[cell % n_snr], i)
    };
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let batch: Vec<LabeledExample> = (start..end)
            .into_par_iter()
            .map(|k| {
                let (c, snr, i) = coords(k);
                generate_example(&generator, manifest, c, snr, split, i)
            })
            .collect::<Result<_, _>>()?;
        for ex in batch {
            sink(ex)?;
        }
        start = end;
    }
    Ok(total)
}

/// Write `train.bin`, `val.bin`, `test.bin` and `manifest.txt` into
/// `out_dir`. Returns the split file paths.
pub fn build_dataset(manifest: &DatasetManifest, out_dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    manifest.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for split in Split::ALL {
        let path = out_dir.join(split.file_name());
        let mut writer = SplitWriter::create(
            &path,
            manifest.n_classes() as u16,
            manifest.signal_length as u32,
        )?;
        let n = generate_split(manifest, split, |ex| writer.push(&ex))?;
        if n == 0 {
            // Empty splits are legal in a manifest but not as files.
            drop(writer);
            std::fs::remove_file(&path)?;
            continue;
        }
        writer.finish()?;
        log::info!("wrote {n} {} records to {}", split.name(), path.display());
        paths.push(path);
    }
    manifest.save(&out_dir.join("manifest.txt"))?;
    Ok(paths)
}
