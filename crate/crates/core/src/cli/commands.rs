use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{cell_update_name, RunConfig};
use super::CliError;
use crate::dataset::{
    build_dataset, import_external, read_split, read_split_header, DatasetKind, DatasetManifest, ExternalLayout,
    Split, SplitCounts, SplitData,
};
use crate::eval::{build_report, emit_comparison, emit_report, predict_split, EvalReport};
use crate::lstm::{
    history_csv, init_model, load_checkpoint, prepare_split, save_checkpoint, train, EpochRecord, Model, ParamCounts,
};

const MANIFEST_FILE: &str = "manifest.txt";

/// Write the dataset described by `run` into `out`.
pub fn generate(run: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if run.manifest.kind != DatasetKind::Imported {
        return Ok(build_dataset(&run.manifest, out)?);
    }
    let missing = |k: &str| CliError::Config(format!("missing required key `{k}` for an imported dataset"));
    let descriptor = run.import_descriptor.as_ref().ok_or_else(|| missing("import_descriptor"))?;
    let data = run.import_data.as_ref().ok_or_else(|| missing("import_data"))?;
    let layout = ExternalLayout::load(descriptor)?;
    fs::create_dir_all(out)?;
    let path = out.join(run.import_split.file_name());
    let n = import_external(data, &layout, run.manifest.signal_length, &path)?;
    log::info!("imported {n} records into {}", path.display());

    let mut manifest = run.manifest.clone();
    if manifest.class_names.len() != layout.n_classes as usize {
        manifest.class_names = (0..layout.n_classes).map(|i| format!("class{i}")).collect();
    }
    manifest.snr_grid_db = read_split(&path)?.snr_values();
    manifest.per_cell_counts = SplitCounts {
        train: 0,
        val: 0,
        test: 0,
    };
    manifest.validate()?;
    manifest.save(&out.join(MANIFEST_FILE))?;
    Ok(vec![path])
}

fn load_split(data: &Path, split: Split) -> Result<SplitData, CliError> {
    Ok(read_split(&data.join(split.file_name()))?)
}

/// A missing or unreadable manifest is a problem with the data directory,
/// not with the run configuration.
fn load_manifest(data: &Path) -> Result<DatasetManifest, CliError> {
    DatasetManifest::load(&data.join(MANIFEST_FILE)).map_err(|e| CliError::Data(e.to_string()))
}

fn restrict(split: SplitData, range: Option<(i16, i16)>) -> Result<SplitData, CliError> {
    let Some((lo, hi)) = range else {
        return Ok(split);
    };
    let kept = split.filter_snr(lo, hi);
    if kept.is_empty() {
        return Err(CliError::Config(format!(
            "invalid value `{lo}:{hi}` for key `train_snr_range`: no examples in range"
        )));
    }
    Ok(kept)
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    /// Best-validation parameters.
    pub checkpoint: PathBuf,
    /// Parameters after the last epoch.
    pub last_checkpoint: PathBuf,
    pub history_path: PathBuf,
    pub history: Vec<EpochRecord>,
}

/// Train on `data/train.bin`, validate on `data/val.bin`, and write
/// `model.drlm`, `last.drlm`, `history.csv` and `run.cfg` into `out`.
pub fn train_run(run: &RunConfig, data: &Path, out: &Path) -> Result<TrainSummary, CliError> {
    let manifest = load_manifest(data)?;
    let train_split = restrict(load_split(data, Split::Train)?, run.train_snr_range)?;
    let val_split = restrict(load_split(data, Split::Val)?, run.train_snr_range)?;
    let n_classes = manifest.n_classes();
    for s in [&train_split, &val_split] {
        if s.n_classes != n_classes {
            return Err(CliError::Data(format!(
                "split has {} classes, manifest lists {n_classes}",
                s.n_classes
            )));
        }
    }
    let train_set = prepare_split::<f32>(&train_split, run.input_domain)?;
    let val_set = prepare_split::<f32>(&val_split, run.input_domain)?;
    drop((train_split, val_split));

    let mut model = init_model::<f32>(n_classes, 2, &run.layer_sizes(), run.train.seed)?;
    model.cell_update = run.cell_update;
    model.input_domain = run.input_domain;
    log::info!(
        "training {} layer(s) of {} cells on {} examples ({} validation), {} parameters",
        run.layers,
        run.hidden,
        train_set.len(),
        val_set.len(),
        model.param_counts().total()
    );
    let outcome = train(model, &train_set, &val_set, &run.train, |_| {})?;

    fs::create_dir_all(out)?;
    let checkpoint = out.join("model.drlm");
    let last_checkpoint = out.join("last.drlm");
    let history_path = out.join("history.csv");
    save_checkpoint(&outcome.best_model, &checkpoint)?;
    save_checkpoint(&outcome.model, &last_checkpoint)?;
    fs::write(&history_path, history_csv(&outcome.history))?;
    fs::write(out.join("run.cfg"), run.to_doc().to_string())?;
    Ok(TrainSummary {
        best_epoch: outcome.best_epoch,
        best_val_accuracy: outcome.history[outcome.best_epoch - 1].val_accuracy,
        checkpoint,
        last_checkpoint,
        history_path,
        history: outcome.history,
    })
}

fn class_names(data: &Path, n_classes: usize) -> Vec<String> {
    match load_manifest(data) {
        Ok(m) if m.n_classes() == n_classes => m.class_names,
        _ => (0..n_classes).map(|i| format!("class{i}")).collect(),
    }
}

/// Evaluate a checkpoint on one split and write the report into `out`.
pub fn evaluate(model_path: &Path, data: &Path, split: Split, threshold: f64, out: &Path) -> Result<EvalReport, CliError> {
    let model = load_checkpoint(model_path)?;
    let split_data = load_split(data, split)?;
    let preds = predict_split(&model, &split_data)?;
    let names = class_names(data, model.n_classes);
    let grid = match load_manifest(data) {
        Ok(m) => m.snr_grid_db,
        Err(_) => preds.snr_values(),
    };
    let report = build_report(&preds, &names, &grid, threshold)?;
    emit_report(&report, out)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct AblationRun {
    pub layers: usize,
    pub summary: TrainSummary,
    pub test_accuracy: f64,
    pub report: EvalReport,
}

/// Train and evaluate one model per entry of `layer_set`, each under
/// `out/layers_<k>`, then write `out/ablation.csv` and `out/ablation.svg`.
pub fn ablate_layers(run: &RunConfig, layer_set: &[usize], data: &Path, out: &Path) -> Result<Vec<AblationRun>, CliError> {
    if layer_set.is_empty() || layer_set.contains(&0) {
        return Err(CliError::Usage("layer set must list positive layer counts".into()));
    }
    let eval_split = if data.join(Split::Test.file_name()).exists() {
        Split::Test
    } else {
        Split::Val
    };
    let mut runs = Vec::new();
    for &k in layer_set {
        let cfg = RunConfig {
            layers: k,
            ..run.clone()
        };
        let dir = out.join(format!("layers_{k}"));
        let summary = train_run(&cfg, data, &dir)?;
        let report = evaluate(&summary.checkpoint, data, eval_split, run.threshold, &dir.join("report"))?;
        let test_accuracy = report.matrices.iter().map(|m| m.trace()).sum::<u64>() as f64
            / report.matrices.iter().map(|m| m.total()).sum::<u64>().max(1) as f64;
        runs.push(AblationRun {
            layers: k,
            summary,
            test_accuracy,
            report,
        });
    }
    let curves: Vec<(String, _)> = runs
        .iter()
        .map(|r| (format!("{} layer(s)", r.layers), r.report.overall.clone()))
        .collect();
    emit_comparison(&curves, out, "ablation")?;
    Ok(runs)
}

fn describe_model(out: &mut String, model: &Model<f32>) {
    let counts = model.param_counts();
    let sizes: Vec<String> = model.layer_sizes().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "layers: {} ({})", model.layers.len(), sizes.join(", "));
    let _ = writeln!(out, "input_dim: {}", model.input_dim());
    let _ = writeln!(out, "n_classes: {}", model.n_classes);
    let _ = writeln!(out, "cell_update: {}", cell_update_name(model.cell_update));
    let _ = writeln!(out, "input_domain: {}", model.input_domain);
    write_counts(out, counts);
}

fn write_counts(out: &mut String, counts: ParamCounts) {
    let _ = writeln!(out, "lstm_parameters: {}", counts.lstm);
    let _ = writeln!(out, "head_parameters: {}", counts.head);
    let _ = writeln!(out, "total_parameters: {}", counts.total());
}

pub fn inspect_model(path: &Path) -> Result<String, CliError> {
    let model = load_checkpoint(path)?;
    let mut out = format!("model: {}\n", path.display());
    describe_model(&mut out, &model);
    Ok(out)
}

pub fn inspect_data(dir: &Path) -> Result<String, CliError> {
    let mut out = format!("dataset: {}\n", dir.display());
    if let Ok(m) = load_manifest(dir) {
        let t = m.totals();
        let _ = writeln!(out, "name: {} ({})", m.dataset_name, m.kind);
        let _ = writeln!(out, "classes: {} [{}]", m.n_classes(), m.class_names.join(", "));
        let grid: Vec<String> = m.snr_grid_db.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "snr_grid_db: {}", grid.join(", "));
        let c = m.per_cell_counts;
        let _ = writeln!(out, "per_cell: train {} val {} test {}", c.train, c.val, c.test);
        let _ = writeln!(
            out,
            "totals: train {} val {} test {} (all {})",
            t.train,
            t.val,
            t.test,
            t.total()
        );
        let _ = writeln!(out, "master_seed: {}", m.master_seed);
    }
    for split in Split::ALL {
        let path = dir.join(split.file_name());
        if path.exists() {
            let h = read_split_header(&path)?;
            let _ = writeln!(
                out,
                "{}: {} records, {} classes, length {}",
                split.file_name(),
                h.record_count,
                h.n_classes,
                h.signal_length
            );
        }
    }
    Ok(out)
}

/// Dataset totals and parameter counts implied by a configuration.
pub fn inspect_config(run: &RunConfig) -> String {
    let m = &run.manifest;
    let t = m.totals();
    let mut out = String::new();
    let _ = writeln!(out, "dataset: {} ({}), {} classes", m.dataset_name, m.kind, m.n_classes());
    let _ = writeln!(
        out,
        "totals: train {} val {} test {} (all {})",
        t.train,
        t.val,
        t.test,
        t.total()
    );
    let _ = writeln!(out, "layers: {} x {}", run.layers, run.hidden);
    write_counts(&mut out, ParamCounts::for_shape(2, &run.layer_sizes(), m.n_classes()));
    out
}
