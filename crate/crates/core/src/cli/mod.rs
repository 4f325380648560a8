//! Command-line front end: `gen`, `train`, `eval`, `ablate-layers` and
//! `inspect`, driven by key/value config files with flag overrides.

mod commands;
mod config;

pub use commands::{ablate_layers, evaluate, generate, inspect_data, inspect_model, train_run, AblationRun, TrainSummary};
pub use config::{preset, RunConfig, PRESET_EIGHTCLASS, PRESET_FULL, PRESET_SMOKE};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigError, KvDoc};
use crate::dataset::DatasetError;
use crate::eval::EvalError;
use crate::lstm::LstmError;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "DEEPRADAR_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Config(_) => 3,
            Self::Data(_) => 4,
            Self::Numeric(_) => 5,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Config(c) => c.into(),
            DatasetError::InvalidManifest(_) => Self::Config(e.to_string()),
            other => Self::Data(other.to_string()),
        }
    }
}

impl From<LstmError> for CliError {
    fn from(e: LstmError) -> Self {
        match e {
            LstmError::NonFinite(_) => Self::Numeric(e.to_string()),
            LstmError::InvalidConfig(_) => Self::Config(e.to_string()),
            other => Self::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            other => Self::Data(other.to_string()),
        }
    }
}

impl From<crate::signal::SignalError> for CliError {
    fn from(e: crate::signal::SignalError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "deepradar", version, about = "Radar waveform datasets and LSTM classifiers")]
pub struct Cli {
    /// Worker threads (default: $DEEPRADAR_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train/val/test split files and a manifest.
    Gen {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; writes model.drlm, last.drlm and history.csv.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Dataset directory produced by `gen`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint and write CSV/SVG reports.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Split to evaluate.
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train 1-, 2- and 3-layer variants and compare their curves.
    AblateLayers {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Layer counts to compare.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        layer_set: Vec<usize>,
    },
    /// Print a summary of a checkpoint, a dataset, or a configuration.
    Inspect {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

/// Config sources plus per-key overrides. Precedence: preset, then config
/// file, then flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Built-in preset: smoke, full or eightclass.
    #[arg(long)]
    pub preset: Option<String>,
    /// Key/value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed: the dataset master seed for `gen`, the training seed otherwise.
    #[arg(long)]
    pub seed: Option<u64>,
    /// deepradar2022, eightclass or imported.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// time or autocorrelation.
    #[arg(long)]
    pub input_domain: Option<String>,
    /// standard or swapped.
    #[arg(long)]
    pub cell_update: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr_min: Option<f64>,
    #[arg(long)]
    pub lr_max: Option<f64>,
    #[arg(long)]
    pub cycle_epochs: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<String>,
    /// `lo:hi` in dB; restricts training and validation examples.
    #[arg(long, allow_hyphen_values = true)]
    pub train_snr_range: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Layout descriptor for `--dataset imported`.
    #[arg(long)]
    pub import_descriptor: Option<PathBuf>,
    /// Raw float32 records for `--dataset imported`.
    #[arg(long)]
    pub import_data: Option<PathBuf>,
    /// Split the imported records become (default test).
    #[arg(long)]
    pub import_split: Option<String>,
}

impl ConfigArgs {
    /// Merge preset, config file and flags into one document.
    pub fn resolve(&self, seed_key: &str) -> Result<KvDoc, CliError> {
        let mut doc = KvDoc::new();
        if let Some(name) = &self.preset {
            let text = preset(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            doc.merge(&KvDoc::parse(text)?);
        }
        if let Some(path) = &self.config {
            doc.merge(&KvDoc::load(path)?);
        }
        let mut set = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                doc.set(key, v);
            }
        };
        let s = |v: &Option<String>| v.clone();
        let n = |v: &Option<usize>| v.map(|x| x.to_string());
        let f = |v: &Option<f64>| v.map(|x| x.to_string());
        let p = |v: &Option<PathBuf>| v.as_ref().map(|x| x.display().to_string());
        set(seed_key, self.seed.map(|x| x.to_string()));
        set("dataset", s(&self.dataset));
        set("layers", n(&self.layers));
        set("hidden", n(&self.hidden));
        set("input_domain", s(&self.input_domain));
        set("cell_update", s(&self.cell_update));
        set("epochs", n(&self.epochs));
        set("batch_size", n(&self.batch_size));
        set("lr_min", f(&self.lr_min));
        set("lr_max", f(&self.lr_max));
        set("cycle_epochs", n(&self.cycle_epochs));
        set("clip_norm", s(&self.clip_norm));
        set("train_snr_range", s(&self.train_snr_range));
        set("threshold", f(&self.threshold));
        set("import_descriptor", p(&self.import_descriptor));
        set("import_data", p(&self.import_data));
        set("import_split", s(&self.import_split));
        Ok(doc)
    }

    pub fn run_config(&self, seed_key: &str) -> Result<RunConfig, CliError> {
        Ok(RunConfig::from_doc(&self.resolve(seed_key)?)?)
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a thread count, got `{v}`")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialized; keeping it");
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Gen { cfg, out } => {
            let run = cfg.run_config("master_seed")?;
            let paths = generate(&run, &out)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Train { cfg, data, out } => {
            let run = cfg.run_config("seed")?;
            let s = train_run(&run, &data, &out)?;
            println!(
                "best epoch {} val accuracy {:.4}; checkpoint {}",
                s.best_epoch,
                s.best_val_accuracy,
                s.checkpoint.display()
            );
        }
        Command::Eval {
            cfg,
            model,
            data,
            split,
            out,
        } => {
            let run = cfg.run_config("seed")?;
            let split = crate::dataset::Split::ALL
                .into_iter()
                .find(|s| s.name() == split)
                .ok_or_else(|| CliError::Usage(format!("unknown split `{split}`")))?;
            let report = evaluate(&model, &data, split, run.threshold, &out)?;
            let acc: Vec<String> = report
                .overall
                .points
                .iter()
                .map(|p| format!("{}dB:{:.4}", p.snr_db, p.accuracy))
                .collect();
            println!("accuracy {}", acc.join(" "));
            match report.sensitivity(crate::eval::Scope::Overall) {
                Some(s) => println!("sensitivity {s} dB at threshold {}", report.threshold),
                None => println!("sensitivity NA at threshold {}", report.threshold),
            }
        }
        Command::AblateLayers {
            cfg,
            data,
            out,
            layer_set,
        } => {
            let run = cfg.run_config("seed")?;
            for r in ablate_layers(&run, &layer_set, &data, &out)? {
                println!(
                    "layers {}: best val accuracy {:.4}, test accuracy {:.4}",
                    r.layers, r.summary.best_val_accuracy, r.test_accuracy
                );
            }
        }
        Command::Inspect { cfg, model, data } => {
            let mut printed = false;
            if let Some(m) = model {
                print!("{}", inspect_model(&m)?);
                printed = true;
            }
            if let Some(d) = data {
                print!("{}", inspect_data(&d)?);
                printed = true;
            }
            if !printed {
                let run = cfg.run_config("seed")?;
                print!("{}", commands::inspect_config(&run));
            }
        }
    }
    Ok(())
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
