//! Evaluation metrics: accuracy against SNR (overall and per class), the
//! sensitivity threshold, and confusion matrices, plus CSV/SVG reports.

mod metrics;
mod report;
mod svg;

pub use metrics::{
    accuracy_by_snr, confusion_matrix, predict_split, sensitivity, AccuracyCurve, ConfusionMatrix, CurvePoint,
    Prediction, Predictions, Scope, DEFAULT_THRESHOLD,
};
pub use report::{build_report, emit_comparison, emit_report, EvalReport};

use thiserror::Error;

use crate::dataset::LabeledExample;
use crate::lstm::{prepare_input, LstmError, Model};
use crate::signal::SignalError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no examples at {0} dB in the split")]
    MissingSnr(i16),
    #[error("split is empty")]
    EmptySplit,
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("classifier has {classifier} classes, split has {split}")]
    ClassCount { classifier: usize, split: usize },
    #[error(transparent)]
    Model(#[from] LstmError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that maps a labeled example to a class index.
pub trait Classifier: Sync {
    fn n_classes(&self) -> usize;
    fn classify(&self, example: &LabeledExample) -> Result<usize, EvalError>;
}

/// Applies the model's own input preprocessing before the forward pass.
impl Classifier for Model<f32> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn classify(&self, example: &LabeledExample) -> Result<usize, EvalError> {
        let input = prepare_input::<f32>(&example.iq, self.input_domain)?;
        Ok(self.predict(&input)?)
    }
}
