use std::fmt::Write as _;

use rayon::prelude::*;

use super::input::Sample;
use super::model::{batch_gradients, Model};
use super::optim::{clip_global_norm, cyclical_lr, Adam};
use super::{LstmError, Scalar};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_min: f64,
    pub lr_max: f64,
    /// Length of one learning-rate cycle in epochs.
    pub cycle_epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Global gradient-norm cap; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            epochs: 300,
            lr_min: 1e-7,
            lr_max: 1e-3,
            cycle_epochs: 8,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LstmError> {
        let bad = |msg: String| Err(LstmError::InvalidConfig(msg));
        if self.batch_size == 0 || self.epochs == 0 || self.cycle_epochs == 0 {
            return bad("batch_size, epochs and cycle_epochs must be positive".into());
        }
        if !(self.lr_min > 0.0 && self.lr_min < self.lr_max && self.lr_max.is_finite()) {
            return bad(format!("need 0 < lr_min < lr_max (got {} and {})", self.lr_min, self.lr_max));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return bad(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return bad(format!("clip_norm must be positive, got {c}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's mini-batches.
    pub train_loss: f64,
    /// Fraction of training examples classified correctly before each
    /// batch update.
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    /// Learning rate of the epoch's first step.
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    /// Parameters after the last epoch.
    pub model: Model<F>,
    /// Parameters after the epoch with the highest validation accuracy
    /// (earliest on ties).
    pub best_model: Model<F>,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

/// Fraction of `samples` the model classifies correctly.
pub fn accuracy<F: Scalar>(model: &Model<F>, samples: &[Sample<F>]) -> Result<f64, LstmError> {
    if samples.is_empty() {
        return Err(LstmError::EmptyBatch);
    }
    let hits = samples
        .par_iter()
        .map(|s| model.predict(&s.input).map(|p| usize::from(p == s.label)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / samples.len() as f64)
}

/// Mini-batch training with seeded per-epoch shuffling, Adam and the
/// triangular learning-rate cycle. `on_epoch` sees each record as it is
/// produced.
pub fn train<F: Scalar>(
    model: Model<F>,
    train_set: &[Sample<F>],
    val_set: &[Sample<F>],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<F>, LstmError> {
    config.validate()?;
    model.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(LstmError::InvalidConfig("training and validation sets must be non-empty".into()));
    }
    if let Some(s) = train_set.iter().chain(val_set).find(|s| s.label >= model.n_classes) {
        return Err(LstmError::LabelOutOfRange {
            label: s.label,
            n_classes: model.n_classes,
        });
    }

    let mut model = model;
    let mut adam = Adam::new(&model, config.adam_beta1, config.adam_beta2, config.adam_eps);
    let steps_per_epoch = train_set.len().div_ceil(config.batch_size) as u64;
    let period = config.cycle_epochs as u64 * steps_per_epoch;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Model<F>)> = None;
    let mut global_step = 0u64;

    for epoch in 1..=config.epochs {
        let mut r = rng::stream_rng(rng::derive_seed(config.seed, &[epoch as u64]), Stream::Training);
        order.sort_unstable();
        rng::shuffle(&mut r, &mut order);
        let epoch_lr = cyclical_lr(global_step, period, config.lr_min, config.lr_max);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<&Sample<F>> = idx.iter().map(|&i| &train_set[i]).collect();
            let mut res = batch_gradients(&model, &batch)?;
            if let Some(c) = config.clip_norm {
                clip_global_norm(&mut res.grads, c);
            }
            let lr = cyclical_lr(global_step, period, config.lr_min, config.lr_max);
            adam.step(&mut model, &res.grads, lr)?;
            global_step += 1;
            loss_sum += res.loss * batch.len() as f64;
            correct += res.correct;
        }
        if let Some(name) = model.first_non_finite() {
            return Err(LstmError::NonFinite(format!("{name} after epoch {epoch}")));
        }
        let val_accuracy = accuracy(&model, val_set)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_accuracy: correct as f64 / train_set.len() as f64,
            val_accuracy,
            lr: epoch_lr,
        };
        log::info!(
            "epoch {epoch}/{}: loss {:.5} train acc {:.4} val acc {:.4} lr {:.3e}",
            config.epochs,
            record.train_loss,
            record.train_accuracy,
            record.val_accuracy,
            record.lr
        );
        on_epoch(&record);
        if best.as_ref().map_or(true, |(acc, _, _)| val_accuracy > *acc) {
            best = Some((val_accuracy, epoch, model.clone()));
        }
        history.push(record);
    }

    let (_, best_epoch, best_model) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        model,
        best_model,
        best_epoch,
        history,
    })
}

/// History as CSV with columns `epoch,train_loss,val_accuracy,lr`.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_accuracy,lr\n");
    for r in history {
        let _ = writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.val_accuracy, r.lr);
    }
    out
}
