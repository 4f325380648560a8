use super::{LstmError, Scalar};

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable softmax.
pub fn softmax<F: Scalar>(logits: &[F]) -> Vec<F> {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: F = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-ln(max(probs[label], 1e-12))` and the logit gradient
/// `probs - one_hot(label)`.
pub fn cross_entropy_loss<F: Scalar>(probs: &[F], label: usize) -> Result<(F, Vec<F>), LstmError> {
    if label >= probs.len() {
        return Err(LstmError::LabelOutOfRange {
            label,
            n_classes: probs.len(),
        });
    }
    let p = probs[label].max(F::of(PROB_FLOOR));
    let mut grad = probs.to_vec();
    grad[label] = grad[label] - F::one();
    Ok((-p.ln(), grad))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<F: PartialOrd + Copy>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
