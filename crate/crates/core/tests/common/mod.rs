//! Reference implementations shared by the integration tests. They are
//! written for clarity, not speed, and do not call into the library's
//! numeric code.

#![allow(dead_code)]

use deepradar::lstm::{CellUpdate, Model};
use num_complex::Complex64;

/// Aperiodic autocorrelation `R[k] = sum_n x[n+k] conj(x[n])`, `k = 0..n`.
pub fn aperiodic_acf(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n - k).map(|i| x[i + k] * x[i].conj()).sum())
        .collect()
}

/// Cyclic autocorrelation, `k = 0..n`.
pub fn cyclic_acf(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n).map(|i| x[(i + k) % n] * x[i].conj()).sum())
        .collect()
}

/// Costas check by distinct displacement vectors between every pair of dots.
pub fn costas_by_displacements(perm: &[usize]) -> bool {
    let m = perm.len();
    let mut seen = std::collections::HashSet::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && !seen.insert((j as i64 - i as i64, perm[j] as i64 - perm[i] as i64)) {
                return false;
            }
        }
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    sorted == (1..=m).collect::<Vec<_>>()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Class probabilities for one `steps x input_dim` sequence.
pub fn reference_probs(model: &Model<f64>, input: &[f64]) -> Vec<f64> {
    let mut seq: Vec<Vec<f64>> = input.chunks(model.layers[0].input_dim).map(<[f64]>::to_vec).collect();
    for layer in &model.layers {
        let h = layer.hidden;
        let cols = h + layer.input_dim;
        let mut a = vec![0.0; h];
        let mut c = vec![0.0; h];
        let mut out = Vec::with_capacity(seq.len());
        for x in &seq {
            let v: Vec<f64> = a.iter().chain(x.iter()).copied().collect();
            let z = |row: usize| layer.bias[row] + (0..cols).map(|j| layer.weights[row * cols + j] * v[j]).sum::<f64>();
            let mut next_c = vec![0.0; h];
            let mut next_a = vec![0.0; h];
            for j in 0..h {
                let cand = z(j).tanh();
                let upd = sigmoid(z(h + j));
                let fgt = sigmoid(z(2 * h + j));
                let out_gate = sigmoid(z(3 * h + j));
                next_c[j] = match model.cell_update {
                    CellUpdate::Standard => fgt * c[j] + upd * cand,
                    CellUpdate::Swapped => fgt * cand + upd * c[j],
                };
                next_a[j] = out_gate * next_c[j].tanh();
            }
            a = next_a;
            c = next_c;
            out.push(a.clone());
        }
        seq = out;
    }
    let last = seq.last().expect("non-empty sequence");
    let h = last.len();
    let logits: Vec<f64> = (0..model.n_classes)
        .map(|k| model.head_bias[k] + (0..h).map(|j| model.head_weights[k * h + j] * last[j]).sum::<f64>())
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Mean cross-entropy over `(input, label)` pairs.
pub fn reference_loss(model: &Model<f64>, batch: &[(Vec<f64>, usize)]) -> f64 {
    batch
        .iter()
        .map(|(x, y)| -reference_probs(model, x)[*y].max(1e-12).ln())
        .sum::<f64>()
        / batch.len() as f64
}
