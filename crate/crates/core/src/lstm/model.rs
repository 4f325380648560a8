use rayon::prelude::*;

use super::cell::{BackwardScratch, CellUpdate, Gate, LayerTrace, LstmLayer};
use super::input::{InputDomain, Sample};
use super::loss::{argmax, cross_entropy_loss, softmax};
use super::{axpy, dot, LstmError, Scalar};
use crate::rng::{self, Stream};

/// Stacked LSTM layers followed by a dense softmax head reading the last
/// activation of the top layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<F> {
    pub layers: Vec<LstmLayer<F>>,
    /// `n_classes x hidden_last`, row-major.
    pub head_weights: Vec<F>,
    pub head_bias: Vec<F>,
    pub n_classes: usize,
    pub cell_update: CellUpdate,
    pub input_domain: InputDomain,
}

/// Parameter counts of the recurrent stack and of the classification head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCounts {
    pub lstm: usize,
    pub head: usize,
}

impl ParamCounts {
    /// `sum 4 h (in + h + 1)` over layers, plus `h n + n` for the head.
    pub fn for_shape(input_dim: usize, layer_sizes: &[usize], n_classes: usize) -> Self {
        let mut lstm = 0;
        let mut prev = input_dim;
        for &h in layer_sizes {
            lstm += 4 * h * (prev + h + 1);
            prev = h;
        }
        let h_last = layer_sizes.last().copied().unwrap_or(input_dim);
        Self {
            lstm,
            head: h_last * n_classes + n_classes,
        }
    }

    pub fn total(&self) -> usize {
        self.lstm + self.head
    }
}

/// Xavier-uniform weights (`±sqrt(6 / (fan_in + fan_out))` per gate
/// matrix), forget-gate bias 1, every other bias 0.
pub fn init_model<F: Scalar>(
    n_classes: usize,
    input_dim: usize,
    layer_sizes: &[usize],
    seed: u64,
) -> Result<Model<F>, LstmError> {
    if n_classes == 0 || input_dim == 0 || layer_sizes.is_empty() || layer_sizes.contains(&0) {
        return Err(LstmError::InvalidConfig(format!(
            "model sizes must be positive (classes {n_classes}, input {input_dim}, layers {layer_sizes:?})"
        )));
    }
    let mut r = rng::stream_rng(rng::derive_seed(seed, &[0x1A17]), Stream::Training);
    let mut layers = Vec::with_capacity(layer_sizes.len());
    let mut prev = input_dim;
    for &h in layer_sizes {
        let mut layer = LstmLayer::zeros(prev, h);
        let limit = (6.0 / ((h + prev) + h) as f64).sqrt();
        for w in layer.weights.iter_mut() {
            *w = F::of(rng::uniform(&mut r, -limit, limit));
        }
        layer.gate_bias_mut(Gate::Forget).iter_mut().for_each(|b| *b = F::one());
        layers.push(layer);
        prev = h;
    }
    let limit = (6.0 / (prev + n_classes) as f64).sqrt();
    let head_weights = (0..n_classes * prev)
        .map(|_| F::of(rng::uniform(&mut r, -limit, limit)))
        .collect();
    Ok(Model {
        layers,
        head_weights,
        head_bias: vec![F::zero(); n_classes],
        n_classes,
        cell_update: CellUpdate::Standard,
        input_domain: InputDomain::Time,
    })
}

/// Reusable per-thread buffers.
#[derive(Debug, Default)]
pub(crate) struct Workspace<F> {
    traces: Vec<LayerTrace<F>>,
    d_out: Vec<F>,
    d_in: Vec<F>,
    scratch: BackwardScratch<F>,
}

/// Mean loss, mean gradient and hit count over a batch.
#[derive(Debug, Clone)]
pub struct BatchResult<F> {
    pub grads: Model<F>,
    pub loss: f64,
    pub correct: usize,
}

impl<F: Scalar> Model<F> {
    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden).collect()
    }

    pub fn hidden_last(&self) -> usize {
        self.layers.last().map(|l| l.hidden).unwrap_or(0)
    }

    pub fn param_counts(&self) -> ParamCounts {
        ParamCounts {
            lstm: self.layers.iter().map(LstmLayer::param_count).sum(),
            head: self.head_weights.len() + self.head_bias.len(),
        }
    }

    /// Same shape, all parameters zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayer::zeros(l.input_dim, l.hidden))
                .collect(),
            head_weights: vec![F::zero(); self.head_weights.len()],
            head_bias: vec![F::zero(); self.head_bias.len()],
            n_classes: self.n_classes,
            cell_update: self.cell_update,
            input_domain: self.input_domain,
        }
    }

    /// Every parameter tensor in checkpoint order.
    pub fn tensors(&self) -> Vec<&[F]> {
        let mut v: Vec<&[F]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            v.push(&l.weights);
            v.push(&l.bias);
        }
        v.push(&self.head_weights);
        v.push(&self.head_bias);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut v: Vec<&mut [F]> = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &mut self.layers {
            v.push(&mut l.weights);
            v.push(&mut l.bias);
        }
        v.push(&mut self.head_weights);
        v.push(&mut self.head_bias);
        v
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut v = Vec::new();
        for i in 0..self.layers.len() {
            v.push(format!("layer {i} weights"));
            v.push(format!("layer {i} bias"));
        }
        v.push("head weights".into());
        v.push("head bias".into());
        v
    }

    pub fn cast<G: Scalar>(&self) -> Model<G> {
        let conv = |v: &[F]| v.iter().map(|x| G::of(x.as_f64())).collect::<Vec<G>>();
        Model {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayer {
                    input_dim: l.input_dim,
                    hidden: l.hidden,
                    weights: conv(&l.weights),
                    bias: conv(&l.bias),
                })
                .collect(),
            head_weights: conv(&self.head_weights),
            head_bias: conv(&self.head_bias),
            n_classes: self.n_classes,
            cell_update: self.cell_update,
            input_domain: self.input_domain,
        }
    }

    pub fn validate(&self) -> Result<(), LstmError> {
        if self.layers.is_empty() {
            return Err(LstmError::InvalidConfig("model has no layers".into()));
        }
        for pair in self.layers.windows(2) {
            if pair[1].input_dim != pair[0].hidden {
                return Err(LstmError::ShapeMismatch {
                    what: "stacked layer input",
                    expected: pair[0].hidden,
                    got: pair[1].input_dim,
                });
            }
        }
        let want = self.n_classes * self.hidden_last();
        if self.head_weights.len() != want || self.head_bias.len() != self.n_classes {
            return Err(LstmError::ShapeMismatch {
                what: "head",
                expected: want,
                got: self.head_weights.len(),
            });
        }
        Ok(())
    }

    fn steps_of(&self, input: &[F]) -> Result<usize, LstmError> {
        let d = self.input_dim();
        if input.is_empty() || input.len() % d != 0 {
            return Err(LstmError::ShapeMismatch {
                what: "model input",
                expected: d,
                got: input.len(),
            });
        }
        Ok(input.len() / d)
    }

    fn run_layers(&self, input: &[F], ws: &mut Workspace<F>) -> Result<usize, LstmError> {
        let steps = self.steps_of(input)?;
        ws.traces.resize_with(self.layers.len(), LayerTrace::default);
        for (i, layer) in self.layers.iter().enumerate() {
            let (below, here) = ws.traces.split_at_mut(i);
            let src: &[F] = if i == 0 { input } else { &below[i - 1].a };
            layer.forward(src, steps, self.cell_update, &mut here[0])?;
        }
        Ok(steps)
    }

    fn head_logits(&self, a_last: &[F]) -> Vec<F> {
        let h = a_last.len();
        (0..self.n_classes)
            .map(|k| self.head_bias[k] + dot(&self.head_weights[k * h..(k + 1) * h], a_last))
            .collect()
    }

    /// Output activations of layer `layer` for a sequence: every step
    /// (`steps x hidden`) or only the last one.
    pub fn layer_output(&self, input: &[F], layer: usize, return_sequences: bool) -> Result<Vec<F>, LstmError> {
        let mut ws = Workspace::default();
        self.run_layers(input, &mut ws)?;
        let trace = &ws.traces[layer];
        Ok(if return_sequences {
            trace.a.clone()
        } else {
            trace.last_activation().to_vec()
        })
    }

    /// Class probabilities for one `steps x input_dim` sequence.
    pub fn forward(&self, input: &[F]) -> Result<Vec<F>, LstmError> {
        self.forward_with(input, &mut Workspace::default())
    }

    pub(crate) fn forward_with(&self, input: &[F], ws: &mut Workspace<F>) -> Result<Vec<F>, LstmError> {
        self.run_layers(input, ws)?;
        let a_last = ws.traces.last().expect("at least one layer").last_activation();
        Ok(softmax(&self.head_logits(a_last)))
    }

    pub fn predict(&self, input: &[F]) -> Result<usize, LstmError> {
        Ok(argmax(&self.forward(input)?))
    }

    /// Loss of one example; gradients are added into `grad`.
    pub(crate) fn accumulate_gradient(
        &self,
        input: &[F],
        label: usize,
        ws: &mut Workspace<F>,
        grad: &mut Model<F>,
    ) -> Result<(F, Vec<F>), LstmError> {
        let steps = self.run_layers(input, ws)?;
        let h = self.hidden_last();
        let a_last = ws.traces.last().expect("layers").last_activation().to_vec();
        let probs = softmax(&self.head_logits(&a_last));
        let (loss, dlogits) = cross_entropy_loss(&probs, label)?;

        for (k, &g) in dlogits.iter().enumerate() {
            grad.head_bias[k] = grad.head_bias[k] + g;
            axpy(g, &a_last, &mut grad.head_weights[k * h..(k + 1) * h]);
        }
        ws.d_out.clear();
        ws.d_out.resize(steps * h, F::zero());
        {
            let last = &mut ws.d_out[(steps - 1) * h..];
            for (k, &g) in dlogits.iter().enumerate() {
                axpy(g, &self.head_weights[k * h..(k + 1) * h], last);
            }
        }
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let Workspace {
                traces,
                d_out,
                d_in,
                scratch,
            } = ws;
            let d_input = if l > 0 {
                d_in.clear();
                d_in.resize(steps * layer.input_dim, F::zero());
                Some(&mut d_in[..])
            } else {
                None
            };
            layer.backward(&traces[l], d_out, self.cell_update, &mut grad.layers[l], d_input, scratch);
            if l > 0 {
                std::mem::swap(d_out, d_in);
            }
        }
        Ok((loss, probs))
    }

    fn add_assign(&mut self, other: &Model<F>) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = *d + *s;
            }
        }
    }

    fn scale(&mut self, k: F) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v = *v * k;
            }
        }
    }

    /// Name of the first tensor holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<String> {
        self.tensors()
            .iter()
            .zip(self.tensor_names())
            .find(|(t, _)| t.iter().any(|v| !v.is_finite()))
            .map(|(_, n)| n)
    }
}

/// Examples per reduction chunk. Chunks are summed in index order, so the
/// result does not depend on the thread count.
const GRAD_CHUNK: usize = 4;

/// Gradient of the mean cross-entropy over `batch`.
pub fn batch_gradients<F: Scalar>(model: &Model<F>, batch: &[&Sample<F>]) -> Result<BatchResult<F>, LstmError> {
    if batch.is_empty() {
        return Err(LstmError::EmptyBatch);
    }
    let partials: Vec<(Model<F>, f64, usize)> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut ws = Workspace::default();
            let mut grad = model.zeros_like();
            let mut loss = 0.0;
            let mut correct = 0;
            for s in chunk {
                let (l, probs) = model.accumulate_gradient(&s.input, s.label, &mut ws, &mut grad)?;
                loss += l.as_f64();
                correct += usize::from(argmax(&probs) == s.label);
            }
            Ok((grad, loss, correct))
        })
        .collect::<Result<_, LstmError>>()?;
    let mut iter = partials.into_iter();
    let (mut grads, mut loss, mut correct) = iter.next().expect("non-empty batch");
    for (g, l, c) in iter {
        grads.add_assign(&g);
        loss += l;
        correct += c;
    }
    let n = batch.len();
    grads.scale(F::one() / F::of(n as f64));
    let loss = loss / n as f64;
    if !loss.is_finite() {
        return Err(LstmError::NonFinite("batch loss".into()));
    }
    if let Some(name) = grads.first_non_finite() {
        return Err(LstmError::NonFinite(format!("gradient of {name}")));
    }
    Ok(BatchResult { grads, loss, correct })
}
