//! Stacked LSTM classifier written from scratch: forward pass,
//! backpropagation through time, Adam with a cyclical learning rate, and the
//! training loop.
//!
//! Each cell computes, with `v = [a_prev, x]`:
//!
//! ```text
//! c~ = tanh(W_c v + b_c)        candidate
//! u  = sigmoid(W_u v + b_u)     update (input) gate
//! f  = sigmoid(W_f v + b_f)     forget gate
//! o  = sigmoid(W_o v + b_o)     output gate
//! c  = f * c_prev + u * c~      (CellUpdate::Standard)
//! a  = o * tanh(c)
//! ```
//!
//! `CellUpdate::Swapped` swaps the roles of `f` and `u` in the memory
//! update (`c = f * c~ + u * c_prev`) for comparison runs.

mod cell;
mod checkpoint;
mod input;
mod loss;
mod model;
mod optim;
mod train;

pub use cell::{CellState, CellUpdate, Gate, LayerTrace, LstmLayer, StepCache};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use input::{prepare_example, prepare_input, prepare_split, InputDomain, Sample};
pub use loss::{argmax, cross_entropy_loss, softmax, PROB_FLOOR};
pub use model::{batch_gradients, init_model, BatchResult, Model, ParamCounts};
pub use optim::{cyclical_lr, Adam};
pub use train::{accuracy, history_csv, train, EpochRecord, TrainConfig, TrainOutcome};

use std::fmt::Debug;
use std::iter::Sum;

use thiserror::Error;

/// Floating-point type the network runs in: `f32` for training and
/// inference, `f64` for gradient checks.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Default + Debug + Send + Sync + Sum + 'static
{
    fn of(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("representable")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Error)]
pub enum LstmError {
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [F::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s = s + *x * *y;
    }
    s
}

/// `y += alpha * x`
pub(crate) fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

pub(crate) fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}
