use super::{axpy, dot, sigmoid, LstmError, Scalar};

/// Memory-cell update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellUpdate {
    /// `c = f * c_prev + u * c~`
    #[default]
    Standard,
    /// `c = f * c~ + u * c_prev`
    Swapped,
}

/// Gate blocks of the stacked weight matrix, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Candidate = 0,
    Update = 1,
    Forget = 2,
    Output = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Candidate, Gate::Update, Gate::Forget, Gate::Output];
}

/// One LSTM layer. The four gate matrices `W_c, W_u, W_f, W_o` (each
/// `hidden x (hidden + input_dim)`, acting on `[a_prev, x]`) are stacked
/// row-wise in [`Gate`] order into one `4 hidden x (hidden + input_dim)`
/// row-major matrix; the biases are stacked the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<F> {
    pub input_dim: usize,
    pub hidden: usize,
    pub weights: Vec<F>,
    pub bias: Vec<F>,
}

/// Short- and long-term state of a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState<F> {
    pub a: Vec<F>,
    pub c: Vec<F>,
}

impl<F: Scalar> CellState<F> {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            a: vec![F::zero(); hidden],
            c: vec![F::zero(); hidden],
        }
    }
}

/// Values saved by one cell step for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache<F> {
    /// `[a_prev, x]`
    pub v: Vec<F>,
    /// Activated gates in [`Gate`] order, `4 * hidden`.
    pub gates: Vec<F>,
    pub c_prev: Vec<F>,
    pub tanh_c: Vec<F>,
}

impl<F: Scalar> LstmLayer<F> {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            weights: vec![F::zero(); 4 * hidden * (hidden + input_dim)],
            bias: vec![F::zero(); 4 * hidden],
        }
    }

    pub fn cols(&self) -> usize {
        self.hidden + self.input_dim
    }

    pub fn gate_weights(&self, gate: Gate) -> &[F] {
        let block = self.hidden * self.cols();
        &self.weights[gate as usize * block..(gate as usize + 1) * block]
    }

    pub fn gate_weights_mut(&mut self, gate: Gate) -> &mut [F] {
        let block = self.hidden * self.cols();
        &mut self.weights[gate as usize * block..(gate as usize + 1) * block]
    }

    pub fn gate_bias(&self, gate: Gate) -> &[F] {
        &self.bias[gate as usize * self.hidden..(gate as usize + 1) * self.hidden]
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [F] {
        let h = self.hidden;
        &mut self.bias[gate as usize * h..(gate as usize + 1) * h]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn check(&self) -> Result<(), LstmError> {
        let want = 4 * self.hidden * self.cols();
        if self.weights.len() != want {
            return Err(LstmError::ShapeMismatch {
                what: "layer weights",
                expected: want,
                got: self.weights.len(),
            });
        }
        if self.bias.len() != 4 * self.hidden {
            return Err(LstmError::ShapeMismatch {
                what: "layer bias",
                expected: 4 * self.hidden,
                got: self.bias.len(),
            });
        }
        Ok(())
    }

    /// Pre-activations into `z`, then activate in place.
    #[inline]
    fn gates_into(&self, v: &[F], z: &mut [F]) {
        let cols = self.cols();
        let h = self.hidden;
        for (r, zr) in z.iter_mut().enumerate() {
            *zr = self.bias[r] + dot(&self.weights[r * cols..(r + 1) * cols], v);
        }
        for zr in &mut z[..h] {
            *zr = zr.tanh();
        }
        for zr in &mut z[h..] {
            *zr = sigmoid(*zr);
        }
    }

    /// New memory cell and activation from activated gates.
    #[inline]
    fn combine(
        h: usize,
        mode: CellUpdate,
        gates: &[F],
        c_prev: &[F],
        c: &mut [F],
        tanh_c: &mut [F],
        a: &mut [F],
    ) {
        let (cand, rest) = gates.split_at(h);
        let (upd, rest) = rest.split_at(h);
        let (fgt, out) = rest.split_at(h);
        for j in 0..h {
            c[j] = match mode {
                CellUpdate::Standard => fgt[j] * c_prev[j] + upd[j] * cand[j],
                CellUpdate::Swapped => fgt[j] * cand[j] + upd[j] * c_prev[j],
            };
            tanh_c[j] = c[j].tanh();
            a[j] = out[j] * tanh_c[j];
        }
    }

    /// One cell step.
    pub fn step(
        &self,
        x: &[F],
        prev: &CellState<F>,
        mode: CellUpdate,
    ) -> Result<(CellState<F>, StepCache<F>), LstmError> {
        self.check()?;
        if x.len() != self.input_dim {
            return Err(LstmError::ShapeMismatch {
                what: "cell input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if prev.a.len() != self.hidden || prev.c.len() != self.hidden {
            return Err(LstmError::ShapeMismatch {
                what: "cell state",
                expected: self.hidden,
                got: prev.a.len().max(prev.c.len()),
            });
        }
        let h = self.hidden;
        let mut v = prev.a.clone();
        v.extend_from_slice(x);
        let mut gates = vec![F::zero(); 4 * h];
        self.gates_into(&v, &mut gates);
        let mut next = CellState::zeros(h);
        let mut tanh_c = vec![F::zero(); h];
        Self::combine(h, mode, &gates, &prev.c, &mut next.c, &mut tanh_c, &mut next.a);
        Ok((
            next,
            StepCache {
                v,
                gates,
                c_prev: prev.c.clone(),
                tanh_c,
            },
        ))
    }

    /// Run the layer over a `steps x input_dim` sequence from a zero state,
    /// filling `trace`.
    pub fn forward(
        &self,
        input: &[F],
        steps: usize,
        mode: CellUpdate,
        trace: &mut LayerTrace<F>,
    ) -> Result<(), LstmError> {
        self.check()?;
        if steps == 0 || input.len() != steps * self.input_dim {
            return Err(LstmError::ShapeMismatch {
                what: "layer input",
                expected: steps.max(1) * self.input_dim,
                got: input.len(),
            });
        }
        let h = self.hidden;
        let cols = self.cols();
        let ind = self.input_dim;
        trace.reset(steps, h, cols);
        let zero_state = vec![F::zero(); h];
        for t in 0..steps {
            let (done, rest) = trace.a.split_at_mut(t * h);
            let a_prev = if t == 0 { &zero_state[..] } else { &done[(t - 1) * h..] };
            let v = &mut trace.v[t * cols..(t + 1) * cols];
            v[..h].copy_from_slice(a_prev);
            v[h..].copy_from_slice(&input[t * ind..(t + 1) * ind]);
            let gates = &mut trace.gates[t * 4 * h..(t + 1) * 4 * h];
            self.gates_into(v, gates);
            let (c_done, c_rest) = trace.c.split_at_mut(t * h);
            let c_prev = if t == 0 { &zero_state[..] } else { &c_done[(t - 1) * h..] };
            Self::combine(
                h,
                mode,
                gates,
                c_prev,
                &mut c_rest[..h],
                &mut trace.tanh_c[t * h..(t + 1) * h],
                &mut rest[..h],
            );
        }
        Ok(())
    }

    /// Backpropagation through time for a trace produced by
    /// [`LstmLayer::forward`]. `d_out` is the loss gradient with respect to
    /// every output activation (`steps x hidden`). Parameter gradients are
    /// accumulated into `grad`; input gradients are written to `d_input`
    /// when given.
    pub fn backward(
        &self,
        trace: &LayerTrace<F>,
        d_out: &[F],
        mode: CellUpdate,
        grad: &mut LstmLayer<F>,
        mut d_input: Option<&mut [F]>,
        scratch: &mut BackwardScratch<F>,
    ) {
        let h = self.hidden;
        let cols = self.cols();
        let steps = trace.steps;
        scratch.reset(h, cols);
        let BackwardScratch { da_next, dc_next, dz, dv } = scratch;
        for t in (0..steps).rev() {
            let gates = &trace.gates[t * 4 * h..(t + 1) * 4 * h];
            let tanh_c = &trace.tanh_c[t * h..(t + 1) * h];
            let v = &trace.v[t * cols..(t + 1) * cols];
            let (cand, rest) = gates.split_at(h);
            let (upd, rest) = rest.split_at(h);
            let (fgt, out) = rest.split_at(h);
            for j in 0..h {
                let c_prev = if t == 0 { F::zero() } else { trace.c[(t - 1) * h + j] };
                let da = d_out[t * h + j] + da_next[j];
                let d_o = da * tanh_c[j];
                let dc = dc_next[j] + da * out[j] * (F::one() - tanh_c[j] * tanh_c[j]);
                let (d_f, d_u, d_cand, dc_prev) = match mode {
                    CellUpdate::Standard => (dc * c_prev, dc * cand[j], dc * upd[j], dc * fgt[j]),
                    CellUpdate::Swapped => (dc * cand[j], dc * c_prev, dc * fgt[j], dc * upd[j]),
                };
                dz[j] = d_cand * (F::one() - cand[j] * cand[j]);
                dz[h + j] = d_u * upd[j] * (F::one() - upd[j]);
                dz[2 * h + j] = d_f * fgt[j] * (F::one() - fgt[j]);
                dz[3 * h + j] = d_o * out[j] * (F::one() - out[j]);
                dc_next[j] = flush(dc_prev);
            }
            for z in dz.iter_mut() {
                *z = flush(*z);
            }
            dv.iter_mut().for_each(|x| *x = F::zero());
            for (r, &dzr) in dz.iter().enumerate() {
                if dzr == F::zero() {
                    continue;
                }
                grad.bias[r] = grad.bias[r] + dzr;
                axpy(dzr, v, &mut grad.weights[r * cols..(r + 1) * cols]);
                axpy(dzr, &self.weights[r * cols..(r + 1) * cols], dv);
            }
            for (d, &s) in da_next.iter_mut().zip(&dv[..h]) {
                *d = flush(s);
            }
            if let Some(dx) = d_input.as_deref_mut() {
                let ind = self.input_dim;
                dx[t * ind..(t + 1) * ind].copy_from_slice(&dv[h..]);
            }
        }
    }
}

/// Zero out subnormal values. Gradients decaying through long sequences
/// otherwise end up subnormal, which is very slow on common CPUs.
fn flush<F: Scalar>(x: F) -> F {
    if x.abs() < F::min_positive_value() {
        F::zero()
    } else {
        x
    }
}

/// Forward-pass record of one layer over one sequence.
#[derive(Debug, Clone, Default)]
pub struct LayerTrace<F> {
    pub steps: usize,
    pub v: Vec<F>,
    pub gates: Vec<F>,
    pub c: Vec<F>,
    pub tanh_c: Vec<F>,
    /// Output activations, `steps x hidden`.
    pub a: Vec<F>,
}

impl<F: Scalar> LayerTrace<F> {
    fn reset(&mut self, steps: usize, h: usize, cols: usize) {
        self.steps = steps;
        self.v.resize(steps * cols, F::zero());
        self.gates.resize(steps * 4 * h, F::zero());
        self.c.resize(steps * h, F::zero());
        self.tanh_c.resize(steps * h, F::zero());
        self.a.resize(steps * h, F::zero());
    }

    pub fn last_activation(&self) -> &[F] {
        let h = self.a.len() / self.steps;
        &self.a[(self.steps - 1) * h..]
    }
}

#[derive(Debug, Clone, Default)]
pub struct BackwardScratch<F> {
    da_next: Vec<F>,
    dc_next: Vec<F>,
    dz: Vec<F>,
    dv: Vec<F>,
}

impl<F: Scalar> BackwardScratch<F> {
    fn reset(&mut self, h: usize, cols: usize) {
        for (buf, n) in [
            (&mut self.da_next, h),
            (&mut self.dc_next, h),
            (&mut self.dz, 4 * h),
            (&mut self.dv, cols),
        ] {
            buf.clear();
            buf.resize(n, F::zero());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn zero_params_give_zero_state() {
        let layer = LstmLayer::<f64>::zeros(2, 3);
        let (s, cache) = layer.step(&[0.7, -1.2], &CellState::zeros(3), CellUpdate::Standard).unwrap();
        assert!(s.c.iter().all(|&v| v == 0.0));
        assert!(s.a.iter().all(|&v| v == 0.0));
        // Sigmoid gates sit at 1/2 with zero pre-activation.
        assert!(cache.gates[3..].iter().all(|&g| g == 0.5));
    }

    #[test]
    fn scalar_cell_matches_direct_evaluation() {
        // hidden = 1, input = 1; rows: [w_a, w_x] per gate.
        let mut layer = LstmLayer::<f64>::zeros(1, 1);
        layer.weights = vec![0.3, -0.5, 0.8, 0.1, -0.4, 0.9, 0.2, 0.6];
        layer.bias = vec![0.05, -0.1, 1.0, 0.2];
        let (a0, c0, x): (f64, f64, f64) = (0.25, -0.6, 1.3);
        let prev = CellState { a: vec![a0], c: vec![c0] };

        let cand = (0.3 * a0 - 0.5 * x + 0.05).tanh();
        let u = sig(0.8 * a0 + 0.1 * x - 0.1);
        let f = sig(-0.4 * a0 + 0.9 * x + 1.0);
        let o = sig(0.2 * a0 + 0.6 * x + 0.2);

        let (s, _) = layer.step(&[x], &prev, CellUpdate::Standard).unwrap();
        let c = f * c0 + u * cand;
        assert!((s.c[0] - c).abs() < 1e-15);
        assert!((s.a[0] - o * c.tanh()).abs() < 1e-15);

        let (s, _) = layer.step(&[x], &prev, CellUpdate::Swapped).unwrap();
        let c = f * cand + u * c0;
        assert!((s.c[0] - c).abs() < 1e-15);
        assert!((s.a[0] - o * c.tanh()).abs() < 1e-15);
    }

    #[test]
    fn gate_and_activation_ranges() {
        let mut layer = LstmLayer::<f64>::zeros(2, 4);
        for (i, w) in layer.weights.iter_mut().enumerate() {
            *w = ((i * 37) % 11) as f64 - 5.0;
        }
        let mut state = CellState::zeros(4);
        for t in 0..20 {
            let x = [t as f64 - 10.0, (t as f64).sin() * 30.0];
            let (s, cache) = layer.step(&x, &state, CellUpdate::Standard).unwrap();
            assert!(cache.gates[4..].iter().all(|&g| (0.0..=1.0).contains(&g)));
            assert!(s.a.iter().all(|&a| a > -1.0 && a < 1.0));
            state = s;
        }
    }

    #[test]
    fn step_rejects_bad_shapes() {
        let layer = LstmLayer::<f64>::zeros(2, 3);
        assert!(layer.step(&[1.0], &CellState::zeros(3), CellUpdate::Standard).is_err());
        assert!(layer.step(&[1.0, 2.0], &CellState::zeros(2), CellUpdate::Standard).is_err());
    }

    #[test]
    fn forward_matches_repeated_steps() {
        let mut layer = LstmLayer::<f64>::zeros(2, 3);
        for (i, w) in layer.weights.iter_mut().enumerate() {
            *w = (i as f64 * 0.37).sin() * 0.5;
        }
        let input: Vec<f64> = (0..8).map(|i| (i as f64 * 0.9).cos()).collect();
        let mut trace = LayerTrace::default();
        layer.forward(&input, 4, CellUpdate::Standard, &mut trace).unwrap();
        let mut state = CellState::zeros(3);
        for t in 0..4 {
            state = layer.step(&input[2 * t..2 * t + 2], &state, CellUpdate::Standard).unwrap().0;
            assert_eq!(&trace.a[3 * t..3 * t + 3], &state.a[..]);
        }
        assert!(layer.forward(&input, 3, CellUpdate::Standard, &mut trace).is_err());
    }
}
