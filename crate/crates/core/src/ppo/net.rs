//! Dense feed-forward networks with hand-written batched forward and
//! backward passes.
//!
//! Layers apply `y = x W + b` with a rectified-linear activation between
//! layers and identity at the output. Weights are stored input-major
//! (`weights[k * output + j]` connects input `k` to output `j`) so the hot
//! loops run over contiguous rows. Everything is `f64`; gradients are
//! checked against central finite differences by [`gradient_check`].

use crate::error::{CoreError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Hidden widths of the standard actor/critic stack.
pub const STANDARD_HIDDEN: [usize; 5] = [256, 256, 128, 128, 64];

/// Parallelize a matrix product above this many multiply-accumulates.
const PAR_THRESHOLD: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub input: usize,
    pub output: usize,
    /// Input-major: `weights[k * output + j]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<DenseLayer>,
}

/// Per-layer post-activation outputs of one batched forward pass, kept for
/// the backward pass.
#[derive(Debug)]
pub struct BatchActivations {
    pub batch: usize,
    input: Vec<f64>,
    /// One entry per layer; the last holds raw (identity) outputs.
    outputs: Vec<Vec<f64>>,
}

impl BatchActivations {
    /// Final-layer outputs, `batch x output`.
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("network has layers")
    }
}

/// Per-layer parameter gradients, same shapes as the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    /// Gradient for the flat parameter index used by [`DenseNetwork::param`].
    pub fn param(&self, mut index: usize) -> f64 {
        for (w, b) in &self.layers {
            if index < w.len() {
                return w[index];
            }
            index -= w.len();
            if index < b.len() {
                return b[index];
            }
            index -= b.len();
        }
        panic!("parameter index out of range");
    }
}

impl DenseNetwork {
    /// Builds a network with the given layer widths (`sizes[0]` inputs,
    /// `sizes.last()` outputs). Weights are fan-in-scaled uniform, biases
    /// zero.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(CoreError::InvalidInput(
                "network needs at least input and output widths, all positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (input, output) = (w[0], w[1]);
                let bound = 1.0 / (input as f64).sqrt();
                DenseLayer {
                    input,
                    output,
                    weights: (0..input * output)
                        .map(|_| rng.gen_range(-bound..bound))
                        .collect(),
                    biases: vec![0.0; output],
                }
            })
            .collect();
        Ok(DenseNetwork { layers })
    }

    /// The standard six-layer stack: hidden widths [`STANDARD_HIDDEN`]
    /// between `input` and `output`.
    pub fn standard(input: usize, output: usize, seed: u64) -> Result<Self> {
        let mut sizes = Vec::with_capacity(STANDARD_HIDDEN.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&STANDARD_HIDDEN);
        sizes.push(output);
        Self::new(&sizes, seed)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(CoreError::InvalidInput("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output != pair[1].input {
                return Err(CoreError::InvalidInput(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].output, pair[1].input
                )));
            }
        }
        for l in &layers {
            if l.weights.len() != l.input * l.output || l.biases.len() != l.output {
                return Err(CoreError::InvalidInput("layer buffer sizes mismatch".into()));
            }
        }
        Ok(DenseNetwork { layers })
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().unwrap().output
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Flat parameter access (layer order, weights before biases).
    pub fn param(&self, mut index: usize) -> f64 {
        for l in &self.layers {
            if index < l.weights.len() {
                return l.weights[index];
            }
            index -= l.weights.len();
            if index < l.biases.len() {
                return l.biases[index];
            }
            index -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut index: usize, value: f64) {
        for l in &mut self.layers {
            if index < l.weights.len() {
                l.weights[index] = value;
                return;
            }
            index -= l.weights.len();
            if index < l.biases.len() {
                l.biases[index] = value;
                return;
            }
            index -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.biases.iter()).all(|v| v.is_finite()))
    }

    /// Forward pass over a batch laid out row-major (`batch x input_len`).
    pub fn forward_batch(&self, x: &[f64], batch: usize) -> Result<BatchActivations> {
        if x.len() != batch * self.input_len() {
            return Err(CoreError::InvalidInput(format!(
                "input has {} values, expected {} x {}",
                x.len(),
                batch,
                self.input_len()
            )));
        }
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let prev: &[f64] = if l == 0 { x } else { &outputs[l - 1] };
            let mut out = vec![0.0; batch * layer.output];
            matmul_bias(prev, &layer.weights, &layer.biases, batch, layer.input, layer.output, &mut out);
            if l != last {
                for v in &mut out {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            outputs.push(out);
        }
        Ok(BatchActivations {
            batch,
            input: x.to_vec(),
            outputs,
        })
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(x, 1)?.output().to_vec())
    }

    /// Backward pass: given the loss gradient at the output layer
    /// (`batch x output_len`), returns gradients for every parameter.
    pub fn backward_batch(&self, acts: &BatchActivations, d_output: &[f64]) -> Gradients {
        let batch = acts.batch;
        assert_eq!(d_output.len(), batch * self.output_len());
        let mut grads = Gradients::zeros_like(self);
        let mut delta = d_output.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let prev: &[f64] = if l == 0 { &acts.input } else { &acts.outputs[l - 1] };

            let (dw, db) = &mut grads.layers[l];
            matmul_at_b(prev, &delta, batch, layer.input, layer.output, dw);
            for row in delta.chunks_exact(layer.output) {
                for (acc, &d) in db.iter_mut().zip(row) {
                    *acc += d;
                }
            }

            if l > 0 {
                let mut next_delta = vec![0.0; batch * layer.input];
                matmul_a_bt(&delta, &layer.weights, batch, layer.output, layer.input, &mut next_delta);
                // Gate through the rectifier of the previous layer.
                for (d, &a) in next_delta.iter_mut().zip(prev) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
        grads
    }
}

/// `out[m x n] = a[m x k] * b[k x n] (+ bias)`, accumulated row-by-row so
/// the inner loop is an independent-lane multiply-add over contiguous
/// memory. Zero `a` entries (ReLU outputs) skip their row of `b`.
fn gemm(a: &[f64], b: &[f64], bias: Option<&[f64]>, m: usize, k: usize, n: usize, out: &mut [f64]) {
    let body = |(i, row): (usize, &mut [f64])| {
        match bias {
            Some(bias) => row.copy_from_slice(bias),
            None => row.fill(0.0),
        }
        let a_row = &a[i * k..(i + 1) * k];
        for (kk, &av) in a_row.iter().enumerate() {
            if av != 0.0 {
                let b_row = &b[kk * n..(kk + 1) * n];
                for (o, &bv) in row.iter_mut().zip(b_row) {
                    *o += av * bv;
                }
            }
        }
    };
    if m * k * n >= PAR_THRESHOLD {
        out.par_chunks_mut(n).enumerate().for_each(body);
    } else {
        out.chunks_mut(n).enumerate().for_each(body);
    }
}

/// `out[m x n] = a[m x k] * b[k x n] + bias` (bias broadcast over rows).
fn matmul_bias(a: &[f64], b: &[f64], bias: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    gemm(a, b, Some(bias), m, k, n, out);
}

/// Stripes for the transposed-product reduction. A fixed count keeps the
/// floating-point summation order independent of the thread pool, so
/// results are bit-identical across runs and machines with different core
/// counts.
const REDUCE_STRIPES: usize = 16;

/// `out[k x n] = a^T * b` with `a[m x k]`, `b[m x n]`: weight gradients.
///
/// Each stripe accumulates a partial product over its share of the `m` rows
/// in axpy form (both operand rows contiguous); partials are then summed in
/// stripe order.
fn matmul_at_b(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    let accumulate = |range: std::ops::Range<usize>, local: &mut [f64]| {
        for i in range {
            let a_row = &a[i * k..(i + 1) * k];
            let b_row = &b[i * n..(i + 1) * n];
            for (kk, &av) in a_row.iter().enumerate() {
                if av != 0.0 {
                    let local_row = &mut local[kk * n..(kk + 1) * n];
                    for (o, &bv) in local_row.iter_mut().zip(b_row) {
                        *o += av * bv;
                    }
                }
            }
        }
    };

    if m * k * n >= PAR_THRESHOLD && m >= 2 * REDUCE_STRIPES {
        let stripe_len = m.div_ceil(REDUCE_STRIPES);
        let partials: Vec<Vec<f64>> = (0..REDUCE_STRIPES)
            .into_par_iter()
            .map(|s| {
                let start = s * stripe_len;
                let end = ((s + 1) * stripe_len).min(m);
                let mut local = vec![0.0; k * n];
                accumulate(start..end, &mut local);
                local
            })
            .collect();
        out.fill(0.0);
        for partial in &partials {
            for (o, &p) in out.iter_mut().zip(partial) {
                *o += p;
            }
        }
    } else {
        out.fill(0.0);
        accumulate(0..m, out);
    }
}

/// `out[m x k] = a * b^T` with `a[m x n]`, `b[k x n]`: input gradients.
/// Transposing `b` (one small weight matrix) turns the row products into
/// the same contiguous axpy form as the forward pass.
fn matmul_a_bt(a: &[f64], b: &[f64], m: usize, n: usize, k: usize, out: &mut [f64]) {
    let mut bt = vec![0.0; n * k];
    for kk in 0..k {
        for j in 0..n {
            bt[j * k + kk] = b[kk * n + j];
        }
    }
    gemm(a, &bt, None, m, n, k, out);
}

/// Numerically stable softmax of one logit row.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Numerically stable log-softmax of one logit row.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - max - log_sum).collect()
}

/// Softmax policy head over a single observation: a probability distribution
/// over the network's output actions.
pub fn forward_policy(net: &DenseNetwork, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != net.input_len() {
        return Err(CoreError::InvalidInput(format!(
            "observation has {} features, network expects {}",
            x.len(),
            net.input_len()
        )));
    }
    Ok(softmax(&net.forward(x)?))
}

/// Draws an action from `dist` and returns it with its log-probability.
pub fn sample_action<R: Rng>(dist: &[f64], rng: &mut R) -> (usize, f64) {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return (i, p.ln());
        }
    }
    let last = dist.len() - 1;
    (last, dist[last].ln())
}

/// Greedy action: argmax probability, lowest index on ties.
pub fn greedy_action(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate().skip(1) {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

/// Compares the analytic gradient of the squared-error loss
/// `0.5 * sum_j (y_j - target)^2` against central finite differences
/// (`h = 1e-5`) on an evenly spaced sample of at least 200 parameters, and
/// returns the maximum relative error observed.
pub fn gradient_check(net: &DenseNetwork, x: &[f64], target: f64) -> Result<f64> {
    const H: f64 = 1e-5;
    let loss = |net: &DenseNetwork| -> Result<f64> {
        let y = net.forward(x)?;
        Ok(0.5 * y.iter().map(|&v| (v - target).powi(2)).sum::<f64>())
    };

    let acts = net.forward_batch(x, 1)?;
    let d_out: Vec<f64> = acts.output().iter().map(|&v| v - target).collect();
    let grads = net.backward_batch(&acts, &d_out);
    let base_loss = loss(net)?;

    // A central difference carries ~eps_machine * loss / h of rounding
    // noise; gradients under this floor cannot be compared relatively and
    // count as matching when both sides sit below it.
    let floor = 1e-6 * (1.0 + base_loss.abs());

    let total = net.param_count();
    let samples = total.min(200.max(total / 64));
    let stride = (total / samples).max(1);

    let mut probe = net.clone();
    let mut max_rel = 0.0f64;
    for s in 0..samples {
        let index = (s * stride).min(total - 1);
        let original = net.param(index);
        probe.set_param(index, original + H);
        let plus = loss(&probe)?;
        probe.set_param(index, original - H);
        let minus = loss(&probe)?;
        probe.set_param(index, original);

        let numeric = (plus - minus) / (2.0 * H);
        let analytic = grads.param(index);
        let rel = if analytic.abs() < floor && numeric.abs() < floor {
            0.0
        } else {
            (analytic - numeric).abs() / analytic.abs().max(numeric.abs())
        };
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_hand_computation() {
        // One layer, 2 -> 2, identity output.
        let net = DenseNetwork::from_layers(vec![DenseLayer {
            input: 2,
            output: 2,
            weights: vec![1.0, -2.0, 0.5, 3.0], // row k=0: [1, -2]; k=1: [0.5, 3]
            biases: vec![0.1, -0.1],
        }])
        .unwrap();
        let y = net.forward(&[2.0, -1.0]).unwrap();
        // y0 = 2*1 + (-1)*0.5 + 0.1 ; y1 = 2*(-2) + (-1)*3 - 0.1
        assert!((y[0] - 1.6).abs() < 1e-12);
        assert!((y[1] + 7.1).abs() < 1e-12);
    }

    #[test]
    fn relu_applies_between_layers_only() {
        let net = DenseNetwork::from_layers(vec![
            DenseLayer {
                input: 1,
                output: 1,
                weights: vec![1.0],
                biases: vec![0.0],
            },
            DenseLayer {
                input: 1,
                output: 1,
                weights: vec![1.0],
                biases: vec![0.0],
            },
        ])
        .unwrap();
        // Negative input is clipped after the hidden layer, so output is 0;
        // the output layer itself is identity (it may go negative via bias).
        assert_eq!(net.forward(&[-3.0]).unwrap(), vec![0.0]);
        assert_eq!(net.forward(&[2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn zero_final_layer_gives_uniform_policy() {
        let mut net = DenseNetwork::standard(4, 5, 3).unwrap();
        let last = net.layers.len() - 1;
        net.layers_mut()[last].weights.iter_mut().for_each(|w| *w = 0.0);
        let dist = forward_policy(&net, &[0.3, -0.2, 0.9, 0.0]).unwrap();
        for p in &dist {
            assert!((p - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn policy_is_a_distribution() {
        let net = DenseNetwork::standard(6, 5, 11).unwrap();
        for trial in 0..20 {
            let x: Vec<f64> = (0..6).map(|i| ((trial * 7 + i) as f64).sin()).collect();
            let dist = forward_policy(&net, &x).unwrap();
            assert!(dist.iter().all(|&p| p >= 0.0));
            assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn growing_logit_dominates_softmax() {
        let mut prev = 0.0;
        for logit in [1.0, 2.0, 5.0, 10.0, 30.0] {
            let dist = softmax(&[logit, 0.0, 0.0]);
            assert!(dist[0] > prev);
            prev = dist[0];
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let net = DenseNetwork::standard(6, 5, 1).unwrap();
        assert!(matches!(
            forward_policy(&net, &[0.0; 4]),
            Err(CoreError::InvalidInput(_))
        ));
    }

    #[test]
    fn sampling_follows_the_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Deterministic distribution always yields action 0 with log-prob 0.
        for _ in 0..10 {
            let (a, lp) = sample_action(&[1.0, 0.0, 0.0], &mut rng);
            assert_eq!(a, 0);
            assert_eq!(lp, 0.0);
        }
        // Uniform over 5: each frequency within 3 sigma of 0.2.
        let draws = 100_000;
        let mut counts = [0usize; 5];
        let dist = [0.2; 5];
        for _ in 0..draws {
            counts[sample_action(&dist, &mut rng).0] += 1;
        }
        let sigma = (0.2 * 0.8 / draws as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.2).abs() < 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn same_rng_state_same_draw() {
        let dist = [0.3, 0.4, 0.3];
        let a = sample_action(&dist, &mut ChaCha8Rng::seed_from_u64(77));
        let b = sample_action(&dist, &mut ChaCha8Rng::seed_from_u64(77));
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_check_linear_layer_is_exact() {
        let net = DenseNetwork::from_layers(vec![DenseLayer {
            input: 3,
            output: 2,
            weights: vec![0.4, -0.2, 0.9, 0.1, -0.5, 0.3],
            biases: vec![0.05, -0.02],
        }])
        .unwrap();
        let err = gradient_check(&net, &[0.7, -1.2, 0.4], 0.3).unwrap();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn gradient_check_full_stack() {
        let net = DenseNetwork::standard(6, 5, 123).unwrap();
        let x = [0.9, -0.4, 0.2, 0.8, -0.7, 0.1];
        let err = gradient_check(&net, &x, 1.5).unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn zero_input_zero_target_zeroes_all_gradients() {
        let net = DenseNetwork::standard(4, 3, 9).unwrap();
        let x = [0.0; 4];
        let acts = net.forward_batch(&x, 1).unwrap();
        let d_out: Vec<f64> = acts.output().to_vec(); // y - 0
        let grads = net.backward_batch(&acts, &d_out);
        // Zero biases mean y = 0, so every gradient vanishes.
        for (dw, db) in &grads.layers {
            assert!(dw.iter().all(|&g| g == 0.0));
            assert!(db.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn batched_and_single_forward_agree() {
        let net = DenseNetwork::standard(5, 3, 21).unwrap();
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|r| (0..5).map(|i| ((r * 5 + i) as f64 * 0.37).cos()).collect())
            .collect();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let batch = net.forward_batch(&flat, 7).unwrap();
        for (r, row) in rows.iter().enumerate() {
            let single = net.forward(row).unwrap();
            let from_batch = &batch.output()[r * 3..(r + 1) * 3];
            for (a, b) in single.iter().zip(from_batch) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seeded_init_is_reproducible() {
        assert_eq!(
            DenseNetwork::standard(6, 5, 42).unwrap(),
            DenseNetwork::standard(6, 5, 42).unwrap()
        );
        assert_ne!(
            DenseNetwork::standard(6, 5, 42).unwrap(),
            DenseNetwork::standard(6, 5, 43).unwrap()
        );
    }
}
