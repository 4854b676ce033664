//! One-hidden-layer ReLU perceptron with a 3-way softmax output.
//!
//! Weights are flat row-major: `w1` is `hidden × input`, `w2` is
//! `classes × hidden`. Batches are row-major `batch × input`.

use rand::Rng;
use serde::{Deserialize, Serialize};

pub const CLASSES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Same layout as the parameters of an [`Mlp`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .iter()
            .flat_map(|v| v.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn flat(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }
}

/// C (m×n) = A (m×k) · B (k×n) + beta · C, with arbitrary strides on A and B.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    if k > 0 {
        assert!(a.len() > (m - 1) * rsa + (k - 1) * csa, "gemm: A too short");
        assert!(b.len() > (k - 1) * rsb + (n - 1) * csb, "gemm: B too short");
    }
    assert!(c.len() >= m * n, "gemm: C too short");
    // SAFETY: the asserts above bound every index dgemm touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Forward activations kept for the backward pass.
pub struct Forward {
    pub batch: usize,
    pub hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Mlp {
    /// Uniform in ±1/√fan_in for both layers.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let layer = |rng: &mut R, fan_in: usize, len: usize| -> Vec<f64> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        let w1 = layer(rng, input_dim, hidden_dim * input_dim);
        let b1 = layer(rng, input_dim, hidden_dim);
        let w2 = layer(rng, hidden_dim, CLASSES * hidden_dim);
        let b2 = layer(rng, hidden_dim, CLASSES);
        Mlp {
            input_dim,
            hidden_dim,
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn forward(&self, inputs: &[f64]) -> Forward {
        assert_eq!(
            inputs.len() % self.input_dim,
            0,
            "input length not a multiple of input_dim"
        );
        let batch = inputs.len() / self.input_dim;
        let h = self.hidden_dim;

        let mut hidden = Vec::with_capacity(batch * h);
        for _ in 0..batch {
            hidden.extend_from_slice(&self.b1);
        }
        gemm(
            batch,
            self.input_dim,
            h,
            inputs,
            (self.input_dim, 1),
            &self.w1,
            (1, self.input_dim),
            1.0,
            &mut hidden,
        );
        hidden.iter_mut().for_each(|x| *x = x.max(0.0));

        let mut probs = Vec::with_capacity(batch * CLASSES);
        for _ in 0..batch {
            probs.extend_from_slice(&self.b2);
        }
        gemm(
            batch,
            h,
            CLASSES,
            &hidden,
            (h, 1),
            &self.w2,
            (1, h),
            1.0,
            &mut probs,
        );
        for row in probs.chunks_exact_mut(CLASSES) {
            softmax_in_place(row);
        }
        Forward {
            batch,
            hidden,
            probs,
        }
    }

    /// Summed cross-entropy over the batch and its gradients.
    pub fn loss_and_gradients(
        &self,
        inputs: &[f64],
        targets: &[usize],
    ) -> (f64, Gradients, Forward) {
        let fwd = self.forward(inputs);
        assert_eq!(targets.len(), fwd.batch, "one target per input row");
        let h = self.hidden_dim;

        let mut loss = 0.0;
        let mut d_logits = fwd.probs.clone();
        for (row, &t) in d_logits.chunks_exact_mut(CLASSES).zip(targets) {
            loss -= row[t].max(f64::MIN_POSITIVE).ln();
            row[t] -= 1.0;
        }

        let mut w2 = vec![0.0; CLASSES * h];
        gemm(
            CLASSES,
            fwd.batch,
            h,
            &d_logits,
            (1, CLASSES),
            &fwd.hidden,
            (h, 1),
            0.0,
            &mut w2,
        );
        let mut b2 = vec![0.0; CLASSES];
        for row in d_logits.chunks_exact(CLASSES) {
            for (b, d) in b2.iter_mut().zip(row) {
                *b += d;
            }
        }

        let mut d_hidden = vec![0.0; fwd.batch * h];
        gemm(
            fwd.batch,
            CLASSES,
            h,
            &d_logits,
            (CLASSES, 1),
            &self.w2,
            (h, 1),
            0.0,
            &mut d_hidden,
        );
        for (d, &a) in d_hidden.iter_mut().zip(&fwd.hidden) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }

        let mut w1 = vec![0.0; h * self.input_dim];
        gemm(
            h,
            fwd.batch,
            self.input_dim,
            &d_hidden,
            (1, h),
            inputs,
            (self.input_dim, 1),
            0.0,
            &mut w1,
        );
        let mut b1 = vec![0.0; h];
        for row in d_hidden.chunks_exact(h) {
            for (b, d) in b1.iter_mut().zip(row) {
                *b += d;
            }
        }

        (loss, Gradients { w1, b1, w2, b2 }, fwd)
    }

    /// Gradient of the summed loss with respect to the inputs.
    pub fn input_gradients(&self, inputs: &[f64], targets: &[usize]) -> Vec<f64> {
        let fwd = self.forward(inputs);
        let h = self.hidden_dim;
        let mut d_logits = fwd.probs.clone();
        for (row, &t) in d_logits.chunks_exact_mut(CLASSES).zip(targets) {
            row[t] -= 1.0;
        }
        let mut d_hidden = vec![0.0; fwd.batch * h];
        gemm(
            fwd.batch,
            CLASSES,
            h,
            &d_logits,
            (CLASSES, 1),
            &self.w2,
            (h, 1),
            0.0,
            &mut d_hidden,
        );
        for (d, &a) in d_hidden.iter_mut().zip(&fwd.hidden) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }
        let mut d_inputs = vec![0.0; fwd.batch * self.input_dim];
        gemm(
            fwd.batch,
            h,
            self.input_dim,
            &d_hidden,
            (h, 1),
            &self.w1,
            (self.input_dim, 1),
            0.0,
            &mut d_inputs,
        );
        d_inputs
    }

    /// Plain gradient step, `params -= lr * grads`.
    pub fn step(&mut self, grads: &Gradients, lr: f64) {
        for (p, g) in [
            (&mut self.w1, &grads.w1),
            (&mut self.b1, &grads.b1),
            (&mut self.w2, &grads.w2),
            (&mut self.b2, &grads.b2),
        ] {
            for (p, g) in p.iter_mut().zip(g) {
                *p -= lr * g;
            }
        }
    }

    pub fn params_flat(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn param_mut(&mut self, mut index: usize) -> &mut f64 {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            if index < v.len() {
                return &mut v[index];
            }
            index -= v.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.params_flat().iter().all(|p| p.is_finite())
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_forward(mlp: &Mlp, x: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = (0..mlp.hidden_dim)
            .map(|j| {
                let s: f64 = (0..mlp.input_dim)
                    .map(|i| mlp.w1[j * mlp.input_dim + i] * x[i])
                    .sum();
                (s + mlp.b1[j]).max(0.0)
            })
            .collect();
        let mut z: Vec<f64> = (0..CLASSES)
            .map(|c| {
                (0..mlp.hidden_dim)
                    .map(|j| mlp.w2[c * mlp.hidden_dim + j] * h[j])
                    .sum::<f64>()
                    + mlp.b2[c]
            })
            .collect();
        softmax_in_place(&mut z);
        z
    }

    #[test]
    fn gemm_forward_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = Mlp::init(7, 5, &mut rng);
        let x: Vec<f64> = (0..21).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fwd = mlp.forward(&x);
        for (row, probs) in x.chunks(7).zip(fwd.probs.chunks(CLASSES)) {
            let expect = naive_forward(&mlp, row);
            for (a, b) in probs.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_and_loss_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mlp = Mlp::init(4, 6, &mut rng);
        let x: Vec<f64> = (0..40).map(|_| rng.random_range(-50.0..50.0)).collect();
        let (loss, _, fwd) = mlp.loss_and_gradients(&x, &[0, 1, 2, 0, 1, 2, 0, 1, 2, 0]);
        assert!(loss >= 0.0);
        for row in fwd.probs.chunks(CLASSES) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = Mlp::init(16, 9, &mut rng);
        assert!(mlp.w1.iter().all(|w| w.abs() <= 0.25));
        assert!(mlp.w2.iter().all(|w| w.abs() <= 1.0 / 3.0));
        assert_eq!(mlp.parameter_count(), 16 * 9 + 9 + 27 + 3);
    }

    #[test]
    fn param_mut_walks_all_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut mlp = Mlp::init(2, 2, &mut rng);
        let n = mlp.parameter_count();
        *mlp.param_mut(n - 1) = 42.0;
        assert_eq!(mlp.b2[2], 42.0);
        *mlp.param_mut(4) = -1.0;
        assert_eq!(mlp.b1[0], -1.0);
    }
}
