//! Small fully connected regression network trained on mean absolute error.
//!
//! Hidden layers use the rectifier, the output layer is affine. Gradients are
//! computed by hand-written backpropagation; the subgradient of `|r|` at
//! `r = 0` is taken to be 0.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::PredictorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn glorot(inputs: usize, outputs: usize, rng: &mut Xoshiro256PlusPlus) -> Self {
        let a = (6.0 / (inputs + outputs) as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.random_range(-a..=a))
                .collect(),
            biases: vec![0.0; outputs],
        }
    }

    #[inline]
    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.inputs).zip(&self.biases))
        {
            *o = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Plain mini-batch gradient descent.
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            epochs: 47,
            batch: 256,
            lr: 1e-3,
            seed: 0,
            optimizer: Optimizer::adam(),
        }
    }
}

impl MlpModel {
    /// Randomly initialised network with the given layer widths
    /// (input first, output last).
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        Self {
            layers: sizes
                .windows(2)
                .map(|w| DenseLayer::glorot(w[0], w[1], &mut rng))
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[at..at + nw]);
            at += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&p[at..at + nb]);
            at += nb;
        }
    }

    pub fn validate(&self) -> Result<(), PredictorError> {
        if self.layers.is_empty() {
            return Err(PredictorError::Format("network has no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(PredictorError::Format(format!(
                    "layer {i} has inconsistent shapes"
                )));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(PredictorError::Format(format!("layer {i} does not chain")));
            }
        }
        if self.layers.last().map(|l| l.outputs) != Some(1) {
            return Err(PredictorError::Format(
                "output layer must have width 1".into(),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; l.outputs];
            l.affine(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            cur = next;
        }
        cur[0]
    }

    /// Mean absolute error over the samples and its gradient with respect to
    /// [`MlpModel::params`].
    pub fn mae_loss_and_gradient<X: AsRef<[f64]>>(&self, xs: &[X], ys: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.param_count()];
        let mut scratch = Scratch::new(self);
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            loss += self.accumulate(x.as_ref(), y, &mut scratch, &mut grad);
        }
        let n = xs.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }

    /// Adds `sign(residual) * d(output)/d(params)` for one sample into `grad`
    /// and returns `|residual|`.
    fn accumulate(&self, x: &[f64], y: f64, s: &mut Scratch, grad: &mut [f64]) -> f64 {
        let last = self.layers.len() - 1;
        s.acts[0].clear();
        s.acts[0].extend_from_slice(x);
        for (i, l) in self.layers.iter().enumerate() {
            let (before, after) = s.acts.split_at_mut(i + 1);
            let out = &mut after[0];
            out.resize(l.outputs, 0.0);
            l.affine(&before[i], out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        let residual = s.acts[last + 1][0] - y;
        let sign = if residual > 0.0 {
            1.0
        } else if residual < 0.0 {
            -1.0
        } else {
            0.0
        };
        if sign == 0.0 {
            return 0.0;
        }

        s.delta.clear();
        s.delta.push(sign);
        let mut offset = grad.len();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let nb = l.biases.len();
            let nw = l.weights.len();
            offset -= nb + nw;
            let input = &s.acts[i];
            let (gw, gb) = grad[offset..offset + nw + nb].split_at_mut(nw);
            for (o, &dl) in s.delta.iter().enumerate() {
                if dl == 0.0 {
                    continue;
                }
                gb[o] += dl;
                for (g, &a) in gw[o * l.inputs..(o + 1) * l.inputs].iter_mut().zip(input) {
                    *g += dl * a;
                }
            }
            if i == 0 {
                break;
            }
            s.next_delta.clear();
            s.next_delta.resize(l.inputs, 0.0);
            for (o, &dl) in s.delta.iter().enumerate() {
                if dl == 0.0 {
                    continue;
                }
                for (nd, &w) in s
                    .next_delta
                    .iter_mut()
                    .zip(&l.weights[o * l.inputs..(o + 1) * l.inputs])
                {
                    *nd += dl * w;
                }
            }
            // the layer input is a rectifier output; its derivative is 1 where positive
            for (nd, &a) in s.next_delta.iter_mut().zip(input) {
                if a <= 0.0 {
                    *nd = 0.0;
                }
            }
            std::mem::swap(&mut s.delta, &mut s.next_delta);
        }
        residual.abs()
    }
}

struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

impl Scratch {
    fn new(m: &MlpModel) -> Self {
        Self {
            acts: vec![Vec::new(); m.layers.len() + 1],
            delta: Vec::new(),
            next_delta: Vec::new(),
        }
    }
}

/// Trains a `[dim, hidden, hidden, 1]` network by mini-batch descent on MAE.
///
/// `on_epoch(epoch, model)` is called after every epoch (1-based) and can be
/// used to record validation curves.
pub fn mlp_train<X, F>(
    xs: &[X],
    ys: &[f64],
    cfg: &MlpConfig,
    mut on_epoch: F,
) -> Result<MlpModel, PredictorError>
where
    X: AsRef<[f64]>,
    F: FnMut(usize, &MlpModel),
{
    if xs.is_empty() {
        return Err(PredictorError::EmptyInput);
    }
    if xs.len() != ys.len() {
        return Err(PredictorError::Config(
            "feature and target counts differ".into(),
        ));
    }
    if cfg.hidden == 0 || cfg.epochs == 0 || cfg.batch == 0 {
        return Err(PredictorError::Config(
            "hidden, epochs and batch must be positive".into(),
        ));
    }
    if cfg.lr.is_nan() || cfg.lr <= 0.0 {
        return Err(PredictorError::Config(format!(
            "learning rate {} must be positive",
            cfg.lr
        )));
    }
    let dim = xs[0].as_ref().len();
    let mut model = MlpModel::new(&[dim, cfg.hidden, cfg.hidden, 1], cfg.seed);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed ^ 0x0005_EED0_FBA7_C4E5);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut params = model.params();
    let mut grad = vec![0.0; params.len()];
    let mut m1 = vec![0.0; params.len()];
    let mut m2 = vec![0.0; params.len()];
    let mut t = 0i32;
    let mut scratch = Scratch::new(&model);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                epoch_loss += model.accumulate(xs[i].as_ref(), ys[i], &mut scratch, &mut grad);
            }
            let scale = 1.0 / batch.len() as f64;
            t += 1;
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in params.iter_mut().zip(&grad) {
                        *p -= cfg.lr * g * scale;
                    }
                }
                Optimizer::Adam { beta1, beta2, eps } => {
                    let c1 = 1.0 - beta1.powi(t);
                    let c2 = 1.0 - beta2.powi(t);
                    for k in 0..params.len() {
                        let g = grad[k] * scale;
                        m1[k] = beta1 * m1[k] + (1.0 - beta1) * g;
                        m2[k] = beta2 * m2[k] + (1.0 - beta2) * g * g;
                        params[k] -= cfg.lr * (m1[k] / c1) / ((m2[k] / c2).sqrt() + eps);
                    }
                }
            }
            model.set_params(&params);
        }
        let mean_loss = epoch_loss / xs.len() as f64;
        if !mean_loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(PredictorError::Diverged(format!(
                "epoch {epoch}: loss {mean_loss}"
            )));
        }
        on_epoch(epoch, &model);
    }
    Ok(model)
}
