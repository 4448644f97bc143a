//! Floating-point reference network and its off-chip training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::crossbar::Matrix;
use crate::error::{Error, Result};

/// Layer widths of a bias-free rectifier MLP, input first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layers: Vec<usize>,
}

impl MlpSpec {
    pub fn new(layers: Vec<usize>) -> Result<Self> {
        if layers.len() < 2 || layers.contains(&0) {
            return Err(Error::invalid(
                "layer sizes",
                "need at least an input and an output width, all non-zero",
            ));
        }
        Ok(Self { layers })
    }
}

/// Weight matrices, each `out x in`. Rectifiers sit between layers; the
/// last layer is linear and read out by argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub weights: Vec<Matrix>,
}

pub(crate) fn relu(v: &mut [f64]) {
    for x in v {
        *x = x.max(0.0);
    }
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
            if x > best.1 {
                (i, x)
            } else {
                best
            }
        })
        .0
}

impl Mlp {
    pub fn new(weights: Vec<Matrix>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("network", "needs at least one layer"));
        }
        for pair in weights.windows(2) {
            if pair[1].cols != pair[0].rows {
                return Err(Error::Dimension {
                    expected: pair[0].rows,
                    actual: pair[1].cols,
                });
            }
        }
        if weights.iter().flat_map(|w| &w.data).any(|v| !v.is_finite()) {
            return Err(Error::invalid("weights", "must be finite"));
        }
        Ok(Self { weights })
    }

    pub fn n_inputs(&self) -> usize {
        self.weights[0].cols
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut h = x.to_vec();
        let last = self.weights.len() - 1;
        for (k, w) in self.weights.iter().enumerate() {
            h = w.mul_vec(&h)?;
            if k < last {
                relu(&mut h);
            }
        }
        Ok(h)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 7,
        }
    }
}

/// Full-batch gradient descent with momentum on softmax cross-entropy.
pub fn train(spec: &MlpSpec, data: &Dataset, opts: &TrainOptions) -> Result<Mlp> {
    if data.is_empty() {
        return Err(Error::invalid("dataset", "is empty"));
    }
    if data.n_features() != spec.layers[0] {
        return Err(Error::Dimension {
            expected: spec.layers[0],
            actual: data.n_features(),
        });
    }
    let n_out = *spec.layers.last().unwrap_or(&0);
    if data.n_classes > n_out {
        return Err(Error::Dimension {
            expected: data.n_classes,
            actual: n_out,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut weights: Vec<Matrix> = spec
        .layers
        .windows(2)
        .map(|io| {
            let (n_in, n_out) = (io[0], io[1]);
            let scale = (2.0 / n_in as f64).sqrt();
            let mut m = Matrix::zeros(n_out, n_in);
            for v in &mut m.data {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = z * scale;
            }
            m
        })
        .collect();
    let mut velocity: Vec<Matrix> = weights
        .iter()
        .map(|w| Matrix::zeros(w.rows, w.cols))
        .collect();
    let n = data.len() as f64;
    let last = weights.len() - 1;

    for _ in 0..opts.epochs {
        let mut grads: Vec<Matrix> = weights
            .iter()
            .map(|w| Matrix::zeros(w.rows, w.cols))
            .collect();
        for (x, &label) in data.features.iter().zip(&data.labels) {
            // forward, keeping every layer's input
            let mut acts = vec![x.clone()];
            for (k, w) in weights.iter().enumerate() {
                let mut h = w.mul_vec(acts.last().expect("non-empty"))?;
                if k < last {
                    relu(&mut h);
                }
                acts.push(h);
            }
            let logits = acts.last().expect("non-empty");
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            let mut delta: Vec<f64> = exps.iter().map(|e| e / sum).collect();
            delta[label] -= 1.0;
            for k in (0..weights.len()).rev() {
                let input = &acts[k];
                let g = &mut grads[k];
                for (r, d) in delta.iter().enumerate() {
                    for (c, a) in input.iter().enumerate() {
                        g.data[r * g.cols + c] += d * a;
                    }
                }
                if k > 0 {
                    let w = &weights[k];
                    delta = (0..w.cols)
                        .map(|c| {
                            if acts[k][c] > 0.0 {
                                (0..w.rows).map(|r| w.get(r, c) * delta[r]).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        for ((w, v), g) in weights.iter_mut().zip(&mut velocity).zip(&grads) {
            for ((wi, vi), gi) in w.data.iter_mut().zip(&mut v.data).zip(&g.data) {
                *vi = opts.momentum * *vi - opts.learning_rate * gi / n;
                *wi += *vi;
            }
        }
    }
    Mlp::new(weights)
}

/// Fraction of correctly classified samples of `data`.
pub fn accuracy(mlp: &Mlp, data: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in data.features.iter().zip(&data.labels) {
        correct += usize::from(mlp.predict(x)? == y);
    }
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_separates_toy_data() {
        let data = Dataset::toy();
        for layers in [vec![16, 4], vec![16, 16, 4]] {
            let mlp = train(
                &MlpSpec::new(layers.clone()).unwrap(),
                &data,
                &TrainOptions::default(),
            )
            .unwrap();
            let acc = accuracy(&mlp, &data).unwrap();
            assert!(acc > 0.9, "{layers:?}: accuracy {acc}");
        }
    }

    #[test]
    fn forward_by_hand() {
        let w1 = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 0.5]]).unwrap();
        let w2 = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let mlp = Mlp::new(vec![w1, w2]).unwrap();
        // h = relu([1 - 3, 0.5 + 1.5]) = [0, 2]; y = 4
        assert_eq!(mlp.forward(&[1.0, 3.0]).unwrap(), vec![4.0]);
    }

    #[test]
    fn shape_checks() {
        assert!(MlpSpec::new(vec![3]).is_err());
        let w1 = Matrix::zeros(2, 3);
        let w2 = Matrix::zeros(1, 4);
        assert!(Mlp::new(vec![w1, w2]).is_err());
        assert_eq!(argmax(&[0.1, 0.7, 0.7, -1.0]), 1);
    }
}
