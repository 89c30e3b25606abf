//! Dense layers and small multilayer perceptrons with manual backprop.

use ndarray::{Array1, Array2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative from the pre-activation.
    fn grad(self, x: f64) -> f64 {
        match self {
            Activation::Relu => f64::from(u8::from(x > 0.0)),
            Activation::Tanh => 1.0 - x.tanh().powi(2),
        }
    }
}

/// `y = x W^T + b` with `W` of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// JSON form of a layer: row-major `weights` of shape `rows x cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseJson {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Dense {
        Dense {
            w: Array2::zeros((output, input)),
            b: Array1::zeros(output),
        }
    }

    /// Uniform fan-in initialisation, biases zero.
    pub fn random(input: usize, output: usize, rng: &mut Rng) -> Dense {
        let a = (6.0 / input.max(1) as f64).sqrt();
        let w = Array2::from_shape_simple_fn((output, input), || rng.gen_range(-a..a));
        Dense {
            w,
            b: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w.t()) + &self.b
    }

    pub fn to_json(&self) -> DenseJson {
        DenseJson {
            rows: self.w.nrows(),
            cols: self.w.ncols(),
            weights: self.w.iter().copied().collect(),
            bias: self.b.to_vec(),
        }
    }

    pub fn from_json(j: &DenseJson) -> Result<Dense> {
        if j.weights.len() != j.rows * j.cols || j.bias.len() != j.rows {
            return Err(Error::DimensionMismatch(format!(
                "layer {}x{} with {} weights and {} biases",
                j.rows,
                j.cols,
                j.weights.len(),
                j.bias.len()
            )));
        }
        Ok(Dense {
            w: Array2::from_shape_vec((j.rows, j.cols), j.weights.clone())
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?,
            b: Array1::from(j.bias.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Dense layers with an activation between consecutive layers; the last
/// layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

impl MlpCache {
    /// Sign pattern of hidden pre-activations, used to detect kinks.
    pub fn signature(&self, out: &mut Vec<bool>) {
        for p in &self.pre[..self.pre.len().saturating_sub(1)] {
            out.extend(p.iter().map(|&v| v > 0.0));
        }
    }
}

impl Mlp {
    pub fn new(dims: &[usize], activation: Activation, rng: &mut Rng) -> Mlp {
        Mlp {
            layers: dims.windows(2).map(|w| Dense::random(w[0], w[1], rng)).collect(),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            h = l.forward(&h);
            if i + 1 < self.layers.len() {
                h.mapv_inplace(|v| self.activation.apply(v));
            }
        }
        h
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
        };
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            let z = l.forward(&h);
            cache.inputs.push(h);
            h = if i + 1 < self.layers.len() {
                z.mapv(|v| self.activation.apply(v))
            } else {
                z.clone()
            };
            cache.pre.push(z);
        }
        (h, cache)
    }

    /// Gradients of the parameters and of the input given `dout`.
    pub fn backward(&self, cache: &MlpCache, dout: Array2<f64>) -> (Array2<f64>, Vec<DenseGrad>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut d = dout;
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                let act = self.activation;
                d.zip_mut_with(&cache.pre[i], |g, &z| *g *= act.grad(z));
            }
            let l = &self.layers[i];
            grads.push(DenseGrad {
                w: d.t().dot(&cache.inputs[i]),
                b: d.sum_axis(Axis(0)),
            });
            d = d.dot(&l.w);
        }
        grads.reverse();
        (d, grads)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn to_json(&self) -> Vec<DenseJson> {
        self.layers.iter().map(Dense::to_json).collect()
    }

    pub fn from_json(layers: &[DenseJson], activation: Activation) -> Result<Mlp> {
        let layers = layers.iter().map(Dense::from_json).collect::<Result<Vec<_>>>()?;
        if layers.is_empty() {
            return Err(Error::DimensionMismatch("block without layers".into()));
        }
        for w in layers.windows(2) {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "layer output {} feeds input {}",
                    w[0].output_dim(),
                    w[1].input_dim()
                )));
            }
        }
        Ok(Mlp { layers, activation })
    }
}

/// Row-wise softmax.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

/// Gradient through a row-wise softmax: `p * (dp - <dp, p>)`.
pub fn softmax_backward(p: &Array2<f64>, dp: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(p.raw_dim());
    for ((prow, drow), mut orow) in p.rows().into_iter().zip(dp.rows()).zip(out.rows_mut()) {
        let inner = prow.dot(&drow);
        for ((o, &pv), &dv) in orow.iter_mut().zip(prow).zip(drow) {
            *o = pv * (dv - inner);
        }
    }
    out
}
