//! The deep twin network: covariate block, noise block and one head per
//! treatment.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::NoiseKind;
use super::nn::{softmax, Activation, Dense, DenseGrad, DenseJson, Mlp, MlpCache};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub z_dim: usize,
    pub noise_dim: usize,
    pub n_treatments: usize,
    pub n_outcomes: usize,
    #[serde(default = "default_width")]
    pub z_hidden: usize,
    #[serde(default = "default_width")]
    pub z_out: usize,
    #[serde(default = "default_width")]
    pub u_hidden: usize,
    #[serde(default = "default_width")]
    pub u_out: usize,
    #[serde(default = "default_width")]
    pub head_hidden: usize,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub noise: NoiseKind,
}

fn default_width() -> usize {
    32
}

impl ModelConfig {
    pub fn new(z_dim: usize, noise_dim: usize, n_treatments: usize, n_outcomes: usize) -> ModelConfig {
        ModelConfig {
            z_dim,
            noise_dim,
            n_treatments,
            n_outcomes,
            z_hidden: 32,
            z_out: 32,
            u_hidden: 32,
            u_out: 32,
            head_hidden: 32,
            activation: Activation::Relu,
            noise: NoiseKind::Normal,
        }
    }

    /// Every width set to `w`.
    pub fn with_width(mut self, w: usize) -> ModelConfig {
        self.z_hidden = w;
        self.z_out = w;
        self.u_hidden = w;
        self.u_out = w;
        self.head_hidden = w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.noise_dim,
            self.n_treatments,
            self.n_outcomes,
            self.z_hidden,
            self.z_out,
            self.u_hidden,
            self.u_out,
            self.head_hidden,
        ];
        if dims.contains(&0) {
            return Err(Error::InvalidConfig(format!("zero width in {self:?}")));
        }
        if self.n_treatments < 2 {
            return Err(Error::InvalidConfig("need at least two treatments".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinModel {
    pub config: ModelConfig,
    pub z_block: Mlp,
    pub u_block: Mlp,
    pub heads: Vec<Mlp>,
}

/// Per-block parameter gradients, same layout as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub z_block: Vec<DenseGrad>,
    pub u_block: Vec<DenseGrad>,
    pub heads: Vec<Vec<DenseGrad>>,
}

/// Intermediate values of a batched forward pass.
pub(crate) struct ForwardCache {
    pub z_cache: MlpCache,
    pub u_cache: MlpCache,
    pub head_caches: Vec<MlpCache>,
    pub z_width: usize,
    pub draws: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    config: ModelConfig,
    z_block: Vec<DenseJson>,
    u_block: Vec<DenseJson>,
    heads: Vec<Vec<DenseJson>>,
}

impl TwinModel {
    /// Random initialisation seeded by `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<TwinModel> {
        config.validate()?;
        let mut r = rng::seeded(seed, rng::stream::INIT);
        let c = &config;
        let act = c.activation;
        let z_block = Mlp::new(&[c.z_dim, c.z_hidden, c.z_out], act, &mut r);
        let u_block = Mlp::new(&[c.noise_dim, c.u_hidden, c.u_out], act, &mut r);
        let heads = (0..c.n_treatments)
            .map(|_| Mlp::new(&[c.z_out + c.u_out, c.head_hidden, c.n_outcomes], act, &mut r))
            .collect();
        Ok(TwinModel {
            config,
            z_block,
            u_block,
            heads,
        })
    }

    /// All parameters zero: every head outputs the uniform distribution.
    pub fn zeros(config: ModelConfig) -> Result<TwinModel> {
        let mut m = TwinModel::new(config, 0)?;
        m.visit_mut(|v| *v = 0.0);
        Ok(m)
    }

    /// Sets the noise block to the identity map `g(u) = relu(u) - relu(-u)`.
    /// Needs `u_out == noise_dim`, `u_hidden >= 2 * noise_dim` and ReLU.
    pub fn identity_noise_block(&mut self) -> Result<()> {
        let c = &self.config;
        let d = c.noise_dim;
        if c.u_out != d || c.u_hidden < 2 * d || c.activation != Activation::Relu {
            return Err(Error::DimensionMismatch(format!(
                "identity noise block needs u_out = {d}, u_hidden >= {} and relu",
                2 * d
            )));
        }
        let mut l1 = Dense::zeros(d, c.u_hidden);
        let mut l2 = Dense::zeros(c.u_hidden, d);
        for i in 0..d {
            l1.w[[i, i]] = 1.0;
            l1.w[[d + i, i]] = -1.0;
            l2.w[[i, i]] = 1.0;
            l2.w[[i, d + i]] = -1.0;
        }
        self.u_block.layers = vec![l1, l2];
        Ok(())
    }

    fn check_inputs(&self, z: &ArrayView2<f64>, noise: &ArrayView2<f64>) -> Result<usize> {
        let c = &self.config;
        if z.ncols() != c.z_dim || noise.ncols() != c.noise_dim {
            return Err(Error::DimensionMismatch(format!(
                "covariates {} (expected {}), noise {} (expected {})",
                z.ncols(),
                c.z_dim,
                noise.ncols(),
                c.noise_dim
            )));
        }
        if z.nrows() == 0 || noise.nrows() % z.nrows() != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} noise rows for {} covariate rows",
                noise.nrows(),
                z.nrows()
            )));
        }
        Ok(noise.nrows() / z.nrows())
    }

    /// The learned map `g` applied to base noise samples.
    pub fn reparam_noise(&self, noise: &Array2<f64>) -> Result<Array2<f64>> {
        if noise.ncols() != self.config.noise_dim {
            return Err(Error::DimensionMismatch(format!(
                "noise has {} columns, expected {}",
                noise.ncols(),
                self.config.noise_dim
            )));
        }
        Ok(self.u_block.forward(noise))
    }

    /// Head logits for every treatment. `noise` holds `draws` rows per
    /// covariate row, grouped by covariate row.
    pub(crate) fn logits_cached(
        &self,
        z: &Array2<f64>,
        noise: &Array2<f64>,
    ) -> Result<(Vec<Array2<f64>>, ForwardCache)> {
        let draws = self.check_inputs(&z.view(), &noise.view())?;
        let (rz, z_cache) = self.z_block.forward_cached(z);
        let (ru, u_cache) = self.u_block.forward_cached(noise);
        let rz_rep = repeat_rows(&rz, draws);
        let h = concatenate(Axis(1), &[rz_rep.view(), ru.view()]).expect("matching rows");
        let mut logits = Vec::with_capacity(self.heads.len());
        let mut head_caches = Vec::with_capacity(self.heads.len());
        for head in &self.heads {
            let (l, c) = head.forward_cached(&h);
            logits.push(l);
            head_caches.push(c);
        }
        Ok((
            logits,
            ForwardCache {
                z_cache,
                u_cache,
                head_caches,
                z_width: rz.ncols(),
                draws,
            },
        ))
    }

    /// Backprop from per-head logit gradients.
    pub(crate) fn backward(&self, cache: &ForwardCache, dlogits: Vec<Array2<f64>>) -> ModelGrads {
        let mut dh: Option<Array2<f64>> = None;
        let mut heads = Vec::with_capacity(self.heads.len());
        for ((head, c), dl) in self.heads.iter().zip(&cache.head_caches).zip(dlogits) {
            let (d, g) = head.backward(c, dl);
            heads.push(g);
            dh = Some(match dh {
                Some(acc) => acc + d,
                None => d,
            });
        }
        let dh = dh.expect("at least one head");
        let w = cache.z_width;
        let drz_rep = dh.slice(ndarray::s![.., ..w]).to_owned();
        let dru = dh.slice(ndarray::s![.., w..]).to_owned();
        let drz = sum_groups(&drz_rep, cache.draws);
        let (_, z_block) = self.z_block.backward(&cache.z_cache, drz);
        let (_, u_block) = self.u_block.backward(&cache.u_cache, dru);
        ModelGrads {
            z_block,
            u_block,
            heads,
        }
    }

    /// Output distributions of every head, shape `(rows * draws, M)` each.
    pub fn head_probs(&self, z: &Array2<f64>, noise: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
        let draws = self.check_inputs(&z.view(), &noise.view())?;
        let rz = repeat_rows(&self.z_block.forward(z), draws);
        let ru = self.u_block.forward(noise);
        let h = concatenate(Axis(1), &[rz.view(), ru.view()]).expect("matching rows");
        Ok(self.heads.iter().map(|hd| softmax(&hd.forward(&h))).collect())
    }

    /// Distributions of the factual head `x` and counterfactual head
    /// `x_star` for one covariate vector and one noise sample.
    pub fn forward(&self, x: usize, x_star: usize, z: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.config.n_treatments;
        if x >= n || x_star >= n {
            return Err(Error::ValueOutOfRange {
                variable: "treatment".into(),
                value: x.max(x_star) as u32,
                cardinality: n as u32,
            });
        }
        let za = Array2::from_shape_vec((1, z.len()), z.to_vec()).expect("row");
        let ua = Array2::from_shape_vec((1, u.len()), u.to_vec()).expect("row");
        let p = self.head_probs(&za, &ua)?;
        Ok((p[x].row(0).to_vec(), p[x_star].row(0).to_vec()))
    }

    fn blocks(&self) -> impl Iterator<Item = &Mlp> {
        std::iter::once(&self.z_block)
            .chain(std::iter::once(&self.u_block))
            .chain(self.heads.iter())
    }

    pub fn param_count(&self) -> usize {
        self.blocks().map(Mlp::param_count).sum()
    }

    /// Visits every parameter in a fixed order (blocks, layers, weights then
    /// biases).
    pub fn visit_mut<F: FnMut(&mut f64)>(&mut self, mut f: F) {
        let blocks = std::iter::once(&mut self.z_block)
            .chain(std::iter::once(&mut self.u_block))
            .chain(self.heads.iter_mut());
        for b in blocks {
            for l in &mut b.layers {
                l.w.iter_mut().for_each(&mut f);
                l.b.iter_mut().for_each(&mut f);
            }
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for b in self.blocks() {
            for l in &b.layers {
                out.extend(l.w.iter());
                out.extend(l.b.iter());
            }
        }
        out
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let mut i = 0;
        self.visit_mut(|v| {
            if i == index {
                *v = value;
            }
            i += 1;
        });
    }

    /// `params -= lr * grads`.
    pub fn sgd_step(&mut self, grads: &ModelGrads, lr: f64) {
        let blocks = std::iter::once((&mut self.z_block, &grads.z_block))
            .chain(std::iter::once((&mut self.u_block, &grads.u_block)))
            .chain(self.heads.iter_mut().zip(&grads.heads));
        for (b, g) in blocks {
            for (l, gl) in b.layers.iter_mut().zip(g) {
                l.w.scaled_add(-lr, &gl.w);
                l.b.scaled_add(-lr, &gl.b);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelJson {
            config: self.config.clone(),
            z_block: self.z_block.to_json(),
            u_block: self.u_block.to_json(),
            heads: self.heads.iter().map(Mlp::to_json).collect(),
        })
        .expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<TwinModel> {
        let j: ModelJson = serde_json::from_str(text)?;
        j.config.validate()?;
        let act = j.config.activation;
        let m = TwinModel {
            z_block: Mlp::from_json(&j.z_block, act)?,
            u_block: Mlp::from_json(&j.u_block, act)?,
            heads: j.heads.iter().map(|h| Mlp::from_json(h, act)).collect::<Result<_>>()?,
            config: j.config,
        };
        let c = &m.config;
        let rep = m.z_block.output_dim() + m.u_block.output_dim();
        let ok = m.z_block.input_dim() == c.z_dim
            && m.u_block.input_dim() == c.noise_dim
            && m.heads.len() == c.n_treatments
            && m.heads.iter().all(|h| h.input_dim() == rep && h.output_dim() == c.n_outcomes);
        if !ok {
            return Err(Error::DimensionMismatch("weights do not match the model config".into()));
        }
        Ok(m)
    }
}

impl ModelGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for block in std::iter::once(&self.z_block)
            .chain(std::iter::once(&self.u_block))
            .chain(self.heads.iter())
        {
            for g in block {
                out.extend(g.w.iter());
                out.extend(g.b.iter());
            }
        }
        out
    }
}

pub(crate) fn repeat_rows(a: &Array2<f64>, k: usize) -> Array2<f64> {
    if k == 1 {
        return a.clone();
    }
    let mut out = Array2::zeros((a.nrows() * k, a.ncols()));
    for (r, row) in a.rows().into_iter().enumerate() {
        for j in 0..k {
            out.row_mut(r * k + j).assign(&row);
        }
    }
    out
}

fn sum_groups(a: &Array2<f64>, k: usize) -> Array2<f64> {
    if k == 1 {
        return a.clone();
    }
    let mut out = Array2::zeros((a.nrows() / k, a.ncols()));
    for (r, row) in a.rows().into_iter().enumerate() {
        let mut o = out.row_mut(r / k);
        o += &row;
    }
    out
}
