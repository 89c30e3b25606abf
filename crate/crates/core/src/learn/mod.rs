//! Deep twin networks.
//!
//! A covariate block and a noise block feed one head per treatment; each
//! head outputs a distribution over outcome categories. Sampling a noise
//! value and reading two heads gives a joint factual/counterfactual draw.

mod dataset;
mod eval;
mod gradcheck;
mod infer;
mod loss;
mod model;
pub mod nn;
mod train;

pub use dataset::{make_labels, Columns, LabelSource, TwinDataset};
pub use eval::{counterfactual_f1, macro_f1, predict_counterfactual, F1Report};
pub use gradcheck::{grad_check, GradCheckReport};
pub use infer::{counterfactual_posterior, head_marginals, sample_joint, JointCounts};
pub use loss::{penalty, LossParts};
pub use model::{ModelConfig, ModelGrads, TwinModel};
pub use nn::Activation;
pub use train::{model_config, train, train_from, EpochStats, TrainResult};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::OrderingSpec;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyKind {
    None,
    #[default]
    PairwiseHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Standard normal.
    #[default]
    Normal,
    /// Uniform on `[0, 1)`.
    Uniform,
}

impl NoiseKind {
    pub fn sample(self, rng: &mut Rng) -> f64 {
        match self {
            NoiseKind::Normal => StandardNormal.sample(rng),
            NoiseKind::Uniform => rng.gen::<f64>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    #[default]
    Mse,
    CrossEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub lambda: f64,
    pub penalty: PenaltyKind,
    pub seed: u64,
    pub noise: NoiseKind,
    pub noise_dim: usize,
    /// Noise draws per row (`K`).
    pub noise_draws: usize,
    /// Weight of the sharpness term (`beta`).
    pub sharpness: f64,
    pub loss: LossKind,
    pub width: usize,
    pub activation: Activation,
    /// Ordering used by the penalty; natural order when absent.
    pub ordering: Option<OrderingSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.5,
            batch_size: 64,
            epochs: 30,
            lambda: 0.3,
            penalty: PenaltyKind::PairwiseHinge,
            seed: 0,
            noise: NoiseKind::Normal,
            noise_dim: 1,
            noise_draws: 8,
            sharpness: 0.15,
            loss: LossKind::Mse,
            width: 32,
            activation: Activation::Relu,
            ordering: None,
        }
    }
}

impl TrainConfig {
    /// The same config with the penalty switched off.
    pub fn unconstrained(&self) -> TrainConfig {
        TrainConfig {
            lambda: 0.0,
            penalty: PenaltyKind::None,
            ..self.clone()
        }
    }

    pub(crate) fn lambda_effective(&self) -> f64 {
        if self.penalty == PenaltyKind::PairwiseHinge {
            self.lambda
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} must be positive")));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate");
        }
        if self.batch_size == 0 {
            return bad("batch size");
        }
        if self.noise_dim == 0 {
            return bad("noise dimension");
        }
        if self.noise_draws == 0 {
            return bad("noise draws");
        }
        if self.width == 0 {
            return bad("width");
        }
        if self.lambda < 0.0 || self.sharpness < 0.0 {
            return Err(Error::InvalidConfig("lambda and sharpness must be nonnegative".into()));
        }
        Ok(())
    }
}
