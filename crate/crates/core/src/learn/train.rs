//! Mini-batch SGD.

use std::io::Write;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::TwinDataset;
use super::loss::{evaluate, Ranks};
use super::model::{ModelConfig, TwinModel};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean objective without the penalty term.
    pub loss: f64,
    /// Mean unweighted penalty per noise draw.
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: TwinModel,
    pub curve: Vec<EpochStats>,
}

impl TrainResult {
    /// Whether the recorded loss never increased between epochs.
    pub fn loss_nonincreasing(&self) -> bool {
        self.curve.windows(2).all(|w| w[1].loss <= w[0].loss)
    }

    /// CSV with columns `epoch,loss,penalty`.
    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.curve {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn draw_noise(cfg: &TrainConfig, rows: usize, dim: usize, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, dim), || cfg.noise.sample(rng))
}

/// Model architecture implied by a dataset and a training config.
pub fn model_config(data: &TwinDataset, cfg: &TrainConfig) -> ModelConfig {
    let mut mc = ModelConfig::new(data.z_dim(), cfg.noise_dim, data.n_treatments, data.n_outcomes)
        .with_width(cfg.width);
    mc.activation = cfg.activation;
    mc.noise = cfg.noise;
    mc
}

pub fn train(data: &TwinDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidData("empty training set".into()));
    }
    let model = TwinModel::new(model_config(data, cfg), cfg.seed)?;
    train_from(model, data, cfg)
}

/// Continues training an existing model.
pub fn train_from(mut model: TwinModel, data: &TwinDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let ranks = match &cfg.ordering {
        Some(o) => Ranks::new(o, data.n_treatments, data.n_outcomes)?,
        None => Ranks::identity(data.n_treatments, data.n_outcomes),
    };
    let mut shuffle = rng::seeded(cfg.seed, rng::stream::SHUFFLE);
    let mut noise_rng = rng::seeded(cfg.seed, rng::stream::NOISE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let (mut loss, mut pen) = (0.0, 0.0);
        for (bi, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let z = data.z.select(Axis(0), chunk);
            let ys = data.y_star.select(Axis(0), chunk);
            let x: Vec<u32> = chunk.iter().map(|&r| data.x[r]).collect();
            let xs: Vec<u32> = chunk.iter().map(|&r| data.x_star[r]).collect();
            let y: Vec<u32> = chunk.iter().map(|&r| data.y[r]).collect();
            let noise = draw_noise(cfg, chunk.len() * cfg.noise_draws, cfg.noise_dim, &mut noise_rng);
            let ev = evaluate(&model, &z, &x, &xs, &y, &ys, &noise, cfg, &ranks, true)?;
            if !ev.parts.total.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: bi });
            }
            let w = chunk.len() as f64 / data.len() as f64;
            loss += w * (ev.parts.total - cfg.lambda_effective() * ev.parts.penalty);
            pen += w * ev.parts.penalty;
            model.sgd_step(ev.grads.as_ref().expect("requested"), cfg.lr);
        }
        curve.push(EpochStats {
            epoch,
            loss,
            penalty: pen,
        });
    }
    Ok(TrainResult { model, curve })
}
