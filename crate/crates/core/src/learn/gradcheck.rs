//! Finite-difference verification of the analytic gradient.

use serde::Serialize;

use super::dataset::TwinDataset;
use super::loss::{evaluate, Evaluation, Ranks};
use super::model::TwinModel;
use super::train::draw_noise;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::rng;

/// Denominator floor of the relative error.
const FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckReport {
    /// `max |a - n| / max(1e-8, |a| + |n|)` over checked parameters.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameters whose perturbation crossed a ReLU or hinge kink, where
    /// the derivative does not exist.
    pub skipped: usize,
}

/// Compares the analytic gradient of the full objective on `batch` with
/// central differences, every parameter, with noise fixed by `seed`.
pub fn grad_check(
    model: &TwinModel,
    batch: &TwinDataset,
    cfg: &TrainConfig,
    eps: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::InvalidConfig(format!("eps {eps} outside [1e-7, 1e-3]")));
    }
    cfg.validate()?;
    let ranks = match &cfg.ordering {
        Some(o) => Ranks::new(o, batch.n_treatments, batch.n_outcomes)?,
        None => Ranks::identity(batch.n_treatments, batch.n_outcomes),
    };
    let mut r = rng::seeded(seed, rng::stream::NOISE);
    let noise = draw_noise(cfg, batch.len() * cfg.noise_draws, model.config.noise_dim, &mut r);
    let eval = |m: &TwinModel, grads: bool| -> Result<Evaluation> {
        evaluate(m, &batch.z, &batch.x, &batch.x_star, &batch.y, &batch.y_star, &noise, cfg, &ranks, grads)
    };
    let base = eval(model, true)?;
    let analytic = base.grads.as_ref().expect("requested").flatten();
    let params = model.params();
    let mut work = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    for (i, (&p, &a)) in params.iter().zip(&analytic).enumerate() {
        work.set_param(i, p + eps);
        let plus = eval(&work, false)?;
        work.set_param(i, p - eps);
        let minus = eval(&work, false)?;
        work.set_param(i, p);
        if plus.signature != base.signature || minus.signature != base.signature {
            report.skipped += 1;
            continue;
        }
        let n = (plus.parts.total - minus.parts.total) / (2.0 * eps);
        let rel = (a - n).abs() / FLOOR.max(a.abs() + n.abs());
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    Ok(report)
}
