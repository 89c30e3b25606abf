//! Scoring counterfactual predictions against generator ground truth.

use serde::{Deserialize, Serialize};

use super::dataset::Columns;
use super::infer::{counterfactual_posterior, head_marginals};
use super::model::TwinModel;
use crate::datagen::Generated;
use crate::error::Result;
use crate::rng;

/// Macro-averaged F1 over the classes present in `truth` or `pred`.
pub fn macro_f1(truth: &[u32], pred: &[u32], classes: usize) -> f64 {
    let mut scores = Vec::new();
    for c in 0..classes as u32 {
        let tp = truth.iter().zip(pred).filter(|&(&t, &p)| t == c && p == c).count() as f64;
        let fp = truth.iter().zip(pred).filter(|&(&t, &p)| t != c && p == c).count() as f64;
        let fn_ = truth.iter().zip(pred).filter(|&(&t, &p)| t == c && p != c).count() as f64;
        if tp + fp + fn_ == 0.0 {
            continue;
        }
        scores.push(2.0 * tp / (2.0 * tp + fp + fn_));
    }
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn argmax<T: PartialOrd + Copy>(v: &[T]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Most frequent `y*` among `n` posterior draws given `(z, x, y)`. Falls
/// back to the mode of the counterfactual head when no draw matches `y`.
pub fn predict_counterfactual(
    model: &TwinModel,
    z: &[f64],
    x: usize,
    y: usize,
    x_star: usize,
    n: usize,
    seed: u64,
) -> Result<(u32, bool)> {
    let counts = counterfactual_posterior(model, z, x, y, x_star, n, seed)?;
    if counts.iter().sum::<usize>() > 0 {
        return Ok((argmax(&counts) as u32, false));
    }
    let marg = head_marginals(model, z, x_star, n, rng::split(seed, 1))?;
    Ok((argmax(&marg) as u32, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub f1: f64,
    /// Scored (unit, counterfactual treatment) pairs.
    pub pairs: usize,
    /// Pairs predicted from the head marginal because no draw matched.
    pub fallbacks: usize,
}

/// Counterfactual-head F1 over every row of `gen` and every `x* != x`,
/// truth read from the generator's latent sidecar.
pub fn counterfactual_f1(model: &TwinModel, gen: &Generated, cols: &Columns, n: usize, seed: u64) -> Result<F1Report> {
    let x = gen.data.category(&cols.treatment)?;
    let y = gen.data.category(&cols.outcome)?;
    let z = cols.covariates(&gen.data)?;
    let nt = gen.treatment_cardinality();
    let (mut truth, mut pred) = (Vec::new(), Vec::new());
    let mut fallbacks = 0;
    for r in 0..x.len() {
        let zr = z.row(r).to_vec();
        for t in (0..nt).filter(|&t| t != x[r]) {
            let s = rng::split(seed, (r as u64) * u64::from(nt) + u64::from(t));
            let (p, fb) = predict_counterfactual(model, &zr, x[r] as usize, y[r] as usize, t as usize, n, s)?;
            fallbacks += usize::from(fb);
            truth.push(gen.counterfactual(r, t)?);
            pred.push(p);
        }
    }
    Ok(F1Report {
        f1: macro_f1(&truth, &pred, gen.outcome_cardinality() as usize),
        pairs: truth.len(),
        fallbacks,
    })
}
