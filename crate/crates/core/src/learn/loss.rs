//! Training objective and its gradient.
//!
//! Per row with `K` noise draws `u_1..u_K`:
//!
//! - fit: `MSE(onehot(y), E_u p_x(z, u)) + MSE(y*, E_u p_x*(z, u))`. With
//!   `K > 1` the squared error of the noise mean is estimated from cross
//!   products of distinct draws, which is unbiased; the plain square of the
//!   sample mean would add the sampling variance and reward heads that
//!   ignore `u`. Cross-entropy uses the log of the sample mean.
//! - sharpness: `beta * mean over heads and draws of (1 - sum_m p_m^2)`,
//! - penalty: `lambda * mean over draws of sum over adjacent treatments
//!   max(0, E_rank[head_lo] - E_rank[head_hi])`.
//!
//! All three are averaged over the rows of the batch.

use ndarray::Array2;

use super::model::{ModelGrads, TwinModel};
use super::nn::{softmax, softmax_backward};
use super::{LossKind, PenaltyKind, TrainConfig};
use crate::error::{Error, Result};
use crate::ordering::OrderingSpec;

/// Penalty geometry: treatments by position, outcome rank per category.
#[derive(Debug, Clone)]
pub(crate) struct Ranks {
    pub treatment_order: Vec<usize>,
    pub outcome_rank: Vec<f64>,
}

impl Ranks {
    pub fn new(ord: &OrderingSpec, n_treatments: usize, n_outcomes: usize) -> Result<Ranks> {
        ord.validate()?;
        if ord.treatment_order.len() != n_treatments || ord.outcome_order.len() != n_outcomes {
            return Err(Error::InvalidOrdering(format!(
                "ordering over {}x{} categories for a {n_treatments}x{n_outcomes} model",
                ord.treatment_order.len(),
                ord.outcome_order.len()
            )));
        }
        Ok(Ranks {
            treatment_order: ord.treatment_order.iter().map(|&t| t as usize).collect(),
            outcome_rank: ord.outcome_rank().into_iter().map(|r| r as f64).collect(),
        })
    }

    pub fn identity(n_treatments: usize, n_outcomes: usize) -> Ranks {
        Ranks {
            treatment_order: (0..n_treatments).collect(),
            outcome_rank: (0..n_outcomes).map(|r| r as f64).collect(),
        }
    }

    fn expected_rank(&self, p: &Array2<f64>, s: usize) -> f64 {
        p.row(s).iter().zip(&self.outcome_rank).map(|(a, b)| a * b).sum()
    }

    /// Hinge terms of sample `s`, one per adjacent pair.
    fn hinges<'a>(&'a self, probs: &'a [Array2<f64>], s: usize) -> impl Iterator<Item = (usize, usize, f64)> + 'a {
        self.treatment_order.windows(2).map(move |w| {
            let gap = self.expected_rank(&probs[w[0]], s) - self.expected_rank(&probs[w[1]], s);
            (w[0], w[1], gap)
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    /// Fit terms (factual plus counterfactual).
    pub fit: f64,
    pub sharpness: f64,
    /// Unweighted penalty, mean per noise draw.
    pub penalty: f64,
    /// `fit + beta * sharpness + lambda * penalty`.
    pub total: f64,
}

pub(crate) struct Evaluation {
    pub parts: LossParts,
    pub grads: Option<ModelGrads>,
    /// Activation and hinge sign pattern; equal signatures mean no kink was
    /// crossed between two evaluations.
    pub signature: Vec<bool>,
}

/// Loss on a batch with fixed noise (`noise` holds `K` rows per batch row).
#[allow(clippy::too_many_arguments)]
pub(crate) fn evaluate(
    model: &TwinModel,
    z: &Array2<f64>,
    x: &[u32],
    x_star: &[u32],
    y: &[u32],
    y_star: &Array2<f64>,
    noise: &Array2<f64>,
    cfg: &TrainConfig,
    ranks: &Ranks,
    with_grads: bool,
) -> Result<Evaluation> {
    let (logits, cache) = model.logits_cached(z, noise)?;
    let probs: Vec<Array2<f64>> = logits.iter().map(softmax).collect();
    let b = x.len();
    let k = cache.draws;
    let m = model.config.n_outcomes;
    let n_heads = probs.len();
    let mut dprobs: Vec<Array2<f64>> = probs.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
    let mut parts = LossParts::default();

    // fit terms on the K-draw average of the factual and counterfactual heads
    for r in 0..b {
        for (head, target) in [(x[r] as usize, Target::OneHot(y[r] as usize)), (x_star[r] as usize, Target::Soft(r))] {
            let mut avg = vec![0.0; m];
            for j in 0..k {
                for (c, a) in avg.iter_mut().enumerate() {
                    *a += probs[head][[r * k + j, c]] / k as f64;
                }
            }
            let t = |c: usize| match target {
                Target::OneHot(yv) => f64::from(u8::from(c == yv)),
                Target::Soft(row) => y_star[[row, c]],
            };
            let mut davg = vec![0.0; m];
            match cfg.loss {
                LossKind::Mse if k > 1 => {
                    // unbiased for (E_u p - t)^2: cross terms between distinct draws only
                    let norm = (k * (k - 1) * m * b) as f64;
                    for c in 0..m {
                        let e: Vec<f64> = (0..k).map(|j| probs[head][[r * k + j, c]] - t(c)).collect();
                        let sum: f64 = e.iter().sum();
                        parts.fit += (sum * sum - e.iter().map(|v| v * v).sum::<f64>()) / norm;
                        for (j, ej) in e.iter().enumerate() {
                            dprobs[head][[r * k + j, c]] += 2.0 * (sum - ej) / norm;
                        }
                    }
                    continue;
                }
                LossKind::Mse => {
                    for c in 0..m {
                        let e = avg[c] - t(c);
                        parts.fit += e * e / (m * b) as f64;
                        davg[c] = 2.0 * e / (m * b) as f64;
                    }
                }
                LossKind::CrossEntropy => {
                    for c in 0..m {
                        let tc = t(c);
                        if tc > 0.0 {
                            let a = avg[c].max(1e-300);
                            parts.fit -= tc * a.ln() / b as f64;
                            davg[c] = -tc / (a * b as f64);
                        }
                    }
                }
            }
            for j in 0..k {
                for c in 0..m {
                    dprobs[head][[r * k + j, c]] += davg[c] / k as f64;
                }
            }
        }
    }

    // sharpness over every head and draw
    let samples = b * k;
    if cfg.sharpness > 0.0 {
        let scale = 1.0 / (samples * n_heads) as f64;
        for (p, dp) in probs.iter().zip(dprobs.iter_mut()) {
            for (pv, dv) in p.iter().zip(dp.iter_mut()) {
                parts.sharpness -= pv * pv * scale;
                *dv -= cfg.sharpness * 2.0 * pv * scale;
            }
        }
        parts.sharpness += 1.0;
    }

    let mut signature = Vec::new();
    let use_penalty = cfg.penalty == PenaltyKind::PairwiseHinge && cfg.lambda > 0.0;
    // the penalty is always reported; it only enters the objective when on
    {
        for s in 0..samples {
            for (lo, hi, gap) in ranks.hinges(&probs, s).collect::<Vec<_>>() {
                if use_penalty {
                    signature.push(gap > 0.0);
                }
                if gap > 0.0 {
                    parts.penalty += gap / samples as f64;
                    if use_penalty {
                        let g = cfg.lambda / samples as f64;
                        for c in 0..m {
                            dprobs[lo][[s, c]] += g * ranks.outcome_rank[c];
                            dprobs[hi][[s, c]] -= g * ranks.outcome_rank[c];
                        }
                    }
                }
            }
        }
    }
    parts.total = parts.fit + cfg.sharpness * parts.sharpness;
    if use_penalty {
        parts.total += cfg.lambda * parts.penalty;
    }

    cache.z_cache.signature(&mut signature);
    cache.u_cache.signature(&mut signature);
    for c in &cache.head_caches {
        c.signature(&mut signature);
    }

    let grads = with_grads.then(|| {
        let dlogits = probs.iter().zip(&dprobs).map(|(p, dp)| softmax_backward(p, dp)).collect();
        model.backward(&cache, dlogits)
    });
    Ok(Evaluation {
        parts,
        grads,
        signature,
    })
}

enum Target {
    OneHot(usize),
    Soft(usize),
}

/// Sum over samples of the pairwise hinge on expected outcome rank, one
/// sample per row of `noise` (with `noise.nrows() / z.nrows()` draws per
/// covariate row).
pub fn penalty(model: &TwinModel, ord: &OrderingSpec, z: &Array2<f64>, noise: &Array2<f64>) -> Result<f64> {
    let ranks = Ranks::new(ord, model.config.n_treatments, model.config.n_outcomes)?;
    let probs = model.head_probs(z, noise)?;
    let samples = probs[0].nrows();
    Ok((0..samples)
        .map(|s| ranks.hinges(&probs, s).map(|(_, _, g)| g.max(0.0)).sum::<f64>())
        .sum())
}
