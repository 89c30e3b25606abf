//! Sampling counterfactuals from a trained model.
//!
//! Noise `u` is drawn from the base distribution; the factual and
//! counterfactual outcomes are then drawn independently from their heads at
//! the same `(z, u)`. Conditioning on evidence is done by rejection.

use ndarray::Array2;
use rand::Rng as _;

use super::model::TwinModel;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

const CHUNK: usize = 4096;

/// Counts of `(y_x, y_x*)` draws, indexed `[y][y_star]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCounts {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl JointCounts {
    pub fn total(&self) -> usize {
        self.n
    }

    /// Draws whose factual outcome equals `y`.
    pub fn accepted(&self, y: usize) -> usize {
        self.counts[y].iter().sum()
    }
}

fn categorical(p: ndarray::ArrayView1<f64>, rng: &mut Rng) -> usize {
    let t: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if t < acc {
            return i;
        }
    }
    p.len() - 1
}

fn check_treatments(model: &TwinModel, xs: &[usize]) -> Result<()> {
    let n = model.config.n_treatments;
    match xs.iter().find(|&&x| x >= n) {
        Some(&x) => Err(Error::ValueOutOfRange {
            variable: "treatment".into(),
            value: x as u32,
            cardinality: n as u32,
        }),
        None => Ok(()),
    }
}

/// `n` joint draws with covariate rows picked uniformly from `pool`.
pub fn sample_joint(
    model: &TwinModel,
    pool: &Array2<f64>,
    x: usize,
    x_star: usize,
    n: usize,
    seed: u64,
) -> Result<JointCounts> {
    check_treatments(model, &[x, x_star])?;
    if pool.nrows() == 0 {
        return Err(Error::InvalidData("no covariate rows to sample from".into()));
    }
    let m = model.config.n_outcomes;
    let d = model.config.noise_dim;
    let mut rng = rng::seeded(seed, rng::stream::INFERENCE);
    let mut counts = vec![vec![0usize; m]; m];
    let mut done = 0;
    while done < n {
        let size = CHUNK.min(n - done);
        let rows: Vec<usize> = (0..size).map(|_| rng.gen_range(0..pool.nrows())).collect();
        let z = pool.select(ndarray::Axis(0), &rows);
        let noise = Array2::from_shape_simple_fn((size, d), || model.config.noise.sample(&mut rng));
        let probs = model.head_probs(&z, &noise)?;
        for s in 0..size {
            let y = categorical(probs[x].row(s), &mut rng);
            let ys = categorical(probs[x_star].row(s), &mut rng);
            counts[y][ys] += 1;
        }
        done += size;
    }
    Ok(JointCounts { counts, n })
}

/// Rejection sampler for one unit: counts of `y*` among `n` draws whose
/// factual outcome matched `y`.
pub fn counterfactual_posterior(
    model: &TwinModel,
    z: &[f64],
    x: usize,
    y: usize,
    x_star: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let pool = Array2::from_shape_vec((1, z.len()), z.to_vec())
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let joint = sample_joint(model, &pool, x, x_star, n, seed)?;
    if y >= joint.counts.len() {
        return Err(Error::ValueOutOfRange {
            variable: "outcome".into(),
            value: y as u32,
            cardinality: joint.counts.len() as u32,
        });
    }
    Ok(joint.counts[y].clone())
}

/// Mean head distribution of treatment `x` at `z` over `n` noise draws.
pub fn head_marginals(model: &TwinModel, z: &[f64], x: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_treatments(model, &[x])?;
    let mut rng = rng::seeded(seed, rng::stream::INFERENCE);
    let d = model.config.noise_dim;
    let za = Array2::from_shape_vec((1, z.len()), z.to_vec()).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let noise = Array2::from_shape_simple_fn((n, d), || model.config.noise.sample(&mut rng));
    let p = model.head_probs(&za, &noise)?;
    Ok(p[x].mean_axis(ndarray::Axis(0)).expect("n > 0").to_vec())
}
