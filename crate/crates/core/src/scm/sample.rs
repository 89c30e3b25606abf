//! Ancestral sampling.

use rand::distributions::{Distribution, WeightedIndex};

use super::{Assignment, Scm};
use crate::rng::{self, Rng};

/// Samples over the observed variables, one row per draw in
/// `names` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub names: Vec<String>,
    pub rows: Vec<Vec<u32>>,
}

impl SampleSet {
    pub fn to_assignments(&self) -> Vec<Assignment> {
        self.rows
            .iter()
            .map(|r| self.names.iter().cloned().zip(r.iter().copied()).collect())
            .collect()
    }
}

/// Per-latent categorical samplers, built once per model.
#[derive(Debug, Clone)]
pub(crate) struct LatentSampler {
    slots: Vec<(usize, Option<WeightedIndex<f64>>)>,
}

impl LatentSampler {
    pub fn new(scm: &Scm) -> LatentSampler {
        let slots = scm
            .latents()
            .iter()
            .map(|&l| {
                let probs = scm.latent_probs(l).expect("latent has distribution");
                let dist = if probs.len() > 1 {
                    Some(WeightedIndex::new(probs).expect("validated distribution"))
                } else {
                    None
                };
                (l, dist)
            })
            .collect();
        LatentSampler { slots }
    }

    #[inline]
    pub fn draw(&self, rng: &mut Rng, values: &mut [u32]) {
        for (l, dist) in &self.slots {
            values[*l] = match dist {
                Some(d) => d.sample(rng) as u32,
                None => 0,
            };
        }
    }
}

impl Scm {
    /// `n` ancestral samples over the observed variables.
    pub fn sample_rows(&self, n: usize, seed: u64) -> SampleSet {
        let mut rng = rng::seeded(seed, rng::stream::SAMPLE);
        let sampler = LatentSampler::new(self);
        let mut values = vec![0u32; self.variables().len()];
        let rows = (0..n)
            .map(|_| {
                sampler.draw(&mut rng, &mut values);
                self.propagate(&mut values);
                self.observed().iter().map(|&v| values[v]).collect()
            })
            .collect();
        SampleSet {
            names: self.observed().iter().map(|&v| self.name(v).to_string()).collect(),
            rows,
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<Assignment> {
        self.sample_rows(n, seed).to_assignments()
    }
}
