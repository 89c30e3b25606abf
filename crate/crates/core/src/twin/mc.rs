//! Rejection sampling on the twin network.

use super::{compile, CounterfactualQuery, Estimate};
use crate::error::{Error, Result};
use crate::rng;
use crate::scm::{LatentSampler, Scm};

/// Draw `n` latent configurations, keep those matching the evidence and
/// report the fraction of kept draws that satisfy the target.
pub fn counterfactual_mc(scm: &Scm, q: &CounterfactualQuery, n: usize, seed: u64) -> Result<Estimate> {
    let c = compile(scm, q)?;
    let sampler = LatentSampler::new(&c.world);
    let mut rng = rng::seeded(seed, rng::stream::TWIN_MC);
    let mut values = vec![0u32; c.world.variables().len()];
    let (mut accepted, mut hits) = (0usize, 0usize);
    for _ in 0..n {
        sampler.draw(&mut rng, &mut values);
        c.world.propagate(&mut values);
        if c.evidence.holds(&values) {
            accepted += 1;
            if c.target.holds(&values) {
                hits += 1;
            }
        }
    }
    if accepted == 0 {
        return Err(Error::NoAcceptedSamples { draws: n });
    }
    Ok(Estimate::binomial(hits, accepted))
}
