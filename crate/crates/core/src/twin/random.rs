//! Random queries with positive evidence probability.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{CounterfactualQuery, TargetEvent};
use crate::rng;
use crate::scm::{Assignment, Cmp, LatentSampler, Scm};

/// A random query on `scm`. Evidence values come from one forward sample and
/// the target value from the counterfactual world of the same latent draw, so
/// both the evidence and the target have positive probability.
pub fn random_query(scm: &Scm, seed: u64) -> CounterfactualQuery {
    let mut rng = rng::seeded(seed, rng::stream::RANDOM_MODEL);
    let observed: Vec<usize> = scm.observed().to_vec();
    let sampler = LatentSampler::new(scm);
    let mut values = vec![0u32; scm.variables().len()];
    sampler.draw(&mut rng, &mut values);

    let cf_var = *observed.choose(&mut rng).expect("model has observed variables");
    let cf_value = rng.gen_range(0..scm.cardinality(cf_var));
    let rest: Vec<usize> = observed.iter().copied().filter(|&v| v != cf_var).collect();
    let mut pool = if rest.is_empty() { observed.clone() } else { rest };
    pool.shuffle(&mut rng);
    let target_var = pool[0];

    let mut factual_do = Assignment::new();
    if pool.len() > 2 && rng.gen_bool(0.25) {
        let v = pool[pool.len() - 1];
        factual_do.insert(scm.name(v).to_string(), rng.gen_range(0..scm.cardinality(v)));
    }
    let factual = scm.intervene(&factual_do).expect("valid intervention");
    factual.propagate(&mut values);

    let mut evidence = Assignment::new();
    let n_evidence = rng.gen_range(1..=2usize);
    for &v in observed.iter().filter(|&&v| !factual_do.contains_key(scm.name(v))) {
        if evidence.len() < n_evidence && rng.gen_bool(0.5) {
            evidence.insert(scm.name(v).to_string(), values[v]);
        }
    }

    let mut cf_do = Assignment::new();
    cf_do.insert(scm.name(cf_var).to_string(), cf_value);
    let cf = scm.intervene(&cf_do).expect("valid intervention");
    let mut cv = values.clone();
    cf.propagate(&mut cv);
    let op = *[Cmp::Eq, Cmp::Eq, Cmp::Ge, Cmp::Le].choose(&mut rng).unwrap();

    CounterfactualQuery {
        target: vec![TargetEvent::cf(scm.name(target_var), op, cv[target_var])],
        evidence,
        factual_intervention: factual_do,
        cf_intervention: cf_do,
    }
}

