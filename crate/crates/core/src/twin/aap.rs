//! Abduction, action, prediction.
//!
//! Abduction enumerates the latent configurations consistent with the
//! evidence in the factual model and keeps their posterior weights. Prediction
//! draws from that posterior and pushes each draw through the factual and the
//! counterfactual model. When enumeration would exceed the model's cap the
//! posterior is replaced by prior draws filtered on the evidence.

use rand::distributions::{Distribution, WeightedIndex};

use super::{CounterfactualQuery, Estimate, World};
use crate::error::{Error, Result};
use crate::rng;
use crate::scm::{Condition, Event, LatentSampler, Scm, ZERO_EVIDENCE};

pub fn counterfactual_aap(scm: &Scm, q: &CounterfactualQuery, n: usize, seed: u64) -> Result<Estimate> {
    q.validate(scm)?;
    let factual = scm.intervene(&q.factual_intervention)?;
    let cf = scm.intervene(&q.cf_intervention)?;
    let evidence = Event::eq(&scm.resolve(&q.evidence)?);
    let (mut in_factual, mut in_cf) = (Vec::new(), Vec::new());
    for t in &q.target {
        let cond = Condition {
            var: scm.id(&t.var)?,
            cmp: t.event.op,
            value: t.event.value,
        };
        match t.world {
            World::Factual => in_factual.push(cond),
            World::Counterfactual => in_cf.push(cond),
        }
    }
    let (in_factual, in_cf) = (Event(in_factual), Event(in_cf));
    let latents = scm.latents();
    let mut rng = rng::seeded(seed, rng::stream::AAP);
    let mut fv = vec![0u32; scm.variables().len()];
    let mut cv = fv.clone();

    let predict = |fv: &mut Vec<u32>, cv: &mut Vec<u32>| -> bool {
        for &l in latents {
            cv[l] = fv[l];
        }
        cf.propagate(cv);
        in_factual.holds(fv) && in_cf.holds(cv)
    };

    if scm.check_cap().is_ok() {
        let mut configs: Vec<Vec<u32>> = Vec::new();
        let mut weights = Vec::new();
        factual.for_each_world(|values, p| {
            if evidence.holds(values) {
                configs.push(latents.iter().map(|&l| values[l]).collect());
                weights.push(p);
            }
        })?;
        let z: f64 = weights.iter().sum();
        if z < ZERO_EVIDENCE {
            return Err(Error::ZeroEvidence { prob: z });
        }
        let posterior = WeightedIndex::new(&weights).expect("positive weights");
        let mut hits = 0;
        for _ in 0..n {
            let cfg = &configs[posterior.sample(&mut rng)];
            for (&l, &u) in latents.iter().zip(cfg) {
                fv[l] = u;
            }
            factual.propagate(&mut fv);
            if predict(&mut fv, &mut cv) {
                hits += 1;
            }
        }
        return Ok(Estimate::binomial(hits, n));
    }

    let sampler = LatentSampler::new(scm);
    let (mut accepted, mut hits) = (0, 0);
    for _ in 0..n {
        sampler.draw(&mut rng, &mut fv);
        factual.propagate(&mut fv);
        if evidence.holds(&fv) {
            accepted += 1;
            if predict(&mut fv, &mut cv) {
                hits += 1;
            }
        }
    }
    if accepted == 0 {
        return Err(Error::NoAcceptedSamples { draws: n });
    }
    Ok(Estimate::binomial(hits, accepted))
}
