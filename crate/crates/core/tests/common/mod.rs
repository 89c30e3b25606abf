#![allow(dead_code)]

use twincf::scm::{tuples, Assignment, Cmp, Scm};
use twincf::twin::{CounterfactualQuery, World};

/// Evaluate every observed variable of `scm` under `latent` values with the
/// given intervention, by repeated sweeps until a fixed point.
pub fn solve(scm: &Scm, latent: &[u32], intervention: &Assignment) -> Vec<u32> {
    let mut values = vec![0u32; scm.variables().len()];
    for (i, &l) in scm.latents().iter().enumerate() {
        values[l] = latent[i];
    }
    for _ in 0..scm.variables().len() {
        for &v in scm.observed() {
            let name = scm.name(v);
            values[v] = match intervention.get(name) {
                Some(&x) => x,
                None => {
                    let m = scm.mechanism(v).unwrap();
                    m.eval(&values)
                }
            };
        }
    }
    values
}

fn test(cmp: Cmp, actual: u32, value: u32) -> bool {
    match cmp {
        Cmp::Eq => actual == value,
        Cmp::Ge => actual >= value,
        Cmp::Le => actual <= value,
    }
}

/// Counterfactual probability by explicit abduction over every latent tuple.
pub fn brute_force(scm: &Scm, q: &CounterfactualQuery) -> Option<f64> {
    let cards: Vec<u32> = scm.latents().iter().map(|&l| scm.cardinality(l)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for u in tuples(&cards) {
        let p: f64 = scm
            .latents()
            .iter()
            .zip(&u)
            .map(|(&l, &c)| scm.latent_probs(l).unwrap()[c as usize])
            .product();
        if p == 0.0 {
            continue;
        }
        let f = solve(scm, &u, &q.factual_intervention);
        let consistent = q.evidence.iter().all(|(k, &v)| f[scm.id(k).unwrap()] == v);
        if !consistent {
            continue;
        }
        den += p;
        let c = solve(scm, &u, &q.cf_intervention);
        let hit = q.target.iter().all(|t| {
            let id = scm.id(&t.var).unwrap();
            let actual = match t.world {
                World::Factual => f[id],
                World::Counterfactual => c[id],
            };
            test(t.event.op, actual, t.event.value)
        });
        if hit {
            num += p;
        }
    }
    (den > 1e-15).then(|| num / den)
}

pub fn assign(pairs: &[(&str, u32)]) -> Assignment {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Every `u` with positive probability has `Y_x(u)` nondecreasing in the
/// natural code order of `x` (outcome codes compared as integers).
pub fn monotone_oracle(scm: &Scm, x: &str, y: &str) -> bool {
    let cards: Vec<u32> = scm.latents().iter().map(|&l| scm.cardinality(l)).collect();
    let yid = scm.id(y).unwrap();
    let nx = scm.cardinality(scm.id(x).unwrap());
    let all = tuples(&cards).all(|u| {
        let positive = scm
            .latents()
            .iter()
            .zip(&u)
            .all(|(&l, &c)| scm.latent_probs(l).unwrap()[c as usize] > 0.0);
        if !positive {
            return true;
        }
        let ys: Vec<u32> = (0..nx)
            .map(|xv| {
                let mut a = Assignment::new();
                a.insert(x.to_string(), xv);
                solve(scm, &u, &a)[yid]
            })
            .collect();
        ys.windows(2).all(|w| w[0] <= w[1])
    });
    all
}
