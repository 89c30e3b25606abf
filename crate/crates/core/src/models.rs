//! Reference models and seeded random model generators.
//!
//! The random generators back the property suites and the bench command.
//! Their recipe is fixed so any failure can be replayed from its seed:
//! latent cardinality at most 6, latent probabilities from a symmetric
//! Dirichlet(1), mechanism tables uniform over child categories.

use rand::Rng as _;
use rand_distr::{Distribution, Dirichlet};

use crate::rng::{self, Rng};
use crate::scm::{Scm, VarKind};

/// The two-variable model `X -> Y` with a four-valued `U_Y`:
/// `Y = X` (u=0), `0` (u=1), `1` (u=2), `not X` (u=3).
pub fn eq2(q: [f64; 4], px1: f64) -> Scm {
    Scm::builder()
        .latent("U_X", vec![1.0 - px1, px1])
        .latent("U_Y", q.to_vec())
        .observed("X", 2, &["U_X"], vec![0, 1])
        .observed_fn("Y", 2, &["X", "U_Y"], |v| match v[1] {
            0 => v[0],
            1 => 0,
            2 => 1,
            _ => 1 - v[0],
        })
        .build()
        .expect("eq2 model is valid")
}

/// First model of the non-identifiability pair.
pub fn eq2_model_a() -> Scm {
    eq2([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], 0.5)
}

/// Second model of the pair: same observational data, different counterfactuals.
pub fn eq2_model_b() -> Scm {
    eq2([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0], 0.5)
}

pub fn dirichlet_probs(rng: &mut Rng, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let d = Dirichlet::new(&vec![1.0; k]).expect("k >= 2");
    let mut p = d.sample(rng);
    // renormalise so the sum is exact to the validation tolerance
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Shape of a random treatment/outcome model `X -> Y` with optional
/// discrete confounder `Z -> X, Z -> Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Arbitrary tables.
    Free,
    /// For every `(z, u)` the outcome is nondecreasing in the treatment.
    Monotone,
    /// A monotone model with one table column swapped to break monotonicity.
    Perturbed,
}

#[derive(Debug, Clone, Copy)]
pub struct TreatmentOutcomeConfig {
    pub treatments: u32,
    pub outcomes: u32,
    pub latent_card: u32,
    pub confounder_card: u32,
    pub shape: Shape,
}

/// Random `Z? -> X -> Y` model. Variables are named `X`, `Y` and, when
/// `confounder_card > 1`, `Z`.
pub fn random_treatment_outcome(seed: u64, cfg: TreatmentOutcomeConfig) -> Scm {
    let mut rng = rng::seeded(seed, rng::stream::RANDOM_MODEL);
    let nx = cfg.treatments;
    let ny = cfg.outcomes;
    let nu = cfg.latent_card;
    let nz = cfg.confounder_card;
    let with_z = nz > 1;

    let mut b = Scm::builder();
    if with_z {
        b = b
            .latent("U_Z", dirichlet_probs(&mut rng, nz as usize))
            .observed("Z", nz, &["U_Z"], (0..nz).collect());
    }
    b = b.latent("U_X", dirichlet_probs(&mut rng, nx as usize));
    b = b.latent("U_Y", dirichlet_probs(&mut rng, nu as usize));
    if with_z {
        let table: Vec<u32> = (0..nz * nx).map(|_| rng.gen_range(0..nx)).collect();
        // keep every treatment reachable for some (z, u)
        let mut table = table;
        for x in 0..nx.min(nz * nx) {
            table[x as usize] = x;
        }
        b = b.observed("X", nx, &["Z", "U_X"], table);
    } else {
        b = b.observed("X", nx, &["U_X"], (0..nx).collect());
    }

    // Y table laid out over (Z?, X, U_Y), U_Y fastest.
    let nz_eff = if with_z { nz } else { 1 };
    let mut cols: Vec<Vec<u32>> = Vec::new(); // one column per (z, u): values over x
    for _ in 0..nz_eff * nu {
        let mut col: Vec<u32> = (0..nx).map(|_| rng.gen_range(0..ny)).collect();
        if cfg.shape != Shape::Free {
            col.sort_unstable();
        }
        cols.push(col);
    }
    if cfg.shape == Shape::Perturbed {
        // make one column strictly decreasing somewhere
        let c = rng.gen_range(0..cols.len());
        let col = &mut cols[c];
        if col.len() >= 2 {
            let hi = rng.gen_range(1..ny);
            col[0] = hi;
            col[1] = rng.gen_range(0..hi);
        }
    }
    let mut table = Vec::with_capacity((nz_eff * nx * nu) as usize);
    for z in 0..nz_eff {
        for x in 0..nx {
            for u in 0..nu {
                table.push(cols[(z * nu + u) as usize][x as usize]);
            }
        }
    }
    let parents: Vec<&str> = if with_z {
        vec!["Z", "X", "U_Y"]
    } else {
        vec!["X", "U_Y"]
    };
    b.observed("Y", ny, &parents, table)
        .build()
        .expect("random treatment/outcome model is valid")
}

/// Random DAG over `nodes` observed variables named `V0..`, each with its
/// own latent, cardinalities in 2..=3, at most `max_parents` observed
/// parents drawn from earlier nodes.
pub fn random_dag(seed: u64, nodes: usize, max_parents: usize) -> Scm {
    let mut rng = rng::seeded(seed, rng::stream::RANDOM_MODEL);
    let cards: Vec<u32> = (0..nodes).map(|_| rng.gen_range(2..=3)).collect();
    let mut b = Scm::builder();
    for i in 0..nodes {
        let nu = rng.gen_range(2..=4u32);
        let uname = format!("U{i}");
        b = b.latent(&uname, dirichlet_probs(&mut rng, nu as usize));
        let mut parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.5)).collect();
        while parents.len() > max_parents {
            let drop = rng.gen_range(0..parents.len());
            parents.remove(drop);
        }
        let mut pnames: Vec<String> = parents.iter().map(|p| format!("V{p}")).collect();
        pnames.push(uname);
        let size: u32 = parents.iter().map(|&p| cards[p]).product::<u32>() * nu;
        let table: Vec<u32> = (0..size).map(|_| rng.gen_range(0..cards[i])).collect();
        let prefs: Vec<&str> = pnames.iter().map(|s| s.as_str()).collect();
        b = b.observed(&format!("V{i}"), cards[i], &prefs, table);
    }
    b.build().expect("random dag is valid")
}

/// True when every latent has a single child (the Markovian form).
pub fn is_markovian(scm: &Scm) -> bool {
    scm.latents().iter().all(|&l| {
        scm.observed()
            .iter()
            .filter(|&&v| scm.mechanism(v).is_some_and(|m| m.parents().contains(&l)))
            .count()
            <= 1
    }) && scm.variables().iter().any(|v| v.kind == VarKind::Observed)
}
