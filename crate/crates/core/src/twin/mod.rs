//! Twin networks and counterfactual estimators.
//!
//! A twin network doubles the observed variables of a model into a factual
//! copy `v` and a counterfactual copy `v*` that share every latent. Parents of
//! the counterfactual copies of intervened variables are cut, so a
//! counterfactual query becomes an ordinary conditional in the doubled model.

mod aap;
mod bench;
mod estimate;
mod exact;
mod mc;
mod query;
mod random;

pub use aap::counterfactual_aap;
pub use bench::{bench_compare, Agreement, BenchLine, BenchReport};
pub use estimate::Estimate;
pub use exact::{counterfactual_exact, counterfactual_table};
pub use mc::counterfactual_mc;
pub use query::{CounterfactualQuery, EventSpec, TargetEvent, World};
pub use random::random_query;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scm::{
    Assignment, Condition, Event, RawMechanism, Scm, ValidateOpts, VarId, VarKind, VariableDecl,
};

/// Suffix for counterfactual copies.
pub const STAR: &str = "*";

#[derive(Debug, Clone)]
pub struct TwinNetwork {
    graph: Scm,
    star: BTreeMap<VarId, VarId>,
    cut_set: Vec<VarId>,
}

/// Double `scm`, cutting the parents of the counterfactual copies of
/// `cf_vars`. Their mechanisms are placeholders until [`TwinNetwork::world`]
/// fixes their values.
pub fn build_twin(scm: &Scm, cf_vars: &[&str]) -> Result<TwinNetwork> {
    let mut cut = Vec::with_capacity(cf_vars.len());
    for name in cf_vars {
        let id = scm.id(name)?;
        if scm.var(id).kind == VarKind::Latent {
            return Err(Error::LatentIntervention(name.to_string()));
        }
        cut.push(id);
    }

    let mut vars: Vec<VariableDecl> = scm.variables().to_vec();
    let mut star = BTreeMap::new();
    for &v in scm.observed() {
        star.insert(v, vars.len());
        vars.push(VariableDecl {
            name: format!("{}{STAR}", scm.name(v)),
            kind: VarKind::Observed,
            cardinality: scm.cardinality(v),
        });
    }
    let latents = scm
        .latents()
        .iter()
        .map(|&l| (scm.name(l).to_string(), scm.latent_probs(l).unwrap().to_vec()))
        .collect();

    let mut mechs = Vec::with_capacity(2 * scm.observed().len());
    for &v in scm.observed() {
        let m = scm.mechanism(v).expect("observed has mechanism");
        let parents: Vec<String> = m.parents().iter().map(|&p| scm.name(p).to_string()).collect();
        mechs.push(RawMechanism {
            child: scm.name(v).to_string(),
            parents: parents.clone(),
            table: m.table().to_vec(),
        });
        let starred = format!("{}{STAR}", scm.name(v));
        if cut.contains(&v) {
            mechs.push(RawMechanism {
                child: starred,
                parents: Vec::new(),
                table: vec![0],
            });
        } else {
            let sparents = m
                .parents()
                .iter()
                .map(|&p| match scm.var(p).kind {
                    VarKind::Observed => format!("{}{STAR}", scm.name(p)),
                    VarKind::Latent => scm.name(p).to_string(),
                })
                .collect();
            mechs.push(RawMechanism {
                child: starred,
                parents: sparents,
                table: m.table().to_vec(),
            });
        }
    }
    let graph = Scm::from_parts(
        vars,
        latents,
        mechs,
        ValidateOpts {
            allow_shared_latents: true,
        },
    )?
    .with_enum_cap(scm.enum_cap());
    let cut_set = cut.iter().map(|v| star[v]).collect();
    Ok(TwinNetwork {
        graph,
        star,
        cut_set,
    })
}

impl TwinNetwork {
    /// The doubled model. Cut variables carry placeholder constants.
    pub fn graph(&self) -> &Scm {
        &self.graph
    }

    /// Counterfactual copies whose parent edges were removed.
    pub fn cut_set(&self) -> &[VarId] {
        &self.cut_set
    }

    /// Id of `v*` for a base observed variable `v` (ids of factual copies equal
    /// their base ids).
    pub fn starred(&self, base: VarId) -> VarId {
        self.star[&base]
    }

    /// The twin model with `factual_do` applied to factual copies and
    /// `cf_do` fixing every cut variable.
    pub fn world(&self, factual_do: &[(VarId, u32)], cf_do: &[(VarId, u32)]) -> Result<Scm> {
        let mut pairs: Vec<(VarId, u32)> = factual_do.to_vec();
        let mut fixed = Vec::new();
        for &(base, value) in cf_do {
            let s = self.starred(base);
            if !self.cut_set.contains(&s) {
                return Err(Error::InvalidQuery(format!(
                    "'{}' was not cut when the twin was built",
                    self.graph.name(s)
                )));
            }
            fixed.push(s);
            pairs.push((s, value));
        }
        if let Some(&missing) = self.cut_set.iter().find(|c| !fixed.contains(c)) {
            return Err(Error::InvalidQuery(format!(
                "no counterfactual value for '{}'",
                self.graph.name(missing)
            )));
        }
        Ok(self.graph.intervene_ids(&pairs))
    }
}

/// A query lowered onto its twin world: `P(target | evidence)` in `world`.
pub(crate) struct Compiled {
    pub world: Scm,
    pub target: Event,
    pub evidence: Event,
}

pub(crate) fn compile(scm: &Scm, q: &CounterfactualQuery) -> Result<Compiled> {
    q.validate(scm)?;
    let cf_names: Vec<&str> = q.cf_intervention.keys().map(|s| s.as_str()).collect();
    let twin = build_twin(scm, &cf_names)?;
    let fdo = scm.resolve(&q.factual_intervention)?;
    let cdo = scm.resolve(&q.cf_intervention)?;
    let world = twin.world(&fdo, &cdo)?;
    let target = Event(
        q.target
            .iter()
            .map(|t| {
                let base = scm.id(&t.var)?;
                let var = match t.world {
                    World::Factual => base,
                    World::Counterfactual => twin.starred(base),
                };
                Ok(Condition {
                    var,
                    cmp: t.event.op,
                    value: t.event.value,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let evidence = Event::eq(&scm.resolve(&q.evidence)?);
    Ok(Compiled {
        world,
        target,
        evidence,
    })
}

/// Helper for building assignments in code and tests.
pub fn assign(pairs: &[(&str, u32)]) -> Assignment {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
