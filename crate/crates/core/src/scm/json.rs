//! JSON exchange format for SCMs.
//!
//! ```json
//! {"variables":[{"name":"X","kind":"observed","cardinality":2}, ...],
//!  "latents":[{"variable":"U_X","probs":[0.5,0.5]}],
//!  "mechanisms":[{"child":"X","parents":["U_X"],"table":[0,1]}]}
//! ```
//!
//! `table` is row-major over the parent tuple, last parent fastest.

use serde::{Deserialize, Serialize};

use super::{RawMechanism, Scm, ValidateOpts, VarKind, VariableDecl};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VarKind,
    pub cardinality: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSpec {
    pub variable: String,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub child: String,
    pub parents: Vec<String>,
    pub table: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub variables: Vec<VariableSpec>,
    pub latents: Vec<LatentSpec>,
    pub mechanisms: Vec<MechanismSpec>,
}

pub(super) fn from_spec(spec: &ScmSpec) -> Result<Scm> {
    let vars = spec
        .variables
        .iter()
        .map(|v| VariableDecl {
            name: v.name.clone(),
            kind: v.kind,
            cardinality: v.cardinality,
        })
        .collect();
    let latents = spec
        .latents
        .iter()
        .map(|l| (l.variable.clone(), l.probs.clone()))
        .collect();
    let mechanisms = spec
        .mechanisms
        .iter()
        .map(|m| RawMechanism {
            child: m.child.clone(),
            parents: m.parents.clone(),
            table: m.table.clone(),
        })
        .collect();
    Scm::from_parts(vars, latents, mechanisms, ValidateOpts::default())
}

pub(super) fn to_spec(scm: &Scm) -> ScmSpec {
    let variables = scm
        .variables()
        .iter()
        .map(|v| VariableSpec {
            name: v.name.clone(),
            kind: v.kind,
            cardinality: v.cardinality,
        })
        .collect();
    let latents = scm
        .latents()
        .iter()
        .map(|&l| LatentSpec {
            variable: scm.name(l).to_string(),
            probs: scm.latent_probs(l).unwrap_or_default().to_vec(),
        })
        .collect();
    let mechanisms = scm
        .observed()
        .iter()
        .filter_map(|&v| scm.mechanism(v))
        .map(|m| MechanismSpec {
            child: scm.name(m.child()).to_string(),
            parents: m.parents().iter().map(|&p| scm.name(p).to_string()).collect(),
            table: m.table().to_vec(),
        })
        .collect();
    ScmSpec {
        variables,
        latents,
        mechanisms,
    }
}
