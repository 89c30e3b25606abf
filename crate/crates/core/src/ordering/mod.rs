//! Orderings on treatments and outcomes, and the checks that relate
//! monotone mechanisms, counterfactual ordering and counterfactual stability.
//!
//! Indices in witnesses are positions in the ordering, not category codes:
//! `i > j` means `treatment_order[i]` sits above `treatment_order[j]`.

mod checks;
mod infer;

pub use checks::{
    check_cf_ordering, check_cf_ordering_detailed, check_interventional_premise, check_monotone,
    check_stability, check_stability_scoped, CfOrderingCheck, PremiseForm, StabilityScope,
};
pub use infer::{infer_ordering, InferredOrdering, OrderingSource, Trend};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::{Assignment, Scm, VarKind};

/// Probabilities at or below this count as zero.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingSpec {
    #[serde(default = "default_treatment")]
    pub treatment: String,
    #[serde(default = "default_outcome")]
    pub outcome: String,
    pub treatment_order: Vec<u32>,
    pub outcome_order: Vec<u32>,
}

fn default_treatment() -> String {
    "X".into()
}

fn default_outcome() -> String {
    "Y".into()
}

fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&v| {
        let ok = (v as usize) < p.len() && !seen[v as usize];
        if ok {
            seen[v as usize] = true;
        }
        ok
    })
}

impl OrderingSpec {
    pub fn new(
        treatment: &str,
        outcome: &str,
        treatment_order: Vec<u32>,
        outcome_order: Vec<u32>,
    ) -> Result<OrderingSpec> {
        let spec = OrderingSpec {
            treatment: treatment.into(),
            outcome: outcome.into(),
            treatment_order,
            outcome_order,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Natural category order on both variables.
    pub fn identity(treatment: &str, outcome: &str, n_treatments: u32, n_outcomes: u32) -> OrderingSpec {
        OrderingSpec {
            treatment: treatment.into(),
            outcome: outcome.into(),
            treatment_order: (0..n_treatments).collect(),
            outcome_order: (0..n_outcomes).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, p) in [("treatment", &self.treatment_order), ("outcome", &self.outcome_order)] {
            if p.is_empty() || !is_permutation(p) {
                return Err(Error::InvalidOrdering(format!(
                    "{what} order {p:?} is not a permutation of 0..{}",
                    p.len()
                )));
            }
        }
        Ok(())
    }

    /// Checks the ordering against the model's variables and cardinalities.
    pub fn validate_for(&self, scm: &Scm) -> Result<()> {
        self.validate()?;
        for (name, order) in [(&self.treatment, &self.treatment_order), (&self.outcome, &self.outcome_order)] {
            let id = scm.id(name)?;
            if scm.var(id).kind != VarKind::Observed {
                return Err(Error::InvalidOrdering(format!("'{name}' is latent")));
            }
            if scm.cardinality(id) as usize != order.len() {
                return Err(Error::InvalidOrdering(format!(
                    "'{name}' has {} categories but the order lists {}",
                    scm.cardinality(id),
                    order.len()
                )));
            }
        }
        Ok(())
    }

    /// Position of each outcome category in the outcome order.
    pub fn outcome_rank(&self) -> Vec<usize> {
        rank(&self.outcome_order)
    }

    pub fn treatment_rank(&self) -> Vec<usize> {
        rank(&self.treatment_order)
    }

    /// The same ordering with both permutations reversed.
    pub fn reversed_treatments(&self) -> OrderingSpec {
        let mut o = self.clone();
        o.treatment_order.reverse();
        o
    }

    pub fn from_json(text: &str) -> Result<OrderingSpec> {
        let spec: OrderingSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ordering serialises")
    }
}

fn rank(order: &[u32]) -> Vec<usize> {
    let mut r = vec![0; order.len()];
    for (pos, &c) in order.iter().enumerate() {
        r[c as usize] = pos;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Ordering,
    Monotonicity,
    Stability,
    InterventionalPremise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// Treatment positions `i > j`, outcome positions `h` and `l`.
    Indices { i: usize, j: usize, h: usize, l: usize },
    /// A latent configuration where `Y_{x_i}(u)` falls below `Y_{x_j}(u)`.
    Latent { u: Assignment, i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub kind: ViolationKind,
    pub witness: Witness,
    pub magnitude: f64,
}

/// One JSON object per line.
pub fn write_violations<W: Write>(reports: &[ViolationReport], mut out: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
