//! Exact inference by enumerating joint latent configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Assignment, Event, Scm, VarId};
use crate::error::{Error, Result};

/// Evidence below this probability is treated as impossible.
pub const ZERO_EVIDENCE: f64 = 1e-15;

/// A distribution over assignments of `vars`, support sorted
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistTable {
    pub vars: Vec<String>,
    pub support: Vec<Vec<u32>>,
    pub probs: Vec<f64>,
}

impl DistTable {
    fn from_map(vars: Vec<String>, map: BTreeMap<Vec<u32>, f64>, norm: f64) -> DistTable {
        let (support, probs) = map.into_iter().map(|(k, p)| (k, p / norm)).unzip();
        DistTable {
            vars,
            support,
            probs,
        }
    }

    /// Probability of one full tuple over `vars` (0 when outside the support).
    pub fn prob(&self, values: &[u32]) -> f64 {
        match self.support.binary_search_by(|s| s.as_slice().cmp(values)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Probability of a (possibly partial) assignment over `vars`.
    pub fn prob_of(&self, assignment: &Assignment) -> f64 {
        let slots: Vec<(usize, u32)> = assignment
            .iter()
            .filter_map(|(k, &v)| self.vars.iter().position(|n| n == k).map(|i| (i, v)))
            .collect();
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(s, _)| slots.iter().all(|&(i, v)| s[i] == v))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn marginal(&self, keep: &[&str]) -> Result<DistTable> {
        let idx = keep
            .iter()
            .map(|k| {
                self.vars
                    .iter()
                    .position(|n| n == k)
                    .ok_or_else(|| Error::UnknownVariable(k.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut map = BTreeMap::new();
        for (s, &p) in self.support.iter().zip(&self.probs) {
            let key: Vec<u32> = idx.iter().map(|&i| s[i]).collect();
            *map.entry(key).or_insert(0.0) += p;
        }
        Ok(DistTable::from_map(
            keep.iter().map(|s| s.to_string()).collect(),
            map,
            1.0,
        ))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl Scm {
    /// Visit every latent configuration with positive probability, with all
    /// observed values propagated. `values` is indexed by [`VarId`].
    pub(crate) fn for_each_world<F: FnMut(&[u32], f64)>(&self, mut f: F) -> Result<()> {
        self.check_cap()?;
        let mut values = vec![0u32; self.variables().len()];
        self.walk(0, 1.0, &mut values, &mut f);
        Ok(())
    }

    fn walk<F: FnMut(&[u32], f64)>(&self, depth: usize, p: f64, values: &mut [u32], f: &mut F) {
        if depth == self.latents().len() {
            self.propagate(values);
            f(values, p);
            return;
        }
        let l = self.latents()[depth];
        let probs = self.latent_probs(l).expect("latent has distribution");
        for (c, &q) in probs.iter().enumerate() {
            if q > 0.0 {
                values[l] = c as u32;
                self.walk(depth + 1, p * q, values, f);
            }
        }
    }

    /// Exact joint distribution over all observed variables.
    pub fn joint(&self) -> Result<DistTable> {
        let vars: Vec<VarId> = self.observed().to_vec();
        self.table_over(&vars, &Event::always())
    }

    pub(crate) fn table_over(&self, vars: &[VarId], evidence: &Event) -> Result<DistTable> {
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut z = 0.0;
        self.for_each_world(|values, p| {
            if evidence.holds(values) {
                z += p;
                let key: Vec<u32> = vars.iter().map(|&v| values[v]).collect();
                *map.entry(key).or_insert(0.0) += p;
            }
        })?;
        if z < ZERO_EVIDENCE {
            return Err(Error::ZeroEvidence { prob: z });
        }
        let names = vars.iter().map(|&v| self.name(v).to_string()).collect();
        Ok(DistTable::from_map(names, map, z))
    }

    /// Exact `P(target | evidence)`.
    pub fn conditional(&self, target: &[&str], evidence: &Assignment) -> Result<DistTable> {
        let vars = target.iter().map(|t| self.id(t)).collect::<Result<Vec<_>>>()?;
        let ev = Event::eq(&self.resolve(evidence)?);
        self.table_over(&vars, &ev)
    }

    /// Exact `P(target | do(intervention), covariates)`, computed in the
    /// submodel.
    pub fn interventional(
        &self,
        target: &[&str],
        intervention: &Assignment,
        covariates: &Assignment,
    ) -> Result<DistTable> {
        self.intervene(intervention)?.conditional(target, covariates)
    }

    /// Exact `P(event | evidence)` over resolved ids.
    pub fn prob_event(&self, event: &Event, evidence: &Event) -> Result<f64> {
        let (mut hit, mut z) = (0.0, 0.0);
        self.for_each_world(|values, p| {
            if evidence.holds(values) {
                z += p;
                if event.holds(values) {
                    hit += p;
                }
            }
        })?;
        if z < ZERO_EVIDENCE {
            return Err(Error::ZeroEvidence { prob: z });
        }
        Ok(hit / z)
    }
}
