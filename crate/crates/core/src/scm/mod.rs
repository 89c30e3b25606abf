//! Discrete structural causal models.
//!
//! An [`Scm`] holds latent variables with finite-support distributions and
//! observed variables whose values are a deterministic lookup over their
//! parents. Categories are dense integers `0..cardinality`; names only matter
//! at the edges (JSON, CSV, queries).
//!
//! Models are immutable once validated. [`Scm::intervene`] returns a new
//! submodel with the intervened mechanisms replaced by constants.

mod event;
mod exact;
mod json;
mod sample;

pub use event::{Cmp, Condition, Event};
pub use exact::{DistTable, ZERO_EVIDENCE};
pub use json::{LatentSpec, MechanismSpec, ScmSpec, VariableSpec};
pub use sample::SampleSet;
pub(crate) use sample::LatentSampler;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a variable inside its [`Scm`].
pub type VarId = usize;

/// Variable name to category value.
pub type Assignment = BTreeMap<String, u32>;

/// Default cap on the number of joint latent configurations the exact
/// engine will enumerate.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Sum tolerance for latent distributions.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Observed,
    Latent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub kind: VarKind,
    pub cardinality: u32,
}

/// Deterministic lookup `child = table[index(parent values)]`, row-major over
/// the parent tuple with the last parent varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    child: VarId,
    parents: Vec<VarId>,
    strides: Vec<usize>,
    table: Vec<u32>,
}

impl Mechanism {
    fn new(child: VarId, parents: Vec<VarId>, table: Vec<u32>, cards: &[u32]) -> Self {
        let mut strides = vec![0; parents.len()];
        let mut acc = 1usize;
        for (slot, &p) in parents.iter().enumerate().rev() {
            strides[slot] = acc;
            acc *= cards[p] as usize;
        }
        Mechanism {
            child,
            parents,
            strides,
            table,
        }
    }

    fn constant(child: VarId, value: u32) -> Self {
        Mechanism {
            child,
            parents: Vec::new(),
            strides: Vec::new(),
            table: vec![value],
        }
    }

    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn is_constant(&self) -> bool {
        self.parents.is_empty() && self.table.len() == 1
    }

    #[inline]
    pub fn eval(&self, values: &[u32]) -> u32 {
        let idx: usize = self
            .parents
            .iter()
            .zip(&self.strides)
            .map(|(&p, &s)| values[p] as usize * s)
            .sum();
        self.table[idx]
    }
}

/// Validation switches. Only twin networks share latents between mechanisms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ValidateOpts {
    pub allow_shared_latents: bool,
}

#[derive(Debug, Clone)]
pub struct Scm {
    vars: Vec<VariableDecl>,
    index: BTreeMap<String, VarId>,
    mechanisms: Vec<Option<Mechanism>>,
    latent_probs: Vec<Option<Vec<f64>>>,
    observed: Vec<VarId>,
    latents: Vec<VarId>,
    topo: Vec<VarId>,
    enum_cap: u64,
}

/// A mechanism given by names, before validation.
#[derive(Debug, Clone)]
pub(crate) struct RawMechanism {
    pub child: String,
    pub parents: Vec<String>,
    pub table: Vec<u32>,
}

impl Scm {
    pub(crate) fn from_parts(
        vars: Vec<VariableDecl>,
        latents: Vec<(String, Vec<f64>)>,
        mechanisms: Vec<RawMechanism>,
        opts: ValidateOpts,
    ) -> Result<Scm> {
        let mut index = BTreeMap::new();
        for (id, v) in vars.iter().enumerate() {
            if v.cardinality == 0 {
                return Err(Error::InvalidSpec(format!(
                    "variable '{}' has cardinality 0",
                    v.name
                )));
            }
            if index.insert(v.name.clone(), id).is_some() {
                return Err(Error::InvalidSpec(format!(
                    "duplicate variable name '{}'",
                    v.name
                )));
            }
        }
        let cards: Vec<u32> = vars.iter().map(|v| v.cardinality).collect();
        let lookup = |name: &str| index.get(name).copied().ok_or_else(|| Error::UnknownVariable(name.to_string()));

        let mut latent_probs: Vec<Option<Vec<f64>>> = vec![None; vars.len()];
        for (name, probs) in latents {
            let id = lookup(&name)?;
            if vars[id].kind != VarKind::Latent {
                return Err(Error::InvalidSpec(format!(
                    "distribution given for observed variable '{name}'"
                )));
            }
            if latent_probs[id].is_some() {
                return Err(Error::InvalidSpec(format!(
                    "latent '{name}' has more than one distribution"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if probs.len() != cards[id] as usize
                || probs.iter().any(|p| !p.is_finite() || *p < 0.0)
                || (sum - 1.0).abs() > PROB_SUM_TOL
            {
                return Err(Error::BadDistribution {
                    variable: name,
                    sum,
                });
            }
            latent_probs[id] = Some(probs);
        }
        for (id, v) in vars.iter().enumerate() {
            if v.kind == VarKind::Latent && latent_probs[id].is_none() {
                return Err(Error::BadDistribution {
                    variable: v.name.clone(),
                    sum: 0.0,
                });
            }
        }

        let mut mechs: Vec<Option<Mechanism>> = vec![None; vars.len()];
        let mut latent_children: Vec<usize> = vec![0; vars.len()];
        for raw in mechanisms {
            let child = lookup(&raw.child)?;
            if vars[child].kind == VarKind::Latent {
                return Err(Error::InvalidSpec(format!(
                    "latent '{}' cannot have a mechanism",
                    raw.child
                )));
            }
            if mechs[child].is_some() {
                return Err(Error::InvalidSpec(format!(
                    "'{}' has more than one mechanism",
                    raw.child
                )));
            }
            let parents = raw
                .parents
                .iter()
                .map(|p| lookup(p))
                .collect::<Result<Vec<_>>>()?;
            let mut seen = parents.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != parents.len() {
                return Err(Error::InvalidSpec(format!(
                    "'{}' lists a parent twice",
                    raw.child
                )));
            }
            if parents.contains(&child) {
                return Err(Error::CycleDetected {
                    from: raw.child.clone(),
                    to: raw.child.clone(),
                });
            }
            let n_latent = parents
                .iter()
                .filter(|&&p| vars[p].kind == VarKind::Latent)
                .count();
            if n_latent > 1 {
                return Err(Error::InvalidSpec(format!(
                    "'{}' has {n_latent} latent parents; at most one is allowed",
                    raw.child
                )));
            }
            for &p in &parents {
                if vars[p].kind == VarKind::Latent {
                    latent_children[p] += 1;
                }
            }
            let expected: usize = parents.iter().map(|&p| cards[p] as usize).product();
            if raw.table.len() != expected {
                let detail = if raw.table.len() < expected {
                    let missing = decode_tuple(raw.table.len(), &parents, &cards);
                    let tuple: Vec<String> = parents
                        .iter()
                        .zip(&missing)
                        .map(|(&p, v)| format!("{}={v}", vars[p].name))
                        .collect();
                    format!(
                        "table has {} of {expected} entries; first missing tuple ({})",
                        raw.table.len(),
                        tuple.join(", ")
                    )
                } else {
                    format!("table has {} entries, expected {expected}", raw.table.len())
                };
                return Err(Error::PartialMechanism {
                    child: raw.child,
                    detail,
                });
            }
            if let Some(&bad) = raw.table.iter().find(|&&v| v >= cards[child]) {
                return Err(Error::ValueOutOfRange {
                    variable: raw.child,
                    value: bad,
                    cardinality: cards[child],
                });
            }
            mechs[child] = Some(Mechanism::new(child, parents, raw.table, &cards));
        }
        for (id, v) in vars.iter().enumerate() {
            if v.kind == VarKind::Observed && mechs[id].is_none() {
                return Err(Error::PartialMechanism {
                    child: v.name.clone(),
                    detail: "no mechanism given".into(),
                });
            }
            if !opts.allow_shared_latents && latent_children[id] > 1 {
                return Err(Error::InvalidSpec(format!(
                    "latent '{}' is shared by {} mechanisms",
                    v.name, latent_children[id]
                )));
            }
        }

        let observed: Vec<VarId> = (0..vars.len())
            .filter(|&i| vars[i].kind == VarKind::Observed)
            .collect();
        let latents_ids: Vec<VarId> = (0..vars.len())
            .filter(|&i| vars[i].kind == VarKind::Latent)
            .collect();
        let topo = topological_order(&vars, &mechs)?;
        Ok(Scm {
            vars,
            index,
            mechanisms: mechs,
            latent_probs,
            observed,
            latents: latents_ids,
            topo,
            enum_cap: DEFAULT_ENUM_CAP,
        })
    }

    pub fn builder() -> ScmBuilder {
        ScmBuilder::default()
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &VariableDecl {
        &self.vars[id]
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id].name
    }

    pub fn cardinality(&self, id: VarId) -> u32 {
        self.vars[id].cardinality
    }

    pub fn observed(&self) -> &[VarId] {
        &self.observed
    }

    pub fn latents(&self) -> &[VarId] {
        &self.latents
    }

    /// Observed variables in a cached topological order.
    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    pub fn mechanism(&self, id: VarId) -> Option<&Mechanism> {
        self.mechanisms[id].as_ref()
    }

    pub fn latent_probs(&self, id: VarId) -> Option<&[f64]> {
        self.latent_probs[id].as_deref()
    }

    pub fn enum_cap(&self) -> u64 {
        self.enum_cap
    }

    pub fn with_enum_cap(mut self, cap: u64) -> Scm {
        self.enum_cap = cap;
        self
    }

    /// Number of joint latent configurations.
    pub fn latent_support(&self) -> u128 {
        self.latents
            .iter()
            .map(|&l| self.vars[l].cardinality as u128)
            .product()
    }

    pub(crate) fn check_cap(&self) -> Result<()> {
        let support = self.latent_support();
        if support > self.enum_cap as u128 {
            return Err(Error::EnumerationTooLarge {
                support,
                cap: self.enum_cap,
            });
        }
        Ok(())
    }

    /// Resolve and range-check an assignment into `(id, value)` pairs.
    pub fn resolve(&self, assignment: &Assignment) -> Result<Vec<(VarId, u32)>> {
        assignment
            .iter()
            .map(|(name, &value)| {
                let id = self.id(name)?;
                self.check_value(id, value)?;
                Ok((id, value))
            })
            .collect()
    }

    pub(crate) fn check_value(&self, id: VarId, value: u32) -> Result<()> {
        let card = self.vars[id].cardinality;
        if value >= card {
            return Err(Error::ValueOutOfRange {
                variable: self.vars[id].name.clone(),
                value,
                cardinality: card,
            });
        }
        Ok(())
    }

    /// The submodel `M_x`: intervened mechanisms become constants.
    pub fn intervene(&self, intervention: &Assignment) -> Result<Scm> {
        let pairs = assignment_ids(self, intervention)?;
        Ok(self.intervene_ids(&pairs))
    }

    pub(crate) fn intervene_ids(&self, pairs: &[(VarId, u32)]) -> Scm {
        let mut out = self.clone();
        for &(id, value) in pairs {
            out.mechanisms[id] = Some(Mechanism::constant(id, value));
        }
        out
    }

    /// Evaluate every observed variable given latent values already written
    /// into `values`.
    #[inline]
    pub(crate) fn propagate(&self, values: &mut [u32]) {
        for &v in &self.topo {
            let m = self.mechanisms[v].as_ref().expect("observed has mechanism");
            values[v] = m.eval(values);
        }
    }

    /// Describe this model in the JSON exchange format.
    pub fn to_spec(&self) -> ScmSpec {
        json::to_spec(self)
    }

    pub fn from_spec(spec: &ScmSpec) -> Result<Scm> {
        json::from_spec(spec)
    }

    pub fn from_json(text: &str) -> Result<Scm> {
        let spec: ScmSpec = serde_json::from_str(text)?;
        Scm::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("spec serialises")
    }
}

/// Resolve an intervention, rejecting latents.
fn assignment_ids(scm: &Scm, assignment: &Assignment) -> Result<Vec<(VarId, u32)>> {
    let mut out = Vec::with_capacity(assignment.len());
    for (name, &value) in assignment {
        let id = scm.id(name)?;
        if scm.vars[id].kind == VarKind::Latent {
            return Err(Error::LatentIntervention(name.clone()));
        }
        scm.check_value(id, value)?;
        out.push((id, value));
    }
    Ok(out)
}

fn decode_tuple(mut index: usize, parents: &[VarId], cards: &[u32]) -> Vec<u32> {
    let mut out = vec![0; parents.len()];
    for (slot, &p) in parents.iter().enumerate().rev() {
        let c = cards[p] as usize;
        out[slot] = (index % c) as u32;
        index /= c;
    }
    out
}

/// Kahn's algorithm, smallest id first for a stable order. On failure a DFS
/// recovers one back edge for the error message.
fn topological_order(vars: &[VariableDecl], mechs: &[Option<Mechanism>]) -> Result<Vec<VarId>> {
    let n = vars.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<VarId>> = vec![Vec::new(); n];
    for m in mechs.iter().flatten() {
        for &p in &m.parents {
            if vars[p].kind == VarKind::Observed {
                indegree[m.child] += 1;
                children[p].push(m.child);
            }
        }
    }
    let mut ready: std::collections::BTreeSet<VarId> = (0..n)
        .filter(|&i| vars[i].kind == VarKind::Observed && indegree[i] == 0)
        .collect();
    let mut order = Vec::new();
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    let n_observed = vars.iter().filter(|v| v.kind == VarKind::Observed).count();
    if order.len() == n_observed {
        return Ok(order);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    fn dfs(v: VarId, children: &[Vec<VarId>], state: &mut [u8]) -> Option<(VarId, VarId)> {
        state[v] = 1;
        for &c in &children[v] {
            if state[c] == 1 {
                return Some((v, c));
            }
            if state[c] == 0 {
                if let Some(edge) = dfs(c, children, state) {
                    return Some(edge);
                }
            }
        }
        state[v] = 2;
        None
    }
    for v in 0..n {
        if vars[v].kind == VarKind::Observed && state[v] == 0 {
            if let Some((from, to)) = dfs(v, &children, &mut state) {
                return Err(Error::CycleDetected {
                    from: vars[from].name.clone(),
                    to: vars[to].name.clone(),
                });
            }
        }
    }
    unreachable!("Kahn's algorithm stalled without a cycle")
}

/// Incremental construction of an [`Scm`] from Rust code.
///
/// ```
/// use twincf::scm::Scm;
/// let scm = Scm::builder()
///     .latent("U_X", vec![0.5, 0.5])
///     .observed("X", 2, &["U_X"], vec![0, 1])
///     .build()
///     .unwrap();
/// assert_eq!(scm.observed().len(), 1);
/// ```
#[derive(Default, Clone)]
pub struct ScmBuilder {
    vars: Vec<VariableDecl>,
    latents: Vec<(String, Vec<f64>)>,
    mechanisms: Vec<RawMechanism>,
    pending: Vec<(String, u32, Vec<String>, TableFn)>,
}

type TableFn = std::sync::Arc<dyn Fn(&[u32]) -> u32 + Send + Sync>;

impl std::fmt::Debug for ScmBuilder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScmBuilder")
            .field("vars", &self.vars)
            .field("latents", &self.latents)
            .field("mechanisms", &self.mechanisms)
            .field("pending", &self.pending.len())
            .finish()
    }
}

impl ScmBuilder {
    pub fn latent(mut self, name: &str, probs: Vec<f64>) -> Self {
        self.vars.push(VariableDecl {
            name: name.to_string(),
            kind: VarKind::Latent,
            cardinality: probs.len() as u32,
        });
        self.latents.push((name.to_string(), probs));
        self
    }

    /// Observed variable with an explicit row-major table.
    pub fn observed(mut self, name: &str, cardinality: u32, parents: &[&str], table: Vec<u32>) -> Self {
        self.vars.push(VariableDecl {
            name: name.to_string(),
            kind: VarKind::Observed,
            cardinality,
        });
        self.mechanisms.push(RawMechanism {
            child: name.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            table,
        });
        self
    }

    /// Observed variable whose table is filled from `f(parent values)`.
    /// Parents may be declared before or after this call.
    pub fn observed_fn<F>(mut self, name: &str, cardinality: u32, parents: &[&str], f: F) -> Self
    where
        F: Fn(&[u32]) -> u32 + Send + Sync + 'static,
    {
        self.vars.push(VariableDecl {
            name: name.to_string(),
            kind: VarKind::Observed,
            cardinality,
        });
        self.pending.push((
            name.to_string(),
            cardinality,
            parents.iter().map(|s| s.to_string()).collect(),
            std::sync::Arc::new(f),
        ));
        self
    }

    pub fn build(mut self) -> Result<Scm> {
        let cards: BTreeMap<String, u32> = self
            .vars
            .iter()
            .map(|v| (v.name.clone(), v.cardinality))
            .collect();
        for (name, _, parents, f) in std::mem::take(&mut self.pending) {
            let pc = parents
                .iter()
                .map(|p| cards.get(p).copied().ok_or_else(|| Error::UnknownVariable(p.clone())))
                .collect::<Result<Vec<u32>>>()?;
            let table = tuples(&pc).map(|t| f(&t)).collect();
            self.mechanisms.push(RawMechanism {
                child: name,
                parents,
                table,
            });
        }
        Scm::from_parts(self.vars, self.latents, self.mechanisms, ValidateOpts::default())
    }
}

/// All tuples over the given cardinalities, last position fastest.
pub fn tuples(cards: &[u32]) -> impl Iterator<Item = Vec<u32>> + '_ {
    let total: usize = cards.iter().map(|&c| c as usize).product();
    (0..total).map(move |mut idx| {
        let mut t = vec![0u32; cards.len()];
        for slot in (0..cards.len()).rev() {
            let c = cards[slot] as usize;
            t[slot] = (idx % c) as u32;
            idx /= c;
        }
        t
    })
}

#[cfg(test)]
mod tests;
