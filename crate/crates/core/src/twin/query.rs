//! Counterfactual queries and their JSON form.
//!
//! ```json
//! {"target":{"var":"Y","event":{"op":"eq","value":0}},
//!  "evidence":{"X":0,"Y":1},"factual_do":{},"cf_do":{"X":1}}
//! ```
//!
//! `target` may also be an array (a conjunction). A target entry refers to
//! the counterfactual world unless it carries `"world":"factual"`, which is
//! how joint counterfactuals such as `P(Y_x = y, Y_x' = y')` are written.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scm::{Assignment, Cmp, Scm, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum World {
    Factual,
    #[default]
    Counterfactual,
}

impl World {
    fn is_counterfactual(&self) -> bool {
        *self == World::Counterfactual
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub op: Cmp,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetEvent {
    pub var: String,
    #[serde(default, skip_serializing_if = "World::is_counterfactual")]
    pub world: World,
    pub event: EventSpec,
}

impl TargetEvent {
    pub fn cf(var: &str, op: Cmp, value: u32) -> TargetEvent {
        TargetEvent {
            var: var.to_string(),
            world: World::Counterfactual,
            event: EventSpec { op, value },
        }
    }

    pub fn factual(var: &str, op: Cmp, value: u32) -> TargetEvent {
        TargetEvent {
            var: var.to_string(),
            world: World::Factual,
            event: EventSpec { op, value },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualQuery {
    #[serde(serialize_with = "ser_target", deserialize_with = "de_target")]
    pub target: Vec<TargetEvent>,
    #[serde(default)]
    pub evidence: Assignment,
    #[serde(default, rename = "factual_do")]
    pub factual_intervention: Assignment,
    #[serde(rename = "cf_do")]
    pub cf_intervention: Assignment,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(TargetEvent),
    Many(Vec<TargetEvent>),
}

fn de_target<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<TargetEvent>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(t) => vec![t],
        OneOrMany::Many(v) => v,
    })
}

fn ser_target<S: Serializer>(t: &[TargetEvent], s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.len() == 1 {
        t[0].serialize(s)
    } else {
        t.serialize(s)
    }
}

impl CounterfactualQuery {
    /// `P(var_{cf_do} op value | evidence)` with an empty factual intervention.
    pub fn simple(target: TargetEvent, evidence: Assignment, cf_do: Assignment) -> Self {
        CounterfactualQuery {
            target: vec![target],
            evidence,
            factual_intervention: Assignment::new(),
            cf_intervention: cf_do,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("query serialises")
    }

    /// Structural checks against the base model.
    pub fn validate(&self, scm: &Scm) -> Result<()> {
        if self.cf_intervention.is_empty() {
            return Err(Error::InvalidQuery(
                "cf_do is empty; use a conditional query instead".into(),
            ));
        }
        if self.target.is_empty() {
            return Err(Error::InvalidQuery("target is empty".into()));
        }
        let observed = |name: &str, value: u32| -> Result<()> {
            let id = scm.id(name)?;
            if scm.var(id).kind != VarKind::Observed {
                return Err(Error::InvalidQuery(format!("'{name}' is latent")));
            }
            scm.check_value(id, value)
        };
        for t in &self.target {
            observed(&t.var, t.event.value)?;
        }
        for (k, &v) in self
            .evidence
            .iter()
            .chain(&self.factual_intervention)
            .chain(&self.cf_intervention)
        {
            observed(k, v)?;
        }
        Ok(())
    }
}
