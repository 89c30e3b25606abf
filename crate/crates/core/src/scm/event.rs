use serde::{Deserialize, Serialize};

use super::VarId;

/// Comparison against a category value, in natural category order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    Eq,
    Ge,
    Le,
}

impl Cmp {
    #[inline]
    pub fn test(self, actual: u32, value: u32) -> bool {
        match self {
            Cmp::Eq => actual == value,
            Cmp::Ge => actual >= value,
            Cmp::Le => actual <= value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub var: VarId,
    pub cmp: Cmp,
    pub value: u32,
}

/// Conjunction of conditions over resolved variable ids. Empty is "always".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Event(pub Vec<Condition>);

impl Event {
    pub fn always() -> Event {
        Event(Vec::new())
    }

    pub fn eq(pairs: &[(VarId, u32)]) -> Event {
        Event(
            pairs
                .iter()
                .map(|&(var, value)| Condition {
                    var,
                    cmp: Cmp::Eq,
                    value,
                })
                .collect(),
        )
    }

    pub fn and(mut self, other: &Event) -> Event {
        self.0.extend_from_slice(&other.0);
        self
    }

    #[inline]
    pub fn holds(&self, values: &[u32]) -> bool {
        self.0.iter().all(|c| c.cmp.test(values[c.var], c.value))
    }
}
