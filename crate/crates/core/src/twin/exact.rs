//! Exact counterfactuals on the twin network.

use super::{build_twin, compile, CounterfactualQuery, World, STAR};
use crate::error::Result;
use crate::scm::{Assignment, DistTable, Event, Scm, VarId};

/// `P(target | evidence)` in the twin world of `q`, by enumeration.
pub fn counterfactual_exact(scm: &Scm, q: &CounterfactualQuery) -> Result<f64> {
    let c = compile(scm, q)?;
    c.world.prob_event(&c.target, &c.evidence)
}

/// Joint distribution of factual and counterfactual copies given evidence.
/// Counterfactual columns are named `v*`.
pub fn counterfactual_table(
    scm: &Scm,
    evidence: &Assignment,
    factual_do: &Assignment,
    cf_do: &Assignment,
    vars: &[(&str, World)],
) -> Result<DistTable> {
    let names: Vec<&str> = cf_do.keys().map(|s| s.as_str()).collect();
    let twin = build_twin(scm, &names)?;
    let world = twin.world(&scm.resolve(factual_do)?, &scm.resolve(cf_do)?)?;
    let ids = vars
        .iter()
        .map(|&(name, w)| {
            let base = scm.id(name)?;
            Ok(match w {
                World::Factual => base,
                World::Counterfactual => twin.starred(base),
            })
        })
        .collect::<Result<Vec<VarId>>>()?;
    let mut table = world.table_over(&ids, &Event::eq(&scm.resolve(evidence)?))?;
    table.vars = vars
        .iter()
        .map(|&(name, w)| match w {
            World::Factual => name.to_string(),
            World::Counterfactual => format!("{name}{STAR}"),
        })
        .collect();
    Ok(table)
}
