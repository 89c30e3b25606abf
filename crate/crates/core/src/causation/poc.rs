use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::{Cmp, Scm};
use crate::twin::{assign, counterfactual_exact, CounterfactualQuery, Estimate, TargetEvent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PocResult {
    pub pn: Estimate,
    pub ps: Estimate,
    pub pns: Estimate,
}

/// The PN, PS and PNS queries as twin-network counterfactual queries.
pub fn poc_queries(treatment: &str, outcome: &str) -> [CounterfactualQuery; 3] {
    let pn = CounterfactualQuery::simple(
        TargetEvent::cf(outcome, Cmp::Eq, 0),
        assign(&[(treatment, 1), (outcome, 1)]),
        assign(&[(treatment, 0)]),
    );
    let ps = CounterfactualQuery::simple(
        TargetEvent::cf(outcome, Cmp::Eq, 1),
        assign(&[(treatment, 0), (outcome, 0)]),
        assign(&[(treatment, 1)]),
    );
    let pns = CounterfactualQuery {
        target: vec![
            TargetEvent::factual(outcome, Cmp::Eq, 0),
            TargetEvent::cf(outcome, Cmp::Eq, 1),
        ],
        evidence: Default::default(),
        factual_intervention: assign(&[(treatment, 0)]),
        cf_intervention: assign(&[(treatment, 1)]),
    };
    [pn, ps, pns]
}

pub(crate) fn require_binary(scm: &Scm, name: &str) -> Result<()> {
    let c = scm.cardinality(scm.id(name)?);
    if c != 2 {
        return Err(Error::NonBinary {
            variable: name.to_string(),
            cardinality: c,
        });
    }
    Ok(())
}

/// Exact PN, PS and PNS by twin-network enumeration.
pub fn poc_exact(scm: &Scm, treatment: &str, outcome: &str) -> Result<PocResult> {
    require_binary(scm, treatment)?;
    require_binary(scm, outcome)?;
    let [pn, ps, pns] = poc_queries(treatment, outcome);
    Ok(PocResult {
        pn: Estimate::exact(counterfactual_exact(scm, &pn)?),
        ps: Estimate::exact(counterfactual_exact(scm, &ps)?),
        pns: Estimate::exact(counterfactual_exact(scm, &pns)?),
    })
}
