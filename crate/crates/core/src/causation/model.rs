//! Probabilities of causation estimated from a trained twin model.

use ndarray::{Array2, Axis};

use super::PocResult;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learn::{sample_joint, Columns, TwinModel};
use crate::rng;
use crate::twin::Estimate;

/// Covariates of the rows whose treatment equals `x` (all rows for `None`).
pub(crate) fn pool(data: &Dataset, cols: &Columns, x: Option<u32>) -> Result<Array2<f64>> {
    let z = cols.covariates(data)?;
    let Some(x) = x else {
        return Ok(z);
    };
    let t = data.category(&cols.treatment)?;
    let rows: Vec<usize> = (0..t.len()).filter(|&r| t[r] == x).collect();
    if rows.is_empty() {
        return Err(Error::InvalidData(format!("no rows with {}={x}", cols.treatment)));
    }
    Ok(z.select(Axis(0), &rows))
}

pub(crate) fn ratio(hits: usize, accepted: usize, draws: usize) -> Result<Estimate> {
    if accepted == 0 {
        return Err(Error::NoAcceptedSamples { draws });
    }
    Ok(Estimate::binomial(hits, accepted))
}

/// PN, PS and PNS by rejection sampling from the model. Covariates for PN
/// come from treated rows, for PS from untreated rows, for PNS from all rows.
pub fn poc_from_model(model: &TwinModel, data: &Dataset, cols: &Columns, n: usize, seed: u64) -> Result<PocResult> {
    if model.config.n_treatments != 2 || model.config.n_outcomes != 2 {
        return Err(Error::NonBinary {
            variable: if model.config.n_treatments != 2 { cols.treatment.clone() } else { cols.outcome.clone() },
            cardinality: if model.config.n_treatments != 2 {
                model.config.n_treatments as u32
            } else {
                model.config.n_outcomes as u32
            },
        });
    }
    let pn = sample_joint(model, &pool(data, cols, Some(1))?, 1, 0, n, rng::split(seed, 0))?;
    let ps = sample_joint(model, &pool(data, cols, Some(0))?, 0, 1, n, rng::split(seed, 1))?;
    let pns = sample_joint(model, &pool(data, cols, None)?, 0, 1, n, rng::split(seed, 2))?;
    Ok(PocResult {
        pn: ratio(pn.counts[1][0], pn.accepted(1), n)?,
        ps: ratio(ps.counts[0][1], ps.accepted(0), n)?,
        pns: Estimate::binomial(pns.counts[0][1], n),
    })
}
