//! Treatment orderings from interventional trends.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::checks::interventional_matrix;
use super::{OrderingSpec, TOL};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scm::Scm;

pub enum OrderingSource<'a> {
    /// Exact interventionals from a model.
    Scm(&'a Scm),
    /// Backdoor adjustment over the listed covariate columns.
    Data {
        data: &'a Dataset,
        covariates: Vec<String>,
    },
}

/// Shape of `E[Y | do(X = x)]` as a function of the category code `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Flat,
    Increasing,
    Decreasing,
    NonMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferredOrdering {
    pub ordering: OrderingSpec,
    /// `E[Y | do(X = x)]` by treatment code, outcome codes taken as values.
    pub means: Vec<f64>,
    /// `ate[i][j] = E[Y | do(x_j)] - E[Y | do(x_i)]`: rows are the control.
    pub ate: Vec<Vec<f64>>,
    /// `P(Y = y | do(X = x))` indexed `[x][y]`.
    pub dist: Vec<Vec<f64>>,
    pub trend: Trend,
    /// Set when the trend is not monotone in the category code or the
    /// interventional distributions are not stochastically ordered along the
    /// returned order.
    pub non_monotone: bool,
    pub from_domain_knowledge: bool,
}

fn trend(means: &[f64]) -> Trend {
    let up = means.windows(2).all(|w| w[1] >= w[0] - TOL);
    let down = means.windows(2).all(|w| w[1] <= w[0] + TOL);
    match (up, down) {
        (true, true) => Trend::Flat,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (false, false) => Trend::NonMonotone,
    }
}

fn dominance_along(dist: &[Vec<f64>], order: &[u32]) -> bool {
    let survival = |row: &[f64]| -> Vec<f64> {
        let mut s = vec![0.0; row.len()];
        let mut acc = 0.0;
        for k in (0..row.len()).rev() {
            acc += row[k];
            s[k] = acc;
        }
        s
    };
    order.windows(2).all(|w| {
        let (lo, hi) = (survival(&dist[w[0] as usize]), survival(&dist[w[1] as usize]));
        lo.iter().zip(&hi).all(|(a, b)| *b >= *a - TOL)
    })
}

fn adjusted_matrix(data: &Dataset, treatment: &str, outcome: &str, covariates: &[String]) -> Result<Vec<Vec<f64>>> {
    let x = data.category(treatment)?;
    let y = data.category(outcome)?;
    let cov = covariates
        .iter()
        .map(|c| data.category(c))
        .collect::<Result<Vec<_>>>()?;
    let nx = data.cardinality(treatment)? as usize;
    let ny = data.cardinality(outcome)? as usize;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::InvalidData("empty dataset".into()));
    }
    // stratum -> (row count, per-x outcome counts)
    let mut strata: BTreeMap<Vec<u32>, (usize, Vec<Vec<usize>>)> = BTreeMap::new();
    for r in 0..n {
        let key: Vec<u32> = cov.iter().map(|c| c[r]).collect();
        let e = strata.entry(key).or_insert_with(|| (0, vec![vec![0; ny]; nx]));
        e.0 += 1;
        e.1[x[r] as usize][y[r] as usize] += 1;
    }
    (0..nx)
        .map(|xv| {
            let mut row = vec![0.0; ny];
            let mut weight = 0.0;
            for (count, table) in strata.values() {
                let nxs: usize = table[xv].iter().sum();
                if nxs == 0 {
                    continue;
                }
                let ps = *count as f64 / n as f64;
                weight += ps;
                for (yv, &c) in table[xv].iter().enumerate() {
                    row[yv] += ps * c as f64 / nxs as f64;
                }
            }
            if weight == 0.0 {
                return Err(Error::InvalidData(format!("no rows with {treatment}={xv}")));
            }
            row.iter_mut().for_each(|p| *p /= weight);
            Ok(row)
        })
        .collect()
}

/// Orders treatments by `E[Y | do(X)]` ascending (ties by code). An explicit
/// `domain` ordering wins over the inferred one; the trend report is still
/// computed.
pub fn infer_ordering(
    source: &OrderingSource,
    treatment: &str,
    outcome: &str,
    domain: Option<&OrderingSpec>,
) -> Result<InferredOrdering> {
    let dist = match source {
        OrderingSource::Scm(scm) => interventional_matrix(scm, scm.id(treatment)?, scm.id(outcome)?)?,
        OrderingSource::Data { data, covariates } => adjusted_matrix(data, treatment, outcome, covariates)?,
    };
    let means: Vec<f64> = dist
        .iter()
        .map(|row| row.iter().enumerate().map(|(y, p)| y as f64 * p).sum())
        .collect();
    let ate = means
        .iter()
        .map(|mi| means.iter().map(|mj| mj - mi).collect())
        .collect();
    let mut order: Vec<u32> = (0..means.len() as u32).collect();
    order.sort_by(|&a, &b| {
        means[a as usize]
            .partial_cmp(&means[b as usize])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let ny = dist.first().map_or(0, |r| r.len()) as u32;
    let (ordering, from_domain_knowledge) = match domain {
        Some(spec) => {
            spec.validate()?;
            if spec.treatment_order.len() != means.len() || spec.outcome_order.len() != ny as usize {
                return Err(Error::InvalidOrdering(
                    "domain ordering does not match the treatment/outcome cardinalities".into(),
                ));
            }
            (spec.clone(), true)
        }
        None => (
            OrderingSpec {
                treatment: treatment.into(),
                outcome: outcome.into(),
                treatment_order: order,
                outcome_order: (0..ny).collect(),
            },
            false,
        ),
    };
    let trend = trend(&means);
    // survival functions need the outcome order; reorder columns first
    let reordered: Vec<Vec<f64>> = dist
        .iter()
        .map(|r| ordering.outcome_order.iter().map(|&o| r[o as usize]).collect())
        .collect();
    let dominance = dominance_along(&reordered, &ordering.treatment_order);
    Ok(InferredOrdering {
        ordering,
        means,
        ate,
        dist,
        trend,
        non_monotone: trend == Trend::NonMonotone || !dominance,
        from_domain_knowledge,
    })
}

impl InferredOrdering {
    /// ATE matrix, rows = control treatment, columns = alternative treatment.
    pub fn write_ate_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix(out, "control", &self.ate)
    }

    /// `P(Y | do(X))`, rows = treatment, columns = outcome category.
    pub fn write_dist_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix(out, "treatment", &self.dist)
    }
}

fn write_matrix<W: Write>(out: W, corner: &str, m: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cols = m.first().map_or(0, |r| r.len());
    let mut header = vec![corner.to_string()];
    header.extend((0..cols).map(|c| c.to_string()));
    w.write_record(&header)?;
    for (i, row) in m.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
