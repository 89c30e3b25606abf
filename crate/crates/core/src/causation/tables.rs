//! Counterfactual tables over treatment pairs and forbidden-conditional
//! residuals.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::model::{pool, ratio};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learn::{sample_joint, Columns, TwinModel};
use crate::ordering::OrderingSpec;
use crate::rng;
use crate::scm::{Assignment, Cmp, Scm, ZERO_EVIDENCE};
use crate::twin::{counterfactual_exact, counterfactual_mc, counterfactual_table as twin_table, CounterfactualQuery, Estimate, EventSpec, TargetEvent, World};

/// Per-entry gate for trained-model residuals.
pub const RESIDUAL_GATE: f64 = 0.02;

/// Where table entries come from.
pub enum Source<'a> {
    /// Exact enumeration.
    Scm(&'a Scm),
    /// Twin-network rejection sampling with `n` draws per entry.
    ScmMc(&'a Scm),
    Model {
        model: &'a TwinModel,
        data: &'a Dataset,
        cols: &'a Columns,
    },
}

/// `P(Y_{X=T'} op value | X = T, Y = evidence_outcome)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfTemplate {
    pub evidence_outcome: u32,
    pub target: EventSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfTable {
    /// Treatment codes in ordering position.
    pub treatments: Vec<u32>,
    /// `entries[row][col]`: factual treatment `treatments[row]`,
    /// counterfactual treatment `treatments[col]`. Diagonal is 0 by
    /// convention; `None` where the evidence has probability 0.
    pub entries: Vec<Vec<Option<Estimate>>>,
    /// Mean of the upper-triangle entries minus mean of the lower-triangle.
    pub dominance: f64,
}

fn assignment(pairs: &[(&str, u32)]) -> Assignment {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn names<'a>(source: &'a Source, ord: &'a OrderingSpec) -> (&'a str, &'a str) {
    match source {
        Source::Scm(_) | Source::ScmMc(_) => (&ord.treatment, &ord.outcome),
        Source::Model { cols, .. } => (&cols.treatment, &cols.outcome),
    }
}

fn check_model(source: &Source, ord: &OrderingSpec) -> Result<()> {
    ord.validate()?;
    if let Source::Model { model, .. } = source {
        if ord.treatment_order.len() != model.config.n_treatments || ord.outcome_order.len() != model.config.n_outcomes {
            return Err(Error::InvalidOrdering("ordering does not match the model's heads".into()));
        }
    }
    if let Source::Scm(scm) | Source::ScmMc(scm) = source {
        ord.validate_for(scm)?;
    }
    Ok(())
}

pub fn counterfactual_table(
    source: &Source,
    template: &CfTemplate,
    ord: &OrderingSpec,
    n: usize,
    seed: u64,
) -> Result<CfTable> {
    check_model(source, ord)?;
    let (tname, yname) = names(source, ord);
    let t = &ord.treatment_order;
    let mut entries = vec![vec![None; t.len()]; t.len()];
    for (r, &xf) in t.iter().enumerate() {
        for (c, &xc) in t.iter().enumerate() {
            if r == c {
                entries[r][c] = Some(Estimate::exact(0.0));
                continue;
            }
            let cell_seed = rng::split(seed, (r * t.len() + c) as u64);
            entries[r][c] = match source {
                Source::Scm(scm) | Source::ScmMc(scm) => {
                    let q = CounterfactualQuery::simple(
                        TargetEvent::cf(yname, template.target.op, template.target.value),
                        assignment(&[(tname, xf), (yname, template.evidence_outcome)]),
                        assignment(&[(tname, xc)]),
                    );
                    let est = match source {
                        Source::Scm(_) => counterfactual_exact(scm, &q).map(Estimate::exact),
                        _ => counterfactual_mc(scm, &q, n, cell_seed),
                    };
                    match est {
                        Ok(e) => Some(e),
                        Err(Error::ZeroEvidence { .. } | Error::NoAcceptedSamples { .. }) => None,
                        Err(e) => return Err(e),
                    }
                }
                Source::Model { model, data, cols } => {
                    let p = pool(data, cols, Some(xf))?;
                    let j = sample_joint(model, &p, xf as usize, xc as usize, n, cell_seed)?;
                    let e = template.evidence_outcome as usize;
                    let hits = (0..j.counts.len())
                        .filter(|&ys| template.target.op.test(ys as u32, template.target.value))
                        .map(|ys| j.counts[e][ys])
                        .sum();
                    match ratio(hits, j.accepted(e), n) {
                        Ok(est) => Some(est),
                        Err(Error::NoAcceptedSamples { .. }) => None,
                        Err(e) => return Err(e),
                    }
                }
            };
        }
    }
    let tri = |upper: bool| -> f64 {
        let vals: Vec<f64> = (0..t.len())
            .flat_map(|r| (0..t.len()).map(move |c| (r, c)))
            .filter(|&(r, c)| if upper { c > r } else { c < r })
            .filter_map(|(r, c)| entries[r][c].map(|e| e.value))
            .collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let dominance = tri(true) - tri(false);
    Ok(CfTable {
        treatments: t.clone(),
        entries,
        dominance,
    })
}

/// One treatment pair of the residual report: `matrix[h][l]` is
/// `P(Y_{x_j} = y_l | Y_{x_i} = y_h)` with `i > j` in the ordering and
/// outcomes in ordering position. Cells with `l > h` are forbidden under
/// counterfactual ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlock {
    pub i: usize,
    pub j: usize,
    pub x_i: u32,
    pub x_j: u32,
    pub matrix: Vec<Vec<Option<Estimate>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub outcomes: Vec<u32>,
    pub blocks: Vec<ResidualBlock>,
}

/// A forbidden cell above a gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualViolation {
    pub i: usize,
    pub j: usize,
    pub h: usize,
    pub l: usize,
    pub value: f64,
}

impl Residuals {
    /// Largest forbidden entry (0 when every conditioning event is empty).
    pub fn max_forbidden(&self) -> f64 {
        self.forbidden().map(|(.., v)| v).fold(0.0, f64::max)
    }

    fn forbidden(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        self.blocks.iter().flat_map(|b| {
            b.matrix.iter().enumerate().flat_map(move |(h, row)| {
                row.iter()
                    .enumerate()
                    .filter(move |&(l, _)| l > h)
                    .filter_map(move |(l, e)| e.map(|e| (b.i, b.j, h, l, e.value)))
            })
        })
    }

    pub fn violations(&self, gate: f64) -> Vec<ResidualViolation> {
        self.forbidden()
            .filter(|&(.., v)| v > gate)
            .map(|(i, j, h, l, value)| ResidualViolation { i, j, h, l, value })
            .collect()
    }

    /// One CSV section per treatment pair: a header line
    /// `pair,x_i,x_j`, then rows `y_h,value...` over `y_l`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for b in &self.blocks {
            w.write_record(["pair".to_string(), b.x_i.to_string(), b.x_j.to_string()])?;
            let mut header = vec!["P".to_string()];
            header.extend(self.outcomes.iter().map(|o| o.to_string()));
            w.write_record(&header)?;
            for (h, row) in b.matrix.iter().enumerate() {
                let mut rec = vec![self.outcomes[h].to_string()];
                rec.extend(row.iter().map(cell));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(e: &Option<Estimate>) -> String {
    match e {
        Some(e) => format!("{:.6}", e.value),
        None => String::new(),
    }
}

pub fn forbidden_residuals(source: &Source, ord: &OrderingSpec, n: usize, seed: u64) -> Result<Residuals> {
    check_model(source, ord)?;
    let (tname, yname) = names(source, ord);
    let (t, o) = (&ord.treatment_order, &ord.outcome_order);
    let m = o.len();
    let mut blocks = Vec::new();
    for i in 0..t.len() {
        for j in 0..i {
            let block_seed = rng::split(seed, (i * t.len() + j) as u64);
            // joint[a][b] over category codes: a = Y_{x_i}, b = Y_{x_j}
            let matrix: Vec<Vec<Option<Estimate>>> = match source {
                Source::Scm(scm) => {
                    let f = assignment(&[(tname, t[i])]);
                    let c = assignment(&[(tname, t[j])]);
                    let tab = twin_table(scm, &Assignment::new(), &f, &c, &[(yname, World::Factual), (yname, World::Counterfactual)])?;
                    let mut joint = vec![vec![0.0; m]; m];
                    for (s, &p) in tab.support.iter().zip(&tab.probs) {
                        joint[s[0] as usize][s[1] as usize] += p;
                    }
                    o.iter()
                        .map(|&yh| {
                            let marg: f64 = joint[yh as usize].iter().sum();
                            o.iter()
                                .map(|&yl| (marg > ZERO_EVIDENCE).then(|| Estimate::exact(joint[yh as usize][yl as usize] / marg)))
                                .collect()
                        })
                        .collect()
                }
                Source::ScmMc(scm) => {
                    let mut rows = Vec::with_capacity(m);
                    for (h, &yh) in o.iter().enumerate() {
                        let mut row = Vec::with_capacity(m);
                        for (l, &yl) in o.iter().enumerate() {
                            let q = CounterfactualQuery {
                                target: vec![TargetEvent::cf(yname, Cmp::Eq, yl)],
                                evidence: assignment(&[(yname, yh)]),
                                factual_intervention: assignment(&[(tname, t[i])]),
                                cf_intervention: assignment(&[(tname, t[j])]),
                            };
                            row.push(match counterfactual_mc(scm, &q, n, rng::split(block_seed, (h * m + l) as u64)) {
                                Ok(e) => Some(e),
                                Err(Error::ZeroEvidence { .. } | Error::NoAcceptedSamples { .. }) => None,
                                Err(e) => return Err(e),
                            });
                        }
                        rows.push(row);
                    }
                    rows
                }
                Source::Model { model, data, cols } => {
                    let p = pool(data, cols, None)?;
                    let jc = sample_joint(model, &p, t[i] as usize, t[j] as usize, n, block_seed)?;
                    o.iter()
                        .map(|&yh| {
                            o.iter()
                                .map(|&yl| ratio(jc.counts[yh as usize][yl as usize], jc.accepted(yh as usize), n).ok())
                                .collect()
                        })
                        .collect()
                }
            };
            blocks.push(ResidualBlock {
                i,
                j,
                x_i: t[i],
                x_j: t[j],
                matrix,
            });
        }
    }
    Ok(Residuals {
        outcomes: o.clone(),
        blocks,
    })
}

impl CfTable {
    /// Header `T\T'` then one row per factual treatment. Empty cells mark
    /// undefined entries.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["T\\T'".to_string()];
        header.extend(self.treatments.iter().map(|t| t.to_string()));
        w.write_record(&header)?;
        for (r, row) in self.entries.iter().enumerate() {
            let mut rec = vec![self.treatments[r].to_string()];
            rec.extend(row.iter().map(cell));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
