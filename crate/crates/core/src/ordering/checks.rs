//! Exact checks on a model against an ordering.

use super::{OrderingSpec, ViolationKind, ViolationReport, Witness, TOL};
use crate::error::Result;
use crate::scm::{Assignment, Scm, VarId, ZERO_EVIDENCE};
use crate::twin::{counterfactual_table, World};

/// How the premise of the ordering definition is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PremiseForm {
    /// `P(Y_{x_i} = y_k) >= P(Y_{x_j} = y_k)` for every `k` above the bottom
    /// and `<=` for every `h` below the top, for all `i > j`.
    #[default]
    Pointwise,
    /// `P(Y_{x_i} >= y_k) >= P(Y_{x_j} >= y_k)` for every `k` and `i > j`.
    Dominance,
}

/// Which `(x, x', y, y')` quadruples the stability check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilityScope {
    /// `x` above `x'` and `y` above `y'` in the ordering.
    #[default]
    Ordered,
    /// Every `x != x'`, `y != y'`.
    All,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CfOrderingCheck {
    pub violations: Vec<ViolationReport>,
    /// `(i, j, h)` triples whose conditioning event `Y_{x_i} = y_h` has zero
    /// probability.
    pub skipped: Vec<(usize, usize, usize)>,
}

fn ids(scm: &Scm, ord: &OrderingSpec) -> Result<(VarId, VarId)> {
    ord.validate_for(scm)?;
    Ok((scm.id(&ord.treatment)?, scm.id(&ord.outcome)?))
}

/// `P(Y = y | do(X = x))` indexed `[x][y]` by category code.
pub(crate) fn interventional_matrix(scm: &Scm, x: VarId, y: VarId) -> Result<Vec<Vec<f64>>> {
    (0..scm.cardinality(x))
        .map(|c| {
            let m = scm.intervene_ids(&[(x, c)]);
            let mut row = vec![0.0; scm.cardinality(y) as usize];
            m.for_each_world(|v, p| row[v[y] as usize] += p)?;
            Ok(row)
        })
        .collect()
}

/// Joint `P(Y_{a} = r, Y_{b} = c)` indexed `[r][c]` by category code.
fn cf_joint(scm: &Scm, ord: &OrderingSpec, a: u32, b: u32) -> Result<Vec<Vec<f64>>> {
    let mut fdo = Assignment::new();
    fdo.insert(ord.treatment.clone(), a);
    let mut cdo = Assignment::new();
    cdo.insert(ord.treatment.clone(), b);
    let t = counterfactual_table(
        scm,
        &Assignment::new(),
        &fdo,
        &cdo,
        &[(&ord.outcome, World::Factual), (&ord.outcome, World::Counterfactual)],
    )?;
    let m = ord.outcome_order.len();
    let mut out = vec![vec![0.0; m]; m];
    for (s, &p) in t.support.iter().zip(&t.probs) {
        out[s[0] as usize][s[1] as usize] += p;
    }
    Ok(out)
}

fn premise_report(i: usize, j: usize, k: usize, magnitude: f64) -> ViolationReport {
    ViolationReport {
        kind: ViolationKind::InterventionalPremise,
        witness: Witness::Indices { i, j, h: k, l: k },
        magnitude,
    }
}

/// Premise of the ordering definition under `form`, from exact
/// interventional distributions.
pub fn check_interventional_premise(
    scm: &Scm,
    ord: &OrderingSpec,
    form: PremiseForm,
) -> Result<Vec<ViolationReport>> {
    let (x, y) = ids(scm, ord)?;
    let dist = interventional_matrix(scm, x, y)?;
    // reorder into ordering positions
    let p: Vec<Vec<f64>> = ord
        .treatment_order
        .iter()
        .map(|&t| ord.outcome_order.iter().map(|&o| dist[t as usize][o as usize]).collect())
        .collect();
    let (n, m) = (p.len(), ord.outcome_order.len());
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..i {
            match form {
                PremiseForm::Pointwise => {
                    for k in 0..m {
                        if k > 0 && p[i][k] < p[j][k] - TOL {
                            out.push(premise_report(i, j, k, p[j][k] - p[i][k]));
                        } else if k + 1 < m && p[i][k] > p[j][k] + TOL {
                            out.push(premise_report(i, j, k, p[i][k] - p[j][k]));
                        }
                    }
                }
                PremiseForm::Dominance => {
                    let (mut si, mut sj) = (0.0, 0.0);
                    for k in (1..m).rev() {
                        si += p[i][k];
                        sj += p[j][k];
                        if si < sj - TOL {
                            out.push(premise_report(i, j, k, sj - si));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Every latent configuration with positive probability where a higher
/// treatment yields a lower outcome.
pub fn check_monotone(scm: &Scm, ord: &OrderingSpec) -> Result<Vec<ViolationReport>> {
    let (x, y) = ids(scm, ord)?;
    scm.check_cap()?;
    let rank = ord.outcome_rank();
    let arms: Vec<Scm> = ord.treatment_order.iter().map(|&t| scm.intervene_ids(&[(x, t)])).collect();
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut ys = vec![0usize; arms.len()];
    scm.for_each_world(|values, p| {
        for (a, arm) in arms.iter().enumerate() {
            buf.clear();
            buf.extend_from_slice(values);
            arm.propagate(&mut buf);
            ys[a] = rank[buf[y] as usize];
        }
        for i in 0..arms.len() {
            for j in 0..i {
                if ys[i] < ys[j] {
                    let u = scm
                        .latents()
                        .iter()
                        .map(|&l| (scm.name(l).to_string(), values[l]))
                        .collect();
                    out.push(ViolationReport {
                        kind: ViolationKind::Monotonicity,
                        witness: Witness::Latent { u, i, j },
                        magnitude: p,
                    });
                }
            }
        }
    })?;
    Ok(out)
}

/// Forbidden conditionals `P(Y_{x_j} = y_l | Y_{x_i} = y_h)` for `i > j`,
/// `l > h`, with zero-probability conditioning events listed separately.
pub fn check_cf_ordering_detailed(scm: &Scm, ord: &OrderingSpec) -> Result<CfOrderingCheck> {
    ids(scm, ord)?;
    let (n, m) = (ord.treatment_order.len(), ord.outcome_order.len());
    let mut check = CfOrderingCheck::default();
    for i in 0..n {
        for j in 0..i {
            let joint = cf_joint(scm, ord, ord.treatment_order[i], ord.treatment_order[j])?;
            for h in 0..m {
                let yh = ord.outcome_order[h] as usize;
                let marg: f64 = joint[yh].iter().sum();
                if marg < ZERO_EVIDENCE {
                    check.skipped.push((i, j, h));
                    continue;
                }
                for l in h + 1..m {
                    let c = joint[yh][ord.outcome_order[l] as usize] / marg;
                    if c > TOL {
                        check.violations.push(ViolationReport {
                            kind: ViolationKind::Ordering,
                            witness: Witness::Indices { i, j, h, l },
                            magnitude: c,
                        });
                    }
                }
            }
        }
    }
    Ok(check)
}

pub fn check_cf_ordering(scm: &Scm, ord: &OrderingSpec) -> Result<Vec<ViolationReport>> {
    Ok(check_cf_ordering_detailed(scm, ord)?.violations)
}

pub fn check_stability(scm: &Scm, ord: &OrderingSpec) -> Result<Vec<ViolationReport>> {
    check_stability_scoped(scm, ord, StabilityScope::Ordered)
}

/// `a / b` with `a / 0 = +inf` for `a > 0`; `None` for `0 / 0`.
fn ratio(a: f64, b: f64) -> Option<f64> {
    match (a > TOL, b > TOL) {
        (_, true) => Some(a / b),
        (true, false) => Some(f64::INFINITY),
        (false, false) => None,
    }
}

/// Stability: whenever `P(Y_x=y)/P(Y_x'=y') >= P(Y_x=y')/P(Y_x'=y)`, the
/// conditional `P(Y_x = y' | Y_x' = y)` must vanish. Witness positions:
/// `i` of `x`, `j` of `x'`, `l` of `y`, `h` of `y'`.
pub fn check_stability_scoped(
    scm: &Scm,
    ord: &OrderingSpec,
    scope: StabilityScope,
) -> Result<Vec<ViolationReport>> {
    let (x, y) = ids(scm, ord)?;
    let dist = interventional_matrix(scm, x, y)?;
    let (n, m) = (ord.treatment_order.len(), ord.outcome_order.len());
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let admissible = match scope {
                StabilityScope::Ordered => i > j,
                StabilityScope::All => i != j,
            };
            if !admissible {
                continue;
            }
            let (xv, xpv) = (ord.treatment_order[i] as usize, ord.treatment_order[j] as usize);
            // joint[a][b] = P(Y_{x'} = a, Y_x = b)
            let joint = cf_joint(scm, ord, xpv as u32, xv as u32)?;
            for l in 0..m {
                for h in 0..m {
                    let admissible = match scope {
                        StabilityScope::Ordered => l > h,
                        StabilityScope::All => l != h,
                    };
                    if !admissible {
                        continue;
                    }
                    let (yv, ypv) = (ord.outcome_order[l] as usize, ord.outcome_order[h] as usize);
                    let lhs = ratio(dist[xv][yv], dist[xpv][ypv]);
                    let rhs = ratio(dist[xv][ypv], dist[xpv][yv]);
                    let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
                        continue;
                    };
                    if lhs < rhs - TOL {
                        continue;
                    }
                    let marg: f64 = joint[yv].iter().sum();
                    if marg < ZERO_EVIDENCE {
                        continue;
                    }
                    let c = joint[yv][ypv] / marg;
                    if c > TOL {
                        out.push(ViolationReport {
                            kind: ViolationKind::Stability,
                            witness: Witness::Indices { i, j, h, l },
                            magnitude: c,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
