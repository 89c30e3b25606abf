//! Training rows `(x, x*, z; y, y*)` and counterfactual label construction.

use ndarray::Array2;

use crate::data::Dataset;
use crate::datagen::Generated;
use crate::error::{Error, Result};

/// One row per (unit, counterfactual treatment) pair. `y_star` holds a
/// probability vector over outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinDataset {
    pub x: Vec<u32>,
    pub x_star: Vec<u32>,
    pub z: Array2<f64>,
    pub y: Vec<u32>,
    pub y_star: Array2<f64>,
    pub n_treatments: usize,
    pub n_outcomes: usize,
}

impl TwinDataset {
    pub fn new(
        x: Vec<u32>,
        x_star: Vec<u32>,
        z: Array2<f64>,
        y: Vec<u32>,
        y_star: Array2<f64>,
        n_treatments: usize,
        n_outcomes: usize,
    ) -> Result<TwinDataset> {
        let n = x.len();
        if x_star.len() != n || z.nrows() != n || y.len() != n || y_star.nrows() != n {
            return Err(Error::DimensionMismatch("twin dataset columns differ in length".into()));
        }
        if y_star.ncols() != n_outcomes {
            return Err(Error::DimensionMismatch(format!(
                "y* has {} columns for {n_outcomes} outcomes",
                y_star.ncols()
            )));
        }
        for r in 0..n {
            if x[r] == x_star[r] {
                return Err(Error::InvalidData(format!("row {r}: x* equals x")));
            }
            for (what, v, card) in [("x", x[r], n_treatments), ("x*", x_star[r], n_treatments), ("y", y[r], n_outcomes)] {
                if v as usize >= card {
                    return Err(Error::ValueOutOfRange {
                        variable: what.into(),
                        value: v,
                        cardinality: card as u32,
                    });
                }
            }
        }
        Ok(TwinDataset {
            x,
            x_star,
            z,
            y,
            y_star,
            n_treatments,
            n_outcomes,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn z_dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn select(&self, rows: &[usize]) -> TwinDataset {
        let pick = |a: &Array2<f64>| a.select(ndarray::Axis(0), rows);
        TwinDataset {
            x: rows.iter().map(|&r| self.x[r]).collect(),
            x_star: rows.iter().map(|&r| self.x_star[r]).collect(),
            z: pick(&self.z),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            y_star: pick(&self.y_star),
            n_treatments: self.n_treatments,
            n_outcomes: self.n_outcomes,
        }
    }
}

/// Where counterfactual labels come from.
pub enum LabelSource<'a> {
    /// `E[onehot(Y) | do(x*), z]` read from the generator.
    Generator(&'a Generated),
    /// Outcome of the nearest neighbour on `z` among units treated with `x*`.
    Matching,
}

/// Column roles of a dataset.
#[derive(Debug, Clone)]
pub struct Columns {
    pub treatment: String,
    pub outcome: String,
    pub covariates: Vec<String>,
}

impl Columns {
    pub fn new(treatment: &str, outcome: &str, covariates: &[&str]) -> Columns {
        Columns {
            treatment: treatment.into(),
            outcome: outcome.into(),
            covariates: covariates.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Covariate matrix, one row per data row.
    pub fn covariates(&self, data: &Dataset) -> Result<Array2<f64>> {
        let cols = self
            .covariates
            .iter()
            .map(|c| data.column(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Array2::from_shape_fn((data.n_rows(), cols.len()), |(r, c)| cols[c][r]))
    }
}

/// Expands every row over all `x* != x` and attaches `y*`.
pub fn make_labels(
    data: &Dataset,
    cols: &Columns,
    n_treatments: u32,
    n_outcomes: u32,
    source: &LabelSource,
) -> Result<TwinDataset> {
    let x = data.category(&cols.treatment)?;
    let y = data.category(&cols.outcome)?;
    let z = cols.covariates(data)?;
    let n = data.n_rows();
    let m = n_outcomes as usize;
    if n == 0 {
        return Err(Error::InvalidData("no rows".into()));
    }

    let matches: Option<Vec<Vec<usize>>> = match source {
        LabelSource::Matching => Some(
            (0..n_treatments)
                .map(|t| {
                    let pool: Vec<usize> = (0..n).filter(|&r| x[r] == t).collect();
                    if pool.is_empty() {
                        return Err(Error::NoMatch { treatment: t as usize });
                    }
                    Ok((0..n).map(|r| nearest(&z, r, &pool)).collect())
                })
                .collect::<Result<_>>()?,
        ),
        LabelSource::Generator(_) => None,
    };

    let rows = n * (n_treatments as usize - 1);
    let (mut ox, mut oxs, mut oy) = (Vec::with_capacity(rows), Vec::with_capacity(rows), Vec::with_capacity(rows));
    let mut oz = Array2::zeros((rows, z.ncols()));
    let mut oys = Array2::zeros((rows, m));
    let mut k = 0;
    for r in 0..n {
        if x[r] >= n_treatments || y[r] >= n_outcomes {
            return Err(Error::ValueOutOfRange {
                variable: if x[r] >= n_treatments { cols.treatment.clone() } else { cols.outcome.clone() },
                value: x[r].max(y[r]),
                cardinality: n_treatments.max(n_outcomes),
            });
        }
        for t in (0..n_treatments).filter(|&t| t != x[r]) {
            ox.push(x[r]);
            oxs.push(t);
            oy.push(y[r]);
            oz.row_mut(k).assign(&z.row(r));
            match (source, &matches) {
                (LabelSource::Generator(g), _) => {
                    let p = g.interventional(r, t)?;
                    for (c, v) in p.into_iter().enumerate() {
                        oys[[k, c]] = v;
                    }
                }
                (LabelSource::Matching, Some(mt)) => {
                    oys[[k, y[mt[t as usize][r]] as usize]] = 1.0;
                }
                _ => unreachable!(),
            }
            k += 1;
        }
    }
    TwinDataset::new(ox, oxs, oz, oy, oys, n_treatments as usize, m)
}

/// Index in `pool` closest to row `r` (Euclidean), lowest index on ties.
fn nearest(z: &Array2<f64>, r: usize, pool: &[usize]) -> usize {
    let target = z.row(r);
    let mut best = (f64::INFINITY, pool[0]);
    for &c in pool {
        let d: f64 = z.row(c).iter().zip(target.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}
