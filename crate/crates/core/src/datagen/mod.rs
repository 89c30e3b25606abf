//! Synthetic and semi-synthetic generators with ground truth.
//!
//! Every generator writes three artefacts: the observed data, a sidecar with
//! the latent draws of each row, and a JSON manifest carrying the generator
//! parameters, closed-form PoC values where they exist and an exact model
//! encoding where every variable is discrete.

mod mechanisms;

pub use mechanisms::{
    confounded_poc, confounded_scm, confounded_y, credit7_scm, credit7_y, ist_logit, ist_y,
    normal_cdf, sigmoid, unconfounded_poc, unconfounded_scm, unconfounded_y, AnalyticPoc,
};

use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::scm::{ScmSpec, PROB_SUM_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Unconfounded,
    Confounded,
    Credit7,
    IstLogistic,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidConfig(format!("unknown generator kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// `P(U_Y)` for the three-branch generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    /// `P(X = 1)` (unconfounded) or `P(Z = 1)` (confounded).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            kind,
            q: None,
            p: None,
            n,
            seed,
        }
    }

    fn q3(&self) -> Result<[f64; 3]> {
        let q = self.q.clone().unwrap_or_else(|| vec![1.0 / 3.0; 3]);
        let q: [f64; 3] = q
            .try_into()
            .map_err(|v: Vec<f64>| Error::InvalidConfig(format!("q needs 3 entries, got {}", v.len())))?;
        let sum: f64 = q.iter().sum();
        if q.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::BadDistribution {
                variable: "U_Y".into(),
                sum,
            });
        }
        Ok(q)
    }

    fn prob(&self) -> Result<f64> {
        let p = self.p.unwrap_or(0.5);
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("probability {p} outside [0, 1]")));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: GeneratorSpec,
    pub treatment: String,
    pub outcome: String,
    pub covariates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticPoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scm: Option<ScmSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub data: Dataset,
    /// Latent draws, one row per data row.
    pub latents: Dataset,
    pub manifest: Manifest,
}

/// Sidecar and manifest paths next to a data file `out.csv`.
pub fn artefact_paths(data: &Path) -> (PathBuf, PathBuf) {
    let stem = data.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    let dir = data.parent().unwrap_or(Path::new(""));
    (
        dir.join(format!("{stem}.latents.csv")),
        dir.join(format!("{stem}.manifest.json")),
    )
}

fn columns(names: &[&str], rows: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    (
        names.iter().map(|s| s.to_string()).collect(),
        vec![Vec::with_capacity(rows); names.len()],
    )
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    Ok(())
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    check_n(spec.n)?;
    match spec.kind {
        GeneratorKind::Unconfounded => gen_unconfounded_spec(spec),
        GeneratorKind::Confounded => gen_confounded_spec(spec),
        GeneratorKind::Credit7 => gen_credit7(spec.n, spec.seed),
        GeneratorKind::IstLogistic => gen_ist_logistic(spec.n, spec.seed),
    }
}

pub fn gen_unconfounded(q: [f64; 3], px1: f64, n: usize, seed: u64) -> Result<Generated> {
    generate(&GeneratorSpec {
        kind: GeneratorKind::Unconfounded,
        q: Some(q.to_vec()),
        p: Some(px1),
        n,
        seed,
    })
}

pub fn gen_confounded(q: [f64; 3], pz1: f64, n: usize, seed: u64) -> Result<Generated> {
    generate(&GeneratorSpec {
        kind: GeneratorKind::Confounded,
        q: Some(q.to_vec()),
        p: Some(pz1),
        n,
        seed,
    })
}

fn gen_unconfounded_spec(spec: &GeneratorSpec) -> Result<Generated> {
    let (q, px1) = (spec.q3()?, spec.prob()?);
    let mut rng = rng::seeded(spec.seed, rng::stream::DATAGEN);
    let uy = WeightedIndex::new(q).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (names, mut cols) = columns(&["X", "Y"], spec.n);
    let (lnames, mut lcols) = columns(&["U_Y"], spec.n);
    for _ in 0..spec.n {
        let x = u32::from(rng.gen_bool(px1));
        let u = uy.sample(&mut rng) as u32;
        cols[0].push(x as f64);
        cols[1].push(unconfounded_y(x, u) as f64);
        lcols[0].push(u as f64);
    }
    Ok(Generated {
        data: Dataset::new(names, cols)?,
        latents: Dataset::new(lnames, lcols)?,
        manifest: Manifest {
            generator: GeneratorSpec {
                q: Some(q.to_vec()),
                p: Some(px1),
                ..spec.clone()
            },
            treatment: "X".into(),
            outcome: "Y".into(),
            covariates: vec![],
            analytic: Some(unconfounded_poc(q)),
            scm: Some(unconfounded_scm(q, px1)?.to_spec()),
        },
    })
}

fn gen_confounded_spec(spec: &GeneratorSpec) -> Result<Generated> {
    let (q, pz1) = (spec.q3()?, spec.prob()?);
    let mut rng = rng::seeded(spec.seed, rng::stream::DATAGEN);
    let uy = WeightedIndex::new(q).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (names, mut cols) = columns(&["Z", "X", "Y"], spec.n);
    let (lnames, mut lcols) = columns(&["U_X", "U_Y"], spec.n);
    for _ in 0..spec.n {
        let z = u32::from(rng.gen_bool(pz1));
        let ux = u32::from(rng.gen_bool(0.5));
        let x = ux ^ z;
        let u = uy.sample(&mut rng) as u32;
        cols[0].push(z as f64);
        cols[1].push(x as f64);
        cols[2].push(confounded_y(x, z, u) as f64);
        lcols[0].push(ux as f64);
        lcols[1].push(u as f64);
    }
    Ok(Generated {
        data: Dataset::new(names, cols)?,
        latents: Dataset::new(lnames, lcols)?,
        manifest: Manifest {
            generator: GeneratorSpec {
                q: Some(q.to_vec()),
                p: Some(pz1),
                ..spec.clone()
            },
            treatment: "X".into(),
            outcome: "Y".into(),
            covariates: vec!["Z".into()],
            analytic: Some(confounded_poc(q, pz1)),
            scm: Some(confounded_scm(q, pz1, 0.5)?.to_spec()),
        },
    })
}

pub fn gen_credit7(n: usize, seed: u64) -> Result<Generated> {
    check_n(n)?;
    let mut rng = rng::seeded(seed, rng::stream::DATAGEN);
    let (names, mut cols) = columns(&["X", "Z", "Y"], n);
    let (lnames, mut lcols) = columns(&["U_Y"], n);
    for _ in 0..n {
        let x = rng.gen_range(0..3u32);
        let z = rng.gen_range(0..3u32);
        let u = rng.gen_range(0..7u32);
        cols[0].push(x as f64);
        cols[1].push(z as f64);
        cols[2].push(credit7_y(x, z, u) as f64);
        lcols[0].push(u as f64);
    }
    Ok(Generated {
        data: Dataset::new(names, cols)?,
        latents: Dataset::new(lnames, lcols)?,
        manifest: Manifest {
            generator: GeneratorSpec::new(GeneratorKind::Credit7, n, seed),
            treatment: "X".into(),
            outcome: "Y".into(),
            covariates: vec!["Z".into()],
            analytic: None,
            scm: Some(credit7_scm()?.to_spec()),
        },
    })
}

/// Name of the retained continuous outcome column.
pub const IST_SIGMOID: &str = "Y_sigmoid";

pub fn gen_ist_logistic(n: usize, seed: u64) -> Result<Generated> {
    check_n(n)?;
    let mut rng = rng::seeded(seed, rng::stream::DATAGEN);
    let (names, mut cols) = columns(&["X", "SEX", "AGE", "CONSC", "Y", IST_SIGMOID], n);
    let (lnames, mut lcols) = columns(&["U_Y"], n);
    for _ in 0..n {
        let x = rng.gen_range(0..3u32);
        let sex = u32::from(rng.gen_bool(0.5));
        let age = u32::from(rng.gen_bool(0.5));
        let consc = rng.gen_range(0..3u32);
        let u: f64 = StandardNormal.sample(&mut rng);
        let g = ist_logit(x, sex, age, consc) + u;
        for (c, v) in [x, sex, age, consc, ist_y(g)].into_iter().enumerate() {
            cols[c].push(v as f64);
        }
        cols[5].push(sigmoid(g));
        lcols[0].push(u);
    }
    Ok(Generated {
        data: Dataset::new(names, cols)?,
        latents: Dataset::new(lnames, lcols)?,
        manifest: Manifest {
            generator: GeneratorSpec::new(GeneratorKind::IstLogistic, n, seed),
            treatment: "X".into(),
            outcome: "Y".into(),
            covariates: vec!["SEX".into(), "AGE".into(), "CONSC".into()],
            analytic: None,
            scm: None,
        },
    })
}

fn cell(d: &Dataset, name: &str, row: usize) -> Result<u32> {
    let v = d.column(name)?[row];
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::InvalidData(format!("'{name}' row {row}: {v} is not a category")));
    }
    Ok(v as u32)
}

impl Generated {
    /// Outcome of row `row` had the treatment been `x`, from its latent draw.
    pub fn counterfactual(&self, row: usize, x: u32) -> Result<u32> {
        let (d, l) = (&self.data, &self.latents);
        Ok(match self.manifest.generator.kind {
            GeneratorKind::Unconfounded => unconfounded_y(x, cell(l, "U_Y", row)?),
            GeneratorKind::Confounded => confounded_y(x, cell(d, "Z", row)?, cell(l, "U_Y", row)?),
            GeneratorKind::Credit7 => credit7_y(x, cell(d, "Z", row)?, cell(l, "U_Y", row)?),
            GeneratorKind::IstLogistic => {
                let g = ist_logit(x, cell(d, "SEX", row)?, cell(d, "AGE", row)?, cell(d, "CONSC", row)?);
                ist_y(g + l.column("U_Y")?[row])
            }
        })
    }

    /// `P(Y | do(X = x), covariates of row)` from the generator.
    pub fn interventional(&self, row: usize, x: u32) -> Result<Vec<f64>> {
        let d = &self.data;
        let spec = &self.manifest.generator;
        let mut p = vec![0.0; self.outcome_cardinality() as usize];
        match spec.kind {
            GeneratorKind::Unconfounded => {
                for (u, qu) in spec.q3()?.iter().enumerate() {
                    p[unconfounded_y(x, u as u32) as usize] += qu;
                }
            }
            GeneratorKind::Confounded => {
                let z = cell(d, "Z", row)?;
                for (u, qu) in spec.q3()?.iter().enumerate() {
                    p[confounded_y(x, z, u as u32) as usize] += qu;
                }
            }
            GeneratorKind::Credit7 => {
                let z = cell(d, "Z", row)?;
                for u in 0..7 {
                    p[credit7_y(x, z, u) as usize] += 1.0 / 7.0;
                }
            }
            GeneratorKind::IstLogistic => {
                let g = ist_logit(x, cell(d, "SEX", row)?, cell(d, "AGE", row)?, cell(d, "CONSC", row)?);
                // Y = 1 iff g + U > 0
                p[1] = normal_cdf(g);
                p[0] = 1.0 - p[1];
            }
        }
        Ok(p)
    }

    pub fn treatment_cardinality(&self) -> u32 {
        match self.manifest.generator.kind {
            GeneratorKind::Unconfounded | GeneratorKind::Confounded => 2,
            GeneratorKind::Credit7 | GeneratorKind::IstLogistic => 3,
        }
    }

    pub fn outcome_cardinality(&self) -> u32 {
        match self.manifest.generator.kind {
            GeneratorKind::Credit7 => 3,
            _ => 2,
        }
    }

    /// Writes the data to `path` and the sidecar and manifest next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        let (latents, manifest) = artefact_paths(path);
        self.data.write_csv(path)?;
        self.latents.write_csv(&latents)?;
        std::fs::write(manifest, serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Generated> {
        let (latents, manifest) = artefact_paths(path);
        Ok(Generated {
            data: Dataset::read_csv(path)?,
            latents: Dataset::read_csv(&latents)?,
            manifest: serde_json::from_str(&std::fs::read_to_string(manifest)?)?,
        })
    }
}
