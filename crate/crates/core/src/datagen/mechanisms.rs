//! Outcome rules, exact encodings and closed-form PoC of the generators.

use serde::{Deserialize, Serialize};

use crate::causation::PocResult;
use crate::error::Result;
use crate::scm::Scm;
use crate::twin::Estimate;

/// Three-branch rule: `x` (u=0), `0` (u=1), `1` (u=2).
pub fn unconfounded_y(x: u32, u: u32) -> u32 {
    match u {
        0 => x,
        1 => 0,
        _ => 1,
    }
}

/// Confounded three-branch rule with `x * z` in branch 0.
pub fn confounded_y(x: u32, z: u32, u: u32) -> u32 {
    match u {
        0 => x * z,
        1 => 0,
        _ => 1,
    }
}

fn step(v: i64) -> u32 {
    u32::from(v > 0)
}

/// Seven-branch credit rule, clipped to `{0, 1, 2}`.
pub fn credit7_y(x: u32, z: u32, u: u32) -> u32 {
    let xi = x as i64;
    let raw = match u {
        0 => x + z,
        1 => 0,
        2 => x * z,
        3 => 2,
        4 => 1,
        5 => step(xi - 1),
        _ => 2 * step(xi - 1),
    };
    raw.min(2)
}

/// Deterministic part of the IST logit.
pub fn ist_logit(x: u32, sex: u32, age: u32, consc: u32) -> f64 {
    let (x, sex, age, consc) = (x as f64, sex as f64, age as f64, consc as f64);
    x + sex + 0.2 * (consc - 1.0) + 0.5 * x * sex * age
}

pub fn sigmoid(g: f64) -> f64 {
    1.0 / (1.0 + (-g).exp())
}

/// `1[sigmoid(g) > 0.5]`.
pub fn ist_y(g: f64) -> u32 {
    u32::from(sigmoid(g) > 0.5)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Closed-form PoC. `None` where the conditioning event has probability 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPoc {
    pub pn: Option<f64>,
    pub ps: Option<f64>,
    pub pns: f64,
}

impl AnalyticPoc {
    pub fn to_result(&self) -> Option<PocResult> {
        Some(PocResult {
            pn: Estimate::exact(self.pn?),
            ps: Estimate::exact(self.ps?),
            pns: Estimate::exact(self.pns),
        })
    }
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

pub fn unconfounded_poc(q: [f64; 3]) -> AnalyticPoc {
    AnalyticPoc {
        pn: ratio(q[0], q[0] + q[2]),
        ps: ratio(q[0], q[0] + q[1]),
        pns: q[0],
    }
}

/// Closed forms for `U_x ~ Bernoulli(0.5)`, where `X` is independent of `Z`.
pub fn confounded_poc(q: [f64; 3], pz1: f64) -> AnalyticPoc {
    AnalyticPoc {
        pn: ratio(q[0] * pz1, q[2] + q[0] * pz1),
        ps: ratio(q[0] * pz1, q[1] + q[0]),
        pns: q[0] * pz1,
    }
}

pub fn unconfounded_scm(q: [f64; 3], px1: f64) -> Result<Scm> {
    Scm::builder()
        .latent("U_X", vec![1.0 - px1, px1])
        .latent("U_Y", q.to_vec())
        .observed("X", 2, &["U_X"], vec![0, 1])
        .observed_fn("Y", 2, &["X", "U_Y"], |v| unconfounded_y(v[0], v[1]))
        .build()
}

/// `pux1` is `P(U_x = 1)`; the generator itself uses 0.5.
pub fn confounded_scm(q: [f64; 3], pz1: f64, pux1: f64) -> Result<Scm> {
    Scm::builder()
        .latent("U_Z", vec![1.0 - pz1, pz1])
        .latent("U_X", vec![1.0 - pux1, pux1])
        .latent("U_Y", q.to_vec())
        .observed("Z", 2, &["U_Z"], vec![0, 1])
        .observed_fn("X", 2, &["Z", "U_X"], |v| v[0] ^ v[1])
        .observed_fn("Y", 2, &["X", "Z", "U_Y"], |v| confounded_y(v[0], v[1], v[2]))
        .build()
}

pub fn credit7_scm() -> Result<Scm> {
    Scm::builder()
        .latent("U_X", vec![1.0 / 3.0; 3])
        .latent("U_Z", vec![1.0 / 3.0; 3])
        .latent("U_Y", vec![1.0 / 7.0; 7])
        .observed("X", 3, &["U_X"], vec![0, 1, 2])
        .observed("Z", 3, &["U_Z"], vec![0, 1, 2])
        .observed_fn("Y", 3, &["X", "Z", "U_Y"], |v| credit7_y(v[0], v[1], v[2]))
        .build()
}
