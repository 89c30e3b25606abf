//! Side-by-side timing of the two sampling estimators.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{counterfactual_aap, counterfactual_mc, CounterfactualQuery, Estimate};
use crate::error::Result;
use crate::rng;
use crate::scm::Scm;

/// One JSON line of the bench report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchLine {
    pub query_id: String,
    pub method: String,
    pub estimate: f64,
    pub stderr: f64,
    pub n_accepted: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub query_id: String,
    pub diff: f64,
    /// `2 * (stderr_mc + stderr_aap)`.
    pub tolerance: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub lines: Vec<BenchLine>,
    pub agreements: Vec<Agreement>,
}

impl BenchReport {
    /// JSON lines: one per estimator run.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for l in &self.lines {
            serde_json::to_writer(&mut out, l)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn all_agree(&self) -> bool {
        self.agreements.iter().all(|a| a.agree)
    }
}

fn line(id: &str, method: &str, e: &Estimate, ms: f64) -> BenchLine {
    BenchLine {
        query_id: id.to_string(),
        method: method.to_string(),
        estimate: e.value,
        stderr: e.stderr,
        n_accepted: e.n_effective,
        wall_ms: ms,
    }
}

/// Run twin-MC and AAP on every query with `n` draws each. Query `i` uses
/// seed `split(seed, i)` for both estimators.
pub fn bench_compare(
    scm: &Scm,
    queries: &[(String, CounterfactualQuery)],
    n: usize,
    seed: u64,
) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for (i, (id, q)) in queries.iter().enumerate() {
        let s = rng::split(seed, i as u64);
        let t = Instant::now();
        let mc = counterfactual_mc(scm, q, n, s)?;
        let mc_ms = t.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let aap = counterfactual_aap(scm, q, n, s)?;
        let aap_ms = t.elapsed().as_secs_f64() * 1e3;
        report.lines.push(line(id, "twin-mc", &mc, mc_ms));
        report.lines.push(line(id, "aap", &aap, aap_ms));
        let diff = (mc.value - aap.value).abs();
        let tolerance = 2.0 * (mc.stderr + aap.stderr);
        report.agreements.push(Agreement {
            query_id: id.clone(),
            diff,
            tolerance,
            agree: diff <= tolerance,
        });
    }
    Ok(report)
}
