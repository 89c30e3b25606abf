use serde::{Deserialize, Serialize};

/// A probability estimate. Exact results carry `stderr = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_effective: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate {
            value,
            stderr: 0.0,
            n_effective: 0,
        }
    }

    /// Binomial proportion `hits / n` with its plug-in standard error.
    pub fn binomial(hits: usize, n: usize) -> Estimate {
        let p = hits as f64 / n as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n_effective: n,
        }
    }

    /// `|self - other| <= k * stderr`.
    pub fn within(&self, other: f64, k: f64) -> bool {
        (self.value - other).abs() <= k * self.stderr
    }
}
