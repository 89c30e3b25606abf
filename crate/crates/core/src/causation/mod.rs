//! Probabilities of causation and counterfactual tables.
//!
//! For a binary treatment `X` and outcome `Y`:
//! - PN  = `P(Y_{X=0} = 0 | X = 1, Y = 1)`
//! - PS  = `P(Y_{X=1} = 1 | X = 0, Y = 0)`
//! - PNS = `P(Y_{X=0} = 0, Y_{X=1} = 1)`

mod model;
mod poc;
mod tables;

pub use model::poc_from_model;
pub use poc::{poc_exact, poc_queries, PocResult};
pub use tables::{
    counterfactual_table, forbidden_residuals, CfTable, CfTemplate, ResidualBlock,
    ResidualViolation, Residuals, Source, RESIDUAL_GATE,
};
