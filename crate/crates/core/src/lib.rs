//! Dimensioning of large fork-join assembly systems with Brownian
//! component backlogs: exact costs, extreme-value approximations and a
//! reproducible Monte Carlo engine.

// `!(x > 0.0)` is deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod model;
pub mod optimize;
pub mod simulate;
pub mod special;

pub use approx::MixedQuadConfig;
pub use error::{Error, Result};
pub use model::{
    capacity_from_cost, classify_regime, cost_c_indep, gamma_of, total_cost, CostRates, Method, Policy, Regime,
    Solution, SystemParams,
};
pub use simulate::{Estimate, MaxSample, QuantileMethod, SimConfig, Stream};
