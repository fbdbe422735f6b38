//! Extreme-value approximations of the optimal policy.
//!
//! Each scheme replaces `max_i Q_i` by a tractable law, solves the
//! newsvendor condition `P(max ≤ I) = 1 − γ` under that law and reports
//! `C(I)` evaluated under the same law:
//!
//! - first order: `max ≈ (σ²/2)·log N`;
//! - Gumbel: `max ≈ (σ²/2)·(G + log N)` (independent queues);
//! - normal: `max ≈ (σ²/2)·log N + s_N·X`;
//! - mixed: `max ≈ (σ²/2)·(G + log N) + s_N·X`,
//!
//! with `G` standard Gumbel, `X` standard normal independent of `G`, and
//! `s_N = (σσ_A/√2)·√log N`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{gamma_of, CostRates, Method, Solution, SystemParams};
use crate::special::{self, QuadratureConfig};

/// Numerical knobs for [`mixed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedQuadConfig {
    /// Initial panel count of the adaptive outer integral.
    pub outer_nodes: usize,
    pub root_tol: f64,
    /// Growth factor of the root bracket when it fails to straddle the root.
    pub bracket_expansion: f64,
}

impl Default for MixedQuadConfig {
    fn default() -> Self {
        Self {
            outer_nodes: 64,
            root_tol: 1e-10,
            bracket_expansion: 2.0,
        }
    }
}

impl MixedQuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_nodes < 16 {
            return Err(domain("outer_nodes", self.outer_nodes as f64, "must be >= 16"));
        }
        if !(self.root_tol > 0.0) {
            return Err(domain("root_tol", self.root_tol, "must be > 0"));
        }
        if !(self.bracket_expansion > 1.0) {
            return Err(domain("bracket_expansion", self.bracket_expansion, "must be > 1"));
        }
        Ok(())
    }
}

fn check_inputs(params: &SystemParams, rates: &CostRates) -> Result<f64> {
    params.validate()?;
    rates.validate()?;
    Ok(gamma_of(params, rates))
}

/// `Ī = (σ²/2)·log N`, `C̄ = N·h·(Ī − (σ² + σ_A²)/2)`.
pub fn first_order(params: &SystemParams, rates: &CostRates) -> Result<Solution> {
    check_inputs(params, rates)?;
    let level = params.first_order_level();
    let cost = params.n() * rates.holding * (level - params.mean_backlog());
    if !(cost > 0.0) {
        return Err(domain("C", cost, "first-order cost is not positive: N too small"));
    }
    Solution::optimal_for_cost(level, cost, params.n_components, Method::FirstOrder)
}

/// Gumbel approximation for independent queues.
pub fn gumbel_indep(params: &SystemParams, rates: &CostRates) -> Result<Solution> {
    let gamma = check_inputs(params, rates)?;
    if !params.is_independent() {
        return Err(Error::RequiresIndependent(params.sigma_a));
    }
    // u = −log(1 − γ); Î > 0 needs u < N.
    let u = -(-gamma).ln_1p();
    if !(u < params.n()) {
        return Err(domain(
            "gamma",
            gamma,
            "Gumbel level is negative: need gamma < 1 - exp(-N)",
        ));
    }
    let half_var = 0.5 * params.sigma * params.sigma;
    let level = params.first_order_level() - half_var * u.ln();
    let tail = half_var * special::gumbel_partial_expectation(-u.ln());
    let cost = params.n() * rates.holding * (level - half_var) + rates.backlog_weight(params.n_components) * tail;
    Solution::optimal_for_cost(level, cost, params.n_components, Method::GumbelIndep)
}

/// Normal-limit approximation for dependent queues.
pub fn normal_dep(params: &SystemParams, rates: &CostRates) -> Result<Solution> {
    let gamma = check_inputs(params, rates)?;
    if !(params.sigma_a > 0.0) {
        return Err(domain(
            "sigma_a",
            params.sigma_a,
            "normal approximation needs sigma_a > 0",
        ));
    }
    if params.n_components < 2 {
        return Err(domain("N", params.n(), "normal approximation needs N >= 2"));
    }
    let q = special::std_normal_quantile(1.0 - gamma)?;
    let m = params.first_order_level();
    let s = params.clt_scale();
    let level = m + s * q;
    let nh = params.n() * rates.holding;
    let weight = rates.backlog_weight(params.n_components);
    let closed = nh * (m - params.mean_backlog())
        + weight * params.sigma * params.sigma_a * params.log_n().sqrt() * (-0.5 * q * q).exp()
            / (2.0 * std::f64::consts::PI.sqrt());
    let composed = nh * (level - params.mean_backlog()) + weight * special::normal_partial_expectation(m, s, level)?;
    if (closed - composed).abs() > 1e-10 * closed.abs().max(1.0) {
        return Err(Error::BoundViolated(format!(
            "normal cost identity: closed form {closed} vs composition {composed}"
        )));
    }
    Solution::optimal_for_cost(level, closed, params.n_components, Method::NormalDep)
}

fn require_mixed(params: &SystemParams) -> Result<()> {
    params.validate()?;
    if params.n_components < 2 {
        return Err(domain("N", params.n(), "mixed approximation needs N >= 2"));
    }
    Ok(())
}

fn quad_cfg() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    }
}

/// Beyond ±this many standard deviations the normal weight is below 1e-32.
const NORMAL_CUTOFF: f64 = 12.0;

/// `P((σ²/2)·G + (σ²/2)·log N + s_N·X ≤ I)`.
pub fn mixed_cdf(params: &SystemParams, level: f64) -> Result<f64> {
    require_mixed(params)?;
    mixed_cdf_with(params, level, MixedQuadConfig::default().outer_nodes)
}

fn mixed_cdf_with(params: &SystemParams, level: f64, panels: usize) -> Result<f64> {
    let half_var = 0.5 * params.sigma * params.sigma;
    let centered = (level - params.first_order_level()) / half_var;
    let s = params.clt_scale() / half_var;
    if s == 0.0 {
        return Ok(special::gumbel_cdf(centered));
    }
    let f = |x: f64| special::gumbel_cdf(centered - s * x) * special::std_normal_pdf(x);
    Ok(special::integrate_panels(f, -NORMAL_CUTOFF, NORMAL_CUTOFF, panels, &quad_cfg())?.value)
}

/// Gumbel weight below `g = −5` is `< e^{-140}`.
const GUMBEL_LOWER: f64 = -5.0;
/// Split point between the finite and the semi-infinite outer panels.
const GUMBEL_SPLIT: f64 = 12.0;

/// `E[((σ²/2)·G + (σ²/2)·log N + s_N·X − I)^+]`, integrating the normal
/// partial expectation against the Gumbel density.
pub fn mixed_overshoot(params: &SystemParams, level: f64, quad: &MixedQuadConfig) -> Result<f64> {
    require_mixed(params)?;
    quad.validate()?;
    let half_var = 0.5 * params.sigma * params.sigma;
    let m = params.first_order_level();
    let s = params.clt_scale();
    if s == 0.0 {
        return Ok(half_var * special::gumbel_partial_expectation((level - m) / half_var));
    }
    let f = |g: f64| {
        let inner = special::normal_loss((level - m - half_var * g) / s) * s;
        inner * special::gumbel_pdf(g)
    };
    let cfg = quad_cfg();
    let body = special::integrate_panels(f, GUMBEL_LOWER, GUMBEL_SPLIT, quad.outer_nodes, &cfg)?;
    let tail = special::integrate_to_infinity(f, GUMBEL_SPLIT, &cfg)?;
    Ok(body.value + tail.value)
}

/// Root of `mixed_cdf(I) = 1 − γ` by bracketed Brent iteration.
pub fn mixed_level(params: &SystemParams, gamma: f64, quad: &MixedQuadConfig) -> Result<f64> {
    require_mixed(params)?;
    quad.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain("gamma", gamma, "must lie in (0, 1)"));
    }
    let target = 1.0 - gamma;
    let center = params.first_order_level();
    let width = 5.0 * (0.5 * params.sigma * params.sigma * special::GUMBEL_SD + params.clt_scale());
    let f = |x: f64| mixed_cdf_with(params, x, quad.outer_nodes).map_or(f64::NAN, |c| c - target);
    let (lo, hi) = special::expand_bracket(f, center - width, center + width, quad.bracket_expansion, 60)?;
    special::brent(f, lo, hi, quad.root_tol)
}

/// Mixed Gumbel-plus-normal approximation.
pub fn mixed(params: &SystemParams, rates: &CostRates, quad: &MixedQuadConfig) -> Result<Solution> {
    let gamma = check_inputs(params, rates)?;
    let level = mixed_level(params, gamma, quad)?;
    if !(level >= 0.0) {
        return Err(domain("I", level, "mixed inventory level is negative"));
    }
    let tail = mixed_overshoot(params, level, quad)?;
    let cost =
        params.n() * rates.holding * (level - params.mean_backlog()) + rates.backlog_weight(params.n_components) * tail;
    Solution::optimal_for_cost(level, cost, params.n_components, Method::Mixed)
}
