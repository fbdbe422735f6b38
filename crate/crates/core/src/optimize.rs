//! End-to-end solvers and diagnostics.

use serde::{Deserialize, Serialize};

use crate::approx;
use crate::error::{domain, Error, Result};
use crate::model::{
    cost_c_from_overshoot, cost_c_indep, gamma_of, total_cost, CostRates, Method, Policy, Regime, Solution,
    SystemParams,
};
use crate::simulate::{self, labels, Estimate, SimConfig, Stream};
use crate::special::{self, QuadratureConfig};

/// Exact optimum for independent queues: `I*` is the `(1 − γ)`-quantile of
/// the maximum of `N` exponentials.
pub fn solve_exact_indep(params: &SystemParams, rates: &CostRates) -> Result<Solution> {
    params.validate()?;
    rates.validate()?;
    if !params.is_independent() {
        return Err(Error::RequiresIndependent(params.sigma_a));
    }
    let gamma = gamma_of(params, rates);
    let level = special::exp_max_quantile(params.n_components, params.sigma, 1.0 - gamma)?;
    let cost = cost_c_indep(params, rates, level)?;
    Solution::optimal_for_cost(level, cost, params.n_components, Method::ExactIndep)
}

/// Everything produced by [`solve_dep_simulated_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepSimReport {
    /// `cost_c`, `cost_f` and `stderr_f` come from the fresh replications.
    pub solution: Solution,
    /// Estimated `(1 − γ)`-quantile on the standardized scale.
    pub standardized_quantile: f64,
    /// `C(I^A)` from the replications that fixed `β`.
    pub fitted_cost_c: Estimate,
    pub fresh_cost_c: Estimate,
    /// Fresh maxima, reusable to price other policies on common numbers.
    pub fresh_maxima: Vec<f64>,
    /// Share of fresh replications whose argmax fell at the horizon's end.
    pub truncated_fraction: f64,
}

/// Simulation-based optimum for dependent queues.
///
/// The quantile, the capacity fit and the final cost evaluation use three
/// disjoint substreams of `stream`.
pub fn solve_dep_simulated_report(
    params: &SystemParams,
    rates: &CostRates,
    cfg: &SimConfig,
    stream: &Stream,
) -> Result<DepSimReport> {
    params.validate()?;
    rates.validate()?;
    if !(params.sigma_a > 0.0) {
        return Err(domain("sigma_a", params.sigma_a, "simulated solver needs sigma_a > 0"));
    }
    let gamma = gamma_of(params, rates);
    let level = simulate::estimate_quantile(params, 1.0 - gamma, cfg, &stream.substream(labels::QUANTILE))?;
    let standardized_quantile = simulate::standardize(params, level)?;
    let level = level.max(0.0);

    let fitted_cost_c = simulate::estimate_cost_c_dep(params, rates, level, cfg, &stream.substream(labels::OVERSHOOT))?;
    let capacity = crate::model::capacity_from_cost(fitted_cost_c.value, params.n_components)?;

    let fresh = simulate::sample_batch(params, cfg, &stream.substream(labels::FRESH), 0, cfg.overshoot_reps)?;
    let fresh_maxima: Vec<f64> = fresh.iter().map(|s| s.max_backlog).collect();
    let truncated_fraction = fresh.iter().filter(|s| s.truncated).count() as f64 / fresh.len() as f64;
    let policy = Policy::new(level, capacity)?;
    let fresh_cost_c = cost_c_on_samples(params, rates, level, &fresh_maxima);
    let cost_f = total_cost(fresh_cost_c.value, capacity, params.n_components)?;

    Ok(DepSimReport {
        solution: Solution {
            policy,
            cost_c: fresh_cost_c.value,
            cost_f,
            method: Method::SimulatedDep,
            stderr_f: fresh_cost_c.stderr / capacity,
        },
        standardized_quantile,
        fitted_cost_c,
        fresh_cost_c,
        fresh_maxima,
        truncated_fraction,
    })
}

pub fn solve_dep_simulated(
    params: &SystemParams,
    rates: &CostRates,
    cfg: &SimConfig,
    stream: &Stream,
) -> Result<Solution> {
    Ok(solve_dep_simulated_report(params, rates, cfg, stream)?.solution)
}

fn cost_c_on_samples(params: &SystemParams, rates: &CostRates, level: f64, maxima: &[f64]) -> Estimate {
    let over = simulate::overshoot_from_samples(maxima, level);
    simulate::cost_c_from_estimate(params, rates, level, over)
}

/// `F(I, β)` of `policy` under the true backlog law: closed form when
/// `σ_A = 0` (stderr 0), otherwise simulated on `stream`.
pub fn evaluate_policy(
    params: &SystemParams,
    rates: &CostRates,
    policy: &Policy,
    cfg: &SimConfig,
    stream: &Stream,
) -> Result<Estimate> {
    let n = params.n_components;
    if params.is_independent() {
        let c = cost_c_indep(params, rates, policy.inventory)?;
        return Ok(Estimate {
            value: total_cost(c, policy.capacity, n)?,
            stderr: 0.0,
        });
    }
    let c = simulate::estimate_cost_c_dep(params, rates, policy.inventory, cfg, stream)?;
    Ok(Estimate {
        value: total_cost(c.value, policy.capacity, n)?,
        stderr: c.stderr / policy.capacity,
    })
}

/// `F(I, β)` of `policy` priced on given replications of the maximum.
pub fn evaluate_policy_on_samples(
    params: &SystemParams,
    rates: &CostRates,
    policy: &Policy,
    maxima: &[f64],
) -> Result<Estimate> {
    let c = cost_c_on_samples(params, rates, policy.inventory, maxima);
    Ok(Estimate {
        value: total_cost(c.value, policy.capacity, params.n_components)?,
        stderr: c.stderr / policy.capacity,
    })
}

/// `(1 − F(reference)/F(other))·scale` with both policies priced on the same
/// replications. The standard error uses the paired per-replication costs,
/// so the common noise cancels.
pub fn paired_gap_on_samples(
    params: &SystemParams,
    rates: &CostRates,
    reference: &Policy,
    other: &Policy,
    maxima: &[f64],
    scale: f64,
) -> Result<Estimate> {
    if maxima.len() < 2 {
        return Err(domain(
            "reps",
            maxima.len() as f64,
            "paired gap needs >= 2 replications",
        ));
    }
    let n = params.n();
    let weight = rates.backlog_weight(params.n_components);
    let per_rep = |p: &Policy, m: f64| {
        let c = n * rates.holding * (p.inventory - params.mean_backlog()) + weight * (m - p.inventory).max(0.0);
        c / p.capacity + p.capacity * n
    };
    let a: Vec<f64> = maxima.iter().map(|&m| per_rep(reference, m)).collect();
    let b: Vec<f64> = maxima.iter().map(|&m| per_rep(other, m)).collect();
    let (ea, eb) = (simulate::mean_and_stderr(&a), simulate::mean_and_stderr(&b));
    let ratio = ea.value / eb.value;
    // Delta method for a ratio of means: Var(a − ratio·b)/(k·mean(b)²).
    let resid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - ratio * y).collect();
    let se_ratio = simulate::mean_and_stderr(&resid).stderr / eb.value;
    Ok(Estimate {
        value: (1.0 - ratio) * scale,
        stderr: se_ratio * scale,
    })
}

/// Normalization making `1 − F*/F̃` of order one.
pub fn gap_scale(params: &SystemParams, rates: &CostRates, regime: Regime) -> f64 {
    let log_n = params.log_n();
    if !params.is_independent() {
        return log_n.sqrt();
    }
    let n = params.n();
    match regime {
        Regime::Balanced => n * log_n,
        Regime::QualityDriven => {
            let r = n / gamma_of(params, rates);
            r * r.ln()
        }
        Regime::EfficiencyDriven => log_n,
    }
}

/// `(1 − F_exact/F_approx)·scale`.
pub fn gap_diagnostic(
    params: &SystemParams,
    rates: &CostRates,
    exact: &Solution,
    approx: &Solution,
    regime: Regime,
) -> Result<f64> {
    Ok(gap_interval(params, rates, exact, approx, regime)?.value)
}

/// [`gap_diagnostic`] with a delta-method standard error built from the two
/// solutions' `stderr_f`, treated as independent.
pub fn gap_interval(
    params: &SystemParams,
    rates: &CostRates,
    exact: &Solution,
    approx: &Solution,
    regime: Regime,
) -> Result<Estimate> {
    if !(approx.cost_f > 0.0) {
        return Err(domain("F", approx.cost_f, "approximate cost must be > 0"));
    }
    let scale = gap_scale(params, rates, regime);
    let ratio = exact.cost_f / approx.cost_f;
    let d_exact = exact.stderr_f / approx.cost_f;
    let d_approx = ratio * approx.stderr_f / approx.cost_f;
    Ok(Estimate {
        value: (1.0 - ratio) * scale,
        stderr: scale * d_exact.hypot(d_approx),
    })
}

/// Both sides of the two cost-perturbation inequalities comparing the exact
/// and the Gumbel inventory level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CBound {
    /// `|C(I*) − C(Î)|`.
    pub lhs1: f64,
    /// `(I* − Î)(Nh + b)(1 − γ − (1 + log(1 − γ)/N)^N)`.
    pub rhs1: f64,
    /// `|Ĉ(Î) − C(Î)|`.
    pub lhs2: f64,
    /// `(I* − Î)·Nh·(1 − (1 + log(1 − γ)/N)^N)`.
    pub rhs2: f64,
    /// `(I* − Î)(Nh + b)(1 − (1 + log(1 − γ)/N)^N)`: the same estimate with
    /// the backlog weight kept on both the `G > Î` and the `G < Î < max`
    /// parts. Dominates `rhs2` and always bounds `lhs2`.
    pub rhs2_wide: f64,
    /// `I* − Î`, strictly positive.
    pub inventory_gap: f64,
}

/// `ln(1 − y) + y` without cancellation for small `y`.
fn log1m_plus(y: f64) -> f64 {
    if y < 0.1 {
        let mut term = y;
        let mut sum = 0.0;
        for k in 2..60 {
            term *= y;
            let c = term / k as f64;
            sum -= c;
            if c < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (-y).ln_1p() + y
    }
}

/// Evaluates both inequalities and fails with [`Error::BoundViolated`] if
/// either one does not hold.
pub fn cbound_check(params: &SystemParams, rates: &CostRates) -> Result<CBound> {
    let bound = cbound_values(params, rates)?;
    if bound.lhs1 > bound.rhs1 || bound.lhs2 > bound.rhs2 {
        return Err(Error::BoundViolated(format!("{bound:?}")));
    }
    Ok(bound)
}

/// Both sides of the inequalities without asserting them. Fails only if
/// `I* > Î` does not hold.
pub fn cbound_values(params: &SystemParams, rates: &CostRates) -> Result<CBound> {
    let exact = solve_exact_indep(params, rates)?;
    let approx = approx::gumbel_indep(params, rates)?;
    let gamma = gamma_of(params, rates);
    let n = params.n();
    let nh = n * rates.holding;
    let weight = rates.backlog_weight(params.n_components);
    let half_var = 0.5 * params.sigma * params.sigma;
    let (i_star, i_hat) = (exact.inventory(), approx.inventory());
    let gap = i_star - i_hat;
    if !(gap > 0.0) {
        return Err(Error::BoundViolated(format!(
            "I* = {i_star} is not above I_hat = {i_hat}"
        )));
    }
    let u = -(-gamma).ln_1p();
    // P(max < Î) = (1 − u/N)^N
    let below_hat = (n * (-u / n).ln_1p()).exp();
    let cfg = QuadratureConfig::tight();

    // C(I*) − C(Î) = (Nh + b)·∫_Î^{I*} (F(x) − (1 − γ)) dx ≤ 0.
    let shortfall = |x: f64| {
        let y = (-x / half_var).exp();
        let log_f = n * (-y).ln_1p();
        // Subtract the smaller of the two complementary pairs.
        if gamma < 0.5 {
            -log_f.exp_m1() - gamma
        } else {
            (1.0 - gamma) - log_f.exp()
        }
    };
    let lhs1 = weight * special::integrate(shortfall, i_hat, i_star, &cfg)?.value.abs();
    let rhs1 = gap * weight * (1.0 - gamma - below_hat);

    // Ĉ(Î) − C(Î) = (Nh + b)·(σ²/2)·∫_0^{u/N} ((1 − y)^N − e^{−Ny})/y dy.
    let diff = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let e = (-n * y).exp();
        e * (n * log1m_plus(y)).exp_m1() / y
    };
    let lhs2 = weight * half_var * special::integrate_panels(diff, 0.0, u / n, 8, &cfg)?.value.abs();
    let rhs2 = gap * nh * (1.0 - below_hat);
    let rhs2_wide = gap * weight * (1.0 - below_hat);

    Ok(CBound {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        rhs2_wide,
        inventory_gap: gap,
    })
}

/// `1 − F*/F(Î, β̂)` for the Gumbel policy, free of cancellation.
///
/// With `δ₁ = C(Î) − C*`, `δ₂ = C(Î) − Ĉ` and `a = √C*`, `c = √Ĉ`:
/// `1 − F*/F(Î, β̂) = (δ₁ + ((δ₂ − δ₁)/(a + c))²)/(C(Î) + Ĉ)`.
pub fn gumbel_relative_gap(params: &SystemParams, rates: &CostRates) -> Result<f64> {
    let bound = cbound_values(params, rates)?;
    let exact = solve_exact_indep(params, rates)?;
    let approx = approx::gumbel_indep(params, rates)?;
    let (d1, d2) = (bound.lhs1, bound.lhs2);
    let (a, c) = (exact.cost_c.sqrt(), approx.cost_c.sqrt());
    let spread = (d2 - d1) / (a + c);
    Ok((d1 + spread * spread) / (approx.cost_c + d2 + approx.cost_c))
}

/// Both sides of the optimal-to-approximate cost ratio identity for the
/// Gumbel approximation: `F*/F(Î, β̂)` and `2√(C*·Ĉ)/(C(Î) + Ĉ)`.
pub fn ratio_identity(params: &SystemParams, rates: &CostRates) -> Result<(f64, f64)> {
    let exact = solve_exact_indep(params, rates)?;
    let approx = approx::gumbel_indep(params, rates)?;
    let c_at_hat = cost_c_indep(params, rates, approx.inventory())?;
    let f_hat = total_cost(c_at_hat, approx.capacity(), params.n_components)?;
    let lhs = exact.cost_f / f_hat;
    let rhs = 2.0 * (exact.cost_c * approx.cost_c).sqrt() / (c_at_hat + approx.cost_c);
    Ok((lhs, rhs))
}

/// `C(I)` under the true law for independent queues, or from given maxima.
pub fn cost_c_true(params: &SystemParams, rates: &CostRates, level: f64, maxima: Option<&[f64]>) -> Result<f64> {
    match maxima {
        None => cost_c_indep(params, rates, level),
        Some(m) => Ok(cost_c_from_overshoot(
            params,
            rates,
            level,
            simulate::overshoot_from_samples(m, level).value,
        )),
    }
}
