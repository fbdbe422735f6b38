//! Domain types and the cost functional.
//!
//! Everything is expressed in capacity-normalized coordinates: backlogs are
//! those of queues with unit drift margin, and a policy `(I, β)` stocks `I/β`
//! physical units. The total cost of a policy is
//! `F(I, β) = C(I)/β + βN` with
//! `C(I) = N·h·(I − E[Q_i]) + (N·h + b)·E[(max_i Q_i − I)^+]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special;

/// One fork-join instance: `N` component queues driven by independent
/// Brownian motions of variance `σ²` plus a shared demand Brownian motion
/// of variance `σ_A²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_components: usize,
    pub sigma: f64,
    pub sigma_a: f64,
}

impl SystemParams {
    pub fn new(n_components: usize, sigma: f64, sigma_a: f64) -> Result<Self> {
        let p = Self {
            n_components,
            sigma,
            sigma_a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn independent(n_components: usize, sigma: f64) -> Result<Self> {
        Self::new(n_components, sigma, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_components < 1 {
            return Err(domain("N", self.n_components as f64, "need at least one component"));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(domain("sigma", self.sigma, "must be finite and > 0"));
        }
        if !(self.sigma_a >= 0.0) || !self.sigma_a.is_finite() {
            return Err(domain("sigma_a", self.sigma_a, "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn n(&self) -> f64 {
        self.n_components as f64
    }

    pub fn log_n(&self) -> f64 {
        self.n().ln()
    }

    pub fn is_independent(&self) -> bool {
        self.sigma_a == 0.0
    }

    /// Variance per unit time of a single queue's input, `σ² + σ_A²`.
    pub fn total_variance(&self) -> f64 {
        self.sigma * self.sigma + self.sigma_a * self.sigma_a
    }

    /// Mean backlog of one queue: its supremum is exponential with mean
    /// `(σ² + σ_A²)/2`.
    pub fn mean_backlog(&self) -> f64 {
        0.5 * self.total_variance()
    }

    /// First-order location of the maximum backlog, `(σ²/2)·log N`.
    pub fn first_order_level(&self) -> f64 {
        0.5 * self.sigma * self.sigma * self.log_n()
    }

    /// Scale of the normal fluctuation of the maximum, `(σσ_A/√2)·√log N`.
    pub fn clt_scale(&self) -> f64 {
        self.sigma * self.sigma_a / std::f64::consts::SQRT_2 * self.log_n().sqrt()
    }

    fn require_independent(&self) -> Result<()> {
        if self.is_independent() {
            Ok(())
        } else {
            Err(Error::RequiresIndependent(self.sigma_a))
        }
    }
}

/// Holding rate `h` and backorder rate `b` for a concrete `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRates {
    pub holding: f64,
    pub backorder: f64,
}

impl CostRates {
    pub fn new(holding: f64, backorder: f64) -> Result<Self> {
        let r = Self { holding, backorder };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.holding > 0.0) || !self.holding.is_finite() {
            return Err(domain("holding", self.holding, "must be finite and > 0"));
        }
        if !(self.backorder > 0.0) || !self.backorder.is_finite() {
            return Err(domain("backorder", self.backorder, "must be finite and > 0"));
        }
        Ok(())
    }

    /// `N·h + b`, the marginal cost of one unit of system backorder.
    pub fn backlog_weight(&self, n: usize) -> f64 {
        n as f64 * self.holding + self.backorder
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Balanced,
    QualityDriven,
    EfficiencyDriven,
}

/// A symmetric decision: inventory `I` (normalized units) and capacity `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub inventory: f64,
    pub capacity: f64,
}

impl Policy {
    pub fn new(inventory: f64, capacity: f64) -> Result<Self> {
        if !(inventory >= 0.0) || !inventory.is_finite() {
            return Err(domain("inventory", inventory, "must be finite and >= 0"));
        }
        if !(capacity > 0.0) || !capacity.is_finite() {
            return Err(domain("capacity", capacity, "must be finite and > 0"));
        }
        Ok(Self { inventory, capacity })
    }

    /// Physical stock on hand, `I/β`.
    pub fn physical_inventory(&self) -> f64 {
        self.inventory / self.capacity
    }
}

/// How a [`Solution`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ExactIndep,
    FirstOrder,
    GumbelIndep,
    NormalDep,
    Mixed,
    SimulatedDep,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactIndep => "exact",
            Method::FirstOrder => "first-order",
            Method::GumbelIndep => "gumbel",
            Method::NormalDep => "normal",
            Method::Mixed => "mixed",
            Method::SimulatedDep => "simulate",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ExactIndep,
        Method::FirstOrder,
        Method::GumbelIndep,
        Method::NormalDep,
        Method::Mixed,
        Method::SimulatedDep,
    ];
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (exact, first-order, gumbel, normal, mixed, simulate)"))
    }
}

/// A policy with its cost decomposition.
///
/// `cost_c` is `C(I)` under whichever law produced the solution; `cost_f`
/// is `F(I, β)`. For simulated solutions `stderr_f` is the Monte Carlo
/// standard error of `cost_f`, otherwise 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub policy: Policy,
    pub cost_c: f64,
    pub cost_f: f64,
    pub method: Method,
    pub stderr_f: f64,
}

impl Solution {
    /// Completes an inventory decision with the cost-minimizing capacity
    /// `β = √(C/N)`, which gives `F = 2Nβ`.
    pub fn optimal_for_cost(inventory: f64, cost_c: f64, n: usize, method: Method) -> Result<Self> {
        let capacity = capacity_from_cost(cost_c, n)?;
        Ok(Self {
            policy: Policy::new(inventory, capacity)?,
            cost_c,
            cost_f: 2.0 * n as f64 * capacity,
            method,
            stderr_f: 0.0,
        })
    }

    pub fn inventory(&self) -> f64 {
        self.policy.inventory
    }

    pub fn capacity(&self) -> f64 {
        self.policy.capacity
    }
}

/// `γ = N·h/(N·h + b)`; `1 − γ` is the optimal service quantile.
pub fn gamma_of(params: &SystemParams, rates: &CostRates) -> f64 {
    let nh = params.n() * rates.holding;
    nh / (nh + rates.backorder)
}

/// `C(I)` for independent queues (`σ_A = 0`), in closed form.
pub fn cost_c_indep(params: &SystemParams, rates: &CostRates, inventory: f64) -> Result<f64> {
    params.require_independent()?;
    let n = params.n_components;
    let over = special::exp_max_partial_expectation(n, params.sigma, inventory)?;
    Ok(n as f64 * rates.holding * (inventory - params.mean_backlog()) + rates.backlog_weight(n) * over)
}

/// `C(I)` given an externally computed overshoot `E[(max Q − I)^+]`.
pub fn cost_c_from_overshoot(params: &SystemParams, rates: &CostRates, inventory: f64, overshoot: f64) -> f64 {
    params.n() * rates.holding * (inventory - params.mean_backlog())
        + rates.backlog_weight(params.n_components) * overshoot
}

/// `F = c/β + βN`.
pub fn total_cost(cost_c: f64, capacity: f64, n: usize) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(domain("beta", capacity, "capacity must be > 0"));
    }
    Ok(cost_c / capacity + capacity * n as f64)
}

/// Minimizer of [`total_cost`] in `β`: `√(c/N)`.
pub fn capacity_from_cost(cost_c: f64, n: usize) -> Result<f64> {
    if !(cost_c > 0.0) || !cost_c.is_finite() {
        return Err(domain("C", cost_c, "cost must be finite and > 0"));
    }
    if n < 1 {
        return Err(domain("N", n as f64, "need at least one component"));
    }
    Ok((cost_c / n as f64).sqrt())
}

/// Classifies the limit `γ = lim γ_N`.
pub fn classify_regime(gamma_limit: f64) -> Result<Regime> {
    if !(0.0..=1.0).contains(&gamma_limit) {
        return Err(domain("gamma", gamma_limit, "limit must lie in [0, 1]"));
    }
    Ok(if gamma_limit == 0.0 {
        Regime::QualityDriven
    } else if gamma_limit == 1.0 {
        Regime::EfficiencyDriven
    } else {
        Regime::Balanced
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2(n: usize) -> (SystemParams, CostRates) {
        (
            SystemParams::independent(n, 1.0).unwrap(),
            CostRates::new(1.0, n as f64).unwrap(),
        )
    }

    #[test]
    fn gamma_examples() {
        let (p, _) = table2(10);
        assert_eq!(gamma_of(&p, &CostRates::new(1.0, 10.0).unwrap()), 0.5);
        assert!((gamma_of(&p, &CostRates::new(1.0, 100.0).unwrap()) - 1.0 / 11.0).abs() < 1e-15);
        assert!((gamma_of(&p, &CostRates::new(10.0, 1.0).unwrap()) - 100.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn cost_c_examples() {
        let (p, r) = table2(10);
        let c = cost_c_indep(&p, &r, 1.35178).unwrap();
        assert!((c - 10.0 * 1.19648f64.powi(2)).abs() < 2e-3);

        let one = SystemParams::independent(1, 1.0).unwrap();
        let unit = CostRates::new(1.0, 1.0).unwrap();
        assert!((cost_c_indep(&one, &unit, 0.0).unwrap() - 0.5).abs() < 1e-14);

        let far = cost_c_indep(&p, &r, 40.0).unwrap();
        assert!((far - 10.0 * (40.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn cost_c_rejects_dependent_demand() {
        let p = SystemParams::new(10, 1.0, 0.5).unwrap();
        let r = CostRates::new(1.0, 10.0).unwrap();
        assert_eq!(cost_c_indep(&p, &r, 1.0), Err(Error::RequiresIndependent(0.5)));
    }

    #[test]
    fn total_cost_examples() {
        let f = total_cost(14.3156, 1.19648, 10).unwrap();
        assert!((f - 2.0 * (14.3156f64 * 10.0).sqrt()).abs() < 1e-4);
        assert!((f / 23.9315 - 1.0).abs() < 1e-3);
        assert_eq!(total_cost(7.0, 1.0, 7).unwrap(), 14.0);
        assert_eq!(total_cost(0.0, 1.0, 10).unwrap(), 10.0);
        assert!(total_cost(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert!((capacity_from_cost(14.3156, 10).unwrap() - 1.19648).abs() < 1e-4);
        assert_eq!(capacity_from_cost(12.0, 12).unwrap(), 1.0);
        assert!((capacity_from_cost(9.54353, 10).unwrap() - 0.976_910).abs() < 1e-5);
        assert!(capacity_from_cost(0.0, 10).is_err());
        let c = 3.7;
        let b = capacity_from_cost(c, 5).unwrap();
        assert!((total_cost(c, b, 5).unwrap() - 2.0 * (c * 5.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(0.5).unwrap(), Regime::Balanced);
        assert_eq!(classify_regime(0.0).unwrap(), Regime::QualityDriven);
        assert_eq!(classify_regime(1.0).unwrap(), Regime::EfficiencyDriven);
        assert!(classify_regime(1.5).is_err());
    }

    #[test]
    fn cost_c_is_convex() {
        let (p, r) = table2(37);
        let v: Vec<f64> = (0..300)
            .map(|k| cost_c_indep(&p, &r, 0.02 * k as f64).unwrap())
            .collect();
        for w in v.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9, "{w:?}");
        }
    }

    #[test]
    fn total_cost_minimum_is_bracketed_at_sqrt_c_over_n() {
        let (c, n) = (23.0, 11);
        let star = (c / n as f64).sqrt();
        let h = 1e-6;
        let slope = |b: f64| (total_cost(c, b + h, n).unwrap() - total_cost(c, b - h, n).unwrap()) / (2.0 * h);
        assert!(slope(star * 0.99) < 0.0 && slope(star * 1.01) > 0.0);
    }

    #[test]
    fn optimal_solution_costs_twice_n_beta() {
        let s = Solution::optimal_for_cost(1.2, 14.0, 10, Method::ExactIndep).unwrap();
        let f = total_cost(s.cost_c, s.capacity(), 10).unwrap();
        assert!((s.cost_f - f).abs() < 1e-9);
        assert!((s.cost_f - 20.0 * s.capacity()).abs() < 1e-12);
    }
}
