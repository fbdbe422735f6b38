use forkjoin_evt::approx::gumbel_indep;
use forkjoin_evt::optimize::{cbound_values, gumbel_relative_gap, ratio_identity, solve_exact_indep};
use forkjoin_evt::special::{exp_max_cdf, harmonic};
use forkjoin_evt::{cost_c_indep, total_cost, CostRates, SystemParams};

const NS: [usize; 10] = [2, 5, 10, 20, 50, 100, 200, 500, 1000, 5000];
const GAMMAS: [f64; 7] = [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99];

/// `(N, γ)` pairs with a positive Gumbel level, i.e. `γ < 1 − e^{−N}`.
fn grid() -> Vec<(SystemParams, CostRates, f64)> {
    let mut out = Vec::new();
    for n in NS {
        for gamma in GAMMAS {
            if gamma >= -(-(n as f64)).exp_m1() {
                continue;
            }
            let b = n as f64 * (1.0 - gamma) / gamma;
            out.push((
                SystemParams::independent(n, 1.0).unwrap(),
                CostRates::new(1.0, b).unwrap(),
                gamma,
            ));
        }
    }
    out
}

#[test]
fn grid_has_enough_instances() {
    assert!(grid().len() >= 50);
}

#[test]
fn first_bound_and_wide_second_bound_hold_everywhere() {
    for (p, r, gamma) in grid() {
        let c = cbound_values(&p, &r).unwrap();
        assert!(c.inventory_gap > 0.0);
        assert!(c.lhs1 <= c.rhs1, "N={} γ={gamma}: {c:?}", p.n_components);
        assert!(c.lhs2 <= c.rhs2_wide, "N={} γ={gamma}: {c:?}", p.n_components);
    }
}

#[test]
fn narrow_second_bound_holds_exactly_when_gamma_at_least_half() {
    for (p, r, gamma) in grid() {
        let c = cbound_values(&p, &r).unwrap();
        assert_eq!(c.lhs2 <= c.rhs2, gamma >= 0.5, "N={} γ={gamma}: {c:?}", p.n_components);
    }
}

#[test]
fn inventory_gap_shrinks_like_log_n_over_n() {
    let gap = |n: usize| {
        let p = SystemParams::independent(n, 1.0).unwrap();
        cbound_values(&p, &CostRates::new(1.0, n as f64).unwrap())
            .unwrap()
            .inventory_gap
    };
    // Leading order −σ² log(1 − γ)/(4N) at γ = 1/2.
    let mut prev = f64::INFINITY;
    for n in [10usize, 100, 1000, 10_000] {
        let g = gap(n);
        assert!(g < prev);
        let lead = std::f64::consts::LN_2 / (4.0 * n as f64);
        assert!((g / lead - 1.0).abs() < 2.0 / (n as f64).sqrt(), "N={n}: {g} vs {lead}");
        prev = g;
    }
}

#[test]
fn ratio_identity_on_grid() {
    for (p, r, gamma) in grid() {
        let (lhs, rhs) = ratio_identity(&p, &r).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9, "N={} γ={gamma}", p.n_components);
    }
}

#[test]
fn relative_gap_is_consistent_with_direct_ratio() {
    for (p, r, gamma) in grid() {
        let (lhs, _) = ratio_identity(&p, &r).unwrap();
        let gap = gumbel_relative_gap(&p, &r).unwrap();
        assert!(gap >= 0.0);
        // Direct subtraction keeps ~1e-15 absolute accuracy only.
        assert!((gap - (1.0 - lhs)).abs() <= 1e-13, "N={} γ={gamma}", p.n_components);
    }
}

#[test]
fn exact_optimum_beats_a_grid_of_policies() {
    for (p, r, _) in grid().into_iter().step_by(5) {
        let s = solve_exact_indep(&p, &r).unwrap();
        assert!(
            (exp_max_cdf(p.n_components, 1.0, s.inventory()).unwrap() - (1.0 - forkjoin_evt::gamma_of(&p, &r))).abs()
                < 1e-10
        );
        for i in -5..=5 {
            let level = (s.inventory() + 0.05 * i as f64).max(0.0);
            let c = cost_c_indep(&p, &r, level).unwrap();
            for j in -5..=5 {
                let beta = s.capacity() * (1.0 + 0.02 * j as f64);
                assert!(total_cost(c, beta, p.n_components).unwrap() >= s.cost_f - 1e-9);
            }
        }
    }
}

#[test]
fn cost_dominates_first_order_cost() {
    for n in [10usize, 100, 1000] {
        let p = SystemParams::independent(n, 1.0).unwrap();
        let r = CostRates::new(1.0, n as f64).unwrap();
        let m = p.first_order_level();
        for k in 0..=80 {
            let level = 0.1 * k as f64;
            let exact = cost_c_indep(&p, &r, level).unwrap();
            let lower = n as f64 * (level - 0.5) + r.backlog_weight(n) * (m - level).max(0.0);
            assert!(exact > lower, "N={n} I={level}");
        }
    }
}

#[test]
fn mean_max_over_log_n_decreases_to_half_variance() {
    let ratios: Vec<f64> = [100usize, 10_000, 1_000_000]
        .iter()
        .map(|&n| 0.5 * harmonic(n) / (n as f64).ln())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    assert!(ratios.iter().all(|&r| r > 0.5));
}

#[test]
fn gumbel_level_is_below_exact_level() {
    for (p, r, _) in grid() {
        let exact = solve_exact_indep(&p, &r).unwrap();
        let approx = gumbel_indep(&p, &r).unwrap();
        assert!(approx.inventory() < exact.inventory());
    }
}
