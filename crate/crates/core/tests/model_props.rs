use forkjoin_evt::optimize::solve_exact_indep;
use forkjoin_evt::{cost_c_indep, total_cost, CostRates, SystemParams};
use proptest::prelude::*;

fn params(n: usize, sigma: f64) -> SystemParams {
    SystemParams::independent(n, sigma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // Capacity β scales every backlog by 1/β, i.e. σ → σ/√β in the unit-capacity law.
    #[test]
    fn physical_units_rescale(
        n in 1usize..400,
        sigma in 0.3f64..3.0,
        h in 0.1f64..10.0,
        b in 0.1f64..1000.0,
        level in 0.0f64..8.0,
        beta in 0.2f64..5.0,
    ) {
        let rates = CostRates::new(h, b).unwrap();
        let unit = cost_c_indep(&params(n, sigma), &rates, level).unwrap();
        let scaled = params(n, sigma / beta.sqrt());
        let physical = cost_c_indep(&scaled, &rates, level / beta).unwrap() + beta * n as f64;
        let rescaled = total_cost(unit, beta, n).unwrap();
        prop_assert!((physical - rescaled).abs() <= 1e-9 * rescaled.max(1.0));
    }

    #[test]
    fn cost_c_is_convex(n in 1usize..500, sigma in 0.3f64..3.0, b in 0.1f64..1e4, start in 0.0f64..3.0) {
        let p = params(n, sigma);
        let rates = CostRates::new(1.0, b).unwrap();
        let step = 0.02;
        let v: Vec<f64> = (0..60).map(|k| cost_c_indep(&p, &rates, start + step * k as f64).unwrap()).collect();
        for w in v.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
        }
    }

    #[test]
    fn total_cost_minimizer_is_root_c_over_n(c in 1e-3f64..1e6, n in 1usize..10_000) {
        let beta = (c / n as f64).sqrt();
        let h = 1e-4 * beta;
        let left = total_cost(c, beta - h, n).unwrap() - total_cost(c, beta - 2.0 * h, n).unwrap();
        let right = total_cost(c, beta + 2.0 * h, n).unwrap() - total_cost(c, beta + h, n).unwrap();
        prop_assert!(left < 0.0 && right > 0.0);
    }
}

#[test]
fn optimum_equals_two_n_beta() {
    for n in [1usize, 10, 100, 1000] {
        for (h, b) in [(1.0, n as f64), (1.0, (n * n) as f64), (n as f64, 1.0)] {
            let s = solve_exact_indep(&params(n, 1.0), &CostRates::new(h, b).unwrap()).unwrap();
            let f = total_cost(s.cost_c, s.capacity(), n).unwrap();
            assert!((f - 2.0 * n as f64 * s.capacity()).abs() <= 1e-9 * f);
            assert!((f - s.cost_f).abs() <= 1e-9 * f);
        }
    }
}

#[test]
fn joint_grid_minimum_matches_split_minimization() {
    let p = params(10, 1.0);
    let rates = CostRates::new(1.0, 10.0).unwrap();
    let s = solve_exact_indep(&p, &rates).unwrap();
    let mut best = f64::INFINITY;
    for i in 0..=200 {
        let level = 0.5 + 0.01 * i as f64;
        let c = cost_c_indep(&p, &rates, level).unwrap();
        for j in 0..=200 {
            let beta = 0.7 + 0.005 * j as f64;
            best = best.min(total_cost(c, beta, 10).unwrap());
        }
    }
    assert!(best >= s.cost_f - 1e-9);
    assert!(best - s.cost_f < 1e-3);
}
