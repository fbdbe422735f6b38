//! Recomputes the reference tables and compares every cell.

use forkjoin_evt::approx::{gumbel_indep, mixed, normal_dep};
use forkjoin_evt::optimize::{
    evaluate_policy_on_samples, gumbel_relative_gap, paired_gap_on_samples, solve_dep_simulated_report,
    solve_exact_indep,
};
use forkjoin_evt::{
    cost_c_indep, total_cost, Estimate, MixedQuadConfig, Regime, Result, SimConfig, Solution, Stream, SystemParams,
};
use serde::{Deserialize, Serialize};

use crate::rate::RateRule;
use crate::record::Instance;
use crate::reference::{
    IndepRow, MixedRow, NormalRow, TableId, BALANCED, DESIGN_B_MULTIPLIER, DESIGN_N, DESIGN_SIGMA_A, EFFICIENCY,
    MIXED_B1, MIXED_B3, NORMAL_B1, NORMAL_B3, QUALITY,
};

/// Deterministic columns.
pub const CLOSED_FORM_REL: f64 = 1e-3;
/// Scaled-gap columns of the independent tables.
pub const GAP_ABS: f64 = 1e-4;
/// Simulated inventory level.
pub const SIM_LEVEL_ABS: f64 = 0.1;
/// Simulated capacities and costs.
pub const SIM_REL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tolerance {
    Rel(f64),
    Abs(f64),
    /// Reported with its standard error, not checked.
    Info,
}

impl Tolerance {
    fn label(&self) -> String {
        match self {
            Tolerance::Rel(t) => format!("rel {t}"),
            Tolerance::Abs(t) => format!("abs {t}"),
            Tolerance::Info => "info".to_string(),
        }
    }
}

/// One compared cell; flat for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub table: u8,
    pub n: usize,
    pub sigma_a: f64,
    pub column: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    /// Monte Carlo standard error of `computed`; 0 when deterministic.
    pub stderr: f64,
    pub tolerance: String,
    pub status: String,
}

impl CellCheck {
    fn new(
        table: TableId,
        n: usize,
        sigma_a: f64,
        column: &str,
        computed: Estimate,
        reference: f64,
        tol: Tolerance,
    ) -> Self {
        let abs_dev = (computed.value - reference).abs();
        let rel_dev = if reference != 0.0 {
            abs_dev / reference.abs()
        } else {
            f64::INFINITY
        };
        let pass = match tol {
            Tolerance::Rel(t) => rel_dev <= t,
            Tolerance::Abs(t) => abs_dev <= t,
            Tolerance::Info => true,
        };
        let status = match (tol, pass) {
            (Tolerance::Info, _) => "INFO",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        Self {
            table: table as u8,
            n,
            sigma_a,
            column: column.to_string(),
            computed: computed.value,
            reference,
            abs_dev,
            rel_dev,
            stderr: computed.stderr,
            tolerance: tol.label(),
            status: status.to_string(),
        }
    }

    pub fn failed(&self) -> bool {
        self.status == "FAIL"
    }
}

fn exact(value: f64) -> Estimate {
    Estimate { value, stderr: 0.0 }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableOptions {
    pub sim: SimConfig,
    pub quad: MixedQuadConfig,
    /// Skip every simulated column.
    pub deterministic_only: bool,
    /// Restrict to these `N` (empty: all rows).
    pub n_filter: Vec<usize>,
    /// Restrict to these `σ_A` (empty: all rows).
    pub sigma_a_filter: Vec<f64>,
}

impl TableOptions {
    fn keeps(&self, n: usize, sigma_a: f64) -> bool {
        (self.n_filter.is_empty() || self.n_filter.contains(&n))
            && (self.sigma_a_filter.is_empty() || self.sigma_a_filter.iter().any(|&s| (s - sigma_a).abs() < 1e-12))
    }
}

pub fn run_table(id: TableId, opts: &TableOptions) -> Result<Vec<CellCheck>> {
    match id {
        TableId::Balanced => indep_table(id, &BALANCED, Regime::Balanced, opts),
        TableId::Quality => indep_table(id, &QUALITY, Regime::QualityDriven, opts),
        TableId::Efficiency => indep_table(id, &EFFICIENCY, Regime::EfficiencyDriven, opts),
        TableId::Design => Ok(design_table(opts)),
        TableId::NormalB1 => normal_table(id, &NORMAL_B1, opts),
        TableId::NormalB3 => normal_table(id, &NORMAL_B3, opts),
        TableId::MixedB1 => mixed_table(id, &MIXED_B1, opts),
        TableId::MixedB3 => mixed_table(id, &MIXED_B3, opts),
    }
}

fn instance(id: TableId, n: usize, sigma_a: f64) -> Result<Instance> {
    let (holding, backorder) = id.rates();
    Ok(Instance {
        params: SystemParams::new(n, 1.0, sigma_a)?,
        holding,
        backorder,
    })
}

fn indep_table(id: TableId, rows: &[IndepRow], regime: Regime, opts: &TableOptions) -> Result<Vec<CellCheck>> {
    let mut out = Vec::new();
    let rel = Tolerance::Rel(CLOSED_FORM_REL);
    for row in rows.iter().filter(|r| opts.keeps(r.n, 0.0)) {
        let inst = instance(id, row.n, 0.0)?;
        let (p, r) = (inst.params, inst.rates()?);
        let star = solve_exact_indep(&p, &r)?;
        let hat = gumbel_indep(&p, &r)?;
        let f_hat = total_cost(cost_c_indep(&p, &r, hat.inventory())?, hat.capacity(), row.n)?;
        let scale = forkjoin_evt::optimize::gap_scale(&p, &r, regime);
        let gap = gumbel_relative_gap(&p, &r)? * scale;
        let cell = |column: &str, v: f64, reference: f64, tol| {
            CellCheck::new(id, row.n, 0.0, column, exact(v), reference, tol)
        };
        out.extend([
            cell("I*", star.inventory(), row.i_star, rel),
            cell("beta*", star.capacity(), row.beta_star, rel),
            cell("F*", star.cost_f, row.f_star, rel),
            cell("I_hat", hat.inventory(), row.i_hat, rel),
            cell("beta_hat", hat.capacity(), row.beta_hat, rel),
            cell("F(I_hat,beta_hat)", f_hat, row.f_hat, rel),
            cell("gap", gap, row.gap, Tolerance::Abs(GAP_ABS)),
        ]);
    }
    Ok(out)
}

fn design_table(opts: &TableOptions) -> Vec<CellCheck> {
    let mut out = Vec::new();
    for mult in DESIGN_B_MULTIPLIER {
        for sigma_a in DESIGN_SIGMA_A {
            for n in DESIGN_N.into_iter().filter(|&n| opts.keeps(n, sigma_a)) {
                let b = RateRule::Linear { c: mult }.at(n);
                out.push(CellCheck::new(
                    TableId::Design,
                    n,
                    sigma_a,
                    "b",
                    exact(b),
                    b,
                    Tolerance::Info,
                ));
            }
        }
    }
    out
}

/// Simulated optimum and the two approximate policies priced on its fresh
/// replications.
#[derive(Debug, Clone, PartialEq)]
pub struct DependentRun {
    pub simulated: Solution,
    pub normal: Solution,
    pub mixed: Solution,
    pub f_normal: Estimate,
    pub f_mixed: Estimate,
    /// `(1 − F(I^A, β^A)/F(Î^A, β̂^A))·√log N`.
    pub gap_normal: Estimate,
    /// `(1 − F(I^A, β^A)/F(I^M, β^M))·√log N`.
    pub gap_mixed: Estimate,
    pub truncated_fraction: f64,
}

/// Stream of one dependent instance, shared by every table that uses it.
pub fn instance_stream(seed: u64, inst: &Instance) -> Stream {
    let p = &inst.params;
    Stream::new(seed).substream(&format!(
        "n={};sigma={};sigma_a={};h={};b={}",
        p.n_components, p.sigma, p.sigma_a, inst.holding, inst.backorder
    ))
}

pub fn run_dependent(inst: &Instance, sim: &SimConfig, quad: &MixedQuadConfig) -> Result<DependentRun> {
    let (p, r) = (inst.params, inst.rates()?);
    let report = solve_dep_simulated_report(&p, &r, sim, &instance_stream(sim.seed, inst))?;
    let normal = normal_dep(&p, &r)?;
    let mixed = mixed(&p, &r, quad)?;
    let maxima = &report.fresh_maxima;
    let scale = p.log_n().sqrt();
    let sim_policy = report.solution.policy;
    Ok(DependentRun {
        simulated: report.solution,
        f_normal: evaluate_policy_on_samples(&p, &r, &normal.policy, maxima)?,
        f_mixed: evaluate_policy_on_samples(&p, &r, &mixed.policy, maxima)?,
        gap_normal: paired_gap_on_samples(&p, &r, &sim_policy, &normal.policy, maxima, scale)?,
        gap_mixed: paired_gap_on_samples(&p, &r, &sim_policy, &mixed.policy, maxima, scale)?,
        normal,
        mixed,
        truncated_fraction: report.truncated_fraction,
    })
}

fn normal_table(id: TableId, rows: &[NormalRow], opts: &TableOptions) -> Result<Vec<CellCheck>> {
    let mut out = Vec::new();
    let rel = Tolerance::Rel(CLOSED_FORM_REL);
    let sim_rel = Tolerance::Rel(SIM_REL);
    for row in rows.iter().filter(|r| opts.keeps(r.n, r.sigma_a)) {
        let inst = instance(id, row.n, row.sigma_a)?;
        let cell = |column: &str, v: Estimate, reference: f64, tol| {
            CellCheck::new(id, row.n, row.sigma_a, column, v, reference, tol)
        };
        if opts.deterministic_only {
            let normal = normal_dep(&inst.params, &inst.rates()?)?;
            out.push(cell("I_hat^A", exact(normal.inventory()), row.i_hat, rel));
            out.push(cell("beta_hat^A", exact(normal.capacity()), row.beta_hat, rel));
            continue;
        }
        let run = run_dependent(&inst, &opts.sim, &opts.quad)?;
        let s = &run.simulated;
        out.extend([
            cell("I^A", exact(s.inventory()), row.i_sim, Tolerance::Abs(SIM_LEVEL_ABS)),
            cell("beta^A", exact(s.capacity()), row.beta_sim, sim_rel),
            cell(
                "F(I^A,beta^A)",
                Estimate {
                    value: s.cost_f,
                    stderr: s.stderr_f,
                },
                row.f_sim,
                sim_rel,
            ),
            cell("I_hat^A", exact(run.normal.inventory()), row.i_hat, rel),
            cell("beta_hat^A", exact(run.normal.capacity()), row.beta_hat, rel),
            cell("F(I_hat^A,beta_hat^A)", run.f_normal, row.f_hat, sim_rel),
            cell("gap", run.gap_normal, row.gap, Tolerance::Info),
        ]);
    }
    Ok(out)
}

fn mixed_table(id: TableId, rows: &[MixedRow], opts: &TableOptions) -> Result<Vec<CellCheck>> {
    let mut out = Vec::new();
    let rel = Tolerance::Rel(CLOSED_FORM_REL);
    for row in rows.iter().filter(|r| opts.keeps(r.n, r.sigma_a)) {
        let inst = instance(id, row.n, row.sigma_a)?;
        let cell = |column: &str, v: Estimate, reference: f64, tol| {
            CellCheck::new(id, row.n, row.sigma_a, column, v, reference, tol)
        };
        if opts.deterministic_only {
            let m = mixed(&inst.params, &inst.rates()?, &opts.quad)?;
            out.push(cell("I^M", exact(m.inventory()), row.i_mixed, rel));
            out.push(cell("beta^M", exact(m.capacity()), row.beta_mixed, rel));
            continue;
        }
        let run = run_dependent(&inst, &opts.sim, &opts.quad)?;
        out.extend([
            cell("I^M", exact(run.mixed.inventory()), row.i_mixed, rel),
            cell("beta^M", exact(run.mixed.capacity()), row.beta_mixed, rel),
            cell("F(I^M,beta^M)", run.f_mixed, row.f_mixed, Tolerance::Rel(SIM_REL)),
            cell("gap^M", run.gap_mixed, row.gap_mixed, Tolerance::Info),
            cell("gap^A", run.gap_normal, row.gap_normal, Tolerance::Info),
        ]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_logic() {
        let c = CellCheck::new(
            TableId::Balanced,
            10,
            0.0,
            "x",
            exact(1.0005),
            1.0,
            Tolerance::Rel(1e-3),
        );
        assert_eq!(c.status, "PASS");
        let c = CellCheck::new(TableId::Balanced, 10, 0.0, "x", exact(1.002), 1.0, Tolerance::Rel(1e-3));
        assert!(c.failed());
        let c = CellCheck::new(TableId::Balanced, 10, 0.0, "x", exact(5.0), 1.0, Tolerance::Info);
        assert_eq!(c.status, "INFO");
    }

    #[test]
    fn filters_rows() {
        let opts = TableOptions {
            n_filter: vec![10],
            ..Default::default()
        };
        let cells = run_table(TableId::Balanced, &opts).unwrap();
        assert_eq!(cells.len(), 7);
        assert!(cells.iter().all(|c| c.n == 10));
    }

    #[test]
    fn design_has_24_instances() {
        assert_eq!(run_table(TableId::Design, &TableOptions::default()).unwrap().len(), 24);
    }

    #[test]
    fn deterministic_columns_of_dependent_tables() {
        let opts = TableOptions {
            deterministic_only: true,
            ..Default::default()
        };
        for id in [TableId::NormalB1, TableId::NormalB3, TableId::MixedB1, TableId::MixedB3] {
            let cells = run_table(id, &opts).unwrap();
            assert_eq!(cells.len(), 24);
            let bad: Vec<_> = cells.iter().filter(|c| c.failed()).collect();
            assert!(bad.is_empty(), "{id:?}: {bad:#?}");
        }
    }
}
