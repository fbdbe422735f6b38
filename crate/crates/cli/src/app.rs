//! Argument parsing and command dispatch.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forkjoin_evt::approx::{first_order, gumbel_indep, mixed, normal_dep};
use forkjoin_evt::optimize::{solve_dep_simulated, solve_exact_indep};
use forkjoin_evt::simulate::{labels, sample_batch};
use forkjoin_evt::{Method, MixedQuadConfig, QuantileMethod, SimConfig, Solution, Stream, SystemParams};
use serde::{Deserialize, Serialize};

use crate::clt::{clt_checks, clt_ladder};
use crate::rate::RateRule;
use crate::record::{config_digest, write_csv, write_json_lines, Instance, RunRecord};
use crate::reference::TableId;
use crate::render::{fmt_num, render_table};
use crate::tables::{run_table, TableOptions};

#[derive(Debug, Parser)]
#[command(
    name = "forkjoin-evt",
    version,
    about = "Inventory and capacity dimensioning for Brownian fork-join systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve instances with one method.
    Solve(SolveArgs),
    /// Recompute a reference table (2..9) and compare every cell.
    Table(TableArgs),
    /// Normal-limit diagnostics of the dependent maximum over an N ladder.
    Clt(CltArgs),
    /// Dump raw replications of the maximum backlog as CSV.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    /// Aligned text.
    Text,
    Csv,
    /// One JSON object per line.
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantileArg {
    MedianUnbiased,
    Interpolated,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Horizon as a multiple of the expected time of the maximum.
    #[arg(long)]
    pub horizon_factor: Option<f64>,
    /// Replications per cost estimate (solve, table) or in total (clt, sample).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Batches whose median gives the quantile estimate.
    #[arg(long)]
    pub quantile_reps: Option<usize>,
    /// Add the exact Brownian-bridge maximum between grid points.
    #[arg(long)]
    pub bridge_correction: bool,
    #[arg(long, value_enum)]
    pub quantile_method: Option<QuantileArg>,
    /// Disable the early stop of drifting paths.
    #[arg(long)]
    pub no_early_stop: bool,
}

impl SimArgs {
    pub fn config(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            seed: self.seed.unwrap_or(d.seed),
            grid_step: self.grid_step.unwrap_or(d.grid_step),
            horizon_factor: self.horizon_factor.unwrap_or(d.horizon_factor),
            overshoot_reps: self.reps.unwrap_or(d.overshoot_reps),
            quantile_reps: self.quantile_reps.unwrap_or(d.quantile_reps),
            bridge_correction: self.bridge_correction,
            quantile_method: match self.quantile_method {
                None | Some(QuantileArg::MedianUnbiased) => QuantileMethod::MedianUnbiased,
                Some(QuantileArg::Interpolated) => QuantileMethod::Interpolated,
            },
            early_stop_slack: self.no_early_stop.then_some(f64::INFINITY),
            ..d
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    pub out: OutFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Number of components; repeat or comma-separate for several.
    #[arg(long = "n", required = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "sigma-a", default_value_t = 0.0)]
    pub sigma_a: f64,
    /// Holding cost rule `const:c`, `linear:c` or `power:c:alpha`.
    #[arg(long, default_value = "const:1")]
    pub h: RateRule,
    /// Backorder cost rule.
    #[arg(long, default_value = "linear:1")]
    pub b: RateRule,
    /// exact, first-order, gumbel, normal, mixed or simulate.
    #[arg(long, default_value = "exact")]
    pub method: Method,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// 2, 3, 4 (independent), 5 (design), 6, 7 (normal limit), 8, 9 (mixed).
    #[arg(value_parser = clap::value_parser!(u8).range(2..=9))]
    pub id: u8,
    /// Only rows with these N.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Only rows with these sigma_A.
    #[arg(long = "sigma-a", value_delimiter = ',')]
    pub sigma_a: Vec<f64>,
    /// Skip simulated columns.
    #[arg(long)]
    pub deterministic_only: bool,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CltArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [10usize, 100, 1000])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "sigma-a", default_value_t = 1.0)]
    pub sigma_a: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "sigma-a", default_value_t = 0.0)]
    pub sigma_a: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// Failure modes mapped onto exit codes.
#[derive(Debug)]
pub enum AppError {
    /// Invalid input or flag combination: exit 2.
    Usage(String),
    Io(io::Error),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "error: {m}"),
            AppError::Io(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<forkjoin_evt::Error> for AppError {
    fn from(e: forkjoin_evt::Error) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<io::Error> for AppError {
    fn from(e: io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Io(e.into())
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

impl AppError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

/// Runs a parsed command; returns whether every requested check passed.
pub fn run(cli: Cli) -> Result<bool, AppError> {
    forkjoin_evt::simulate::configure_threads_from_env();
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Table(a) => table(&a),
        Command::Clt(a) => clt(&a),
        Command::Sample(a) => sample(&a),
    }
}

fn sink(file: &Option<PathBuf>) -> Result<Box<dyn Write>, AppError> {
    Ok(match file {
        Some(path) => Box::new(io::BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(output: &OutputArgs, rows: &[T], text: impl FnOnce() -> String) -> Result<(), AppError> {
    let mut w = sink(&output.file)?;
    match output.out {
        OutFormat::Text => w.write_all(text().as_bytes())?,
        OutFormat::Csv => write_csv(&mut w, rows)?,
        OutFormat::Json => write_json_lines(&mut w, rows)?,
    }
    w.flush()?;
    Ok(())
}

/// Rejects method / instance combinations the solver cannot handle.
pub fn check_method(method: Method, params: &SystemParams) -> Result<(), AppError> {
    let dependent = params.sigma_a > 0.0;
    let msg = match method {
        Method::ExactIndep | Method::GumbelIndep if dependent => {
            format!("method `{method}` needs --sigma-a 0 (independent queues)")
        }
        Method::NormalDep | Method::SimulatedDep if !dependent => format!("method `{method}` needs --sigma-a > 0"),
        Method::NormalDep | Method::Mixed if params.n_components < 2 => format!("method `{method}` needs N >= 2"),
        _ => return Ok(()),
    };
    Err(AppError::Usage(msg))
}

/// Solves one instance and wraps it in a record.
pub fn solve_instance(
    inst: &Instance,
    method: Method,
    sim: &SimConfig,
    quad: &MixedQuadConfig,
) -> Result<RunRecord, AppError> {
    check_method(method, &inst.params)?;
    let rates = inst.rates()?;
    let p = &inst.params;
    let start = Instant::now();
    let solution: Solution = match method {
        Method::ExactIndep => solve_exact_indep(p, &rates)?,
        Method::FirstOrder => first_order(p, &rates)?,
        Method::GumbelIndep => gumbel_indep(p, &rates)?,
        Method::NormalDep => normal_dep(p, &rates)?,
        Method::Mixed => mixed(p, &rates, quad)?,
        Method::SimulatedDep => solve_dep_simulated(p, &rates, sim, &crate::tables::instance_stream(sim.seed, inst))?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let simulated = method == Method::SimulatedDep;
    let digest = config_digest(
        inst,
        method,
        simulated.then_some(sim),
        (method == Method::Mixed).then_some(quad),
    );
    Ok(RunRecord::new(
        inst,
        &solution,
        simulated.then_some(sim.seed),
        elapsed,
        digest,
    ))
}

fn solve(a: &SolveArgs) -> Result<bool, AppError> {
    let sim = a.sim.config();
    sim.validate()?;
    let quad = MixedQuadConfig::default();
    let mut records = Vec::new();
    for &n in &a.n {
        let inst = Instance {
            params: SystemParams::new(n, a.sigma, a.sigma_a)?,
            holding: a.h,
            backorder: a.b,
        };
        records.push(solve_instance(&inst, a.method, &sim, &quad)?);
    }
    emit(&a.output, &records, || {
        let header = [
            "N", "sigma", "sigma_A", "h", "b", "gamma", "method", "I", "beta", "C", "F", "se(F)",
        ];
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.sigma.to_string(),
                    r.sigma_a.to_string(),
                    r.h.to_string(),
                    r.b.to_string(),
                    format!("{:.6}", r.gamma),
                    r.method.clone(),
                    format!("{:.6}", r.inventory),
                    format!("{:.6}", r.capacity),
                    fmt_num(r.cost_c),
                    format!("{:.6}", r.cost_f),
                    format!("{:.3e}", r.stderr_f),
                ]
            })
            .collect();
        render_table(&header, &rows)
    })?;
    Ok(true)
}

fn table(a: &TableArgs) -> Result<bool, AppError> {
    let id = TableId::from_number(a.id).ok_or_else(|| AppError::Usage(format!("no table {}", a.id)))?;
    let opts = TableOptions {
        sim: a.sim.config(),
        quad: MixedQuadConfig::default(),
        deterministic_only: a.deterministic_only,
        n_filter: a.n.clone(),
        sigma_a_filter: a.sigma_a.clone(),
    };
    opts.sim.validate()?;
    let cells = run_table(id, &opts)?;
    let failed = cells.iter().filter(|c| c.failed()).count();
    let checked = cells.iter().filter(|c| c.status != "INFO").count();
    emit(&a.output, &cells, || {
        let header = [
            "N",
            "sigma_A",
            "column",
            "computed",
            "reference",
            "abs dev",
            "rel dev",
            "stderr",
            "tolerance",
            "status",
        ];
        let rows: Vec<Vec<String>> = cells
            .iter()
            .map(|c| {
                vec![
                    c.n.to_string(),
                    c.sigma_a.to_string(),
                    c.column.clone(),
                    fmt_num(c.computed),
                    c.reference.to_string(),
                    format!("{:.3e}", c.abs_dev),
                    format!("{:.3e}", c.rel_dev),
                    format!("{:.3e}", c.stderr),
                    c.tolerance.clone(),
                    c.status.clone(),
                ]
            })
            .collect();
        format!(
            "table {}: {}\n{}{} checked, {} failed\n",
            a.id,
            id.caption(),
            render_table(&header, &rows),
            checked,
            failed
        )
    })?;
    Ok(failed == 0)
}

fn clt(a: &CltArgs) -> Result<bool, AppError> {
    let mut cfg = a.sim.config();
    cfg.validate()?;
    let reps = a.sim.reps.unwrap_or(2000);
    cfg.overshoot_reps = reps;
    let rows = clt_ladder(a.sigma, a.sigma_a, &a.n, reps, &cfg)?;
    let checks = clt_checks(&rows);
    emit(&a.output, &rows, || {
        let header = [
            "N",
            "reps",
            "mean z",
            "sd z",
            "target sd",
            "KS z",
            "KS coupled",
            "KS crit",
            "coupling MAD",
            "se",
        ];
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.reps.to_string(),
                    format!("{:.4}", r.mean_z),
                    format!("{:.4}", r.sd_z),
                    format!("{:.4}", r.target_sd),
                    format!("{:.4}", r.ks_z),
                    format!("{:.4}", r.ks_coupled),
                    format!("{:.4}", r.ks_critical),
                    format!("{:.4}", r.coupling_mad),
                    format!("{:.4}", r.coupling_mad_stderr),
                ]
            })
            .collect();
        let mut s = render_table(&header, &body);
        for c in &checks {
            s.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        s
    })?;
    Ok(checks.iter().all(|c| c.passed))
}

/// One raw replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub rep_index: u64,
    pub max_backlog: f64,
    pub demand_at_d: f64,
    pub argmax_time: f64,
    pub truncated_flag: bool,
}

fn sample(a: &SampleArgs) -> Result<bool, AppError> {
    let cfg = a.sim.config();
    cfg.validate()?;
    let params = SystemParams::new(a.n, a.sigma, a.sigma_a)?;
    let reps = a.sim.reps.unwrap_or(1000);
    let stream = Stream::new(cfg.seed).substream(labels::SAMPLE);
    let rows: Vec<SampleRow> = sample_batch(&params, &cfg, &stream, 0, reps)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| SampleRow {
            rep_index: i as u64,
            max_backlog: s.max_backlog,
            demand_at_d: s.demand_at_d,
            argmax_time: s.argmax_time,
            truncated_flag: s.truncated,
        })
        .collect();
    let mut w = sink(&a.file)?;
    write_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(true)
}
