//! Monte Carlo engine for `max_i Q_i` under shared demand noise.
//!
//! Each component backlog is `Q_i = sup_{t≥0} X_i(t)` with
//! `X_i(t) = W_i(t) + W_A(t) − t`. Paths are simulated on a grid of step
//! `dt` up to `horizon_factor · t̂`, `t̂ = ((σ² + σ_A²)/2)·H_N`.
//!
//! Replication `r` of a [`Stream`] owns a ChaCha8 key derived from
//! `(seed, substream label, r)`. Within that key, stream id 0 drives the
//! demand path and stream id `j + 1` drives component `j`, so every random
//! number has a fixed address independent of scheduling and of early
//! stopping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{CostRates, SystemParams};
use crate::special;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FORKJOIN_EVT_THREADS";

/// Probability bound used for the default early-stop slack.
const EARLY_STOP_RISK: f64 = 1e-6;

/// Bridge exceedance probabilities below `e^{-36}` are treated as zero.
const BRIDGE_EXPONENT_CUTOFF: f64 = 36.0;

/// Fraction of the horizon at the end of which an argmax counts as truncated.
const TRUNCATION_ZONE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantileMethod {
    /// Randomized choice between two adjacent order statistics whose
    /// probability of falling below the true quantile is exactly 1/2.
    MedianUnbiased,
    /// Linear interpolation at fractional order `(n + 1)·p`.
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid_step: f64,
    pub horizon_factor: f64,
    /// `None` selects `((σ² + σ_A²)/2)·log(N/1e-6)`; `Some(∞)` disables
    /// early stopping.
    pub early_stop_slack: Option<f64>,
    pub quantile_batch: usize,
    pub quantile_reps: usize,
    pub overshoot_reps: usize,
    pub seed: u64,
    pub bridge_correction: bool,
    pub quantile_method: QuantileMethod,
    /// Upper bound on `N · steps` for a single replication.
    pub step_budget: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_step: 1e-3,
            horizon_factor: 2.0,
            early_stop_slack: None,
            quantile_batch: 100,
            quantile_reps: 100,
            overshoot_reps: 10_000,
            seed: 20_240_601,
            bridge_correction: false,
            quantile_method: QuantileMethod::MedianUnbiased,
            step_budget: 2_000_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(domain("grid_step", self.grid_step, "must be finite and > 0"));
        }
        if !(self.horizon_factor >= 1.0) || !self.horizon_factor.is_finite() {
            return Err(domain("horizon_factor", self.horizon_factor, "must be finite and >= 1"));
        }
        if let Some(s) = self.early_stop_slack {
            if !(s > 0.0) {
                return Err(domain("early_stop_slack", s, "must be > 0"));
            }
        }
        for (name, v) in [
            ("quantile_batch", self.quantile_batch),
            ("quantile_reps", self.quantile_reps),
            ("overshoot_reps", self.overshoot_reps),
        ] {
            if v == 0 {
                return Err(domain(name, 0.0, "must be >= 1"));
            }
        }
        if self.step_budget == 0 {
            return Err(domain("step_budget", 0.0, "must be >= 1"));
        }
        Ok(())
    }

    /// `t̂ = ((σ² + σ_A²)/2)·H_N`.
    pub fn t_hat(params: &SystemParams) -> f64 {
        params.mean_backlog() * special::harmonic(params.n_components)
    }

    pub fn horizon(&self, params: &SystemParams) -> f64 {
        self.horizon_factor * Self::t_hat(params)
    }

    pub fn steps(&self, params: &SystemParams) -> u64 {
        (self.horizon(params) / self.grid_step).ceil().max(1.0) as u64
    }

    pub fn slack(&self, params: &SystemParams) -> f64 {
        self.early_stop_slack
            .unwrap_or_else(|| params.mean_backlog() * (params.n() / EARLY_STOP_RISK).ln())
    }

    /// Stream rooted at this configuration's seed.
    pub fn stream(&self) -> Stream {
        Stream::new(self.seed)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splittable handle for reproducible random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        Self {
            key: splitmix64(&mut s),
        }
    }

    /// Independent child stream named by `label`.
    pub fn substream(&self, label: &str) -> Self {
        let mut s = self.key;
        for &byte in label.as_bytes() {
            s ^= byte as u64;
            splitmix64(&mut s);
        }
        Self {
            key: splitmix64(&mut s),
        }
    }

    /// Generator for replication `index` on ChaCha stream id `lane`.
    pub fn rng(&self, index: u64, lane: u64) -> ChaCha8Rng {
        let mut s = self.key ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(lane);
        rng
    }
}

/// Substream labels used by the solvers.
pub mod labels {
    pub const QUANTILE: &str = "quantile";
    pub const SELECT: &str = "quantile-select";
    pub const OVERSHOOT: &str = "overshoot";
    pub const FRESH: &str = "fresh";
    pub const CLT: &str = "clt";
    pub const SAMPLE: &str = "sample";
}

/// One replication of the grid simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSample {
    pub max_backlog: f64,
    /// `W_A` at the grid point nearest `(σ²/2)·log N`.
    pub demand_at_d: f64,
    pub argmax_time: f64,
    /// The maximum was reached in the last 5% of the horizon.
    pub truncated: bool,
}

/// Simulates replication `index` of `stream`.
pub fn sample_max_backlog(params: &SystemParams, cfg: &SimConfig, stream: &Stream, index: u64) -> Result<MaxSample> {
    params.validate()?;
    cfg.validate()?;
    let steps = cfg.steps(params);
    check_budget(params, cfg, steps)?;
    Ok(simulate_one(params, cfg, stream, index, steps))
}

fn check_budget(params: &SystemParams, cfg: &SimConfig, steps: u64) -> Result<()> {
    let needed = steps.saturating_mul(params.n_components as u64);
    if needed > cfg.step_budget {
        return Err(Error::StepBudget {
            needed,
            budget: cfg.step_budget,
        });
    }
    Ok(())
}

fn simulate_one(params: &SystemParams, cfg: &SimConfig, stream: &Stream, index: u64, steps: u64) -> MaxSample {
    let dt = cfg.grid_step;
    let sqrt_dt = dt.sqrt();
    let steps = steps as usize;
    let horizon = steps as f64 * dt;

    // Shared increments W_A(Δ) − Δ, and the coupling value W_A(d·log N).
    let d_step = (0.5 * params.sigma * params.sigma * params.log_n() / dt).round() as usize;
    let mut shared = vec![-dt; steps];
    let mut demand_at_d = 0.0;
    if params.sigma_a > 0.0 {
        let mut rng = stream.rng(index, 0);
        let scale = params.sigma_a * sqrt_dt;
        let mut w = 0.0;
        for (k, inc) in shared.iter_mut().enumerate() {
            if k == d_step {
                demand_at_d = w;
            }
            let z: f64 = rng.sample(StandardNormal);
            w += scale * z;
            *inc += scale * z;
        }
        if d_step >= steps {
            demand_at_d = w;
        }
    }

    let slack = cfg.slack(params);
    let comp_scale = params.sigma * sqrt_dt;
    let bridge_var = params.total_variance() * dt;
    let mut best = 0.0f64;
    let mut argmax_step = 0.0f64;

    for j in 0..params.n_components {
        let mut rng = stream.rng(index, j as u64 + 1);
        let mut x = 0.0f64;
        for (k, &inc) in shared.iter().enumerate() {
            let prev = x;
            let z: f64 = rng.sample(StandardNormal);
            x += comp_scale * z + inc;
            if x > best {
                best = x;
                argmax_step = (k + 1) as f64;
            }
            if cfg.bridge_correction {
                // P(bridge max > best) = exp(−2(best − a)(best − b)/(v·dt)).
                let expo = 2.0 * (best - prev) * (best - x) / bridge_var;
                if expo < BRIDGE_EXPONENT_CUTOFF {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let gap = x - prev;
                    let m = 0.5 * (prev + x + (gap * gap - 2.0 * bridge_var * u.ln()).sqrt());
                    if m > best {
                        best = m;
                        argmax_step = k as f64 + 0.5;
                    }
                }
            }
            if x < best - slack {
                break;
            }
        }
    }

    let argmax_time = argmax_step * dt;
    MaxSample {
        max_backlog: best,
        demand_at_d,
        argmax_time,
        truncated: argmax_time >= (1.0 - TRUNCATION_ZONE) * horizon,
    }
}

/// Replications `first..first + count` of `stream`, in index order.
pub fn sample_batch(
    params: &SystemParams,
    cfg: &SimConfig,
    stream: &Stream,
    first: u64,
    count: usize,
) -> Result<Vec<MaxSample>> {
    params.validate()?;
    cfg.validate()?;
    let steps = cfg.steps(params);
    check_budget(params, cfg, steps)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|r| simulate_one(params, cfg, stream, first + r, steps))
        .collect())
}

/// Installs a global worker pool sized by [`THREADS_ENV`], if set.
/// Returns the cap that was applied.
pub fn configure_threads_from_env() -> Option<usize> {
    let cap = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?.max(1);
    // A pool may already exist; the cap then only applies to later pools.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cap).build_global();
    Some(cap)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    if values.is_empty() {
        return Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return Estimate {
            value: mean,
            stderr: 0.0,
        };
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    Estimate {
        value: mean,
        stderr: (ss / (n - 1.0) / n).sqrt(),
    }
}

/// `P(Bin(n, p) ≥ k)`.
pub fn binomial_upper_tail(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let ln_fact = |m: usize| libm::lgamma(m as f64 + 1.0);
    let terms = (k..=n).map(|j| {
        let ln_pmf = ln_fact(n) - ln_fact(j) - ln_fact(n - j) + j as f64 * ln_p + (n - j) as f64 * ln_q;
        ln_pmf.exp()
    });
    compensated_sum(terms).min(1.0)
}

/// 1-based order `k` and weight `λ` such that taking `X_(k)` with
/// probability `λ` and `X_(k+1)` otherwise is median-unbiased for the
/// `p`-quantile of a sample of size `n`.
pub fn median_unbiased_weights(n: usize, p: f64) -> Result<(usize, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "quantile level needs 0 < p < 1"));
    }
    // π_k = P(X_(k) ≤ x_p) decreases in k; find π_k ≥ 1/2 > π_{k+1}.
    let mut k = 0;
    while k < n && binomial_upper_tail(n, p, k + 1) >= 0.5 {
        k += 1;
    }
    if k == 0 || k >= n {
        return Err(domain(
            "p",
            p,
            "batch too small: estimator would need order statistic 0 or n+1",
        ));
    }
    let (pk, pk1) = (binomial_upper_tail(n, p, k), binomial_upper_tail(n, p, k + 1));
    Ok((k, (0.5 - pk1) / (pk - pk1)))
}

fn interpolated_order_statistic(sorted: &[f64], p: f64) -> Result<f64> {
    let n = sorted.len();
    let h = (n + 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo == 0 || lo >= n {
        return Err(domain("p", p, "batch too small for interpolated quantile"));
    }
    let frac = h - lo as f64;
    Ok(sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Estimate of the `p`-quantile of `max_i Q_i` in backlog units: the median,
/// over `quantile_reps` batches of `quantile_batch` replications, of a
/// per-batch order-statistic estimate.
pub fn estimate_quantile(params: &SystemParams, p: f64, cfg: &SimConfig, stream: &Stream) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "quantile level needs 0 < p < 1"));
    }
    let n = cfg.quantile_batch;
    let weights = match cfg.quantile_method {
        QuantileMethod::MedianUnbiased => Some(median_unbiased_weights(n, p)?),
        QuantileMethod::Interpolated => {
            let h = ((n + 1) as f64 * p).floor() as usize;
            if h == 0 || h >= n {
                return Err(domain("p", p, "batch too small for interpolated quantile"));
            }
            None
        }
    };
    let samples = sample_batch(params, cfg, stream, 0, n * cfg.quantile_reps)?;
    let select = stream.substream(labels::SELECT);
    let mut per_batch = samples
        .chunks(n)
        .enumerate()
        .map(|(b, chunk)| {
            let mut xs: Vec<f64> = chunk.iter().map(|s| s.max_backlog).collect();
            xs.sort_by(f64::total_cmp);
            match weights {
                Some((k, lambda)) => {
                    let u: f64 = select.rng(b as u64, 0).random();
                    Ok(if u < lambda { xs[k - 1] } else { xs[k] })
                }
                None => interpolated_order_statistic(&xs, p),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(median(&mut per_batch))
}

/// `(x − m)/s` with `m = (σ²/2)·log N` and `s = (σσ_A/√2)·√log N`.
pub fn standardize(params: &SystemParams, backlog: f64) -> Result<f64> {
    let s = params.clt_scale();
    if !(s > 0.0) {
        return Err(domain(
            "sigma_a",
            params.sigma_a,
            "standardization needs sigma_a > 0 and N >= 2",
        ));
    }
    Ok((backlog - params.first_order_level()) / s)
}

/// Inverse of [`standardize`].
pub fn destandardize(params: &SystemParams, z: f64) -> f64 {
    params.first_order_level() + params.clt_scale() * z
}

/// `E[(X − level)^+]` estimated from given maxima.
pub fn overshoot_from_samples(maxima: &[f64], level: f64) -> Estimate {
    let excess: Vec<f64> = maxima.iter().map(|&m| (m - level).max(0.0)).collect();
    mean_and_stderr(&excess)
}

/// `E[(max_i Q_i − I)^+]` from `overshoot_reps` replications.
pub fn estimate_overshoot(params: &SystemParams, level: f64, cfg: &SimConfig, stream: &Stream) -> Result<Estimate> {
    if !(level >= 0.0) {
        return Err(domain("I", level, "inventory must be >= 0"));
    }
    let samples = sample_batch(params, cfg, stream, 0, cfg.overshoot_reps)?;
    let maxima: Vec<f64> = samples.iter().map(|s| s.max_backlog).collect();
    Ok(overshoot_from_samples(&maxima, level))
}

/// `C(I)` from an overshoot estimate, propagating its standard error.
pub fn cost_c_from_estimate(params: &SystemParams, rates: &CostRates, level: f64, overshoot: Estimate) -> Estimate {
    Estimate {
        value: crate::model::cost_c_from_overshoot(params, rates, level, overshoot.value),
        stderr: rates.backlog_weight(params.n_components) * overshoot.stderr,
    }
}

/// `C(I)` with the overshoot term estimated by simulation.
pub fn estimate_cost_c_dep(
    params: &SystemParams,
    rates: &CostRates,
    level: f64,
    cfg: &SimConfig,
    stream: &Stream,
) -> Result<Estimate> {
    rates.validate()?;
    let over = estimate_overshoot(params, level, cfg, stream)?;
    Ok(cost_c_from_estimate(params, rates, level, over))
}

/// Standardized maximum and its coupled normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltPoint {
    /// `(max − (σ²/2)·log N)/√log N`.
    pub z: f64,
    /// `(√2/(σσ_A))·W_A((σ²/2)·log N)/√log N`, exactly standard normal.
    pub x_coupled: f64,
}

pub fn clt_samples(params: &SystemParams, reps: usize, cfg: &SimConfig, stream: &Stream) -> Result<Vec<CltPoint>> {
    if !(params.sigma_a > 0.0) {
        return Err(domain("sigma_a", params.sigma_a, "CLT diagnostics need sigma_a > 0"));
    }
    if params.n_components < 2 {
        return Err(domain("N", params.n_components as f64, "CLT diagnostics need N >= 2"));
    }
    let root_log_n = params.log_n().sqrt();
    let m = params.first_order_level();
    let x_scale = std::f64::consts::SQRT_2 / (params.sigma * params.sigma_a) / root_log_n;
    let samples = sample_batch(params, cfg, stream, 0, reps)?;
    Ok(samples
        .iter()
        .map(|s| CltPoint {
            z: (s.max_backlog - m) / root_log_n,
            x_coupled: s.demand_at_d * x_scale,
        })
        .collect())
}
