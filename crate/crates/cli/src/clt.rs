//! Diagnostics for the normal limit of the dependent maximum.

use forkjoin_evt::simulate::{clt_samples, labels, mean_and_stderr};
use forkjoin_evt::special::{ks_critical_value, ks_statistic, std_normal_cdf};
use forkjoin_evt::{Result, SimConfig, Stream, SystemParams};
use serde::{Deserialize, Serialize};

/// Level of every KS test reported here.
pub const KS_LEVEL: f64 = 0.001;
/// Accepted band for the standard deviation of `z` at `N = 1000`.
pub const SD_BAND: (f64, f64) = (0.59, 0.83);
pub const SD_BAND_N: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    pub reps: usize,
    pub mean_z: f64,
    pub sd_z: f64,
    /// `σσ_A/√2`.
    pub target_sd: f64,
    /// KS distance of `z/target_sd` from the standard normal law.
    pub ks_z: f64,
    /// KS distance of the coupled normal from the standard normal law.
    pub ks_coupled: f64,
    pub ks_critical: f64,
    /// `mean |z − target_sd·x_coupled|`.
    pub coupling_mad: f64,
    pub coupling_mad_stderr: f64,
}

/// Runs `reps` replications for every `N` on the same replication layout.
pub fn clt_ladder(sigma: f64, sigma_a: f64, ns: &[usize], reps: usize, cfg: &SimConfig) -> Result<Vec<CltRow>> {
    let stream = Stream::new(cfg.seed).substream(labels::CLT);
    ns.iter()
        .map(|&n| {
            let params = SystemParams::new(n, sigma, sigma_a)?;
            let points = clt_samples(&params, reps, cfg, &stream)?;
            let target = sigma * sigma_a / std::f64::consts::SQRT_2;
            let z: Vec<f64> = points.iter().map(|p| p.z).collect();
            let moments = mean_and_stderr(&z);
            let sd = moments.stderr * (reps as f64).sqrt();
            let mut scaled: Vec<f64> = z.iter().map(|v| v / target).collect();
            let mut coupled: Vec<f64> = points.iter().map(|p| p.x_coupled).collect();
            let dev: Vec<f64> = points.iter().map(|p| (p.z - target * p.x_coupled).abs()).collect();
            let mad = mean_and_stderr(&dev);
            Ok(CltRow {
                n,
                reps,
                mean_z: moments.value,
                sd_z: sd,
                target_sd: target,
                ks_z: ks_statistic(&mut scaled, std_normal_cdf),
                ks_coupled: ks_statistic(&mut coupled, std_normal_cdf),
                ks_critical: ks_critical_value(reps, KS_LEVEL),
                coupling_mad: mad.value,
                coupling_mad_stderr: mad.stderr,
            })
        })
        .collect()
}

/// A named pass/fail outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Coupled normal is standard normal for every `N`; `sd(z)` lies in the
/// band at `N = 1000`; the coupling error decreases strictly along the
/// ladder (in the order given).
pub fn clt_checks(rows: &[CltRow]) -> Vec<Check> {
    let mut out: Vec<Check> = rows
        .iter()
        .map(|r| Check {
            name: format!("coupled normal KS, N={}", r.n),
            passed: r.ks_coupled <= r.ks_critical,
            detail: format!("D = {:.5}, critical {:.5}", r.ks_coupled, r.ks_critical),
        })
        .collect();
    for r in rows.iter().filter(|r| r.n == SD_BAND_N) {
        out.push(Check {
            name: format!("sd of standardized max, N={}", r.n),
            passed: (SD_BAND.0..=SD_BAND.1).contains(&r.sd_z),
            detail: format!(
                "sd = {:.4}, band [{}, {}], target {:.4}",
                r.sd_z, SD_BAND.0, SD_BAND.1, r.target_sd
            ),
        });
    }
    if rows.len() >= 2 {
        let mads: Vec<String> = rows
            .iter()
            .map(|r| format!("N={}: {:.4}", r.n, r.coupling_mad))
            .collect();
        out.push(Check {
            name: "coupling error strictly decreasing".to_string(),
            passed: rows.windows(2).all(|w| w[1].coupling_mad < w[0].coupling_mad),
            detail: mads.join(", "),
        });
    }
    out
}
