//! Run records and their CSV / JSON-lines serializations.

use std::io;

use forkjoin_evt::{CostRates, Method, MixedQuadConfig, SimConfig, Solution, SystemParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rate::RateRule;

/// An instance as specified on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub params: SystemParams,
    pub holding: RateRule,
    pub backorder: RateRule,
}

impl Instance {
    pub fn rates(&self) -> forkjoin_evt::Result<CostRates> {
        let n = self.params.n_components;
        CostRates::new(self.holding.at(n), self.backorder.at(n))
    }
}

/// Everything that determines a run's numbers.
#[derive(Serialize)]
struct DigestInput<'a> {
    instance: &'a Instance,
    method: &'a str,
    sim: Option<&'a SimConfig>,
    quad: Option<&'a MixedQuadConfig>,
}

/// First 16 hex digits of SHA-256 over the canonical JSON of the inputs.
pub fn config_digest(
    instance: &Instance,
    method: Method,
    sim: Option<&SimConfig>,
    quad: Option<&MixedQuadConfig>,
) -> String {
    let input = DigestInput {
        instance,
        method: method.name(),
        sim,
        quad,
    };
    let json = serde_json::to_vec(&input).expect("digest input serializes");
    let hash = Sha256::digest(&json);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One solved instance. Flat so that it maps onto one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub sigma: f64,
    pub sigma_a: f64,
    pub h_rule: String,
    pub b_rule: String,
    pub h: f64,
    pub b: f64,
    pub gamma: f64,
    pub method: String,
    pub inventory: f64,
    pub capacity: f64,
    pub cost_c: f64,
    pub cost_f: f64,
    pub stderr_f: f64,
    /// Present for simulated runs only.
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub config_digest: String,
}

impl RunRecord {
    pub fn new(instance: &Instance, solution: &Solution, seed: Option<u64>, wall_time_s: f64, digest: String) -> Self {
        let rates = instance.rates().expect("rates validated before solving");
        Self {
            n: instance.params.n_components,
            sigma: instance.params.sigma,
            sigma_a: instance.params.sigma_a,
            h_rule: instance.holding.to_string(),
            b_rule: instance.backorder.to_string(),
            h: rates.holding,
            b: rates.backorder,
            gamma: forkjoin_evt::gamma_of(&instance.params, &rates),
            method: solution.method.name().to_string(),
            inventory: solution.inventory(),
            capacity: solution.capacity(),
            cost_c: solution.cost_c,
            cost_f: solution.cost_f,
            stderr_f: solution.stderr_f,
            seed,
            wall_time_s,
            config_digest: digest,
        }
    }
}

pub fn write_csv<W: io::Write, T: Serialize>(out: W, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read, T: for<'de> Deserialize<'de>>(input: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// One JSON object per line.
pub fn write_json_lines<W: io::Write, T: Serialize>(mut out: W, rows: &[T]) -> io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(sigma_a: f64) -> Instance {
        Instance {
            params: SystemParams::new(10, 1.0, sigma_a).unwrap(),
            holding: RateRule::Const { c: 1.0 },
            backorder: RateRule::Linear { c: 1.0 },
        }
    }

    #[test]
    fn digest_tracks_inputs() {
        let a = config_digest(&instance(0.0), Method::ExactIndep, None, None);
        assert_eq!(a.len(), 16);
        assert_eq!(a, config_digest(&instance(0.0), Method::ExactIndep, None, None));
        assert_ne!(a, config_digest(&instance(0.0), Method::GumbelIndep, None, None));
        let sim = SimConfig::default();
        let other = SimConfig { seed: 1, ..sim };
        assert_ne!(
            config_digest(&instance(0.5), Method::SimulatedDep, Some(&sim), None),
            config_digest(&instance(0.5), Method::SimulatedDep, Some(&other), None)
        );
    }
}
