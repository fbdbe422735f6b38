use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("closed-form independent cost requires sigma_a = 0, got sigma_a = {0}")]
    RequiresIndependent(f64),

    #[error("root is not bracketed on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    RootBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge: estimate {value} with error {abs_err}")]
    Quadrature { value: f64, abs_err: f64 },

    #[error("simulation needs {needed} component-steps per replication, budget is {budget}")]
    StepBudget { needed: u64, budget: u64 },

    #[error("inequality violated: {0}")]
    BoundViolated(String),
}

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain { name, value, reason }
}
