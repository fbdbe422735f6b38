//! Cost-rate sequences `h^{(N)}`, `b^{(N)}` written as `kind:c[:α]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateRule {
    /// `c`.
    Const { c: f64 },
    /// `c·N`.
    Linear { c: f64 },
    /// `c·N^α`.
    Power { c: f64, alpha: f64 },
}

impl RateRule {
    pub fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            RateRule::Const { c } => c,
            RateRule::Linear { c } => c * n,
            RateRule::Power { c, alpha } => c * n.powf(alpha),
        }
    }

    fn coefficient(&self) -> f64 {
        match *self {
            RateRule::Const { c } | RateRule::Linear { c } | RateRule::Power { c, .. } => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRuleError(String);

impl fmt::Display for RateRuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rate rule: {}", self.0)
    }
}

impl std::error::Error for RateRuleError {}

fn number(field: &str, text: &str) -> Result<f64, RateRuleError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| RateRuleError(format!("{field} `{text}` is not a finite number")))
}

impl FromStr for RateRule {
    type Err = RateRuleError;

    /// `const:c`, `linear:c` or `power:c:α`; a bare number means `const`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let rule = match parts.as_slice() {
            [c] => RateRule::Const {
                c: number("coefficient", c)?,
            },
            ["const", c] => RateRule::Const {
                c: number("coefficient", c)?,
            },
            ["linear", c] => RateRule::Linear {
                c: number("coefficient", c)?,
            },
            ["power", c, a] => RateRule::Power {
                c: number("coefficient", c)?,
                alpha: number("exponent", a)?,
            },
            _ => {
                return Err(RateRuleError(format!(
                    "`{s}`: expected const:c, linear:c or power:c:alpha"
                )))
            }
        };
        if rule.coefficient().is_nan() || rule.coefficient() <= 0.0 {
            return Err(RateRuleError(format!("`{s}`: coefficient must be > 0")));
        }
        Ok(rule)
    }
}

impl fmt::Display for RateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RateRule::Const { c } => write!(f, "const:{c}"),
            RateRule::Linear { c } => write!(f, "linear:{c}"),
            RateRule::Power { c, alpha } => write!(f, "power:{c}:{alpha}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        assert_eq!("const:1".parse::<RateRule>().unwrap().at(50), 1.0);
        assert_eq!("linear:3".parse::<RateRule>().unwrap().at(50), 150.0);
        assert_eq!("power:1:2".parse::<RateRule>().unwrap().at(50), 2500.0);
        assert_eq!("2.5".parse::<RateRule>().unwrap(), RateRule::Const { c: 2.5 });
    }

    #[test]
    fn display_round_trips() {
        for s in ["const:1", "linear:0.5", "power:2:-0.5", "power:1:2"] {
            let rule: RateRule = s.parse().unwrap();
            assert_eq!(rule.to_string(), s);
            assert_eq!(rule.to_string().parse::<RateRule>().unwrap(), rule);
        }
    }

    #[test]
    fn rejects_bad_rules() {
        for s in [
            "",
            "linear",
            "linear:0",
            "const:-1",
            "power:1",
            "cubic:1",
            "linear:nan",
            "const:1:2",
        ] {
            assert!(s.parse::<RateRule>().is_err(), "{s}");
        }
    }
}
