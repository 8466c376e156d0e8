use std::fmt;

use serde::{Deserialize, Serialize};

/// Significance tier used in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    #[serde(rename = "ns")]
    NotSignificant,
    #[serde(rename = "†")]
    Marginal,
    #[serde(rename = "*")]
    One,
    #[serde(rename = "**")]
    Two,
    #[serde(rename = "***")]
    Three,
}

impl Tier {
    pub fn from_p(p: f64) -> Tier {
        if p < 0.001 {
            Tier::Three
        } else if p < 0.01 {
            Tier::Two
        } else if p < 0.05 {
            Tier::One
        } else if p < 0.1 {
            Tier::Marginal
        } else {
            Tier::NotSignificant
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::NotSignificant => "ns",
            Tier::Marginal => "†",
            Tier::One => "*",
            Tier::Two => "**",
            Tier::Three => "***",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Degrees of freedom of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    Single(f64),
    Pair(f64, f64),
}

impl Df {
    pub fn single(self) -> Option<f64> {
        match self {
            Df::Single(d) => Some(d),
            Df::Pair(..) => None,
        }
    }
}

impl fmt::Display for Df {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Df::Single(d) => write!(f, "{d}"),
            Df::Pair(a, b) => write!(f, "{a};{b}"),
        }
    }
}

/// A test statistic with its degrees of freedom and two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    pub tier: Tier,
}

impl TestResult {
    pub fn new(statistic: f64, df: Df, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            df,
            p_value,
            tier: Tier::from_p(p_value),
        }
    }

    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tier_thresholds() {
        assert_eq!(Tier::from_p(0.5), Tier::NotSignificant);
        assert_eq!(Tier::from_p(0.1), Tier::NotSignificant);
        assert_eq!(Tier::from_p(0.0999), Tier::Marginal);
        assert_eq!(Tier::from_p(0.05), Tier::Marginal);
        assert_eq!(Tier::from_p(0.0440), Tier::One);
        assert_eq!(Tier::from_p(0.0017), Tier::Two);
        assert_eq!(Tier::from_p(0.0003), Tier::Three);
        assert_eq!(Tier::Three.to_string(), "***");
        assert_eq!(Tier::Marginal.to_string(), "†");
    }

    #[test]
    fn tier_is_monotone_in_p() {
        let ps = [0.0, 1e-5, 0.0009, 0.001, 0.009, 0.01, 0.049, 0.05, 0.09, 0.1, 0.7, 1.0];
        for w in ps.windows(2) {
            assert!(Tier::from_p(w[0]) >= Tier::from_p(w[1]));
        }
    }
}
