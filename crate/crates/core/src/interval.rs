use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One interval request: `successes` out of `trials` at confidence parameter `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceQuery {
    trials: u64,
    successes: u64,
    delta: f64,
}

impl ConfidenceQuery {
    pub fn new(trials: u64, successes: u64, delta: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("number of trials must be at least 1"));
        }
        if successes > trials {
            return Err(Error::domain(format!(
                "success count {successes} exceeds number of trials {trials}"
            )));
        }
        check_delta(delta)?;
        Ok(Self {
            trials,
            successes,
            delta,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Observed proportion `k / N`.
    pub fn proportion(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// The same query with `N - k` successes.
    pub fn reflected(&self) -> Self {
        Self {
            successes: self.trials - self.successes,
            ..*self
        }
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta {delta} is outside (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    ClopperPearson,
    MassartRigorous,
    MassartTuned,
    Wald,
    Wilson,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ClopperPearson,
        Method::MassartRigorous,
        Method::MassartTuned,
        Method::Wald,
        Method::Wilson,
    ];

    /// Short identifier used on the command line and in reports.
    pub fn short_name(self) -> &'static str {
        match self {
            Method::ClopperPearson => "cp",
            Method::MassartRigorous => "rigorous",
            Method::MassartTuned => "tuned",
            Method::Wald => "wald",
            Method::Wilson => "wilson",
        }
    }

    /// Containment rule used when scoring coverage of this method.
    ///
    /// The explicit Massart limits are stated with strict inequalities,
    /// the Clopper-Pearson and normal intervals with closed ones.
    pub fn default_convention(self) -> Containment {
        match self {
            Method::MassartRigorous | Method::MassartTuned => Containment::StrictInterior,
            Method::ClopperPearson | Method::Wald | Method::Wilson => Containment::ClosedInterval,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cp" | "clopper-pearson" => Ok(Method::ClopperPearson),
            "rigorous" | "massart" => Ok(Method::MassartRigorous),
            "tuned" | "empirical" => Ok(Method::MassartTuned),
            "wald" | "normal" => Ok(Method::Wald),
            "wilson" => Ok(Method::Wilson),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected cp, rigorous, tuned, wald or wilson)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Containment {
    /// `lower < p < upper`
    StrictInterior,
    /// `lower <= p <= upper`
    ClosedInterval,
}

impl Containment {
    #[inline]
    pub fn contains(self, lower: f64, upper: f64, p: f64) -> bool {
        match self {
            Containment::StrictInterior => lower < p && p < upper,
            Containment::ClosedInterval => lower <= p && p <= upper,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Containment::StrictInterior => "strict",
            Containment::ClosedInterval => "closed",
        }
    }
}

impl fmt::Display for Containment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Confidence limits clamped to `[0, 1]`, with the unclamped formula values kept alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub raw_lower: f64,
    pub raw_upper: f64,
}

impl Interval {
    pub fn from_raw(method: Method, raw_lower: f64, raw_upper: f64) -> Self {
        Self {
            lower: raw_lower.max(0.0),
            upper: raw_upper.min(1.0),
            method,
            raw_lower,
            raw_upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64, convention: Containment) -> bool {
        convention.contains(self.lower, self.upper, p)
    }
}
