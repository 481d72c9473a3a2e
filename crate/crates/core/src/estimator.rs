use std::ops::Range;

use rayon::prelude::*;

use crate::approx::{wald_interval, wilson_interval, TunedThetaTable};
use crate::error::Result;
use crate::exact_cp::{cp_interval, DEFAULT_TOL};
use crate::interval::{check_delta, ConfidenceQuery, Containment, Interval, Method};
use crate::massart::{massart_limits, rigorous_theta, MassartConfig};

/// Settings shared by every method: the bisection tolerance for
/// Clopper-Pearson and the tuned `theta` table.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    pub tol: f64,
    pub tuned: TunedThetaTable,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            tuned: TunedThetaTable::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    ClopperPearson { tol: f64 },
    Massart(MassartConfig),
    Wald,
    Wilson,
}

/// An interval method bound to a confidence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    kind: Kind,
    delta: f64,
}

impl Estimator {
    pub fn new(method: Method, delta: f64, options: &EstimatorOptions) -> Result<Self> {
        check_delta(delta)?;
        let kind = match method {
            Method::ClopperPearson => Kind::ClopperPearson { tol: options.tol },
            Method::MassartRigorous => Kind::Massart(rigorous_theta(delta)?),
            Method::MassartTuned => Kind::Massart(options.tuned.config(delta)?),
            Method::Wald => Kind::Wald,
            Method::Wilson => Kind::Wilson,
        };
        Ok(Self { kind, delta })
    }

    pub fn massart(config: MassartConfig) -> Self {
        Self {
            kind: Kind::Massart(config),
            delta: config.delta(),
        }
    }

    pub fn method(&self) -> Method {
        match self.kind {
            Kind::ClopperPearson { .. } => Method::ClopperPearson,
            Kind::Massart(cfg) => cfg.method(),
            Kind::Wald => Method::Wald,
            Kind::Wilson => Method::Wilson,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `theta` for the Massart methods.
    pub fn theta(&self) -> Option<f64> {
        match self.kind {
            Kind::Massart(cfg) => Some(cfg.theta()),
            _ => None,
        }
    }

    pub fn interval(&self, trials: u64, successes: u64) -> Result<Interval> {
        let query = ConfidenceQuery::new(trials, successes, self.delta)?;
        match self.kind {
            Kind::ClopperPearson { tol } => cp_interval(query, tol),
            Kind::Massart(cfg) => Ok(massart_limits(query, cfg)),
            Kind::Wald => Ok(wald_interval(query)),
            Kind::Wilson => Ok(wilson_interval(query)),
        }
    }
}

/// Anything that maps an observed count to clamped confidence limits.
pub trait IntervalRule: Sync {
    /// Clamped `(lower, upper)` for `successes` out of `trials`; `successes <= trials`.
    fn limits(&self, trials: u64, successes: u64) -> (f64, f64);

    fn convention(&self) -> Containment;
}

/// An [`Estimator`] scored under a given containment convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEstimator {
    pub estimator: Estimator,
    pub convention: Containment,
}

impl ScoredEstimator {
    /// Uses the method's own convention.
    pub fn new(estimator: Estimator) -> Self {
        Self {
            convention: estimator.method().default_convention(),
            estimator,
        }
    }
}

impl IntervalRule for ScoredEstimator {
    fn limits(&self, trials: u64, successes: u64) -> (f64, f64) {
        let iv = self
            .estimator
            .interval(trials, successes)
            .expect("estimator is valid for every 0 <= k <= N");
        (iv.lower, iv.upper)
    }

    fn convention(&self) -> Containment {
        self.convention
    }
}

/// Precomputed limits for a contiguous range of success counts at fixed `N`.
#[derive(Debug, Clone)]
pub struct IntervalTable {
    trials: u64,
    first: u64,
    limits: Vec<(f64, f64)>,
}

impl IntervalTable {
    pub fn build<R: IntervalRule + ?Sized>(rule: &R, trials: u64, range: Range<u64>) -> Self {
        let limits = range
            .clone()
            .into_par_iter()
            .map(|k| rule.limits(trials, k))
            .collect();
        Self {
            trials,
            first: range.start,
            limits,
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn covers(&self, range: &Range<u64>) -> bool {
        range.start >= self.first && range.end <= self.first + self.limits.len() as u64
    }

    pub fn get(&self, successes: u64) -> (f64, f64) {
        self.limits[(successes - self.first) as usize]
    }
}
