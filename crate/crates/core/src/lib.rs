//! Binomial proportion confidence intervals with exactly evaluated coverage.
//!
//! Five interval methods are available:
//!
//! * Clopper-Pearson limits, solved by bisection on the binomial CDF ([`exact_cp`]);
//! * explicit limits from Massart's tail inequality, with the `theta` that
//!   guarantees coverage or a tuned larger one ([`massart`], [`approx`]);
//! * the Wald and Wilson normal approximations ([`approx`]).
//!
//! [`coverage`] computes exact coverage/error probabilities by enumeration,
//! cross-checks them by Monte Carlo, sweeps them over `p` or `N`, and tunes
//! `theta` numerically.

pub mod approx;
pub mod binom;
pub mod coverage;
pub mod error;
pub mod estimator;
pub mod exact_cp;
pub mod interval;
pub mod massart;

pub use approx::{tuned_interval, wald_interval, wilson_interval, TunedThetaTable};
pub use binom::{
    binom_cdf, binom_pmf, binom_sf, log_binom_pmf, normal_quantile, BinomialSpec, NormalCritical,
};
pub use coverage::{
    exact_coverage, monte_carlo_coverage, sweep, tune_theta, CoverageRecord, MonteCarloRecord, SweepAxis,
    SweepPlan, TuneOutcome,
};
pub use error::{Error, Result};
pub use estimator::{Estimator, EstimatorOptions, IntervalRule, ScoredEstimator};
pub use exact_cp::{cp_interval, cp_lower, cp_solve, cp_upper, CpSolution, DEFAULT_TOL};
pub use interval::{ConfidenceQuery, Containment, Interval, Method};
pub use massart::{
    cdf_lower_bound, cdf_upper_bound, massart_limits, massart_lower_tail, massart_upper_tail, rigorous_theta,
    MassartConfig, Provenance, TailQuery,
};
