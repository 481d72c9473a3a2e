//! Explicit confidence limits derived from Massart's binomial tail inequality.
//!
//! For `N` trials, `k` successes and a shape parameter `theta`,
//!
//! ```text
//! L(k) = k/N + 3/4 * (1 - 2k/N - sqrt(1 + 4 theta k (1 - k/N))) / (1 + theta N)
//! U(k) = k/N + 3/4 * (1 - 2k/N + sqrt(1 + 4 theta k (1 - k/N))) / (1 + theta N)
//! ```
//!
//! With `theta = 9 / (8 ln(2/delta))` the pair encloses the Clopper-Pearson
//! limits and so has coverage above `1 - delta`. Larger `theta` gives the
//! narrower tuned variants.

use serde::{Deserialize, Serialize};

use crate::binom::BinomialSpec;
use crate::error::{Error, Result};
use crate::interval::{check_delta, ConfidenceQuery, Interval, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// `theta` follows from `delta` and the coverage guarantee holds.
    Rigorous(f64),
    /// `theta` was chosen empirically for this `delta`.
    Tuned(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassartConfig {
    theta: f64,
    provenance: Provenance,
}

impl MassartConfig {
    pub fn tuned(theta: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!(
                "theta {theta} must be positive and finite"
            )));
        }
        Ok(Self {
            theta,
            provenance: Provenance::Tuned(delta),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn delta(&self) -> f64 {
        match self.provenance {
            Provenance::Rigorous(d) | Provenance::Tuned(d) => d,
        }
    }

    pub fn method(&self) -> Method {
        match self.provenance {
            Provenance::Rigorous(_) => Method::MassartRigorous,
            Provenance::Tuned(_) => Method::MassartTuned,
        }
    }
}

/// `theta = 9 / (8 ln(2/delta))`.
pub fn rigorous_theta(delta: f64) -> Result<MassartConfig> {
    check_delta(delta)?;
    Ok(MassartConfig {
        theta: 9.0 / (8.0 * (2.0 / delta).ln()),
        provenance: Provenance::Rigorous(delta),
    })
}

/// Raw `(L(k), U(k))` before clamping.
pub fn massart_raw_limits(trials: u64, successes: u64, theta: f64) -> (f64, f64) {
    let n = trials as f64;
    let k = successes as f64;
    let phat = k / n;
    // k (1 - k/N) written as k (N - k) / N so k = N gives an exact zero
    let spread = k * (trials - successes) as f64 / n;
    let root = (1.0 + 4.0 * theta * spread).sqrt();
    let denom = 1.0 + theta * n;
    let base = 1.0 - 2.0 * phat;
    (
        phat + 0.75 * (base - root) / denom,
        phat + 0.75 * (base + root) / denom,
    )
}

pub fn massart_limits(query: ConfidenceQuery, config: MassartConfig) -> Interval {
    let (lo, hi) = massart_raw_limits(query.trials(), query.successes(), config.theta);
    Interval::from_raw(config.method(), lo, hi)
}

/// Deviation `epsilon > 0` of the sample proportion from `p` in a binomial experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    spec: BinomialSpec,
    epsilon: f64,
}

impl TailQuery {
    pub fn new(spec: BinomialSpec, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::domain(format!("epsilon {epsilon} must be positive")));
        }
        Ok(Self { spec, epsilon })
    }

    pub fn spec(&self) -> BinomialSpec {
        self.spec
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Massart's bound on `Pr{K/N >= p + eps}`; exactly 1 once `1 - p - eps/3 <= 0`.
pub fn massart_upper_tail(query: TailQuery) -> f64 {
    let n = query.spec.trials() as f64;
    let p = query.spec.success_prob();
    let eps = query.epsilon;
    let a = p + eps / 3.0;
    let b = 1.0 - p - eps / 3.0;
    if b <= 0.0 {
        return 1.0;
    }
    (-n * eps * eps / (2.0 * a * b)).exp().min(1.0)
}

/// Bound on `Pr{K/N <= p - eps}`, obtained by applying the upper-tail bound to `1 - X`.
pub fn massart_lower_tail(query: TailQuery) -> f64 {
    let mirrored = BinomialSpec::new(query.spec.trials(), 1.0 - query.spec.success_prob())
        .expect("1 - p of a valid probability is a valid probability");
    massart_upper_tail(TailQuery {
        spec: mirrored,
        epsilon: query.epsilon,
    })
}

fn cdf_bound_exponent(n: f64, k: f64, x: f64) -> f64 {
    let dev = x - k / n;
    let a = 2.0 * x / 3.0 + k / (3.0 * n);
    -n * dev * dev / (2.0 * a * (1.0 - a))
}

/// Upper bound on `Pr{K <= k}` at success probability `x`, for `k/N < x < 1`.
pub fn cdf_upper_bound(trials: u64, successes: u64, x: f64) -> Result<f64> {
    if trials == 0 || successes > trials {
        return Err(Error::domain(format!("invalid (N, k) = ({trials}, {successes})")));
    }
    let (n, k) = (trials as f64, successes as f64);
    if !(x > k / n && x < 1.0) {
        return Err(Error::domain(format!(
            "x = {x} is outside (k/N, 1) = ({}, 1)",
            k / n
        )));
    }
    Ok(cdf_bound_exponent(n, k, x).exp())
}

/// Lower bound on `Pr{K <= k - 1}` at success probability `x`, for `1 <= k <= N`, `0 < x < k/N`.
pub fn cdf_lower_bound(trials: u64, successes: u64, x: f64) -> Result<f64> {
    if trials == 0 || successes == 0 || successes > trials {
        return Err(Error::domain(format!("invalid (N, k) = ({trials}, {successes})")));
    }
    let (n, k) = (trials as f64, successes as f64);
    if !(x > 0.0 && x < k / n) {
        return Err(Error::domain(format!(
            "x = {x} is outside (0, k/N) = (0, {})",
            k / n
        )));
    }
    Ok(-cdf_bound_exponent(n, k, x).exp_m1())
}
