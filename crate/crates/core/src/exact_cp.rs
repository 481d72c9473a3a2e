//! Clopper-Pearson limits by bisection on the exact binomial CDF.
//!
//! The lower limit solves `sum_{j<k} C(N,j) p^j (1-p)^(N-j) = 1 - delta/2`
//! and the upper limit solves `sum_{j<=k} C(N,j) p^j (1-p)^(N-j) = delta/2`.
//! Both sides are strictly monotone in `p`, so a bracket plus bisection
//! always converges. The Massart limits bracket each root and are used as
//! the starting interval.
//!
//! Returned limits are the outer end of the final bracket: the lower limit
//! never exceeds the true root and the upper limit is never below it.

use crate::binom::{binom_cdf, binom_sf, BinomialSpec};
use crate::error::{Error, Result};
use crate::interval::{ConfidenceQuery, Interval, Method};
use crate::massart::{massart_raw_limits, rigorous_theta};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Offset keeping bisection brackets off the exact endpoints 0 and 1.
const TINY: f64 = 1e-16;

const MAX_ITERS: u32 = 1100;

/// Diagnostics for one Clopper-Pearson solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpSolution {
    pub interval: Interval,
    /// The Massart bracket failed to enclose the lower root and `(0, 1)` was used.
    pub lower_fallback: bool,
    pub upper_fallback: bool,
    pub iterations: u32,
}

struct Root {
    lo: f64,
    hi: f64,
    iterations: u32,
    fallback: bool,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "tolerance {tol} must be positive and finite"
        )))
    }
}

/// Bisection on an increasing function `h` over a bracket with `h(lo) <= 0 <= h(hi)`.
///
/// Stops once both the bracket width and `h(hi) - h(lo)` are within `tol`, so
/// the residual at either end is bounded even where `h` is steep.
fn bisect_increasing(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, u32) {
    let (mut h_lo, mut h_hi) = (h(lo), h(hi));
    let mut iterations = 0;
    while (hi - lo > tol || h_hi - h_lo > tol) && iterations < MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h(mid);
        if h_mid <= 0.0 {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
            h_hi = h_mid;
        }
        iterations += 1;
    }
    (lo, hi, iterations)
}

fn solve(h: impl Fn(f64) -> f64, bracket: (f64, f64), tol: f64) -> Root {
    let (lo, hi) = bracket;
    let valid = lo < hi && h(lo) <= 0.0 && h(hi) >= 0.0;
    let (lo, hi, fallback) = if valid { (lo, hi, false) } else { (0.0, 1.0, true) };
    let (lo, hi, iterations) = bisect_increasing(h, lo, hi, tol);
    Root {
        lo,
        hi,
        iterations,
        fallback,
    }
}

fn spec_at(n: u64, p: f64) -> BinomialSpec {
    BinomialSpec::new(n, p.clamp(0.0, 1.0)).expect("clamped probability is valid")
}

fn lower_root(query: ConfidenceQuery, tol: f64, massart_lower: f64) -> Root {
    let n = query.trials();
    let k = query.successes();
    let half = query.delta() / 2.0;
    // Pr{K >= k} - delta/2 is increasing in p.
    let h = |p: f64| binom_sf(spec_at(n, p), k - 1).expect("k - 1 < N") - half;
    solve(h, (massart_lower.max(TINY), query.proportion()), tol)
}

fn upper_root(query: ConfidenceQuery, tol: f64, massart_upper: f64) -> Root {
    let n = query.trials();
    let k = query.successes();
    let half = query.delta() / 2.0;
    // delta/2 - Pr{K <= k} is increasing in p.
    let h = |p: f64| half - binom_cdf(spec_at(n, p), k).expect("k <= N");
    solve(h, (query.proportion(), massart_upper.min(1.0 - TINY)), tol)
}

fn massart_bracket(query: ConfidenceQuery) -> (f64, f64) {
    let theta = rigorous_theta(query.delta())
        .expect("query delta already validated")
        .theta();
    massart_raw_limits(query.trials(), query.successes(), theta)
}

/// Lower Clopper-Pearson limit, 0 when `k = 0`.
pub fn cp_lower(query: ConfidenceQuery, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if query.successes() == 0 {
        return Ok(0.0);
    }
    let (lo, _) = massart_bracket(query);
    Ok(lower_root(query, tol, lo).lo)
}

/// Upper Clopper-Pearson limit, 1 when `k = N`.
pub fn cp_upper(query: ConfidenceQuery, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if query.successes() == query.trials() {
        return Ok(1.0);
    }
    let (_, hi) = massart_bracket(query);
    Ok(upper_root(query, tol, hi).hi)
}

pub fn cp_interval(query: ConfidenceQuery, tol: f64) -> Result<Interval> {
    cp_solve(query, tol).map(|s| s.interval)
}

/// [`cp_interval`] with bracket and iteration diagnostics.
pub fn cp_solve(query: ConfidenceQuery, tol: f64) -> Result<CpSolution> {
    check_tol(tol)?;
    let (m_lo, m_hi) = massart_bracket(query);
    let mut iterations = 0;
    let (lower, lower_fallback) = if query.successes() == 0 {
        (0.0, false)
    } else {
        let r = lower_root(query, tol, m_lo);
        iterations += r.iterations;
        (r.lo, r.fallback)
    };
    let (upper, upper_fallback) = if query.successes() == query.trials() {
        (1.0, false)
    } else {
        let r = upper_root(query, tol, m_hi);
        iterations += r.iterations;
        (r.hi, r.fallback)
    };
    Ok(CpSolution {
        interval: Interval::from_raw(Method::ClopperPearson, lower, upper),
        lower_fallback,
        upper_fallback,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, k: u64, d: f64) -> ConfidenceQuery {
        ConfidenceQuery::new(n, k, d).unwrap()
    }

    // Reference roots from a 50-digit bisection on the exact CDF.
    const TEN_FIVE_LOWER: f64 = 0.187_086_028_447_398_53;
    const TEN_FIVE_UPPER: f64 = 0.812_913_971_552_601_47;

    #[test]
    fn endpoint_definitions() {
        assert_eq!(cp_lower(q(10, 0, 0.05), DEFAULT_TOL).unwrap(), 0.0);
        assert_eq!(cp_upper(q(10, 10, 0.05), DEFAULT_TOL).unwrap(), 1.0);
    }

    #[test]
    fn closed_forms_at_extreme_counts() {
        let c = 0.025f64.powf(0.1);
        let l = cp_lower(q(10, 10, 0.05), DEFAULT_TOL).unwrap();
        assert!((l - c).abs() < 1e-9, "{l} vs {c}");
        let u = cp_upper(q(10, 0, 0.05), DEFAULT_TOL).unwrap();
        assert!((u - (1.0 - c)).abs() < 1e-9);
        let iv = cp_interval(q(1, 0, 0.5), DEFAULT_TOL).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert!((iv.upper - 0.75).abs() < 1e-9);
    }

    #[test]
    fn ten_five() {
        let iv = cp_interval(q(10, 5, 0.05), DEFAULT_TOL).unwrap();
        assert!((iv.lower - TEN_FIVE_LOWER).abs() < 1e-9);
        assert!((iv.upper - TEN_FIVE_UPPER).abs() < 1e-9);
        assert!(iv.lower <= TEN_FIVE_LOWER && iv.upper >= TEN_FIVE_UPPER);
        assert_eq!(iv.method, Method::ClopperPearson);
    }

    #[test]
    fn massart_bracket_is_used() {
        let s = cp_solve(q(50, 17, 0.01), DEFAULT_TOL).unwrap();
        assert!(!s.lower_fallback && !s.upper_fallback);
        assert!(s.iterations > 0 && s.iterations <= 2 * 40);
    }

    #[test]
    fn invalid_tolerance() {
        assert!(cp_interval(q(10, 5, 0.05), 0.0).is_err());
        assert!(cp_lower(q(10, 5, 0.05), -1.0).is_err());
        assert!(cp_upper(q(10, 5, 0.05), f64::NAN).is_err());
    }

    #[test]
    fn fallback_bracket_still_converges() {
        let query = q(20, 7, 0.05);
        let h = |p: f64| binom_sf(spec_at(20, p), 6).unwrap() - 0.025;
        // A bracket entirely above the root forces the (0, 1) fallback.
        let r = solve(h, (0.9, 0.95), 1e-12);
        assert!(r.fallback);
        let good = cp_lower(query, 1e-12).unwrap();
        assert!((r.lo - good).abs() < 1e-11);
    }
}
