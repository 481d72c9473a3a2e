//! Normal-approximation intervals and the empirically tuned Massart intervals.

use serde::{Deserialize, Serialize};

use crate::binom::NormalCritical;
use crate::error::{Error, Result};
use crate::interval::{check_delta, ConfidenceQuery, Interval, Method};
use crate::massart::{massart_limits, MassartConfig};

/// Wald interval `k/N -+ z sqrt(k/N (1 - k/N) / N)`, zero width at `k = 0` and `k = N`.
pub fn wald_interval(query: ConfidenceQuery) -> Interval {
    let z = critical(query);
    let n = query.trials() as f64;
    let phat = query.proportion();
    let half = z * (phat * (1.0 - phat) / n).sqrt();
    Interval::from_raw(Method::Wald, phat - half, phat + half)
}

/// Wilson score interval, i.e. the normal-approximation limits before the `z^2/N` terms are dropped.
///
/// The lower limit is evaluated as `phat^2 / (phat + z^2/(2N) + z sqrt(...))`,
/// the rationalized form of `(phat + z^2/(2N) - z sqrt(...)) / (1 + z^2/N)`,
/// which is exactly zero at `k = 0` and free of cancellation near it. The
/// upper limit mirrors it through `1 - phat`.
pub fn wilson_interval(query: ConfidenceQuery) -> Interval {
    let z = critical(query);
    let n = query.trials() as f64;
    let phat = query.proportion();
    let qhat = (query.trials() - query.successes()) as f64 / n;
    let z2 = z * z;
    let shift = z2 / (2.0 * n);
    let spread = z * (phat * qhat / n + z2 / (4.0 * n * n)).sqrt();
    let lower = phat * phat / (phat + shift + spread);
    let upper = 1.0 - qhat * qhat / (qhat + shift + spread);
    Interval::from_raw(Method::Wilson, lower, upper)
}

fn critical(query: ConfidenceQuery) -> f64 {
    NormalCritical::new(query.delta())
        .expect("query delta already validated")
        .z_value()
}

/// Tuned `theta` per confidence parameter. Defaults to `{0.05: 1/2, 0.01: 1/3, 0.001: 1/5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedThetaTable {
    entries: Vec<(f64, f64)>,
}

impl Default for TunedThetaTable {
    fn default() -> Self {
        Self {
            entries: vec![(0.05, 1.0 / 2.0), (0.01, 1.0 / 3.0), (0.001, 1.0 / 5.0)],
        }
    }
}

impl TunedThetaTable {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Inserts or replaces the entry for `delta`.
    pub fn with_entry(mut self, delta: f64, theta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!(
                "theta {theta} must be positive and finite"
            )));
        }
        match self.position(delta) {
            Some(i) => self.entries[i].1 = theta,
            None => self.entries.push((delta, theta)),
        }
        Ok(self)
    }

    fn position(&self, delta: f64) -> Option<usize> {
        self.entries
            .iter()
            .position(|&(d, _)| (d - delta).abs() <= 1e-12 * d.abs().max(delta.abs()))
    }

    pub fn theta(&self, delta: f64) -> Option<f64> {
        self.position(delta).map(|i| self.entries[i].1)
    }

    pub fn config(&self, delta: f64) -> Result<MassartConfig> {
        let theta = self
            .theta(delta)
            .ok_or_else(|| Error::Config(format!("no tuned theta configured for delta = {delta}")))?;
        MassartConfig::tuned(theta, delta)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

pub fn tuned_interval(query: ConfidenceQuery, table: &TunedThetaTable) -> Result<Interval> {
    Ok(massart_limits(query, table.config(query.delta())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, k: u64, d: f64) -> ConfidenceQuery {
        ConfidenceQuery::new(n, k, d).unwrap()
    }

    #[test]
    fn wald_center_and_degenerate_ends() {
        let iv = wald_interval(q(100, 50, 0.05));
        assert!((iv.lower - 0.402_001_800_772_997_3).abs() < 1e-12);
        assert!((iv.upper - 0.597_998_199_227_002_7).abs() < 1e-12);
        let iv = wald_interval(q(10, 0, 0.05));
        assert_eq!((iv.lower, iv.upper), (0.0, 0.0));
        let iv = wald_interval(q(10, 10, 0.05));
        assert_eq!((iv.lower, iv.upper), (1.0, 1.0));
    }

    #[test]
    fn wald_clamps() {
        let iv = wald_interval(q(10, 1, 0.01));
        assert!(iv.raw_lower < 0.0);
        assert_eq!(iv.lower, 0.0);
    }

    #[test]
    fn wilson_examples() {
        let iv = wilson_interval(q(10, 5, 0.05));
        assert!((iv.lower - 0.236_593_090_512_563_98).abs() < 1e-12);
        assert!((iv.upper - 0.763_406_909_487_436_0).abs() < 1e-12);
        let iv = wilson_interval(q(10, 0, 0.05));
        assert_eq!(iv.lower, 0.0);
        assert!((iv.upper - 0.277_532_799_862_889_25).abs() < 1e-12);
    }

    #[test]
    fn tuned_examples() {
        let table = TunedThetaTable::default();
        let iv = tuned_interval(q(10, 5, 0.05), &table).unwrap();
        assert!((iv.lower - 0.193_813_782_152_102_74).abs() < 1e-12);
        assert!((iv.upper - 0.806_186_217_847_897_3).abs() < 1e-12);
        assert_eq!(iv.method, Method::MassartTuned);
        for n in [1u64, 17, 400] {
            assert_eq!(tuned_interval(q(n, 0, 0.01), &table).unwrap().lower, 0.0);
        }
        assert!(matches!(
            tuned_interval(q(10, 5, 0.02), &table),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn table_defaults_and_overrides() {
        let t = TunedThetaTable::default();
        assert_eq!(t.theta(0.05), Some(0.5));
        assert_eq!(t.theta(0.01), Some(1.0 / 3.0));
        assert_eq!(t.theta(0.001), Some(0.2));
        let t = t.with_entry(0.05, 0.6).unwrap().with_entry(0.02, 0.4).unwrap();
        assert_eq!(t.theta(0.05), Some(0.6));
        assert_eq!(t.theta(0.02), Some(0.4));
        assert_eq!(t.entries().len(), 4);
        assert!(TunedThetaTable::empty().theta(0.05).is_none());
        assert!(TunedThetaTable::empty().with_entry(0.05, -1.0).is_err());
    }
}
