//! Coverage and error probabilities of interval methods.
//!
//! Exact evaluation enumerates the success count `K` over the
//! non-negligible part of its distribution and adds up the probability of
//! the counts whose interval misses `p`. Coverage is reported as one minus
//! that error probability, so small error probabilities keep their
//! relative precision.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binom::{pmf_support, BinomialSpec, CompensatedSum};
use crate::error::{Error, Result};
use crate::estimator::{Estimator, EstimatorOptions, IntervalRule, IntervalTable, ScoredEstimator};
use crate::interval::{check_delta, Containment, Method};
use crate::massart::{rigorous_theta, MassartConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub method: Method,
    pub trials: u64,
    pub true_p: f64,
    pub delta: f64,
    pub coverage: f64,
    pub error_prob: f64,
    pub mean_width: f64,
    pub convention: Containment,
}

/// Coverage summary of an arbitrary [`IntervalRule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageStats {
    pub coverage: f64,
    pub error_prob: f64,
    pub mean_width: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("true p = {p} is outside (0, 1)")))
    }
}

fn support(trials: u64, p: f64) -> Result<(Range<u64>, Vec<f64>)> {
    let (first, probs) = pmf_support(BinomialSpec::new(trials, p)?);
    Ok((first..first + probs.len() as u64, probs))
}

fn stats_with(
    first: u64,
    probs: &[f64],
    p: f64,
    convention: Containment,
    limits: impl Fn(u64) -> (f64, f64),
) -> CoverageStats {
    let mut error = CompensatedSum::default();
    let mut width = CompensatedSum::default();
    for (k, &w) in (first..).zip(probs) {
        let (lo, hi) = limits(k);
        if !convention.contains(lo, hi, p) {
            error.add(w);
        }
        width.add(w * (hi - lo));
    }
    let error_prob = error.value().clamp(0.0, 1.0);
    CoverageStats {
        coverage: 1.0 - error_prob,
        error_prob,
        mean_width: width.value(),
    }
}

/// Exact coverage of `rule` at `(N, p)`.
pub fn coverage_of<R: IntervalRule + ?Sized>(rule: &R, trials: u64, p: f64) -> Result<CoverageStats> {
    check_p(p)?;
    let (range, probs) = support(trials, p)?;
    let table = IntervalTable::build(rule, trials, range.clone());
    Ok(stats_with(range.start, &probs, p, rule.convention(), |k| {
        table.get(k)
    }))
}

fn coverage_from_table(table: &IntervalTable, p: f64, convention: Containment) -> Result<CoverageStats> {
    let (range, probs) = support(table.trials(), p)?;
    debug_assert!(table.covers(&range));
    Ok(stats_with(range.start, &probs, p, convention, |k| table.get(k)))
}

fn record(scored: &ScoredEstimator, trials: u64, p: f64, s: CoverageStats) -> CoverageRecord {
    CoverageRecord {
        method: scored.estimator.method(),
        trials,
        true_p: p,
        delta: scored.estimator.delta(),
        coverage: s.coverage,
        error_prob: s.error_prob,
        mean_width: s.mean_width,
        convention: scored.convention,
    }
}

/// Exact coverage, error probability and expected width of `estimator` at `(N, p)`.
pub fn exact_coverage(
    estimator: &Estimator,
    trials: u64,
    p: f64,
    convention: Containment,
) -> Result<CoverageRecord> {
    let scored = ScoredEstimator {
        estimator: *estimator,
        convention,
    };
    let s = coverage_of(&scored, trials, p)?;
    Ok(record(&scored, trials, p, s))
}

/// Empirical coverage from seeded binomial draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRecord {
    pub record: CoverageRecord,
    pub samples: u64,
    pub seed: u64,
}

impl MonteCarloRecord {
    /// Binomial standard error of the empirical coverage around `reference`.
    pub fn standard_error(&self, reference: f64) -> f64 {
        (reference * (1.0 - reference) / self.samples as f64).sqrt()
    }
}

pub fn monte_carlo_coverage(
    estimator: &Estimator,
    trials: u64,
    p: f64,
    convention: Containment,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloRecord> {
    check_p(p)?;
    if samples == 0 {
        return Err(Error::domain("at least one Monte Carlo sample is required"));
    }
    let dist = Binomial::new(trials, p).map_err(|e| Error::domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..samples {
        *counts.entry(dist.sample(&mut rng)).or_default() += 1;
    }
    let mut covered = 0u64;
    let mut width = CompensatedSum::default();
    for (&k, &c) in &counts {
        let iv = estimator.interval(trials, k)?;
        if iv.contains(p, convention) {
            covered += c;
        }
        width.add(c as f64 * iv.width());
    }
    let n = samples as f64;
    let coverage = covered as f64 / n;
    Ok(MonteCarloRecord {
        record: CoverageRecord {
            method: estimator.method(),
            trials,
            true_p: p,
            delta: estimator.delta(),
            coverage,
            error_prob: (samples - covered) as f64 / n,
            mean_width: width.value() / n,
            convention,
        },
        samples,
        seed,
    })
}

/// Deterministic per-cell seed from a base seed and a cell index (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    OverP { trials: u64, grid: Vec<f64> },
    OverN { true_p: f64, grid: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub delta: f64,
    pub methods: Vec<Method>,
    pub options: EstimatorOptions,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if self.methods.is_empty() {
            return Err(Error::domain("sweep needs at least one method"));
        }
        match &self.axis {
            SweepAxis::OverP { trials, grid } => {
                if *trials == 0 {
                    return Err(Error::domain("number of trials must be at least 1"));
                }
                if grid.is_empty() {
                    return Err(Error::domain("sweep grid is empty"));
                }
                grid.iter().try_for_each(|&p| check_p(p))?;
                if grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::domain("sweep grid must be strictly increasing"));
                }
            }
            SweepAxis::OverN { true_p, grid } => {
                check_p(*true_p)?;
                if grid.is_empty() {
                    return Err(Error::domain("sweep grid is empty"));
                }
                if grid[0] == 0 {
                    return Err(Error::domain("number of trials must be at least 1"));
                }
                if grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::domain("sweep grid must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    fn estimators(&self) -> Result<Vec<ScoredEstimator>> {
        self.methods
            .iter()
            .map(|&m| Estimator::new(m, self.delta, &self.options).map(ScoredEstimator::new))
            .collect()
    }
}

/// One record per grid point and method, in grid order then method order.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<CoverageRecord>> {
    plan.validate()?;
    let estimators = plan.estimators()?;
    match &plan.axis {
        SweepAxis::OverP { trials, grid } => {
            let supports: Vec<_> = grid
                .par_iter()
                .map(|&p| support(*trials, p))
                .collect::<Result<_>>()?;
            let lo = supports.iter().map(|(r, _)| r.start).min().unwrap_or(0);
            let hi = supports.iter().map(|(r, _)| r.end).max().unwrap_or(0);
            let tables: Vec<_> = estimators
                .iter()
                .map(|e| IntervalTable::build(e, *trials, lo..hi))
                .collect();
            let rows: Vec<Vec<CoverageRecord>> = grid
                .par_iter()
                .zip(supports.par_iter())
                .map(|(&p, (range, probs))| {
                    estimators
                        .iter()
                        .zip(&tables)
                        .map(|(e, t)| {
                            let s = stats_with(range.start, probs, p, e.convention, |k| t.get(k));
                            record(e, *trials, p, s)
                        })
                        .collect()
                })
                .collect();
            Ok(rows.into_iter().flatten().collect())
        }
        SweepAxis::OverN { true_p, grid } => {
            let rows: Vec<Vec<CoverageRecord>> = grid
                .par_iter()
                .map(|&n| {
                    estimators
                        .iter()
                        .map(|e| coverage_of(e, n, *true_p).map(|s| record(e, n, *true_p, s)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            Ok(rows.into_iter().flatten().collect())
        }
    }
}

/// Result of [`tune_theta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOutcome {
    pub config: MassartConfig,
    pub rigorous_theta: f64,
    /// Cell attaining the minimum coverage at the returned `theta`.
    pub binding_trials: u64,
    pub binding_p: f64,
    pub binding_coverage: f64,
}

struct MinCoverage {
    coverage: f64,
    trials: u64,
    p: f64,
}

fn min_coverage(
    theta: f64,
    delta: f64,
    cells: &[(u64, f64)],
    tables: &mut TableCache,
) -> Result<MinCoverage> {
    let config = MassartConfig::tuned(theta, delta)?;
    let scored = ScoredEstimator::new(Estimator::massart(config));
    tables.refresh(&scored);
    let covs: Vec<f64> = cells
        .par_iter()
        .map(|&(n, p)| {
            let t = tables.get(n);
            coverage_from_table(t, p, scored.convention).map(|s| s.coverage)
        })
        .collect::<Result<_>>()?;
    // first minimum in cell order
    let (i, &coverage) = covs
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (i, c)| match best {
            Some((_, b)) if b <= c => best,
            _ => Some((i, c)),
        })
        .expect("cells are non-empty");
    Ok(MinCoverage {
        coverage,
        trials: cells[i].0,
        p: cells[i].1,
    })
}

/// Interval tables per `N`, sized to the union of supports over the p-grid.
struct TableCache {
    ranges: Vec<(u64, Range<u64>)>,
    tables: Vec<IntervalTable>,
}

impl TableCache {
    fn new(n_set: &[u64], p_grid: &[f64]) -> Result<Self> {
        let mut ranges = Vec::with_capacity(n_set.len());
        for &n in n_set {
            let mut lo = u64::MAX;
            let mut hi = 0;
            for &p in p_grid {
                let (r, _) = support(n, p)?;
                lo = lo.min(r.start);
                hi = hi.max(r.end);
            }
            ranges.push((n, lo..hi));
        }
        Ok(Self {
            ranges,
            tables: Vec::new(),
        })
    }

    fn refresh<R: IntervalRule>(&mut self, rule: &R) {
        self.tables = self
            .ranges
            .iter()
            .map(|(n, r)| IntervalTable::build(rule, *n, r.clone()))
            .collect();
    }

    fn get(&self, trials: u64) -> &IntervalTable {
        let i = self
            .ranges
            .iter()
            .position(|(n, _)| *n == trials)
            .expect("table built for every N in the set");
        &self.tables[i]
    }
}

/// Largest `theta` (to within `tol`) whose Massart interval keeps coverage `>= 1 - delta`
/// on every `(N, p)` cell of the given grids.
///
/// Starts from the rigorous `theta`, which is feasible, grows an upper
/// bracket by doubling until coverage fails, then bisects.
pub fn tune_theta(n_set: &[u64], delta: f64, p_grid: &[f64], tol: f64) -> Result<TuneOutcome> {
    check_delta(delta)?;
    if n_set.is_empty() || p_grid.is_empty() {
        return Err(Error::domain("tuning grids must be non-empty"));
    }
    if n_set.contains(&0) {
        return Err(Error::domain("number of trials must be at least 1"));
    }
    p_grid.iter().try_for_each(|&p| check_p(p))?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!(
            "tolerance {tol} must be positive and finite"
        )));
    }
    let mut n_sorted = n_set.to_vec();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let cells: Vec<(u64, f64)> = n_set
        .iter()
        .flat_map(|&n| p_grid.iter().map(move |&p| (n, p)))
        .collect();
    let mut tables = TableCache::new(&n_sorted, p_grid)?;
    let target = 1.0 - delta;
    let rigorous = rigorous_theta(delta)?.theta();

    let mut best = min_coverage(rigorous, delta, &cells, &mut tables)?;
    if best.coverage < target {
        return Err(Error::Infeasible(format!(
            "rigorous theta = {rigorous} already gives coverage {} < {target} at N = {}, p = {}",
            best.coverage, best.trials, best.p
        )));
    }
    let mut lo = rigorous;
    let mut hi = 2.0 * rigorous;
    let mut grown = 0;
    loop {
        let m = min_coverage(hi, delta, &cells, &mut tables)?;
        if m.coverage < target {
            break;
        }
        lo = hi;
        best = m;
        hi *= 2.0;
        grown += 1;
        if grown > 64 {
            return Err(Error::Infeasible(
                "coverage constraint never binds; theta is unbounded on these grids".into(),
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = min_coverage(mid, delta, &cells, &mut tables)?;
        if m.coverage >= target {
            lo = mid;
            best = m;
        } else {
            hi = mid;
        }
    }
    Ok(TuneOutcome {
        config: MassartConfig::tuned(lo, delta)?,
        rigorous_theta: rigorous,
        binding_trials: best.trials,
        binding_p: best.p,
        binding_coverage: best.coverage,
    })
}
