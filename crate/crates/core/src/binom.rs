//! Binomial and standard normal primitives.
//!
//! Point probabilities use Loader's saddle-point form (Stirling remainder
//! plus the deviance term `bd0`), which keeps full relative accuracy for
//! large `N` and for rare-event success probabilities. Tail sums start at
//! the requested index and walk away from the mode with the term ratio
//! recurrence, so the summed terms are monotonically decreasing and the
//! loop can stop on a geometric tail bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative size below which the remaining tail of a decreasing series is dropped.
const TAIL_EPS: f64 = 1e-18;

/// A binomial distribution with `trials` Bernoulli trials of success probability `success_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialSpec {
    trials: u64,
    success_prob: f64,
}

impl BinomialSpec {
    pub fn new(trials: u64, success_prob: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("number of trials must be at least 1"));
        }
        if !(0.0..=1.0).contains(&success_prob) {
            return Err(Error::domain(format!(
                "success probability {success_prob} is outside [0, 1]"
            )));
        }
        Ok(Self { trials, success_prob })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// The (lower) mode `floor((N + 1) p)`, capped at `N`.
    pub fn mode(&self) -> u64 {
        let m = ((self.trials as f64 + 1.0) * self.success_prob).floor() as u64;
        m.min(self.trials)
    }

    fn check_k(&self, k: u64) -> Result<()> {
        if k > self.trials {
            Err(Error::domain(format!(
                "success count {k} exceeds number of trials {}",
                self.trials
            )))
        } else {
            Ok(())
        }
    }

    /// pmf(j + 1) / pmf(j), valid for 0 < p < 1 and j < N.
    #[inline]
    fn ratio_up(&self, j: u64, odds: f64) -> f64 {
        (self.trials - j) as f64 / (j + 1) as f64 * odds
    }

    /// pmf(j - 1) / pmf(j), valid for 0 < p < 1 and j > 0.
    #[inline]
    fn ratio_down(&self, j: u64, inv_odds: f64) -> f64 {
        j as f64 / (self.trials - j + 1) as f64 * inv_odds
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Stirling remainder `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`.
fn stirlerr(n: u64) -> f64 {
    const TABLE: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258,
        0.041_340_695_955_409_294,
        0.027_677_925_684_998_339,
        0.020_790_672_103_765_093,
        0.016_644_691_189_821_192,
        0.013_876_128_823_070_748,
        0.011_896_709_945_891_770,
        0.010_411_265_261_972_096,
        0.009_255_462_182_712_733,
        0.008_330_563_433_362_871,
        0.007_573_675_487_951_841,
        0.006_942_840_107_209_530,
        0.006_408_994_188_004_207,
        0.005_951_370_112_758_848,
        0.005_554_733_551_962_801,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15 {
        return TABLE[n as usize];
    }
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln[C(N,k) p^k (1-p)^(N-k)]`; negative infinity when the probability is exactly zero.
pub fn log_binom_pmf(spec: BinomialSpec, k: u64) -> Result<f64> {
    spec.check_k(k)?;
    Ok(log_pmf_unchecked(spec, k))
}

pub fn binom_pmf(spec: BinomialSpec, k: u64) -> Result<f64> {
    log_binom_pmf(spec, k).map(f64::exp)
}

fn log_pmf_unchecked(spec: BinomialSpec, k: u64) -> f64 {
    let n = spec.trials;
    let p = spec.success_prob;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        return nf * (-p).ln_1p();
    }
    if k == n {
        return nf * p.ln();
    }
    let q = 1.0 - p;
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// Sums a series of decreasing relative terms `1, r_0, r_0 r_1, ...` produced by `next_ratio`.
///
/// `next_ratio` returns `None` at the end of the support. Ratios must be
/// non-increasing so that `term * r / (1 - r)` bounds what remains.
fn decreasing_series(mut next_ratio: impl FnMut() -> Option<f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut term = 1.0;
    acc.add(term);
    while let Some(r) = next_ratio() {
        term *= r;
        acc.add(term);
        if term == 0.0 {
            break;
        }
        if r < 1.0 && term * r / (1.0 - r) <= TAIL_EPS * acc.value() {
            break;
        }
    }
    acc.value()
}

/// `Pr{K <= k}` summed downward from `k`. Caller guarantees `0 < p < 1` and `k < mode`.
fn lower_tail_direct(spec: BinomialSpec, k: u64) -> f64 {
    let inv_odds = (1.0 - spec.success_prob) / spec.success_prob;
    let mut j = k;
    let rel = decreasing_series(|| {
        if j == 0 {
            return None;
        }
        let r = spec.ratio_down(j, inv_odds);
        j -= 1;
        Some(r)
    });
    log_pmf_unchecked(spec, k).exp() * rel
}

/// `Pr{K > k}` summed upward from `k + 1`. Caller guarantees `0 < p < 1` and `k >= mode`, `k < N`.
fn upper_tail_direct(spec: BinomialSpec, k: u64) -> f64 {
    let odds = spec.success_prob / (1.0 - spec.success_prob);
    let mut j = k + 1;
    let rel = decreasing_series(|| {
        if j >= spec.trials {
            return None;
        }
        let r = spec.ratio_up(j, odds);
        j += 1;
        Some(r)
    });
    log_pmf_unchecked(spec, k + 1).exp() * rel
}

/// `Pr{K <= k} = sum_{j=0}^{k} C(N,j) p^j (1-p)^(N-j)`.
pub fn binom_cdf(spec: BinomialSpec, k: u64) -> Result<f64> {
    spec.check_k(k)?;
    let p = spec.success_prob;
    if k == spec.trials || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    if k < spec.mode() {
        Ok(lower_tail_direct(spec, k).min(1.0))
    } else {
        Ok((1.0 - upper_tail_direct(spec, k)).max(0.0))
    }
}

/// `Pr{K > k}`, the complement of [`binom_cdf`], computed directly on whichever side is small.
pub fn binom_sf(spec: BinomialSpec, k: u64) -> Result<f64> {
    spec.check_k(k)?;
    let p = spec.success_prob;
    if k == spec.trials || p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if k < spec.mode() {
        Ok((1.0 - lower_tail_direct(spec, k)).max(0.0))
    } else {
        Ok(upper_tail_direct(spec, k).min(1.0))
    }
}

/// The non-negligible part of the pmf: `(first_k, probabilities)`.
///
/// Terms are generated from the mode outward and truncated where the
/// remaining tail falls below `1e-18` of the mode term. For `p` in `{0, 1}`
/// the single atom is returned.
pub fn pmf_support(spec: BinomialSpec) -> (u64, Vec<f64>) {
    let n = spec.trials;
    let p = spec.success_prob;
    if p == 0.0 {
        return (0, vec![1.0]);
    }
    if p == 1.0 {
        return (n, vec![1.0]);
    }
    let m = spec.mode();
    let peak = log_pmf_unchecked(spec, m).exp();
    let odds = p / (1.0 - p);
    let inv_odds = (1.0 - p) / p;

    let mut below = Vec::new();
    let mut term = peak;
    let mut j = m;
    while j > 0 {
        let r = spec.ratio_down(j, inv_odds);
        term *= r;
        j -= 1;
        if term == 0.0 {
            break;
        }
        below.push(term);
        if r < 1.0 && term * r / (1.0 - r) <= TAIL_EPS * peak {
            break;
        }
    }
    let first = m - below.len() as u64;
    below.reverse();
    below.push(peak);

    let mut term = peak;
    let mut j = m;
    while j < n {
        let r = spec.ratio_up(j, odds);
        term *= r;
        j += 1;
        if term == 0.0 {
            break;
        }
        below.push(term);
        if r < 1.0 && term * r / (1.0 - r) <= TAIL_EPS * peak {
            break;
        }
    }
    (first, below)
}

/// Standard normal critical value `z` with `Phi(z) = 1 - delta_half`.
///
/// Uses Wichura's AS 241 (PPND16) rational approximation on the lower
/// tail probability, which is accurate to about 1e-16 relative.
pub fn normal_quantile(delta_half: f64) -> Result<f64> {
    if !(delta_half > 0.0 && delta_half < 0.5) {
        return Err(Error::domain(format!(
            "tail probability {delta_half} is outside (0, 0.5)"
        )));
    }
    Ok(-ppnd16(delta_half))
}

/// Polynomial with coefficients in ascending order of degree.
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Inverse of the standard normal CDF for `0 < p < 1` (AS 241).
#[allow(clippy::excessive_precision)]
fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_545_925,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let r = (-(if q < 0.0 { p } else { 1.0 - p }).ln()).sqrt();
    let val = if r <= 5.0 {
        horner(&C, r - 1.6) / horner(&D, r - 1.6)
    } else {
        horner(&E, r - 5.0) / horner(&F, r - 5.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// A confidence parameter together with its two-sided normal critical value `Z_{delta/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalCritical {
    delta: f64,
    z_value: f64,
}

impl NormalCritical {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("delta {delta} is outside (0, 1)")));
        }
        Ok(Self {
            delta,
            z_value: normal_quantile(delta / 2.0)?,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn z_value(&self) -> f64 {
        self.z_value
    }
}
