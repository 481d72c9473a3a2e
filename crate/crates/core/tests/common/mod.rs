//! Exact rational binomial arithmetic, used as an independent oracle.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn choose(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `C(N,k) p^k (1-p)^(N-k)` for `p = num/den`, exactly.
pub fn pmf(n: u64, k: u64, num: u64, den: u64) -> BigRational {
    let top = choose(n, k)
        * num_traits::pow(BigInt::from(num), k as usize)
        * num_traits::pow(BigInt::from(den - num), (n - k) as usize);
    BigRational::new(top, num_traits::pow(BigInt::from(den), n as usize))
}

pub fn cdf(n: u64, k: u64, num: u64, den: u64) -> BigRational {
    (0..=k).fold(BigRational::zero(), |acc, j| acc + pmf(n, j, num, den))
}

/// Exact coverage: sum of the pmf over the `k` whose limits contain `p`.
pub fn coverage(n: u64, num: u64, den: u64, contains: impl Fn(u64) -> bool) -> BigRational {
    (0..=n)
        .filter(|&k| contains(k))
        .fold(BigRational::zero(), |acc, k| acc + pmf(n, k, num, den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}
