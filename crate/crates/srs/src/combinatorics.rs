//! Exact arbitrary-precision combinatorics: binomial coefficients, harmonic
//! numbers, rational powers, and correctly rounded conversion to `f64`.
//!
//! Everything here is exact. The alternating sums in the sampling-dynamics
//! formulas cancel catastrophically in floating point, so all probability
//! mass is carried as `BigRational` until the final display conversion.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial coefficient C(n, k), exact. Returns 0 when k > n.
///
/// Multiplicative formula: every intermediate `res * (n-k+i) / i` is an exact
/// integer division, so intermediates never exceed the final result size.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut res = BigInt::one();
    for i in 1..=k {
        res = res * BigInt::from(n - k + i) / BigInt::from(i);
    }
    res
}

/// Rows 0..=n of Pascal's triangle. `rows[a][b]` = C(a, b).
pub fn pascal_rows(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigInt::one()]);
    for a in 1..=n {
        let prev = &rows[a - 1];
        let mut row = Vec::with_capacity(a + 1);
        row.push(BigInt::one());
        for b in 1..a {
            row.push(&prev[b - 1] + &prev[b]);
        }
        row.push(BigInt::one());
        rows.push(row);
    }
    rows
}

/// nth harmonic number H_n = sum_{i=1..n} 1/i, exact. Rejects n = 0.
pub fn harmonic(n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "harmonic number requires n >= 1".into(),
        ));
    }
    let mut h = BigRational::zero();
    for i in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    Ok(h)
}

/// base^e, exact, with the convention 0^0 = 1.
pub fn rational_pow(base: &BigRational, e: u32) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    BigRational::new_raw(base.numer().pow(e), base.denom().pow(e))
}

/// ln C(n, k) in double precision. Display estimates for ground sets too
/// large for exact mode only; never used inside pmf terms.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
        .sum()
}

/// Double-precision value with an optional error-magnitude annotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealApprox {
    pub value: f64,
    pub error_bound: Option<f64>,
}

impl RealApprox {
    /// Value known exactly (conversion rounding only).
    pub fn exact(value: f64) -> Self {
        RealApprox {
            value,
            error_bound: None,
        }
    }

    pub fn with_error(value: f64, error_bound: f64) -> Self {
        RealApprox {
            value,
            error_bound: Some(error_bound),
        }
    }
}

impl From<&BigRational> for RealApprox {
    fn from(r: &BigRational) -> Self {
        RealApprox::exact(rational_to_f64(r))
    }
}

/// Correctly rounded (nearest, ties to even) conversion of an exact rational
/// to `f64`. Works at any magnitude; overflows to +/-inf and underflows to 0.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let a = r.numer().abs().to_biguint().expect("abs is non-negative");
    let b = r.denom().to_biguint().expect("denominator is positive");

    // a/b lies in [2^(d-1), 2^(d+1)); scale so the integer quotient carries
    // at least 54 significant bits plus a round bit.
    let d = a.bits() as i64 - b.bits() as i64;
    let shift = 55 - d;
    let (sa, sb) = if shift >= 0 {
        (a << shift as u64, b)
    } else {
        (a, b << (-shift) as u64)
    };
    let (q, rem) = sa.div_rem(&sb);
    let sticky = !rem.is_zero();

    // Round the 55/56-bit quotient down to 53 bits, half to even.
    let excess = q.bits() as i64 - 53;
    debug_assert!(excess >= 1);
    let half = BigUint::one() << (excess - 1) as u64;
    let low = &q & ((BigUint::one() << excess as u64) - BigUint::one());
    let mut hi = &q >> excess as u64;
    let round_up = match low.cmp(&half) {
        Ordering::Greater => true,
        Ordering::Equal => sticky || hi.is_odd(),
        Ordering::Less => false,
    };
    if round_up {
        hi += BigUint::one();
    }

    let mant = hi.to_f64().expect("53/54-bit integer is exact in f64");
    let value = ldexp(mant, excess - shift);
    if negative {
        -value
    } else {
        value
    }
}

fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut v = x;
    while e > 511 {
        v *= f64::powi(2.0, 511);
        e -= 511;
    }
    while e < -511 {
        v *= f64::powi(2.0, -511);
        e += 511;
    }
    v * f64::powi(2.0, e as i32)
}

/// Lexicographic rank of a strictly increasing k-subset of {0..n-1}.
pub fn rank_subset(n: usize, subset: &[usize]) -> u64 {
    let k = subset.len();
    let mut rank = 0u64;
    let mut start = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for j in start..c {
            rank += binomial(n - j - 1, k - i - 1)
                .to_u64()
                .expect("rank fits in u64");
        }
        start = c + 1;
    }
    rank
}

/// Inverse of [`rank_subset`]: the subset at `rank` in lexicographic order.
pub fn unrank_subset(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut subset = Vec::with_capacity(k);
    let mut c = 0usize;
    for i in 0..k {
        loop {
            let count = binomial(n - c - 1, k - i - 1)
                .to_u64()
                .expect("count fits in u64");
            if count <= rank {
                rank -= count;
                c += 1;
            } else {
                subset.push(c);
                c += 1;
                break;
            }
        }
    }
    subset
}

/// Rational helper for literals in tests and table input.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
