//! Integer helpers shared by every solver: exact ceiling/floor division,
//! capped least common multiples, rational conversions and the
//! per-thread arithmetic-operation counter used by benchmarks.

use std::cell::Cell;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational used for utilizations and bounds.
pub type Rational = BigRational;

static LIMIT_BITS: AtomicU32 = AtomicU32::new(63);

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

/// Set the magnitude cap to `2^bits - 1` for lcm computations and bound
/// conversions. Values above 63 are clamped, as results are stored in `i64`.
pub fn set_limit_bits(bits: u32) {
    LIMIT_BITS.store(bits.clamp(1, 63), Ordering::Relaxed);
}

pub fn limit_bits() -> u32 {
    LIMIT_BITS.load(Ordering::Relaxed)
}

/// The largest magnitude any lcm or converted bound may reach.
pub fn magnitude_cap() -> i128 {
    (1i128 << limit_bits()) - 1
}

/// Number of counted arithmetic operations performed on this thread since
/// the last [`reset_ops`].
pub fn ops() -> u64 {
    OPS.with(|c| c.get())
}

pub fn reset_ops() {
    OPS.with(|c| c.set(0));
}

#[inline]
pub(crate) fn count(n: u64) {
    OPS.with(|c| c.set(c.get().wrapping_add(n)));
}

/// `⌈a / b⌉` for `b > 0`.
#[inline]
pub fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -(-a).div_euclid(b)
}

/// `⌊a / b⌋` for `b > 0`.
#[inline]
pub fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// Least common multiple of positive integers, failing with
/// [`Error::OverflowLimit`] once the running value exceeds the cap.
/// The lcm of an empty list is 1.
pub fn lcm_capped<I>(values: I) -> Result<i64>
where
    I: IntoIterator<Item = i64>,
{
    let cap = magnitude_cap();
    let mut acc: i128 = 1;
    for v in values {
        debug_assert!(v >= 1);
        let v = v as i128;
        acc = acc / acc.gcd(&v) * v;
        if acc > cap {
            return Err(Error::OverflowLimit(format!("lcm exceeds 2^{} - 1", limit_bits())));
        }
    }
    Ok(acc as i64)
}

/// Narrow an intermediate value to `i64`, enforcing the magnitude cap.
pub fn to_capped_i64(v: i128, what: &str) -> Result<i64> {
    if v.abs() > magnitude_cap() {
        return Err(Error::OverflowLimit(format!("{what} = {v} exceeds 2^{} - 1", limit_bits())));
    }
    Ok(v as i64)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_from(n: i128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn bigint_to_capped(v: &BigInt, what: &str) -> Result<i64> {
    match v.to_i128() {
        Some(x) => to_capped_i64(x, what),
        None => Err(Error::OverflowLimit(format!("{what} does not fit the magnitude cap"))),
    }
}

/// `1 - r` as an exact rational.
pub fn one_minus(r: &Rational) -> Rational {
    Rational::one() - r
}

pub fn is_positive(r: &Rational) -> bool {
    r > &Rational::zero()
}

/// True iff the values form a divisibility chain once sorted.
pub fn is_harmonic_values(values: &[i64]) -> bool {
    let mut v: Vec<i64> = values.to_vec();
    v.sort_unstable();
    v.windows(2).all(|w| w[0] >= 1 && w[1] % w[0] == 0)
}
