//! Integer primitives: square roots, square detection, 2-adic valuation,
//! Jacobi symbols and multiplicative orders.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::Integral;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("the 2-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("Jacobi modulus must be odd and at least 3, got {0}")]
    BadJacobiModulus(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{a} is divisible by {p}, so it has no multiplicative order")]
    NotInvertible { a: u64, p: u64 },
}

/// Exponent of the largest power of two dividing a nonzero integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Valuation(#[serde(with = "crate::decimal")] pub u64);

impl Valuation {
    pub fn exponent(self) -> u64 {
        self.0
    }
}

// Residue prefilter for perfect squares. A square must be a quadratic
// residue modulo each of these; together they reject well over 99% of
// non-squares before any big-integer root is taken.
const fn square_mask(modulus: u64) -> u128 {
    let mut mask = 0u128;
    let mut i = 0;
    while i < modulus {
        mask |= 1u128 << ((i * i) % modulus);
        i += 1;
    }
    mask
}

const SQUARES_MOD_64: u128 = square_mask(64);
const SQUARES_MOD_63: u128 = square_mask(63);
const SQUARES_MOD_65: u128 = square_mask(65);
const SQUARES_MOD_11: u128 = square_mask(11);

/// Product of the prefilter moduli 64, 63, 65 and 11.
pub const PREFILTER_MODULUS: u64 = 64 * 63 * 65 * 11;

/// Whether a residue modulo [`PREFILTER_MODULUS`] could belong to a perfect square.
#[inline]
pub fn passes_square_prefilter(residue: u64) -> bool {
    let test = |mask: u128, m: u64| mask & (1u128 << (residue % m)) != 0;
    test(SQUARES_MOD_64, 64)
        && test(SQUARES_MOD_63, 63)
        && test(SQUARES_MOD_65, 65)
        && test(SQUARES_MOD_11, 11)
}

/// Floor square root of a machine word.
pub fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Floor square root by Newton iteration.
///
/// The iteration starts from a power of two that is at least `√n` and
/// decreases monotonically until it stops at `⌊√n⌋`.
pub fn isqrt(n: &BigUint) -> BigUint {
    if let Some(small) = n.to_u64() {
        return BigUint::from(isqrt_u64(small));
    }
    let bits = n.bits();
    let mut x = BigUint::one() << bits.div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Returns `Some(√n)` when `n` is a perfect square.
pub fn is_perfect_square(n: &BigUint) -> Option<BigUint> {
    let residue = (n % PREFILTER_MODULUS).to_u64().unwrap_or_default();
    if !passes_square_prefilter(residue) {
        return None;
    }
    let root = isqrt(n);
    if &(&root * &root) == n {
        Some(root)
    } else {
        None
    }
}

/// 2-adic valuation of a nonzero integer.
pub fn v2<T: Integral>(n: &T) -> Result<Valuation, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ZeroValuation);
    }
    let two = T::one() + T::one();
    let mut rest = n.clone();
    let mut k = 0;
    while rest.is_even() {
        rest = rest / two.clone();
        k += 1;
    }
    Ok(Valuation(k))
}

/// Splits a nonzero `n` into `(v2(n), n / 2^v2(n))`.
pub fn split_two_power(n: u64) -> (u32, u64) {
    debug_assert!(n != 0);
    let t = n.trailing_zeros();
    (t, n >> t)
}

/// Jacobi symbol `(a / n)` for odd `n ≥ 3`.
pub fn jacobi<T: Integral>(a: &T, n: &T) -> Result<i8, ArithError> {
    let three = T::from_u8(3).expect("3 is representable");
    if n.is_even() || *n < three {
        return Err(ArithError::BadJacobiModulus(format!("{n:?}")));
    }
    let eight = T::from_u8(8).unwrap();
    let four = T::from_u8(4).unwrap();
    let five = T::from_u8(5).unwrap();

    let mut result = 1i8;
    let mut a = a.clone();
    let mut n = n.clone();
    if a.is_negative() {
        // (-1/n) = (-1)^((n-1)/2)
        if n.mod_floor(&four) == three {
            result = -result;
        }
        a = -a;
    }
    a = a.mod_floor(&n);
    while !a.is_zero() {
        while a.is_even() {
            a = a / (T::one() + T::one());
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { result } else { 0 })
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = base % m;
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality by trial division. Intended for the small
/// moduli used by the residue sieve.
pub fn is_prime_small(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least `e ≥ 1` with `a^e ≡ 1 (mod p)`.
pub fn mult_order(a: u64, p: u64) -> Result<u64, ArithError> {
    if !is_prime_small(p) {
        return Err(ArithError::NotPrime(p));
    }
    if a % p == 0 {
        return Err(ArithError::NotInvertible { a, p });
    }
    let mut order = p - 1;
    for q in distinct_prime_factors(p - 1) {
        while order % q == 0 && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// Period of `n ↦ a^n mod p` on `n ≥ 1`. This is 1 when `p | a`, since the
/// sequence is then identically zero.
pub fn power_period(a: u64, p: u64) -> Result<u64, ArithError> {
    if a % p == 0 {
        if !is_prime_small(p) {
            return Err(ArithError::NotPrime(p));
        }
        return Ok(1);
    }
    mult_order(a, p)
}

/// `true` if `r` is a square modulo `m`, including `r ≡ 0`.
pub fn is_square_residue(r: u64, m: u64) -> bool {
    let r = r % m;
    (0..m).any(|x| mul_mod(x, x, m) == r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&big(0)), big(0));
        assert_eq!(isqrt(&big(15)), big(3));
        assert_eq!(isqrt(&big(16)), big(4));
        assert_eq!(isqrt(&big(61_999_876)), big(7874));
        assert_eq!(7874u64 * 7874, 61_999_876);
    }

    #[test]
    fn isqrt_large_boundaries() {
        let r = (BigUint::one() << 300u32) + big(12345);
        let sq = &r * &r;
        assert_eq!(isqrt(&sq), r);
        assert_eq!(isqrt(&(&sq - 1u32)), &r - 1u32);
        assert_eq!(isqrt(&(&sq + &r + &r)), r);
        assert_eq!(isqrt_u64(u64::MAX), 4_294_967_295);
    }

    #[test]
    fn perfect_square_examples() {
        assert_eq!(is_perfect_square(&big(196)), Some(big(14)));
        assert_eq!(is_perfect_square(&big(14161)), Some(big(119)));
        // (2^2 - 2)(5^2 - 2) = 46 lies strictly between 36 and 49
        assert_eq!(is_perfect_square(&big(46)), None);
        assert_eq!(is_perfect_square(&big(0)), Some(big(0)));
        assert_eq!(is_perfect_square(&big(1)), Some(big(1)));
    }

    #[test]
    fn prefilter_accepts_every_square_class() {
        for r in 0..PREFILTER_MODULUS.min(200_000) {
            let sq = mul_mod(r, r, PREFILTER_MODULUS);
            assert!(passes_square_prefilter(sq));
        }
    }

    #[test]
    fn prefilter_rejects_most_non_squares() {
        let rejected = (0..PREFILTER_MODULUS)
            .filter(|&r| !passes_square_prefilter(r))
            .count() as f64;
        assert!(rejected / PREFILTER_MODULUS as f64 > 0.99);
    }

    #[test]
    fn v2_examples() {
        assert_eq!(v2(&8i64), Ok(Valuation(3)));
        assert_eq!(v2(&12i64), Ok(Valuation(2)));
        assert_eq!(v2(&14i64), Ok(Valuation(1)));
        assert_eq!(v2(&BigInt::from(-96)), Ok(Valuation(5)));
        assert_eq!(v2(&0i64), Err(ArithError::ZeroValuation));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(&3i64, &5), Ok(-1));
        assert_eq!(jacobi(&4i64, &5), Ok(1));
        assert_eq!(jacobi(&10i64, &5), Ok(0));
        assert_eq!(jacobi(&-1i64, &5), Ok(1));
        assert_eq!(jacobi(&-1i64, &7), Ok(-1));
        assert_eq!(jacobi(&2i64, &15), Ok(1));
        assert!(jacobi(&3i64, &4).is_err());
        assert!(jacobi(&3i64, &1).is_err());
        assert_eq!(jacobi(&BigInt::from(-3), &BigInt::from(7)), Ok(1));
        assert_eq!(jacobi(&BigInt::from(-2), &BigInt::from(7)), Ok(-1));
    }

    #[test]
    fn mult_order_examples() {
        assert_eq!(mult_order(2, 5), Ok(4));
        assert_eq!(mult_order(1, 7), Ok(1));
        assert_eq!(mult_order(3, 13), Ok(3));
        assert_eq!(mult_order(10, 5), Err(ArithError::NotInvertible { a: 10, p: 5 }));
        assert_eq!(mult_order(2, 9), Err(ArithError::NotPrime(9)));
        assert_eq!(power_period(45, 5), Ok(1));
    }
}
