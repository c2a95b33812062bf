//! Lucas sequences of the first and second kind.
//!
//! The recurrences are written with the sign convention
//!
//! ```text
//! U_{n+1} = P U_n + Q U_{n-1},   U_0 = 0, U_1 = 1
//! V_{n+1} = P V_n + Q V_{n-1},   V_0 = 2, V_1 = P
//! ```
//!
//! so `(P, Q) = (2, 1)` gives the Pell / Pell-Lucas numbers and
//! `(1, 1)` the Fibonacci / Lucas numbers. The characteristic roots have
//! product `-Q`, which shows up as `(-Q)^n` in the doubling formulas.

use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, mul_mod, Valuation};
use crate::Integral;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LucasError {
    #[error("invalid Lucas parameters (P, Q) = ({p}, {q}): {reason}")]
    InvalidParams { p: String, q: String, reason: &'static str },
    #[error("P must be a nonzero even integer, got {0}")]
    OddP(String),
    #[error("divisibility criterion is only tabulated for q = 3 or 5, got {0}")]
    UnsupportedDivisor(u64),
    #[error("requires a >= 2 and P = 1 (mod a); got a = {a}, P = {p}")]
    DiffPrecondition { a: String, p: String },
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("modulus must be at least 2, got {0}")]
    SmallModulus(u64),
}

/// Parameter pair `(P, Q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LucasParams<T> {
    p: T,
    q: T,
}

impl<T: Integral> LucasParams<T> {
    /// Validates `P ≠ 0 or Q ≠ 0`, `gcd(P, Q) = 1` and `P² + 4Q > 0`.
    pub fn new(p: T, q: T) -> Result<Self, LucasError> {
        let invalid = |reason| LucasError::InvalidParams {
            p: format!("{p:?}"),
            q: format!("{q:?}"),
            reason,
        };
        if p.is_zero() && q.is_zero() {
            return Err(invalid("P and Q are both zero"));
        }
        if !p.gcd(&q).is_one() {
            return Err(invalid("gcd(P, Q) != 1"));
        }
        let four = T::from_u8(4).unwrap();
        if (p.clone() * p.clone() + four * q.clone()) <= T::zero() {
            return Err(invalid("P^2 + 4Q <= 0"));
        }
        Ok(Self { p, q })
    }

    /// `(P, -1)`, the family used by nearly every lemma about Pell equations.
    pub fn with_q_minus_one(p: T) -> Result<Self, LucasError> {
        Self::new(p, -T::one())
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    /// `P² + 4Q`
    pub fn discriminant(&self) -> T {
        self.p.clone() * self.p.clone() + T::from_u8(4).unwrap() * self.q.clone()
    }
}

/// The terms `U_n` and `V_n` at one index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "T: std::fmt::Display")]
pub struct LucasPair<T> {
    #[serde(with = "crate::decimal")]
    pub n: u64,
    #[serde(with = "crate::decimal")]
    pub u: T,
    #[serde(with = "crate::decimal")]
    pub v: T,
}

/// `(U_n, V_n)` by fast doubling.
///
/// Doubling uses `U_{2k} = U_k V_k` and `V_{2k} = V_k² - 2(-Q)^k`; the odd
/// step uses `2U_{k+1} = P U_k + V_k` and `2V_{k+1} = D U_k + P V_k` with
/// `D = P² + 4Q`. Both halvings are exact.
pub fn lucas_pair<T: Integral>(params: &LucasParams<T>, n: u64) -> LucasPair<T> {
    let two = T::one() + T::one();
    let p = params.p.clone();
    let r = -params.q.clone();
    let d = params.discriminant();

    let mut u = T::zero();
    let mut v = two.clone();
    let mut rk = T::one();
    for bit in (0..u64::BITS - n.leading_zeros()).rev() {
        u = u * v.clone();
        v = v.clone() * v - two.clone() * rk.clone();
        rk = rk.clone() * rk;
        if (n >> bit) & 1 == 1 {
            let next_u = (p.clone() * u.clone() + v.clone()) / two.clone();
            let next_v = (d.clone() * u + p.clone() * v) / two.clone();
            u = next_u;
            v = next_v;
            rk = rk * r.clone();
        }
    }
    LucasPair { n, u, v }
}

pub fn lucas_u<T: Integral>(params: &LucasParams<T>, n: u64) -> T {
    lucas_pair(params, n).u
}

pub fn lucas_v<T: Integral>(params: &LucasParams<T>, n: u64) -> T {
    lucas_pair(params, n).v
}

/// Successive pairs `(U_0, V_0), (U_1, V_1), …` by the defining recurrence.
#[derive(Debug, Clone)]
pub struct LucasIter<T> {
    p: T,
    q: T,
    n: u64,
    u: (T, T),
    v: (T, T),
}

impl<T: Integral> LucasIter<T> {
    pub fn new(params: &LucasParams<T>) -> Self {
        let p = params.p.clone();
        Self {
            q: params.q.clone(),
            n: 0,
            u: (T::zero(), T::one()),
            v: (T::one() + T::one(), p.clone()),
            p,
        }
    }
}

impl<T: Integral> Iterator for LucasIter<T> {
    type Item = LucasPair<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let step = |(a, b): &(T, T)| self.p.clone() * b.clone() + self.q.clone() * a.clone();
        let (nu, nv) = (step(&self.u), step(&self.v));
        let u = std::mem::replace(&mut self.u.0, std::mem::replace(&mut self.u.1, nu));
        let v = std::mem::replace(&mut self.v.0, std::mem::replace(&mut self.v.1, nv));
        let out = LucasPair { n: self.n, u, v };
        self.n += 1;
        Some(out)
    }
}

/// 2-adic valuation of `V_n(P, -1)` for even `P`: `v2(P)` when `n` is odd,
/// `1` when `n` is even.
pub fn v2_of_v<T: Integral>(p: &T, n: u64) -> Result<Valuation, LucasError> {
    if p.is_odd() || p.is_zero() {
        return Err(LucasError::OddP(format!("{p:?}")));
    }
    if n % 2 == 1 {
        Ok(arith::v2(p).expect("P is nonzero"))
    } else {
        Ok(Valuation(1))
    }
}

/// Whether `q | U_n(P, -1)` for `q ∈ {3, 5}`, decided from `P mod q` and `n`
/// alone.
///
/// Mod 3: `3 | P` needs `2 | n`, otherwise `3 | n`. Mod 5: `5 | P` needs
/// `2 | n`, `P² ≡ 1` needs `3 | n`, `P² ≡ -1` needs `5 | n`.
pub fn divides_criterion<T: Integral>(p: &T, n: u64, q: u64) -> Result<bool, LucasError> {
    let modulus = T::from_u64(q).unwrap();
    let residue = p.mod_floor(&modulus).to_u64().unwrap();
    match q {
        3 => Ok(if residue == 0 { n % 2 == 0 } else { n % 3 == 0 }),
        5 => {
            let sq = residue * residue % 5;
            Ok(match sq {
                0 => n % 2 == 0,
                1 => n % 3 == 0,
                _ => n % 5 == 0,
            })
        }
        other => Err(LucasError::UnsupportedDivisor(other)),
    }
}

/// Whether `a | U_n(P, -1) - U_{n-1}(P, -1)` given `P ≡ 1 (mod a)`; this
/// holds exactly when `n ≡ 2` or `5 (mod 6)`.
pub fn diff_divides<T: Integral>(a: &T, p: &T, n: u64) -> Result<bool, LucasError> {
    let two = T::one() + T::one();
    if *a < two || !p.mod_floor(a).is_one() {
        return Err(LucasError::DiffPrecondition {
            a: format!("{a:?}"),
            p: format!("{p:?}"),
        });
    }
    if n == 0 {
        return Err(LucasError::ZeroIndex);
    }
    Ok(matches!(n % 6, 2 | 5))
}

/// `(U_n mod m, V_n mod m)` by modular fast doubling on the window
/// `(U_k, U_{k+1})`; no division by two is needed, so even moduli work.
pub fn lucas_mod<T: Integral>(
    params: &LucasParams<T>,
    n: u64,
    modulus: u64,
) -> Result<(u64, u64), LucasError> {
    if modulus < 2 {
        return Err(LucasError::SmallModulus(modulus));
    }
    let m = modulus;
    let big_m = T::from_u64(m).unwrap();
    let p = params.p.mod_floor(&big_m).to_u64().unwrap();
    // r = -Q mod m
    let r = (-params.q.clone()).mod_floor(&big_m).to_u64().unwrap();
    let sub = |a: u64, b: u64| (a + m - b) % m;

    let (mut uk, mut uk1) = (0u64, 1 % m);
    for bit in (0..u64::BITS - n.leading_zeros()).rev() {
        // U_{2k} = U_k (2 U_{k+1} - P U_k), U_{2k+1} = U_{k+1}^2 - (-Q) U_k^2
        let u2k = mul_mod(uk, sub(mul_mod(2, uk1, m), mul_mod(p, uk, m)), m);
        let u2k1 = sub(mul_mod(uk1, uk1, m), mul_mod(r, mul_mod(uk, uk, m), m));
        if (n >> bit) & 1 == 1 {
            let u2k2 = sub(mul_mod(p, u2k1, m), mul_mod(r, u2k, m));
            uk = u2k1;
            uk1 = u2k2;
        } else {
            uk = u2k;
            uk1 = u2k1;
        }
    }
    // V_n = 2 U_{n+1} - P U_n
    let v = sub(mul_mod(2, uk1, m), mul_mod(p, uk, m));
    Ok((uk, v))
}

/// `U_n(P, -1) - U_{n-1}(P, -1)` for `n ≥ 1`.
pub fn u_difference<T: Integral>(params: &LucasParams<T>, n: u64) -> Result<T, LucasError> {
    if n == 0 {
        return Err(LucasError::ZeroIndex);
    }
    Ok(lucas_u(params, n) - lucas_u(params, n - 1))
}
