//! Pell equations `x² - d y² = N`.
//!
//! Fundamental solutions come from the continued fraction of `√d`; the
//! solution families are produced in closed form from Lucas sequences
//! `U_n(2x₁, -1)`, `V_n(2x₁, -1)` and cross-checked against plain products
//! of quadratic units.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{is_perfect_square, isqrt_u64};
use crate::lucas::{lucas_pair, LucasIter, LucasParams};
use crate::{Int, Natural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PellError {
    #[error("d = {0} is a perfect square")]
    PerfectSquare(u64),
    #[error("x^2 - {0} y^2 = 2 has no integer solutions")]
    InsolvableN2(u64),
    #[error("{a} x^2 - {b} y^2 = 1 has no solution with x <= {bound}")]
    InsolvableRatio { a: u64, b: u64, bound: String },
    #[error("({first}, {second}) is not a solution of x^2 - {d} y^2 = {n}")]
    NotASolution { first: String, second: String, d: u64, n: i64 },
    #[error("expected a fundamental pair of role {expected:?}, got {got:?}")]
    WrongRole { expected: Role, got: Role },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("coefficient b must be positive")]
    ZeroCoefficient,
}

/// An equation `x² - d y² = N` with `d` a non-square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PellInstance {
    d: u64,
    n: Int,
}

impl PellInstance {
    pub fn new(d: u64, n: impl Into<Int>) -> Result<Self, PellError> {
        check_nonsquare(d)?;
        Ok(Self { d, n: n.into() })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn n(&self) -> &Int {
        &self.n
    }

    pub fn is_solution(&self, s: &PellSolution) -> bool {
        let x = BigInt::from(s.x.clone());
        let y = BigInt::from(s.y.clone());
        &x * &x - BigInt::from(self.d) * &y * &y == self.n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PellSolution {
    #[serde(with = "crate::decimal")]
    pub x: Natural,
    #[serde(with = "crate::decimal")]
    pub y: Natural,
}

impl PellSolution {
    pub fn new(x: impl Into<Natural>, y: impl Into<Natural>) -> Self {
        Self { x: x.into(), y: y.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    /// `x² - d y² = 1`
    N1,
    /// `x² - d y² = 2`
    N2,
    /// `a x² - b y² = 1`
    Ratio,
}

/// Least positive solution of one of the equations named by [`Role`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FundamentalPair {
    pub role: Role,
    #[serde(with = "crate::decimal")]
    pub first: Natural,
    #[serde(with = "crate::decimal")]
    pub second: Natural,
}

impl FundamentalPair {
    pub fn as_solution(&self) -> PellSolution {
        PellSolution::new(self.first.clone(), self.second.clone())
    }
}

/// `√d = [a₀; (period)]`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    #[serde(with = "crate::decimal")]
    pub a0: u64,
    #[serde(serialize_with = "crate::decimal::seq")]
    pub period: Vec<u64>,
}

fn check_nonsquare(d: u64) -> Result<(), PellError> {
    let r = isqrt_u64(d);
    if r * r == d {
        Err(PellError::PerfectSquare(d))
    } else {
        Ok(())
    }
}

/// Continued fraction of `√d`. The period ends at the first partial
/// quotient equal to `2a₀`, which is exact for quadratic surds.
pub fn cf_sqrt(d: u64) -> Result<ContinuedFraction, PellError> {
    check_nonsquare(d)?;
    let a0 = isqrt_u64(d);
    let (mut m, mut q, mut a) = (0u64, 1u64, a0);
    let mut period = Vec::new();
    loop {
        m = q * a - m;
        q = (d - m * m) / q;
        a = (a0 + m) / q;
        period.push(a);
        if a == 2 * a0 {
            break;
        }
    }
    Ok(ContinuedFraction { a0, period })
}

/// Convergents `p_i / q_i` of a periodic continued fraction, `i = 0, 1, …`.
pub struct Convergents<'a> {
    cf: &'a ContinuedFraction,
    index: usize,
    prev: (BigUint, BigUint),
    cur: (BigUint, BigUint),
}

impl<'a> Convergents<'a> {
    pub fn new(cf: &'a ContinuedFraction) -> Self {
        Self {
            cf,
            index: 0,
            prev: (BigUint::zero(), BigUint::one()),
            cur: (BigUint::one(), BigUint::zero()),
        }
    }
}

impl Iterator for Convergents<'_> {
    type Item = (BigUint, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        let a = if self.index == 0 {
            self.cf.a0
        } else {
            self.cf.period[(self.index - 1) % self.cf.period.len()]
        };
        let p = &self.cur.0 * a + &self.prev.0;
        let q = &self.cur.1 * a + &self.prev.1;
        self.prev = std::mem::replace(&mut self.cur, (p.clone(), q.clone()));
        self.index += 1;
        Some((p, q))
    }
}

/// Index of the convergent holding the fundamental solution of `x² - d y² = 1`.
fn n1_convergent_index(cf: &ContinuedFraction) -> usize {
    let r = cf.period.len();
    if r % 2 == 0 {
        r - 1
    } else {
        2 * r - 1
    }
}

/// Fundamental solution `(x₁, y₁)` of `x² - d y² = 1`.
pub fn fundamental_n1(d: u64) -> Result<FundamentalPair, PellError> {
    let cf = cf_sqrt(d)?;
    let (x, y) = Convergents::new(&cf)
        .nth(n1_convergent_index(&cf))
        .expect("convergents never end");
    Ok(FundamentalPair { role: Role::N1, first: x, second: y })
}

/// Fundamental solution `(k₁, t₁)` of `x² - d y² = 2`, or `None` when the
/// equation has no solutions.
///
/// Any solution is primitive, and for `d ≥ 5` we have `2 < √d`, so the
/// fundamental one is a convergent of `√d` with `t₁ < y₁`. For `d ∈ {2, 3}`
/// the tiny range `1 ≤ v ≤ y₁` is scanned directly.
pub fn fundamental_n2(d: u64) -> Result<Option<FundamentalPair>, PellError> {
    let cf = cf_sqrt(d)?;
    let last = n1_convergent_index(&cf);
    let found = if d < 5 {
        let y1 = Convergents::new(&cf).nth(last).unwrap().1;
        let y1 = y1.to_u64().expect("small d has a small fundamental unit");
        (1..=y1).find_map(|v| {
            let t = BigUint::from(d) * v * v + 2u32;
            is_perfect_square(&t).map(|k| (k, BigUint::from(v)))
        })
    } else {
        let two = BigInt::from(2);
        Convergents::new(&cf).take(last + 1).find(|(p, q)| {
            let (p, q) = (BigInt::from(p.clone()), BigInt::from(q.clone()));
            &p * &p - BigInt::from(d) * &q * &q == two
        })
    };
    Ok(found.map(|(k, t)| FundamentalPair { role: Role::N2, first: k, second: t }))
}

/// Squares `k₁ + t₁√d` and halves it: `((k₁² + d t₁²)/2, k₁ t₁)`, which is
/// the same as `(k₁² - 1, k₁ t₁)`.
pub fn n1_from_n2(pair: &FundamentalPair, d: u64) -> Result<FundamentalPair, PellError> {
    if pair.role != Role::N2 {
        return Err(PellError::WrongRole { expected: Role::N2, got: pair.role });
    }
    let instance = PellInstance::new(d, 2)?;
    if !instance.is_solution(&pair.as_solution()) {
        return Err(PellError::NotASolution {
            first: pair.first.to_string(),
            second: pair.second.to_string(),
            d,
            n: 2,
        });
    }
    let (k, t) = (&pair.first, &pair.second);
    let x = (k * k + BigUint::from(d) * t * t) >> 1u32;
    Ok(FundamentalPair { role: Role::N1, first: x, second: k * t })
}

fn to_natural(v: BigInt) -> Natural {
    v.to_biguint().expect("closed forms stay nonnegative")
}

fn pell_lucas_params(x1: &Natural) -> LucasParams<Int> {
    LucasParams::with_q_minus_one(BigInt::from(x1.clone()) * 2)
        .expect("2x₁ ≥ 6 gives valid (P, -1)")
}

/// First `count` positive solutions of `x² - d y² = 1`:
/// `x_n = V_n(2x₁, -1)/2`, `y_n = y₁ U_n(2x₁, -1)` for `n = 1, 2, …`.
pub fn gen_n1(d: u64, count: usize) -> Result<Vec<PellSolution>, PellError> {
    let fund = fundamental_n1(d)?;
    let y1 = BigInt::from(fund.second.clone());
    let params = pell_lucas_params(&fund.first);
    Ok(LucasIter::new(&params)
        .skip(1)
        .take(count)
        .map(|pair| PellSolution {
            x: to_natural(pair.v / 2),
            y: to_natural(&y1 * pair.u),
        })
        .collect())
}

/// `(x + y√d)(u + v√d)`
pub fn compose(lhs: &PellSolution, rhs: &PellSolution, d: u64) -> PellSolution {
    PellSolution {
        x: &lhs.x * &rhs.x + BigUint::from(d) * &lhs.y * &rhs.y,
        y: &lhs.x * &rhs.y + &lhs.y * &rhs.x,
    }
}

/// Solutions of `x² - d y² = 1` as successive powers of the fundamental unit.
pub fn gen_n1_product(d: u64, count: usize) -> Result<Vec<PellSolution>, PellError> {
    let unit = fundamental_n1(d)?.as_solution();
    Ok(std::iter::successors(Some(unit.clone()), |s| Some(compose(s, &unit, d)))
        .take(count)
        .collect())
}

fn require_n2(d: u64) -> Result<FundamentalPair, PellError> {
    fundamental_n2(d)?.ok_or(PellError::InsolvableN2(d))
}

/// First `count` positive solutions of `u² - d v² = 2`, starting with the
/// fundamental `(k₁, t₁)`:
/// `(k₁(U_{n+1} - U_n), t₁(U_{n+1} + U_n))` with `U_n = U_n(2x₁, -1)`.
pub fn gen_n2(d: u64, count: usize) -> Result<Vec<PellSolution>, PellError> {
    let fund2 = require_n2(d)?;
    let fund1 = n1_from_n2(&fund2, d)?;
    let k1 = BigInt::from(fund2.first);
    let t1 = BigInt::from(fund2.second);
    let params = pell_lucas_params(&fund1.first);
    let mut seq = LucasIter::new(&params).map(|pair| pair.u);
    let mut prev = seq.next().unwrap();
    Ok(seq
        .take(count)
        .map(|next| {
            let sol = PellSolution {
                x: to_natural(&k1 * (&next - &prev)),
                y: to_natural(&t1 * (&next + &prev)),
            };
            prev = next;
            sol
        })
        .collect())
}

/// Solutions of `u² - d v² = 2` as `(k₁ + t₁√d)(x₁ + y₁√d)^n`, `n = 0, 1, …`.
pub fn gen_n2_product(d: u64, count: usize) -> Result<Vec<PellSolution>, PellError> {
    let start = require_n2(d)?.as_solution();
    let unit = fundamental_n1(d)?.as_solution();
    Ok(std::iter::successors(Some(start), |s| Some(compose(s, &unit, d)))
        .take(count)
        .collect())
}

// Hard ceiling for the minimal-solution scan of `a x² - b y² = 1`.
const RATIO_SCAN_LIMIT: u64 = 50_000_000;

/// Least positive `(u₁, v₁)` with `a u₁² - b v₁² = 1`.
///
/// Scans `u₁` up to the fundamental `x₁` of `x² - ab y² = 1` (or up to `a`
/// when `ab` is a square, where `(a u - s v)(a u + s v) = a` forces small
/// solutions), capped at a fixed limit.
pub fn fundamental_ratio(a: u64, b: u64) -> Result<FundamentalPair, PellError> {
    check_nonsquare(a)?;
    if b == 0 {
        return Err(PellError::ZeroCoefficient);
    }
    let ab = a.checked_mul(b).expect("a*b fits in u64");
    let bound = match fundamental_n1(ab) {
        Ok(f) => f.first.to_u64().unwrap_or(u64::MAX).min(RATIO_SCAN_LIMIT),
        Err(PellError::PerfectSquare(_)) => a,
        Err(e) => return Err(e),
    };
    for u in 1..=bound {
        let lhs = a as u128 * u as u128 * u as u128 - 1;
        if lhs % b as u128 != 0 {
            continue;
        }
        let vv = BigUint::from(lhs / b as u128);
        if vv.is_zero() {
            continue;
        }
        if let Some(v) = is_perfect_square(&vv) {
            return Ok(FundamentalPair { role: Role::Ratio, first: u.into(), second: v });
        }
    }
    Err(PellError::InsolvableRatio { a, b, bound: bound.to_string() })
}

/// First `count` positive solutions of `a x² - b y² = 1`:
/// `(u₁(U_{m+1} - U_m), v₁(U_{m+1} + U_m))` for `m = 0, 1, …`, where
/// `U_m = U_m(4a u₁² - 2, -1)`.
pub fn gen_ratio(a: u64, b: u64, count: usize) -> Result<Vec<PellSolution>, PellError> {
    let fund = fundamental_ratio(a, b)?;
    let u1 = BigInt::from(fund.first.clone());
    let v1 = BigInt::from(fund.second.clone());
    let p = BigInt::from(4 * a) * &u1 * &u1 - 2;
    let params = LucasParams::with_q_minus_one(p).expect("P ≥ 6");
    let mut seq = LucasIter::new(&params).map(|pair| pair.u);
    let mut prev = seq.next().unwrap();
    Ok(seq
        .take(count)
        .map(|next| {
            let sol = PellSolution {
                x: to_natural(&u1 * (&next - &prev)),
                y: to_natural(&v1 * (&next + &prev)),
            };
            prev = next;
            sol
        })
        .collect())
}

/// First `count` nonnegative solutions of `u² - 5v² = -4^k`:
/// `(2^{k-1} L_{2m+1}, 2^{k-1} F_{2m+1})` for `m = 0, 1, …`.
pub fn solve_neg4k(k: u32, count: usize) -> Result<Vec<PellSolution>, PellError> {
    if k == 0 {
        return Err(PellError::ZeroK);
    }
    let fib = LucasParams::new(BigInt::one(), BigInt::one()).unwrap();
    let scale = BigInt::one() << (k - 1);
    Ok((0..count as u64)
        .map(|m| {
            let pair = lucas_pair(&fib, 2 * m + 1);
            PellSolution {
                x: to_natural(&scale * pair.v),
                y: to_natural(&scale * pair.u),
            }
        })
        .collect())
}
