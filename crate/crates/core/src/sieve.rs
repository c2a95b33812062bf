//! Non-existence certificates for `(a^n - 2^m)(b^n - 2^m) = x²`.
//!
//! Two independent mechanisms:
//!
//! * [`classify_exclusion`] applies closed-form theorem rules keyed on the
//!   parities, 2-adic valuations and small residues of `a`, `b`, `m`, `n`.
//! * [`qr_excluded_classes`] fixes `a`, `b`, `m` and a prime `p`, and lists
//!   the classes of `n` modulo the period of `a^n, b^n mod p` on which the
//!   product is a quadratic non-residue mod `p`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, is_prime_small, pow_mod, split_two_power};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("combined modulus {modulus} exceeds the cap {cap}")]
    CapExceeded { modulus: u64, cap: u64 },
    #[error("invalid instance: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ExclusionRule {
    #[serde(rename = "T9_I")]
    T9I,
    #[serde(rename = "T9_II")]
    T9II,
    #[serde(rename = "T9_III")]
    T9III,
    #[serde(rename = "T9_IV")]
    T9IV,
    #[serde(rename = "T11")]
    T11,
    #[serde(rename = "T12")]
    T12,
    #[serde(rename = "T13_I")]
    T13I,
    #[serde(rename = "T13_II")]
    T13II,
    #[serde(rename = "T7")]
    T7,
    #[serde(rename = "COR_C14")]
    CorC14,
    #[serde(rename = "COR_MOD6")]
    CorMod6,
    #[serde(rename = "NONE")]
    None,
}

impl ExclusionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::T9I => "T9_I",
            Self::T9II => "T9_II",
            Self::T9III => "T9_III",
            Self::T9IV => "T9_IV",
            Self::T11 => "T11",
            Self::T12 => "T12",
            Self::T13I => "T13_I",
            Self::T13II => "T13_II",
            Self::T7 => "T7",
            Self::CorC14 => "COR_C14",
            Self::CorMod6 => "COR_MOD6",
            Self::None => "NONE",
        }
    }
}

impl fmt::Display for ExclusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of [`classify_exclusion`]. `excluded` is true exactly when a
/// rule other than [`ExclusionRule::None`] fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusionVerdict {
    excluded: bool,
    rule: ExclusionRule,
    detail: String,
}

impl ExclusionVerdict {
    fn none() -> Self {
        Self { excluded: false, rule: ExclusionRule::None, detail: String::new() }
    }

    fn fired(rule: ExclusionRule, detail: String) -> Self {
        debug_assert_ne!(rule, ExclusionRule::None);
        Self { excluded: true, rule, detail }
    }

    pub fn excluded(&self) -> bool {
        self.excluded
    }

    pub fn rule(&self) -> ExclusionRule {
        self.rule
    }

    pub fn detail(&self) -> &str {
        &self.detail
    }
}

#[derive(Clone, Copy)]
struct Cell {
    a: u64,
    b: u64,
    m: u64,
    n: u64,
}

type RuleFn = fn(Cell) -> bool;

fn even(x: u64) -> bool {
    x % 2 == 0
}

fn two_adic(x: u64) -> String {
    let (t, r) = split_two_power(x);
    format!("{x} = 2^{t} * {r}")
}

/// `a = 2^t r` even, `b` odd. Returns `t` when the shape matches.
fn t9_shape(c: Cell) -> Option<u32> {
    (even(c.a) && !even(c.b)).then(|| split_two_power(c.a).0)
}

fn t9_i(c: Cell) -> bool {
    t9_shape(c).is_some() && !even(c.m)
}

fn t9_ii(c: Cell) -> bool {
    t9_shape(c).is_some() && even(c.n) && even(c.m)
}

fn t9_iii(c: Cell) -> bool {
    let Some(t) = t9_shape(c) else { return false };
    let gap = c.n - c.m;
    !even(c.n) && even(c.m) && c.b % 4 == 1 && (gap > 1 || (gap == 1 && t > 1))
}

fn t9_iv(c: Cell) -> bool {
    let Some(t) = t9_shape(c) else { return false };
    !even(c.n) && even(c.m) && c.n * t as u64 == c.m + 1 && c.b % 4 == 3
}

fn t13_shape(c: Cell) -> bool {
    c.a % 3 == 2 && c.b % 3 == 0
}

fn t13_i(c: Cell) -> bool {
    t13_shape(c) && even(c.m) != even(c.n)
}

fn t13_ii(c: Cell) -> bool {
    t13_shape(c) && even(c.n) && even(c.m) && even(c.a) && even(c.b)
}

fn t11(c: Cell) -> bool {
    even(c.a) && even(c.b) && even(c.n) && c.a.trailing_zeros() != c.b.trailing_zeros()
}

fn t12(c: Cell) -> bool {
    if !(even(c.a) && even(c.b)) || even(c.n) {
        return false;
    }
    let (t, r) = split_two_power(c.a);
    let (l, s) = split_two_power(c.b);
    r == s && t != l && (t + l) % 2 == 0
}

fn cor_c14(c: Cell) -> bool {
    if !even(c.a) || c.b <= c.a || c.b % c.a != 0 {
        return false;
    }
    let ratio = c.b / c.a;
    ratio.is_power_of_two() && ratio.trailing_zeros() % 2 == 0
}

fn cor_mod6(c: Cell) -> bool {
    c.a % 6 == 2 && c.b % 6 == 3
}

fn t7(c: Cell) -> bool {
    c.m == 1 && c.a.gcd(&c.b) == 1 && even(c.n)
}

fn describe(rule: ExclusionRule, c: Cell) -> String {
    let t = split_two_power(c.a).0;
    let body = match rule {
        ExclusionRule::T9I => format!("{}, t = {t}, b odd, m odd", two_adic(c.a)),
        ExclusionRule::T9II => format!("{}, t = {t}, b odd, n and m even", two_adic(c.a)),
        ExclusionRule::T9III => format!(
            "{}, t = {t}, b = 1 mod 4, n odd, m even, n - m = {}",
            two_adic(c.a),
            c.n - c.m
        ),
        ExclusionRule::T9IV => {
            format!("{}, t = {t}, b = 3 mod 4, n odd, m even, nt - m = 1", two_adic(c.a))
        }
        ExclusionRule::T13I => "a = 2 mod 3, 3 | b, m and n of opposite parity".into(),
        ExclusionRule::T13II => "a = 2 mod 3, 3 | b, a and b even, n and m even".into(),
        ExclusionRule::T11 => format!("{}, {}, t != l, n even", two_adic(c.a), two_adic(c.b)),
        ExclusionRule::T12 => format!(
            "{}, {}, common odd part, t = l mod 2, n odd",
            two_adic(c.a),
            two_adic(c.b)
        ),
        ExclusionRule::CorC14 => {
            format!("b = 2^{} a, a even, exponent even", (c.b / c.a).trailing_zeros())
        }
        ExclusionRule::CorMod6 => "a = 2 mod 6, b = 3 mod 6".into(),
        ExclusionRule::T7 => "gcd(a, b) = 1, m = 1, n even".into(),
        ExclusionRule::None => String::new(),
    };
    format!("(a, b) = ({}, {}): {body}", c.a, c.b)
}

/// Fixed evaluation order of [`classify_exclusion`].
pub const RULE_ORDER: [ExclusionRule; 11] = [
    ExclusionRule::T9I,
    ExclusionRule::T9II,
    ExclusionRule::T9III,
    ExclusionRule::T9IV,
    ExclusionRule::T13I,
    ExclusionRule::T13II,
    ExclusionRule::T11,
    ExclusionRule::T12,
    ExclusionRule::CorC14,
    ExclusionRule::CorMod6,
    ExclusionRule::T7,
];

fn rule_fn(rule: ExclusionRule) -> RuleFn {
    match rule {
        ExclusionRule::T9I => t9_i,
        ExclusionRule::T9II => t9_ii,
        ExclusionRule::T9III => t9_iii,
        ExclusionRule::T9IV => t9_iv,
        ExclusionRule::T13I => t13_i,
        ExclusionRule::T13II => t13_ii,
        ExclusionRule::T11 => t11,
        ExclusionRule::T12 => t12,
        ExclusionRule::CorC14 => cor_c14,
        ExclusionRule::CorMod6 => cor_mod6,
        ExclusionRule::T7 => t7,
        ExclusionRule::None => |_| false,
    }
}

fn check_cell(a: u64, b: u64, m: u64, n: u64) -> Result<Cell, SieveError> {
    if a < 2 || b < 2 {
        return Err(SieveError::Precondition(format!("a, b must be >= 2 (a = {a}, b = {b})")));
    }
    if a == b {
        return Err(SieveError::Precondition(format!("a and b must differ (both {a})")));
    }
    if m == 0 || m >= n {
        return Err(SieveError::Precondition(format!("need 0 < m < n (m = {m}, n = {n})")));
    }
    Ok(Cell { a, b, m, n })
}

/// The orientation of `cell` under which `rule` fires, if any.
fn evaluate(rule: ExclusionRule, cell: Cell) -> Option<Cell> {
    let f = rule_fn(rule);
    let swapped = Cell { a: cell.b, b: cell.a, ..cell };
    [cell, swapped].into_iter().find(|&c| f(c))
}

/// First rule in [`RULE_ORDER`] that rules out solutions at `(a, b, m, n)`.
/// Every rule is tried with `a` and `b` in both roles.
pub fn classify_exclusion(a: u64, b: u64, m: u64, n: u64) -> Result<ExclusionVerdict, SieveError> {
    let cell = check_cell(a, b, m, n)?;
    Ok(RULE_ORDER
        .iter()
        .find_map(|&rule| evaluate(rule, cell).map(|c| ExclusionVerdict::fired(rule, describe(rule, c))))
        .unwrap_or_else(ExclusionVerdict::none))
}

/// Same decision as [`classify_exclusion`] without building the verdict;
/// for hot loops.
pub fn is_excluded(a: u64, b: u64, m: u64, n: u64) -> Result<bool, SieveError> {
    let cell = check_cell(a, b, m, n)?;
    Ok(RULE_ORDER.iter().any(|&rule| evaluate(rule, cell).is_some()))
}

/// Every rule that applies at `(a, b, m, n)`, in [`RULE_ORDER`].
pub fn applicable_rules(a: u64, b: u64, m: u64, n: u64) -> Result<Vec<ExclusionRule>, SieveError> {
    let cell = check_cell(a, b, m, n)?;
    Ok(RULE_ORDER.into_iter().filter(|&r| evaluate(r, cell).is_some()).collect())
}

/// A set of residue classes modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueClassSet {
    #[serde(with = "crate::decimal")]
    pub modulus: u64,
    #[serde(serialize_with = "crate::decimal::seq")]
    pub residues: BTreeSet<u64>,
}

impl ResidueClassSet {
    pub fn new(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let residues = residues.into_iter().map(|r| r % modulus).collect();
        Self { modulus, residues }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.residues.contains(&(n % self.modulus))
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

fn check_odd_prime(p: u64) -> Result<(), SieveError> {
    if p % 2 == 0 || !is_prime_small(p) {
        return Err(SieveError::NotOddPrime(p));
    }
    Ok(())
}

/// `(a^n - 2^m)(b^n - 2^m) mod p` for `n ≥ 1`.
pub fn product_mod(a: u64, b: u64, m: u64, n: u64, p: u64) -> u64 {
    let t = pow_mod(2, m, p);
    let fa = (pow_mod(a, n, p) + p - t) % p;
    let fb = (pow_mod(b, n, p) + p - t) % p;
    arith::mul_mod(fa, fb, p)
}

/// Classes `c (mod L)` of the exponent on which the product is a quadratic
/// non-residue modulo the odd prime `p`. `L` is the lcm of the periods of
/// `a^n` and `b^n` modulo `p`. Classes where the product vanishes mod `p`
/// are kept, because zero is a square.
pub fn qr_excluded_classes(a: u64, b: u64, m: u64, p: u64) -> Result<ResidueClassSet, SieveError> {
    check_odd_prime(p)?;
    let period = |x| arith::power_period(x, p).map_err(|_| SieveError::NotOddPrime(p));
    let modulus = period(a)?.lcm(&period(b)?);
    let p_signed = p as i64;
    let excluded = (0..modulus).filter(|&c| {
        // n = 0 is outside the domain; its class is represented by n = L
        let n = if c == 0 { modulus } else { c };
        let value = product_mod(a, b, m, n, p) as i64;
        arith::jacobi(&value, &p_signed).expect("p is an odd prime") == -1
    });
    Ok(ResidueClassSet::new(modulus, excluded))
}

/// Exponent classes modulo the lcm of the per-prime moduli that survive
/// every prime in `primes`.
pub fn residual_classes(
    a: u64,
    b: u64,
    m: u64,
    primes: &[u64],
    cap: u64,
) -> Result<ResidueClassSet, SieveError> {
    let per_prime = primes
        .iter()
        .map(|&p| qr_excluded_classes(a, b, m, p))
        .collect::<Result<Vec<_>, _>>()?;
    let modulus = per_prime.iter().fold(1u64, |acc, s| acc.lcm(&s.modulus));
    if modulus > cap {
        return Err(SieveError::CapExceeded { modulus, cap });
    }
    let surviving = (0..modulus).filter(|&c| per_prime.iter().all(|s| !s.contains(c)));
    Ok(ResidueClassSet::new(modulus, surviving))
}

/// Per-prime exclusion tables for a fixed `(a, b, m)`, for fast lookup of
/// many exponents during a sweep.
#[derive(Debug, Clone)]
pub struct ExponentSieve {
    tables: Vec<(u64, Vec<bool>)>,
}

impl ExponentSieve {
    pub fn new(a: u64, b: u64, m: u64, primes: &[u64]) -> Result<Self, SieveError> {
        let tables = primes
            .iter()
            .map(|&p| {
                let set = qr_excluded_classes(a, b, m, p)?;
                let table = (0..set.modulus).map(|c| set.residues.contains(&c)).collect();
                Ok((set.modulus, table))
            })
            .collect::<Result<_, SieveError>>()?;
        Ok(Self { tables })
    }

    /// True if some prime certifies that exponent `n` gives no square.
    #[inline]
    pub fn excludes(&self, n: u64) -> bool {
        self.tables.iter().any(|(l, t)| t[(n % l) as usize])
    }
}
