//! Lucas sequences, Pell equations, non-existence sieves and an exhaustive
//! search engine for the exponential Diophantine equation
//!
//! ```text
//! (a^n - 2^m)(b^n - 2^m) = x^2,   0 < m < n.
//! ```
//!
//! Sequence code is generic over the integer type through [`Integral`], so
//! the same routines run on `i64`/`i128` for quick work and on [`Int`]
//! (arbitrary precision) wherever values may grow without bound.
//!
//! ```
//! use pellsieve::{lucas::lucas_pair, search::check_instance, BigLucasParams};
//!
//! let pell = BigLucasParams::new(2.into(), 1.into()).unwrap();
//! let pair = lucas_pair(&pell, 5);
//! assert_eq!((pair.u, pair.v), (29.into(), 82.into()));
//!
//! let x = check_instance(2, 10, 1, 6).unwrap().unwrap();
//! assert_eq!(x, 7874u32.into());
//! ```

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub mod arith;
pub mod lucas;
pub mod pell;
pub mod search;
pub mod sieve;

/// Signed integer scalar accepted by the generic sequence and symbol code.
pub trait Integral:
    Integer + Signed + Clone + FromPrimitive + ToPrimitive + Debug + Display
{
}

impl<T> Integral for T where
    T: Integer + Signed + Clone + FromPrimitive + ToPrimitive + Debug + Display
{
}

/// Serde helpers writing integers as decimal strings, so no consumer ever
/// meets a precision ceiling.
pub(crate) mod decimal {
    use std::fmt::Display;

    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn seq<'a, T, I, S>(items: I, s: S) -> Result<S::Ok, S::Error>
    where
        T: Display + 'a,
        I: IntoIterator<Item = &'a T>,
        S: Serializer,
    {
        let mut out = s.serialize_seq(None)?;
        for item in items {
            out.serialize_element(&item.to_string())?;
        }
        out.end()
    }
}

/// Arbitrary-precision nonnegative integer.
pub type Natural = num_bigint::BigUint;
/// Arbitrary-precision signed integer.
pub type Int = num_bigint::BigInt;

pub type BigLucasParams = lucas::LucasParams<Int>;
pub type BigLucasPair = lucas::LucasPair<Int>;
pub type SmallLucasParams = lucas::LucasParams<i64>;

pub use arith::{is_perfect_square, isqrt, jacobi, mult_order, v2, ArithError, Valuation};
pub use lucas::{LucasError, LucasPair, LucasParams};
pub use pell::{FundamentalPair, PellError, PellSolution, Role};
pub use search::{MPolicy, SearchError, SearchHit, SearchQuery};
pub use sieve::{ExclusionRule, ExclusionVerdict, ResidueClassSet, SieveError};
