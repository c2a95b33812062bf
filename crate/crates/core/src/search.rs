//! Exhaustive search for `(a^n - 2^m)(b^n - 2^m) = x²`, plus the small
//! exact computations that accompany the theorem-level results.
//!
//! Per `(a, b)` pair the sweep keeps `a^n` and `b^n` (and their residues
//! modulo the square-prefilter modulus) updated by one multiplication per
//! exponent step. Each cell `(m, n)` then passes through a pipeline of
//! increasingly expensive tests:
//!
//! 1. the theorem classifier ([`crate::sieve::classify_exclusion`]),
//! 2. per-prime exponent classes ([`ExponentSieve`]), in machine words,
//! 3. the residue prefilter on the product, computed from word residues,
//! 4. the big-integer product and its integer square root.
//!
//! Stages 1 and 2 are optional; turning them off never changes the result.

use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{is_perfect_square, mul_mod, passes_square_prefilter, PREFILTER_MODULUS};
use crate::lucas::{lucas_pair, LucasParams};
use crate::sieve::{is_excluded, ExponentSieve, SieveError};
use crate::{Int, Natural};

/// Primes used by default for the exponent-class sieve.
pub const DEFAULT_SIEVE_PRIMES: [u64; 5] = [5, 7, 11, 13, 31];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid instance: {0}")]
    Precondition(String),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error("conjecture probe needs odd k > 3, got {0}")]
    BadConjectureK(u64),
    #[error("{0} does not fit in a machine word")]
    TooLarge(String),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

/// Which values of `m` a sweep visits for each exponent `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MPolicy {
    Fixed(u64),
    AllBelowN,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchQuery {
    pub a_range: RangeInclusive<u64>,
    pub b_range: RangeInclusive<u64>,
    pub n_range: RangeInclusive<u64>,
    pub m_policy: MPolicy,
    pub sieve_primes: Vec<u64>,
    pub use_classifier: bool,
}

impl SearchQuery {
    /// A query with `m = 1`, the default primes and the classifier on.
    pub fn new(
        a_range: RangeInclusive<u64>,
        b_range: RangeInclusive<u64>,
        n_range: RangeInclusive<u64>,
    ) -> Self {
        Self {
            a_range,
            b_range,
            n_range,
            m_policy: MPolicy::Fixed(1),
            sieve_primes: DEFAULT_SIEVE_PRIMES.to_vec(),
            use_classifier: true,
        }
    }

    pub fn with_m(mut self, policy: MPolicy) -> Self {
        self.m_policy = policy;
        self
    }

    /// Disables both the classifier and the exponent-class sieve.
    pub fn unsieved(mut self) -> Self {
        self.sieve_primes.clear();
        self.use_classifier = false;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: String| Err(SearchError::Precondition(msg));
        if !self.a_range.is_empty() && *self.a_range.start() < 2 {
            return bad(format!("a must be >= 2, range starts at {}", self.a_range.start()));
        }
        if !self.b_range.is_empty() && *self.b_range.start() < 2 {
            return bad(format!("b must be >= 2, range starts at {}", self.b_range.start()));
        }
        if !self.n_range.is_empty() && *self.n_range.start() < 2 {
            return bad(format!("n must be >= 2, range starts at {}", self.n_range.start()));
        }
        if self.m_policy == MPolicy::Fixed(0) {
            return bad("m must be >= 1".into());
        }
        for &p in &self.sieve_primes {
            if p % 2 == 0 || !crate::arith::is_prime_small(p) {
                return Err(SieveError::NotOddPrime(p).into());
            }
        }
        Ok(())
    }

    /// All pairs `(a, b)` of the box with `a < b`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(u64, u64)> {
        self.a_range
            .clone()
            .flat_map(|a| {
                let lo = (*self.b_range.start()).max(a + 1);
                (lo..=*self.b_range.end()).map(move |b| (a, b))
            })
            .collect()
    }

    fn m_values(&self) -> Vec<u64> {
        match self.m_policy {
            MPolicy::Fixed(m) => vec![m],
            MPolicy::AllBelowN => (1..*self.n_range.end()).collect(),
        }
    }
}

/// A verified solution `(a^n - 2^m)(b^n - 2^m) = x²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SearchHit {
    #[serde(with = "crate::decimal")]
    pub a: u64,
    #[serde(with = "crate::decimal")]
    pub b: u64,
    #[serde(with = "crate::decimal")]
    pub m: u64,
    #[serde(with = "crate::decimal")]
    pub n: u64,
    #[serde(with = "crate::decimal")]
    pub x: Natural,
}

impl SearchHit {
    /// Recomputes the product from scratch and compares it with `x²`.
    pub fn verify(&self) -> bool {
        let product = product(self.a, self.b, self.m, self.n);
        product == BigInt::from(&self.x * &self.x)
    }

    fn sort_key(&self) -> (u64, u64, u64, u64) {
        (self.a, self.b, self.n, self.m)
    }
}

/// Sorts hits by `(a, b, n, m)`.
pub fn sort_hits(hits: &mut [SearchHit]) {
    hits.sort_by_key(SearchHit::sort_key);
}

fn product(a: u64, b: u64, m: u64, n: u64) -> BigInt {
    let two_m = BigInt::one() << m;
    let pa = Pow::pow(BigInt::from(a), n);
    let pb = Pow::pow(BigInt::from(b), n);
    (pa - &two_m) * (pb - &two_m)
}

/// `x` with `(a^n - 2^m)(b^n - 2^m) = x²` and `x ≥ 1`, if any.
pub fn check_instance(a: u64, b: u64, m: u64, n: u64) -> Result<Option<Natural>, SearchError> {
    if a < 2 || b < 2 || a == b || m == 0 || m >= n {
        return Err(SearchError::Precondition(format!(
            "need a, b >= 2, a != b and 0 < m < n; got (a, b, m, n) = ({a}, {b}, {m}, {n})"
        )));
    }
    let value = product(a, b, m, n);
    if !value.is_positive() {
        return Ok(None);
    }
    Ok(is_perfect_square(value.magnitude()))
}

/// How many cells each pipeline stage disposed of.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairStats {
    #[serde(with = "crate::decimal")]
    pub cells: u64,
    #[serde(with = "crate::decimal")]
    pub classified_out: u64,
    #[serde(with = "crate::decimal")]
    pub sieved_out: u64,
    #[serde(with = "crate::decimal")]
    pub prefiltered_out: u64,
    #[serde(with = "crate::decimal")]
    pub root_tested: u64,
}

impl PairStats {
    pub fn merge(&mut self, other: &PairStats) {
        self.cells += other.cells;
        self.classified_out += other.classified_out;
        self.sieved_out += other.sieved_out;
        self.prefiltered_out += other.prefiltered_out;
        self.root_tested += other.root_tested;
    }
}

#[derive(Debug, Clone)]
pub struct PairReport {
    pub a: u64,
    pub b: u64,
    pub hits: Vec<SearchHit>,
    pub stats: PairStats,
    pub elapsed: Duration,
}

/// Runs the full pipeline over one `(a, b)` pair of the query.
pub fn search_pair(query: &SearchQuery, a: u64, b: u64) -> Result<PairReport, SearchError> {
    let started = Instant::now();
    let mut stats = PairStats::default();
    let mut hits = Vec::new();
    let (n_lo, n_hi) = (*query.n_range.start(), *query.n_range.end());
    let ms = query.m_values();
    if a == b || ms.is_empty() || n_lo > n_hi {
        return Ok(PairReport { a, b, hits, stats, elapsed: started.elapsed() });
    }
    let m_max = *ms.iter().max().unwrap();

    let pow2: Vec<BigUint> = (0..=m_max).map(|m| BigUint::one() << m).collect();
    let pow2_res: Vec<u64> = pow2
        .iter()
        .map(|p| (p % PREFILTER_MODULUS).to_u64().unwrap())
        .collect();
    let sieves = if query.sieve_primes.is_empty() {
        Vec::new()
    } else {
        ms.iter()
            .map(|&m| ExponentSieve::new(a, b, m, &query.sieve_primes))
            .collect::<Result<Vec<_>, _>>()?
    };

    let modulus = PREFILTER_MODULUS;
    let mut pa = Pow::pow(BigUint::from(a), n_lo - 1);
    let mut pb = Pow::pow(BigUint::from(b), n_lo - 1);
    let mut ra = (&pa % modulus).to_u64().unwrap();
    let mut rb = (&pb % modulus).to_u64().unwrap();

    for n in n_lo..=n_hi {
        pa *= a;
        pb *= b;
        ra = mul_mod(ra, a, modulus);
        rb = mul_mod(rb, b, modulus);
        for (i, &m) in ms.iter().enumerate() {
            if m >= n {
                continue;
            }
            stats.cells += 1;
            if query.use_classifier && is_excluded(a, b, m, n)? {
                stats.classified_out += 1;
                continue;
            }
            if sieves.get(i).is_some_and(|s| s.excludes(n)) {
                stats.sieved_out += 1;
                continue;
            }
            // a^n > 2^m because a >= 2 and n > m, so both factors are positive
            let t = pow2_res[m as usize];
            let fa = (ra + modulus - t) % modulus;
            let fb = (rb + modulus - t) % modulus;
            if !passes_square_prefilter(mul_mod(fa, fb, modulus)) {
                stats.prefiltered_out += 1;
                continue;
            }
            stats.root_tested += 1;
            let value = (&pa - &pow2[m as usize]) * (&pb - &pow2[m as usize]);
            if let Some(x) = is_perfect_square(&value) {
                hits.push(SearchHit { a, b, m, n, x });
            }
        }
    }
    sort_hits(&mut hits);
    Ok(PairReport { a, b, hits, stats, elapsed: started.elapsed() })
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    /// Pairs already completed elsewhere (e.g. recorded in a checkpoint).
    pub skip: HashSet<(u64, u64)>,
}

/// Runs every non-skipped pair, calling `on_pair` as each one completes
/// (from whichever worker finished it). Reports come back sorted by pair.
pub fn sweep_with<F>(
    query: &SearchQuery,
    options: &SweepOptions,
    on_pair: F,
) -> Result<Vec<PairReport>, SearchError>
where
    F: Fn(&PairReport) + Sync,
{
    query.validate()?;
    let pairs: Vec<_> = query
        .pairs()
        .into_iter()
        .filter(|p| !options.skip.contains(p))
        .collect();
    let run = |&(a, b): &(u64, u64)| {
        let report = search_pair(query, a, b)?;
        on_pair(&report);
        Ok(report)
    };
    let reports: Result<Vec<_>, SearchError> = if options.jobs == 1 {
        pairs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| SearchError::Pool(e.to_string()))?;
        pool.install(|| pairs.par_iter().map(run).collect())
    };
    let mut reports = reports?;
    reports.sort_by_key(|r| (r.a, r.b));
    Ok(reports)
}

/// All hits in the query box, sorted by `(a, b, n, m)`.
pub fn sweep(query: &SearchQuery) -> Result<Vec<SearchHit>, SearchError> {
    let options = SweepOptions { jobs: 1, ..Default::default() };
    let reports = sweep_with(query, &options, |_| {})?;
    Ok(collect_hits(&reports))
}

pub fn collect_hits(reports: &[PairReport]) -> Vec<SearchHit> {
    let mut hits: Vec<_> = reports.iter().flat_map(|r| r.hits.iter().cloned()).collect();
    sort_hits(&mut hits);
    hits
}

/// Pell and Pell-Lucas numbers `(P_k, Q_k) = (U_k(2, 1), V_k(2, 1))`.
pub fn pell_numbers(k: u64) -> (Int, Int) {
    let params = LucasParams::new(Int::from(2), Int::from(1)).unwrap();
    let pair = lucas_pair(&params, k);
    (pair.u, pair.v)
}

/// Hits of `(2^n - 2)((2P_k)^n - 2) = x²` for `2 ≤ n ≤ n_max`, with no
/// restriction on `k`.
pub fn conjecture1_family(k: u64, n_max: u64, jobs: usize) -> Result<Vec<SearchHit>, SearchError> {
    let (pk, _) = pell_numbers(k);
    let b = (pk * 2u32)
        .to_u64()
        .ok_or_else(|| SearchError::TooLarge(format!("2 P_{k}")))?;
    if b <= 2 {
        return Ok(Vec::new());
    }
    let query = SearchQuery::new(2..=2, b..=b, 2..=n_max);
    let options = SweepOptions { jobs, ..Default::default() };
    Ok(collect_hits(&sweep_with(&query, &options, |_| {})?))
}

/// Conjecture 1 probe over odd `k > 3`.
pub fn conjecture1_probe(ks: &[u64], n_max: u64, jobs: usize) -> Result<Vec<SearchHit>, SearchError> {
    if let Some(&k) = ks.iter().find(|&&k| k <= 3 || k % 2 == 0) {
        return Err(SearchError::BadConjectureK(k));
    }
    let mut hits = Vec::new();
    for &k in ks {
        hits.extend(conjecture1_family(k, n_max, jobs)?);
    }
    sort_hits(&mut hits);
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conjecture2Report {
    /// Largest exponent among the hits, 0 when there are none.
    #[serde(with = "crate::decimal")]
    pub max_n: u64,
    pub hits: Vec<SearchHit>,
}

/// Scans `2 < a < b` with `a ≤ limit_a`, `b ≤ limit_b`, `m = 1`, `n ≤ n_max`.
pub fn conjecture2_probe(
    limit_a: u64,
    limit_b: u64,
    n_max: u64,
    jobs: usize,
) -> Result<Conjecture2Report, SearchError> {
    if limit_a < 3 || limit_b < 3 {
        return Err(SearchError::Precondition("limits must be at least 3".into()));
    }
    let query = SearchQuery::new(3..=limit_a, 4..=limit_b, 2..=n_max);
    let options = SweepOptions { jobs, ..Default::default() };
    let hits = collect_hits(&sweep_with(&query, &options, |_| {})?);
    let max_n = hits.iter().map(|h| h.n).max().unwrap_or(0);
    Ok(Conjecture2Report { max_n, hits })
}

/// Positive solutions `(m, z)` of `(z + 1)(2z - 1)² = 10^{2m}` with
/// `m ≤ m_max`. `2z - 1` is an odd divisor whose square divides `10^{2m}`,
/// so it is `5^j` with `j ≤ m`.
pub fn solve_c1(m_max: u64) -> Vec<(u64, Natural)> {
    let mut out = Vec::new();
    for m in 1..=m_max {
        let target: BigUint = Pow::pow(BigUint::from(10u32), 2 * m);
        for j in 0..=m {
            let d: BigUint = Pow::pow(BigUint::from(5u32), j);
            let z: BigUint = (&d + 1u32) >> 1u32;
            if (&z + 1u32) * &d * &d == target {
                out.push((m, z));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Inequality {
    /// `5^m > 2^{2m+1} - 3`, claimed for `m ≥ 4`.
    L9,
    /// `2·3^{4m-3} > 5^m + 1`, claimed for `m ≥ 2`.
    L11,
}

impl Inequality {
    /// Smallest `m` from which the inequality is asserted.
    pub fn domain_start(self) -> u64 {
        match self {
            Self::L9 => 4,
            Self::L11 => 2,
        }
    }

    pub fn holds(self, m: u64) -> Result<bool, SearchError> {
        let big = |x: u32| BigInt::from(x);
        Ok(match self {
            Self::L9 => Pow::pow(big(5), m) > Pow::pow(big(2), 2 * m + 1) - 3,
            Self::L11 => {
                if m == 0 {
                    return Err(SearchError::Precondition("L11 needs m >= 1".into()));
                }
                Pow::pow(big(3), 4 * m - 3) * 2 > Pow::pow(big(5), m) + 1
            }
        })
    }
}

/// Exact truth value of the inequality at each `m` in the range.
pub fn verify_inequality(
    which: Inequality,
    ms: RangeInclusive<u64>,
) -> Result<Vec<(u64, bool)>, SearchError> {
    ms.map(|m| which.holds(m).map(|h| (m, h))).collect()
}
