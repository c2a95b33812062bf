use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use pellsieve::lucas::{
    diff_divides, divides_criterion, lucas_mod, lucas_pair, v2_of_v, LucasIter, LucasParams,
};
use pellsieve::BigLucasParams;
use proptest::prelude::*;

/// `(U_0..=U_len, V_0..=V_len)` straight from the recurrence.
fn unroll(p: i64, q: i64, len: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    let mut u = vec![BigInt::zero(), BigInt::one()];
    let mut v = vec![BigInt::from(2), p.clone()];
    while u.len() <= len {
        let k = u.len();
        u.push(&p * &u[k - 1] + &q * &u[k - 2]);
        v.push(&p * &v[k - 1] + &q * &v[k - 2]);
    }
    (u, v)
}

fn big(p: i64, q: i64) -> BigLucasParams {
    LucasParams::new(BigInt::from(p), BigInt::from(q)).unwrap()
}

fn valid(p: i64, q: i64) -> bool {
    LucasParams::new(p, q).is_ok()
}

prop_compose! {
    fn params()(p in -40i64..=40, q in -40i64..=40) -> (i64, i64) { (p, q) }
}

fn valid_params() -> impl Strategy<Value = (i64, i64)> {
    params().prop_filter("invalid (P, Q)", |&(p, q)| valid(p, q))
}

fn minus_one_params() -> impl Strategy<Value = i64> {
    (-60i64..=60).prop_filter("P^2 - 4 > 0", |p| p.abs() >= 3)
}

fn r_pow(q: i64, n: u64) -> BigInt {
    Pow::pow(BigInt::from(-q), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gcd_of_u_terms((p, q) in valid_params(), m in 1u64..=60, n in 1u64..=60) {
        let params = big(p, q);
        let g = lucas_pair(&params, m).u.gcd(&lucas_pair(&params, n).u);
        prop_assert_eq!(g, lucas_pair(&params, m.gcd(&n)).u.abs());
    }

    #[test]
    fn gcd_of_v_terms((p, q) in valid_params(), m in 1u64..=60, n in 1u64..=60) {
        let params = big(p, q);
        let g = lucas_pair(&params, m).v.gcd(&lucas_pair(&params, n).v);
        let d = m.gcd(&n);
        if (m / d) % 2 == 1 && (n / d) % 2 == 1 {
            prop_assert_eq!(g, lucas_pair(&params, d).v.abs());
        } else {
            prop_assert!(g == BigInt::from(1) || g == BigInt::from(2), "gcd = {}", g);
        }
    }

    #[test]
    fn v_doubling((p, q) in valid_params(), n in 0u64..=200) {
        let params = big(p, q);
        let vn = lucas_pair(&params, n).v;
        prop_assert_eq!(lucas_pair(&params, 2 * n).v, &vn * &vn - r_pow(q, n) * 2);
    }

    #[test]
    fn v_tripling((p, q) in valid_params(), n in 0u64..=150) {
        let params = big(p, q);
        let vn = lucas_pair(&params, n).v;
        let expected = &vn * (&vn * &vn - r_pow(q, n) * 3);
        prop_assert_eq!(lucas_pair(&params, 3 * n).v, expected);
    }

    #[test]
    fn v_is_difference_of_u_neighbours(p in minus_one_params(), n in 1u64..=200) {
        let params = big(p, -1);
        let expected = lucas_pair(&params, n + 1).u - lucas_pair(&params, n - 1).u;
        prop_assert_eq!(lucas_pair(&params, n).v, expected);
    }

    #[test]
    fn consecutive_u_difference_is_odd(half in -30i64..=30, n in 1u64..=200) {
        let p = 2 * half;
        prop_assume!(p.abs() >= 4);
        let params = big(p, -1);
        let diff = lucas_pair(&params, n).u - lucas_pair(&params, n - 1).u;
        prop_assert!(diff.is_odd());
    }

    #[test]
    fn fast_doubling_matches_recurrence((p, q) in valid_params(), n in 0usize..=120) {
        let (u, v) = unroll(p, q, n);
        let pair = lucas_pair(&big(p, q), n as u64);
        prop_assert_eq!((&pair.u, &pair.v), (&u[n], &v[n]));
    }

    #[test]
    fn modular_evaluation_matches_exact(
        (p, q) in valid_params(),
        n in 0u64..=300,
        modulus in 2u64..=1_000_000,
    ) {
        let pair = lucas_pair(&big(p, q), n);
        let m = BigInt::from(modulus);
        let expected = (
            pair.u.mod_floor(&m).try_into().unwrap(),
            pair.v.mod_floor(&m).try_into().unwrap(),
        );
        prop_assert_eq!(lucas_mod(&big(p, q), n, modulus).unwrap(), expected);
    }
}

#[test]
fn iterator_agrees_with_small_scalar_type() {
    for p in -5i64..=5 {
        for q in -5i64..=5 {
            if !valid(p, q) {
                continue;
            }
            let (u, v) = unroll(p, q, 15);
            for pair in LucasIter::new(&LucasParams::new(p, q).unwrap()).take(16) {
                let n = pair.n as usize;
                assert_eq!((BigInt::from(pair.u), BigInt::from(pair.v)), (u[n].clone(), v[n].clone()));
            }
        }
    }
}

#[test]
fn valuation_of_v_for_even_p() {
    for p in (2i64..=100).step_by(2) {
        let (_, v) = unroll(p, -1, 60);
        for n in 1..=60usize {
            let direct = v[n].trailing_zeros().unwrap();
            assert_eq!(v2_of_v(&p, n as u64).unwrap().0, direct, "P = {p}, n = {n}");
        }
    }
    assert!(v2_of_v(&3i64, 2).is_err());
}

#[test]
fn three_and_five_divisibility_tables() {
    for p in 1i64..=200 {
        let (u, _) = unroll(p, -1, 120);
        for n in 0..=120usize {
            for q in [3u64, 5] {
                let direct = u[n].is_multiple_of(&BigInt::from(q));
                assert_eq!(divides_criterion(&p, n as u64, q).unwrap(), direct, "P = {p}, n = {n}, q = {q}");
            }
        }
    }
    assert!(divides_criterion(&4i64, 2, 7).is_err());
}

#[test]
fn consecutive_difference_divisibility() {
    for a in 2i64..=20 {
        for p in (1 + a..=200).step_by(a as usize) {
            let (u, _) = unroll(p, -1, 120);
            for n in 1..=120usize {
                let direct = (&u[n] - &u[n - 1]).is_multiple_of(&BigInt::from(a));
                assert_eq!(diff_divides(&a, &p, n as u64).unwrap(), direct, "a = {a}, P = {p}, n = {n}");
            }
        }
    }
    assert!(diff_divides(&5i64, &7, 3).is_err());
}

#[test]
fn residue_periodicity_modulo_u_m() {
    // U_{2mk + r} = U_r (mod U_m), checked through the modular evaluator
    for p in 3i64..=12 {
        let params = big(p, -1);
        for m in 2u64..=6 {
            let um: u64 = lucas_pair(&params, m).u.try_into().unwrap();
            for r in 0..m {
                let base = lucas_mod(&params, r, um).unwrap().0;
                for k in 1..=5 {
                    assert_eq!(lucas_mod(&params, 2 * m * k + r, um).unwrap().0, base);
                }
            }
        }
    }
}
