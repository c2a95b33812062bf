use num_bigint::BigUint;
use pellsieve::lucas::{lucas_pair, LucasParams};
use pellsieve::pell::{
    self, fundamental_n1, fundamental_n2, fundamental_ratio, gen_n1, gen_n1_product, gen_n2,
    gen_n2_product, gen_ratio, n1_from_n2, solve_neg4k, PellSolution,
};
use pellsieve::{Int, Role};

fn nonsquares(limit: u64) -> impl Iterator<Item = u64> {
    (2..=limit).filter(|&d| {
        let r = (d as f64).sqrt() as u64;
        r * r != d && (r + 1) * (r + 1) != d
    })
}

fn word_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s.checked_mul(s) == Some(n))
}

/// Every `(x, y)` with `x² - d y² = n` and `1 ≤ y ≤ y_max`, by trying each `y`.
fn scan(d: u64, n: i64, y_max: u64) -> Vec<(u64, u64)> {
    (1..=y_max)
        .filter_map(|y| {
            let t = (d as i128 * (y as i128).pow(2) + n as i128) as u64;
            word_sqrt(t).map(|x| (x, y))
        })
        .collect()
}

fn sol(x: u64, y: u64) -> PellSolution {
    PellSolution::new(x, y)
}

fn as_words(s: &PellSolution) -> Option<(u64, u64)> {
    Some((u64::try_from(&s.x).ok()?, u64::try_from(&s.y).ok()?))
}

#[test]
fn fundamental_unit_is_the_least_solution() {
    let mut compared = 0;
    for d in nonsquares(200) {
        let f = fundamental_n1(d).unwrap();
        assert_eq!(f.role, Role::N1);
        let s = f.as_solution();
        assert_eq!(&s.x * &s.x - BigUint::from(d) * &s.y * &s.y, BigUint::from(1u32));
        if let Some((x, y)) = as_words(&s).filter(|&(_, y)| y <= 200_000) {
            assert_eq!(scan(d, 1, y).first(), Some(&(x, y)), "d = {d}");
            compared += 1;
        }
    }
    assert!(compared > 150, "only {compared} fundamentals compared");
}

#[test]
fn unit_family_matches_scan_below_bound() {
    const BOUND: u64 = 1_000_000;
    for d in nonsquares(50) {
        let family = gen_n1(d, 5).unwrap();
        let top = BOUND.min(as_words(&family[4]).map_or(BOUND, |(_, y)| y));
        let small: Vec<_> = family.iter().filter_map(as_words).filter(|&(_, y)| y <= top).collect();
        assert_eq!(scan(d, 1, top), small, "d = {d}");
        assert_eq!(family, gen_n1_product(d, 5).unwrap(), "d = {d}");
    }
}

#[test]
fn unit_family_closed_form_equals_powers() {
    for d in nonsquares(500) {
        assert_eq!(gen_n1(d, 10).unwrap(), gen_n1_product(d, 10).unwrap(), "d = {d}");
    }
}

#[test]
fn n2_fundamental_against_bounded_scan() {
    let mut solvable = 0;
    for d in nonsquares(200) {
        let y1 = fundamental_n1(d).unwrap().second;
        let Ok(y1) = u64::try_from(&y1) else { continue };
        if y1 > 2_000_000 {
            continue;
        }
        let expected = scan(d, 2, y1).first().copied();
        let got = fundamental_n2(d).unwrap().map(|f| as_words(&f.as_solution()).unwrap());
        assert_eq!(got, expected, "d = {d}");
        solvable += expected.is_some() as u32;
    }
    assert!(solvable > 10);
}

#[test]
fn n2_family_closed_form_equals_products() {
    let mut seen = 0;
    for d in nonsquares(60) {
        match fundamental_n2(d).unwrap() {
            Some(_) => {
                let closed = gen_n2(d, 10).unwrap();
                assert_eq!(closed, gen_n2_product(d, 10).unwrap(), "d = {d}");
                for s in &closed {
                    assert_eq!(&s.x * &s.x - BigUint::from(d) * &s.y * &s.y, BigUint::from(2u32));
                }
                let top = as_words(&closed[9]).map_or(100_000, |(_, y)| y.min(100_000));
                let small: Vec<_> =
                    closed.iter().filter_map(as_words).filter(|&(_, y)| y <= top).collect();
                assert_eq!(scan(d, 2, top), small, "d = {d}");
                seen += 1;
            }
            None => assert!(gen_n2(d, 3).is_err(), "d = {d}"),
        }
    }
    assert!(seen >= 8);
}

#[test]
fn unit_from_n2_fundamental() {
    for d in nonsquares(200) {
        if let Some(f2) = fundamental_n2(d).unwrap() {
            let derived = n1_from_n2(&f2, d).unwrap();
            assert_eq!(derived, fundamental_n1(d).unwrap(), "d = {d}");
            let k = &f2.first;
            assert_eq!(derived.first, k * k - 1u32, "d = {d}");
        }
    }
}

#[test]
fn ratio_families_against_scan() {
    const X_BOUND: u64 = 200_000;
    let mut families = 0;
    for a in nonsquares(12) {
        for b in 1..=40u64 {
            let Ok(fund) = fundamental_ratio(a, b) else { continue };
            assert_eq!(fund.role, Role::Ratio);
            let family = gen_ratio(a, b, 6).unwrap();
            for s in &family {
                assert_eq!(
                    BigUint::from(a) * &s.x * &s.x - BigUint::from(b) * &s.y * &s.y,
                    BigUint::from(1u32),
                    "(a, b) = ({a}, {b})"
                );
            }
            let top = as_words(&family[5]).map_or(X_BOUND, |(x, _)| x.min(X_BOUND));
            let brute: Vec<(u64, u64)> = (1..=top)
                .filter_map(|x| {
                    let t = a as u128 * (x as u128).pow(2) - 1;
                    if t % b as u128 != 0 {
                        return None;
                    }
                    word_sqrt((t / b as u128) as u64).map(|y| (x, y))
                })
                .collect();
            let small: Vec<_> =
                family.iter().filter_map(as_words).filter(|&(x, _)| x <= top).collect();
            assert_eq!(brute, small, "(a, b) = ({a}, {b})");
            families += 1;
        }
    }
    assert!(families > 5);
}

#[test]
fn ratio_examples() {
    assert_eq!(gen_ratio(2, 7, 2).unwrap(), vec![sol(2, 1), sol(58, 31)]);
    assert_eq!(gen_ratio(3, 2, 1).unwrap(), vec![sol(1, 1)]);
    assert!(fundamental_ratio(3, 5).is_err());
}

#[test]
fn neg4k_matches_scan_and_fibonacci_closed_form() {
    let fib = LucasParams::new(Int::from(1), Int::from(1)).unwrap();
    for k in 1..=5u32 {
        let got = solve_neg4k(k, 6).unwrap();
        let scale = 1u64 << (k - 1);
        let brute: Vec<_> = (0..=10_000u64)
            .filter_map(|v| {
                let t = 5 * v * v;
                let four_k = 4u64.pow(k);
                (t >= four_k).then(|| word_sqrt(t - four_k).map(|u| (u, v))).flatten()
            })
            .take(6)
            .collect();
        assert_eq!(got.iter().map(|s| as_words(s).unwrap()).collect::<Vec<_>>(), brute, "k = {k}");
        for (m, s) in got.iter().enumerate() {
            let pair = lucas_pair(&fib, 2 * m as u64 + 1);
            assert_eq!(Int::from(s.x.clone()), pair.v * scale, "k = {k}, m = {m}");
            assert_eq!(Int::from(s.y.clone()), pair.u * scale, "k = {k}, m = {m}");
        }
    }
}

#[test]
fn continued_fraction_period_closes_on_twice_a0() {
    for d in nonsquares(1000) {
        let cf = pell::cf_sqrt(d).unwrap();
        assert_eq!(*cf.period.last().unwrap(), 2 * cf.a0, "d = {d}");
        let body = &cf.period[..cf.period.len() - 1];
        assert!(body.iter().eq(body.iter().rev()), "period of {d} is not palindromic");
    }
}
