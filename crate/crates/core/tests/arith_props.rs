use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;
use pureshape::arith::{
    factorize, is_nth_power_free, is_prime, kummer_binomial_valuation, mobius, squarefree_decomposition, vp,
};

fn binomial(n: u64, i: u64) -> BigInt {
    (0..i).fold(BigInt::one(), |acc, j| acc * BigInt::from(n - j) / BigInt::from(j + 1))
}

fn big_vp(mut x: BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(&p) {
        x /= &p;
        v += 1;
    }
    v
}

proptest! {
    #[test]
    fn factorization_reassembles(x in any::<i64>().prop_filter("nonzero", |x| *x != 0)) {
        let f = factorize(x).unwrap();
        prop_assert_eq!(f.reassemble(), u128::from(x.unsigned_abs()));
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(f.factors().iter().all(|&(p, e)| is_prime(p) && e > 0));
    }

    #[test]
    fn valuation_by_division(x in 1i64..1_000_000_000, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        let mut m = x;
        let mut v = 0;
        while m % p as i64 == 0 {
            m /= p as i64;
            v += 1;
        }
        prop_assert_eq!(vp(x, p).unwrap(), v);
        prop_assert_eq!(vp(-x, p).unwrap(), v);
    }

    #[test]
    fn decomposition_multiplies_back(a in 1i64..10_000_000, n in 2u32..8) {
        let free = is_nth_power_free(a, n);
        match squarefree_decomposition(a, n) {
            Ok(d) => {
                prop_assert!(free);
                let product: u128 = (1..n).map(|j| u128::from(d.part(j)).pow(j)).product();
                prop_assert_eq!(product, a as u128);
                for i in 1..n {
                    for j in (i + 1)..n {
                        prop_assert_eq!(num_integer::gcd(d.part(i), d.part(j)), 1);
                    }
                }
            }
            Err(_) => prop_assert!(!free),
        }
    }
}

#[test]
fn power_free_by_trial() {
    for n in 2..6u32 {
        for a in 1..3000i64 {
            let brute = (2..=a).take_while(|d| d.pow(n) <= a).all(|d| a % d.pow(n) != 0);
            assert_eq!(is_nth_power_free(a, n), brute, "a = {a}, n = {n}");
        }
    }
}

#[test]
fn mobius_from_factorization() {
    for d in 1..5000u64 {
        let f = factorize(d as i64).unwrap();
        let expected = if f.factors().iter().any(|&(_, e)| e > 1) {
            0
        } else if f.factors().len() % 2 == 0 {
            1
        } else {
            -1
        };
        assert_eq!(mobius(d), expected, "d = {d}");
    }
}

#[test]
fn kummer_carries_match_binomials() {
    for n in 1..=60u64 {
        for i in 0..=n {
            for p in [2u64, 3, 5, 7] {
                assert_eq!(kummer_binomial_valuation(n, i, p), big_vp(binomial(n, i), p), "C({n},{i}) at {p}");
            }
        }
    }
}
