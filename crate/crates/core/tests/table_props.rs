use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use pureshape::arith::factorize;
use pureshape::shape::{global_shape, hypothesis_h};
use pureshape::table::{build_table, find_jump_witness, verify_period, ClassStatus};

#[test]
fn table_agrees_with_direct_computation() {
    let mut rng = StdRng::seed_from_u64(11);
    for n in [4u32, 6, 8, 9, 10, 12] {
        let table = build_table(n).unwrap();
        let powers: Vec<i64> = factorize(i64::from(n)).unwrap().factors().iter().map(|&(p, e)| p.pow(e + 1) as i64).collect();
        let mut checked = 0;
        while checked < 10_000 {
            let a: i64 = rng.gen_range(-1_000_000_000_000..1_000_000_000_000);
            if a == 0 || !hypothesis_h(a, n) {
                continue;
            }
            checked += 1;
            let entry = table.lookup(a);
            if powers.iter().any(|&q| a % q == 0) {
                assert_eq!(entry.status, ClassStatus::HConditional, "n = {n}, a = {a}");
                continue;
            }
            assert_eq!(entry.status, ClassStatus::Shape, "n = {n}, a = {a}");
            assert_eq!(entry.shape.as_ref().unwrap(), &global_shape(a, n).unwrap(), "n = {n}, a = {a}");
        }
    }
}

#[test]
fn excluded_classes_have_no_h_member() {
    for n in [4u32, 6, 8, 9, 12] {
        let table = build_table(n).unwrap();
        for entry in table.entries.iter().filter(|e| e.status == ClassStatus::Excluded) {
            let m = table.modulus as i64;
            let r = entry.residue as i64;
            assert!((0..200).map(|j| r + j * m).filter(|&a| a != 0).all(|a| !hypothesis_h(a, n)), "n = {n}, class {r}");
        }
    }
}

#[test]
fn period_holds_for_composite_degrees() {
    for (n, bound) in [(10u32, 20_000u64), (12, 20_000), (15, 20_000), (18, 20_000)] {
        let report = verify_period(n, bound).unwrap();
        assert!(report.passed(), "n = {n}: {:?}", report.conflicts.first());
    }
}

#[test]
fn every_jump_has_a_witness() {
    for n in 3..=40u32 {
        for (p, e) in factorize(i64::from(n)).unwrap().factors().to_vec() {
            for t in 0..e {
                let w = find_jump_witness(n, p, t).unwrap();
                assert_eq!((w.d, w.d_prime), (t, t + 1), "n = {n}, p = {p}, t = {t}");
                assert_eq!((w.a - w.a_prime) % p.pow(t + 1) as i64, 0);
                assert!(hypothesis_h(w.a, n) && hypothesis_h(w.a_prime, n));
            }
        }
    }
}
