use proptest::prelude::*;
use pureshape::arith::factorize;
use pureshape::disc::{disc_jump, disc_report, disc_valuation, disc_valuation_from_basis};
use pureshape::shape::hypothesis_h;

#[test]
fn jumps_telescope() {
    for n in 2..=100u32 {
        for (p, e) in factorize(i64::from(n)).unwrap().factors().to_vec() {
            let n_p = u64::from(n) / p.pow(e);
            let jumps: u64 = (0..e as i32).map(|t| disc_jump(n, p, t).unwrap()).sum();
            let top = disc_valuation(n, p, 0).unwrap();
            let bottom = disc_valuation(n, p, e as i32).unwrap();
            assert_eq!(top, u64::from(n) * u64::from(e));
            assert_eq!(top - bottom, jumps);
            assert_eq!(jumps, 2 * n_p * (p.pow(e) - 1) / (p - 1));
            assert_eq!(disc_valuation(n, p, -1).unwrap(), top);
            for t in 0..e as i32 {
                assert_eq!(disc_jump(n, p, t).unwrap(), 2 * n_p * p.pow(e - t as u32 - 1));
            }
        }
    }
}

proptest! {
    #[test]
    fn closed_form_matches_basis_on_units(a in -10_000_000i64..10_000_000, n in prop::sample::select(vec![4u32, 6, 8, 9, 10, 12, 16, 18, 20, 27])) {
        prop_assume!(a != 0 && hypothesis_h(a, n));
        for (p, _) in factorize(i64::from(n)).unwrap().factors().to_vec() {
            if a % p as i64 == 0 {
                continue;
            }
            prop_assert_eq!(disc_report(a, n, p).unwrap().valuation, disc_valuation_from_basis(a, n, p).unwrap());
        }
    }
}
