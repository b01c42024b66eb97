//! Local discriminant exponents at primes dividing `n`.

use serde::Serialize;

use crate::arith::{self, vp_u64};
use crate::error::{domain, Result};
use crate::shape::{self, basis_description};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscLocalReport {
    pub p: u64,
    pub e: u32,
    pub n_p: u64,
    /// `min(r_p(a), e)`, with `-1` on the ramified branch.
    pub t: i32,
    pub valuation: u64,
}

fn split(n: u32, p: u64) -> Result<(u32, u64)> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let e = vp_u64(u64::from(n), p);
    if e == 0 {
        return Err(domain(format!("{p} does not divide {n}")));
    }
    Ok((e, u64::from(n) / p.pow(e)))
}

/// `n e - 2 n_p Σ_{j=1}^{t} p^{e-j}`, or `n e` for `t <= 0`.
pub fn disc_valuation(n: u32, p: u64, t: i32) -> Result<u64> {
    let (e, n_p) = split(n, p)?;
    if t < -1 || t > e as i32 {
        return Err(domain(format!("t = {t} outside [-1, {e}]")));
    }
    let full = u64::from(n) * u64::from(e);
    let saved: u64 = (1..=t.max(0) as u32).map(|j| p.pow(e - j)).sum();
    Ok(full - 2 * n_p * saved)
}

/// `disc_valuation(n, p, t) - disc_valuation(n, p, t + 1)`, i.e. `2 n_p p^{e-t-1}`.
pub fn disc_jump(n: u32, p: u64, t: i32) -> Result<u64> {
    let (e, n_p) = split(n, p)?;
    if t < 0 || t >= e as i32 {
        return Err(domain(format!("t = {t} outside [0, {}]", e - 1)));
    }
    let jump = disc_valuation(n, p, t)? - disc_valuation(n, p, t + 1)?;
    debug_assert_eq!(jump, 2 * n_p * p.pow(e - t as u32 - 1));
    Ok(jump)
}

pub fn disc_report(a: i64, n: u32, p: u64) -> Result<DiscLocalReport> {
    let (e, n_p) = split(n, p)?;
    let local = shape::local_shape(a, n, p)?;
    let t = if local.is_ramified() { -1 } else { local.d_p as i32 };
    Ok(DiscLocalReport {
        p,
        e,
        n_p,
        t,
        valuation: disc_valuation(n, p, t)?,
    })
}

/// `v_p(d_K)` from the basis: `v_p(disc(x^n - a)) - 2 v_p([O_K : Z[θ]])`, where
/// the index is the product of the basis denominators.
pub fn disc_valuation_from_basis(a: i64, n: u32, p: u64) -> Result<u64> {
    let (e, _) = split(n, p)?;
    let v_a = arith::vp(a, p)?;
    let poly = u64::from(n) * u64::from(e) + u64::from(n - 1) * u64::from(v_a);
    let index: u64 = basis_description(a, n)?
        .iter()
        .map(|b| u64::from(vp_u64(b.denominator, p)))
        .sum();
    Ok(poly - 2 * index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(disc_valuation(4, 2, 0).unwrap(), 8);
        assert_eq!(disc_valuation(4, 2, -1).unwrap(), 8);
        assert_eq!(disc_valuation(4, 2, 2).unwrap(), 2);
        assert_eq!(disc_valuation(6, 3, 1).unwrap(), 2);
        assert!(disc_valuation(6, 5, 0).is_err());
        assert!(disc_valuation(4, 2, 3).is_err());
    }

    #[test]
    fn jump_examples() {
        assert_eq!(disc_jump(4, 2, 0).unwrap(), 4);
        assert_eq!(disc_jump(6, 2, 0).unwrap(), 6);
        assert_eq!(disc_jump(9, 3, 1).unwrap(), 2);
        assert_eq!(disc_jump(9, 3, 0).unwrap(), 6);
        assert!(disc_jump(4, 2, 2).is_err());
        assert!(disc_jump(4, 2, -1).is_err());
    }

    #[test]
    fn report_examples() {
        let r = disc_report(3, 4, 2).unwrap();
        assert_eq!((r.t, r.valuation), (0, 8));
        let r = disc_report(17, 4, 2).unwrap();
        assert_eq!((r.t, r.valuation), (2, 2));
        let r = disc_report(5, 4, 2).unwrap();
        assert_eq!((r.t, r.valuation), (1, 4));
        assert_eq!(disc_report(6, 4, 2).unwrap().t, -1);
    }

    #[test]
    fn basis_route_on_unit_classes() {
        for n in [4u32, 6, 8, 9, 12] {
            for a in 2..300i64 {
                if !shape::hypothesis_h(a, n) {
                    continue;
                }
                for (p, _) in arith::factor_u64(u64::from(n)) {
                    if a % p as i64 == 0 {
                        continue;
                    }
                    assert_eq!(
                        disc_report(a, n, p).unwrap().valuation,
                        disc_valuation_from_basis(a, n, p).unwrap(),
                        "a = {a}, n = {n}, p = {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn ramified_branch_convention_differs_from_basis_route() {
        // x^4 - 2 is Eisenstein at 2: v_2(d_K) = v_2(-256 * 8) = 11
        assert_eq!(disc_valuation_from_basis(2, 4, 2).unwrap(), 11);
        assert_eq!(disc_report(2, 4, 2).unwrap().valuation, 8);
    }
}
