//! Order-one Newton polygon machinery for `x^n - a` at a prime `p`.

mod fp;
mod hull;
mod lemmas;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{is_prime, pow_mod, residue};
use crate::error::{domain, Error, Result};

pub use hull::{full_lower_hull, lower_hull, Side};
pub use lemmas::{
    verify_kummer_lattice, verify_one_more_digit, KummerException, KummerReport, OneMoreDigitMismatch,
    OneMoreDigitReport,
};

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(domain(format!("{p} is not prime")))
    }
}

/// Smallest `u` in `[1, p)` with `u^n ≡ a (mod p)`, if any.
pub fn nth_root_mod_p(a: i64, n: u32, p: u64) -> Result<Option<u64>> {
    check_prime(p)?;
    let r = residue(a, p);
    if r == 0 {
        return Err(domain(format!("{p} divides {a}")));
    }
    Ok((1..p).find(|&u| pow_mod(u, u64::from(n), p) == r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Branch {
    /// `φ = x - u`
    Unit { u: u64 },
    /// `φ = x`
    Ramified,
}

/// Coefficients of `x^n - a` in powers of `φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiExpansion {
    pub n: u32,
    pub p: u64,
    pub branch: Branch,
    coefficients: Vec<BigInt>,
}

fn big_valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

impl PhiExpansion {
    pub fn coefficient(&self, i: usize) -> &BigInt {
        &self.coefficients[i]
    }

    /// `v_p(a_{1,i})`, absent for a zero coefficient.
    pub fn valuation(&self, i: usize) -> Option<u32> {
        big_valuation(&self.coefficients[i], self.p)
    }

    pub fn coeff_valuations(&self) -> Vec<(u32, Option<u32>)> {
        (0..self.coefficients.len())
            .map(|i| (i as u32, self.valuation(i)))
            .collect()
    }

    /// Points `(i, v_p(a_{1,i}))` with finite ordinate.
    pub fn points(&self) -> Vec<(i64, i64)> {
        self.coeff_valuations()
            .into_iter()
            .filter_map(|(i, v)| v.map(|v| (i64::from(i), i64::from(v))))
            .collect()
    }
}

pub fn phi_expansion(a: i64, n: u32, p: u64) -> Result<PhiExpansion> {
    check_prime(p)?;
    if n < 2 {
        return Err(domain("degree must be at least 2"));
    }
    if a == 0 {
        return Err(domain("a must be nonzero"));
    }
    let len = n as usize + 1;
    if residue(a, p) == 0 {
        let mut coefficients = vec![BigInt::zero(); len];
        coefficients[0] = -BigInt::from(a);
        coefficients[n as usize] = BigInt::one();
        return Ok(PhiExpansion { n, p, branch: Branch::Ramified, coefficients });
    }
    let u = nth_root_mod_p(a, n, p)?.ok_or_else(|| {
        Error::Unsupported(format!("x^{n} - {a} has no linear factor modulo {p}"))
    })?;
    let ub = BigInt::from(u);
    let mut coefficients = Vec::with_capacity(len);
    let mut binom = BigInt::one();
    for i in 0..=n {
        if i > 0 {
            binom = binom * BigInt::from(n - i + 1) / BigInt::from(i);
        }
        coefficients.push(&binom * num_traits::pow(ub.clone(), (n - i) as usize));
    }
    coefficients[0] -= BigInt::from(a);
    Ok(PhiExpansion { n, p, branch: Branch::Unit { u }, coefficients })
}

/// Principal polygon with one residual polynomial per side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    pub points: Vec<(i64, i64)>,
    pub sides: Vec<Side>,
    pub residuals: Vec<Vec<u64>>,
}

impl NewtonPolygon {
    /// Lattice points `(x, y)` with `x, y >= 1` on or below the polygon.
    pub fn order1_index(&self) -> u64 {
        let Some(last) = self.sides.last() else {
            return 0;
        };
        (1..=last.end.0)
            .filter_map(|x| self.sides.iter().find(|s| s.start.0 <= x && x <= s.end.0).map(|s| (s, x)))
            .map(|(s, x)| s.ordinate_at(x).floor().to_integer().max(0) as u64)
            .sum()
    }
}

pub fn newton_polygon(expansion: &PhiExpansion) -> Result<NewtonPolygon> {
    let points = expansion.points();
    let sides = lower_hull(&points)?;
    let residuals = sides
        .iter()
        .map(|s| residual_polynomial(s, expansion))
        .collect::<Result<_>>()?;
    Ok(NewtonPolygon { points, sides, residuals })
}

/// `c_j = (a_{1, s + j e_1} / p^{u_s - j h_1}) mod p` for the lattice points of `side`.
pub fn residual_polynomial(side: &Side, expansion: &PhiExpansion) -> Result<Vec<u64>> {
    let p = expansion.p;
    let pb = BigInt::from(p);
    side.lattice_points()
        .into_iter()
        .map(|(x, y)| {
            if x < 0 || x > i64::from(expansion.n) || y < 0 {
                return Err(Error::Internal(format!("lattice point ({x}, {y}) outside the expansion")));
            }
            let c = expansion.coefficient(x as usize);
            match big_valuation(c, p) {
                None => Ok(0),
                Some(v) if i64::from(v) > y => Ok(0),
                Some(v) if i64::from(v) == y => {
                    let q = c / num_traits::pow(pb.clone(), v as usize);
                    Ok(q.mod_floor(&pb).to_u64().expect("residue fits"))
                }
                Some(v) => Err(Error::Internal(format!(
                    "point ({x}, {v}) lies below side {:?}→{:?}",
                    side.start, side.end
                ))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    /// Residuals separable and no lattice points under the polygon.
    pub regular: bool,
    pub residuals_separable: bool,
    pub order1_index: u64,
    /// `(side index, residual)` for each non-separable residual.
    pub non_separable: Vec<(usize, Vec<u64>)>,
    pub polygon: NewtonPolygon,
}

pub fn is_p_regular_order1(a: i64, n: u32, p: u64) -> Result<RegularityVerdict> {
    let polygon = newton_polygon(&phi_expansion(a, n, p)?)?;
    let non_separable: Vec<_> = polygon
        .residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| !fp::is_separable(r, p))
        .map(|(i, r)| (i, r.clone()))
        .collect();
    let order1_index = polygon.order1_index();
    let residuals_separable = non_separable.is_empty();
    Ok(RegularityVerdict {
        regular: residuals_separable && order1_index == 0,
        residuals_separable,
        order1_index,
        non_separable,
        polygon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn roots() {
        assert_eq!(nth_root_mod_p(17, 4, 2).unwrap(), Some(1));
        assert_eq!(nth_root_mod_p(10, 9, 3).unwrap(), Some(1));
        assert_eq!(nth_root_mod_p(2, 4, 5).unwrap(), None);
        assert_eq!(nth_root_mod_p(-1, 2, 5).unwrap(), Some(2));
        assert!(nth_root_mod_p(6, 4, 3).is_err());
        assert!(nth_root_mod_p(5, 4, 4).is_err());
    }

    #[test]
    fn expansion_valuations() {
        let e = phi_expansion(17, 4, 2).unwrap();
        assert_eq!(e.branch, Branch::Unit { u: 1 });
        let v: Vec<_> = e.coeff_valuations().into_iter().map(|(_, v)| v.unwrap()).collect();
        assert_eq!(v, vec![4, 2, 1, 2, 0]);
        assert_eq!(phi_expansion(5, 4, 2).unwrap().valuation(0), Some(2));

        let r = phi_expansion(6, 6, 3).unwrap();
        assert_eq!(r.branch, Branch::Ramified);
        assert_eq!(r.points(), vec![(0, 1), (6, 0)]);
        assert!(matches!(phi_expansion(2, 4, 5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exact_power_has_no_leading_point() {
        // 2^4 = 16
        let e = phi_expansion(16, 4, 7).unwrap();
        assert_eq!(e.valuation(0), None);
        assert!(newton_polygon(&e).is_ok());
    }

    #[test]
    fn polygon_for_17() {
        let poly = newton_polygon(&phi_expansion(17, 4, 2).unwrap()).unwrap();
        let slopes: Vec<_> = poly.sides.iter().map(|s| s.slope).collect();
        assert_eq!(slopes, vec![Ratio::new(-2, 1), Ratio::new(-1, 1), Ratio::new(-1, 2)]);
        assert!(poly.residuals.iter().flatten().all(|&c| c < 2));
        // (1,1), (1,2), (2,1)
        assert_eq!(poly.order1_index(), 3);
    }

    #[test]
    fn regularity_examples() {
        let v = is_p_regular_order1(17, 4, 2).unwrap();
        assert!(!v.regular);
        assert!(v.order1_index > 0);
        // 4^2 = 16 ≢ 1 mod 9
        assert!(is_p_regular_order1(4, 6, 3).unwrap().regular);
        // 10 ≡ 1 mod 9
        assert!(!is_p_regular_order1(10, 6, 3).unwrap().regular);
        let eis = is_p_regular_order1(6, 6, 3).unwrap();
        assert!(eis.regular);
        assert_eq!(eis.polygon.residuals, vec![vec![1, 1]]);
    }

    #[test]
    fn ramified_residual_with_repeated_slope() {
        // v_2(4) = 2 on n = 4: side (0,2)→(4,0) of degree 2
        let poly = newton_polygon(&phi_expansion(12, 4, 2).unwrap()).unwrap();
        assert_eq!(poly.sides.len(), 1);
        assert_eq!(poly.sides[0].degree, 2);
        assert_eq!(poly.residuals[0].len(), 3);
        assert_eq!(poly.residuals[0][1], 0);
    }
}
