use std::collections::BTreeMap;

use serde::Serialize;

use super::{newton_polygon, phi_expansion, NewtonPolygon, Side};
use crate::arith::{checked_pow, kummer_binomial_valuation, vp_u64};
use crate::error::{domain, Error, Result};
use crate::shape::d_p;

/// A unit class whose polygon misses the chain `(p^k, e - k)` or has a side
/// of height above one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KummerException {
    pub a: u64,
    /// `v_p(u^n - a)`, absent when it vanishes.
    pub leading_valuation: Option<u32>,
    pub d_p: u32,
    pub missing_points: Vec<(i64, i64)>,
    pub tall_sides: Vec<((i64, i64), (i64, i64))>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KummerReport {
    pub n: u32,
    pub p: u64,
    pub e: u32,
    /// `p ∤ n`: nothing to check.
    pub vacuous: bool,
    pub classes_checked: usize,
    pub classes_without_root: usize,
    /// `v_p(binom(n, i) u^{n-i}) >= e - v_p(i)` with equality at `i = p^k`.
    pub binomial_valuations_ok: bool,
    /// The polygon of the points with `i >= 1` alone has exactly the vertices
    /// `(p^k, e - k)` and unit-height sides between them.
    pub binomial_chain_ok: bool,
    /// Failures of the statement for the full polygon.
    pub exceptions: Vec<KummerException>,
    /// Every chain failure has `d_p < e` and every class with `d_p < e` fails.
    pub chain_failures_match_d_below_e: bool,
}

impl KummerReport {
    pub fn passed(&self) -> bool {
        self.vacuous || (self.binomial_valuations_ok && self.binomial_chain_ok && self.exceptions.is_empty())
    }
}

fn chain_points(p: u64, e: u32) -> Vec<(i64, i64)> {
    (0..=e)
        .map(|k| (p.pow(k) as i64, i64::from(e - k)))
        .collect()
}

fn on_polygon(sides: &[Side], point: (i64, i64)) -> bool {
    sides.iter().any(|s| s.contains(point))
}

fn unit_residues(p: u64, exponent: u32) -> Result<impl Iterator<Item = u64>> {
    let modulus = checked_pow(p, exponent).ok_or_else(|| Error::SizeLimit(format!("{p}^{exponent}")))?;
    Ok((1..modulus).filter(move |a| a % p != 0))
}

pub fn verify_kummer_lattice(n: u32, p: u64) -> Result<KummerReport> {
    let e = vp_u64(u64::from(n), p);
    let mut report = KummerReport {
        n,
        p,
        e,
        vacuous: e == 0,
        classes_checked: 0,
        classes_without_root: 0,
        binomial_valuations_ok: true,
        binomial_chain_ok: true,
        exceptions: Vec::new(),
        chain_failures_match_d_below_e: true,
    };
    if e == 0 {
        return Ok(report);
    }
    let chain = chain_points(p, e);
    for a in unit_residues(p, e + 2)? {
        let expansion = match phi_expansion(a as i64, n, p) {
            Ok(x) => x,
            Err(Error::Unsupported(_)) => {
                report.classes_without_root += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        report.classes_checked += 1;

        for i in 1..=n {
            let v = expansion.valuation(i as usize).expect("binomial coefficient is nonzero");
            let bound = e.saturating_sub(vp_u64(u64::from(i), p));
            debug_assert_eq!(v, kummer_binomial_valuation(u64::from(n), u64::from(i), p));
            let is_chain = chain.iter().any(|&(x, _)| x == i64::from(i));
            if v < bound || (is_chain && v != bound) {
                report.binomial_valuations_ok = false;
            }
        }

        let tail: Vec<_> = expansion.points().into_iter().filter(|&(x, _)| x >= 1).collect();
        let tail_sides = super::lower_hull(&tail)?;
        let vertices: Vec<_> = tail_sides.iter().map(|s| s.start).chain(tail_sides.last().map(|s| s.end)).collect();
        if vertices != chain || tail_sides.iter().any(|s| s.height != 1) {
            report.binomial_chain_ok = false;
        }

        let poly = newton_polygon(&expansion)?;
        let missing: Vec<_> = chain.iter().copied().filter(|&pt| !on_polygon(&poly.sides, pt)).collect();
        let tall: Vec<_> = poly
            .sides
            .iter()
            .filter(|s| s.height > 1)
            .map(|s| (s.start, s.end))
            .collect();
        let d = d_p(a as i64, p, e)?;
        if missing.is_empty() == (d < e) {
            report.chain_failures_match_d_below_e = false;
        }
        if !missing.is_empty() || !tall.is_empty() {
            report.exceptions.push(KummerException {
                a,
                leading_valuation: expansion.valuation(0),
                d_p: d,
                missing_points: missing,
                tall_sides: tall,
            });
        }
    }
    Ok(report)
}

/// Two classes agreeing modulo `p^2` whose unit-height residuals differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneMoreDigitMismatch {
    pub a: u64,
    pub a_prime: u64,
    pub sides: Vec<HeightOneSide>,
    pub sides_prime: Vec<HeightOneSide>,
    /// The two side lists agree to the right of every side through the
    /// point of `u^n - a` (abscissa 0).
    pub only_at_leading_point: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeightOneSide {
    pub start: (i64, i64),
    pub end: (i64, i64),
    pub residual: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneMoreDigitReport {
    pub n: u32,
    pub p: u64,
    /// Classes enumerated modulo this.
    pub modulus: u64,
    pub classes_checked: usize,
    pub classes_without_root: usize,
    pub mismatches: Vec<OneMoreDigitMismatch>,
}

impl OneMoreDigitReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Residuals agree on every unit-height side lying to the right of the
    /// sides through abscissa 0.
    pub fn mismatches_only_at_leading_point(&self) -> bool {
        self.mismatches.iter().all(|m| m.only_at_leading_point)
    }
}

fn height_one_sides(poly: &NewtonPolygon) -> Vec<HeightOneSide> {
    poly.sides
        .iter()
        .zip(&poly.residuals)
        .filter(|(s, _)| s.height == 1)
        .map(|(s, r)| HeightOneSide { start: s.start, end: s.end, residual: r.clone() })
        .collect()
}

/// Residual agreement on unit-height sides across unit classes `a ≡ a' (mod p^2)`,
/// enumerating `a` modulo `p^{e+3}`.
pub fn verify_one_more_digit(n: u32, p: u64) -> Result<OneMoreDigitReport> {
    let e = vp_u64(u64::from(n), p);
    if e == 0 {
        return Err(domain(format!("{p} does not divide {n}")));
    }
    let modulus = checked_pow(p, e + 3).ok_or_else(|| Error::SizeLimit(format!("{p}^{}", e + 3)))?;
    let p2 = p * p;
    // (a, unit-height sides, right end of the side through abscissa 0)
    let mut groups: BTreeMap<u64, Vec<(u64, Vec<HeightOneSide>, i64)>> = BTreeMap::new();
    let mut report = OneMoreDigitReport {
        n,
        p,
        modulus,
        classes_checked: 0,
        classes_without_root: 0,
        mismatches: Vec::new(),
    };
    for a in unit_residues(p, e + 3)? {
        let expansion = match phi_expansion(a as i64, n, p) {
            Ok(x) => x,
            Err(Error::Unsupported(_)) => {
                report.classes_without_root += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        report.classes_checked += 1;
        let poly = newton_polygon(&expansion)?;
        let lead_end = poly.sides.iter().find(|s| s.start.0 == 0).map_or(0, |s| s.end.0);
        groups.entry(a % p2).or_default().push((a, height_one_sides(&poly), lead_end));
    }
    for members in groups.values() {
        let (a0, s0, end0) = &members[0];
        for (a1, s1, end1) in &members[1..] {
            if s0 != s1 {
                let cut = *end0.max(end1);
                let away = |s: &[HeightOneSide]| -> Vec<HeightOneSide> {
                    s.iter().filter(|h| h.start.0 >= cut).cloned().collect()
                };
                report.mismatches.push(OneMoreDigitMismatch {
                    a: *a0,
                    a_prime: *a1,
                    sides: s0.clone(),
                    sides_prime: s1.clone(),
                    only_at_leading_point: away(s0) == away(s1),
                });
            }
        }
    }
    Ok(report)
}
