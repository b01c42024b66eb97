//! Power-free integers in progressions, shape-class densities and the
//! distribution of `r_p` among units.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, checked_pow, pow_mod, vp_u64};
use crate::error::{domain, Error, Result};
use crate::shape::ShapeClass;
use crate::table::{build_table, ClassStatus};

pub const DEFAULT_MEMORY_BUDGET: u64 = 256 << 20;
/// Largest `p^{e+1}` enumerated by [`rp_distribution_exact`].
pub const RP_ENUMERATION_BUDGET: u64 = 10_000_000;
const ZETA_TAIL: f64 = 1e-13;

/// `ζ(n)`: closed forms for `n ∈ {2, 4, 6, 8}`, an Euler product otherwise.
pub fn zeta(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(domain("ζ(n) needs n >= 2"));
    }
    if let Some((num, den)) = zeta_pi_coefficient(n) {
        return Ok(PI.powi(n as i32) * num as f64 / den as f64);
    }
    // the tail Π_{p > P} is below Σ_{k > P} k^{-n} <= P^{1-n}/(n-1)
    let mut cutoff: u64 = 16;
    while (cutoff as f64).powi(1 - n as i32) / f64::from(n - 1) > ZETA_TAIL {
        cutoff *= 2;
    }
    let inv: f64 = arith::primes_up_to(cutoff)
        .into_iter()
        .map(|p| 1.0 - (p as f64).powi(-(n as i32)))
        .product();
    Ok(1.0 / inv)
}

/// `ζ(n) = (num/den) π^n` for small even `n`.
fn zeta_pi_coefficient(n: u32) -> Option<(u64, u64)> {
    match n {
        2 => Some((1, 6)),
        4 => Some((1, 90)),
        6 => Some((1, 945)),
        8 => Some((1, 9450)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SieveConfig {
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

fn check_progression(q: u64, r: u64, n: u32) -> Result<()> {
    if q == 0 {
        return Err(domain("q must be positive"));
    }
    if r >= q {
        return Err(domain(format!("r = {r} must be below q = {q}")));
    }
    if n < 2 {
        return Err(domain("n must be at least 2"));
    }
    Ok(())
}

fn integer_root(x: u64, n: u32) -> u64 {
    let mut r = (x as f64).powf(1.0 / f64::from(n)) as u64;
    while checked_pow(r + 1, n).is_some_and(|v| v <= x) {
        r += 1;
    }
    while r > 0 && checked_pow(r, n).is_none_or(|v| v > x) {
        r -= 1;
    }
    r
}

pub fn count_exact(x: u64, q: u64, r: u64, n: u32) -> Result<u64> {
    count_exact_with(x, q, r, n, &SieveConfig::default())
}

/// `#{a ∈ [-X, X] \ {0} : a ≡ r (mod q), a n-th-power-free}` by a segmented
/// sieve over `[1, X]`.
pub fn count_exact_with(x: u64, q: u64, r: u64, n: u32, config: &SieveConfig) -> Result<u64> {
    check_progression(q, r, n)?;
    if x == 0 {
        return Err(domain("X must be at least 1"));
    }
    if x > 1 << 62 {
        return Err(Error::SizeLimit(format!("X = {x} exceeds 2^62")));
    }
    let powers: Vec<u64> = arith::primes_up_to(integer_root(x, n))
        .into_iter()
        .map(|p| p.pow(n))
        .collect();
    let fixed = powers.len() as u64 * 8;
    let workers = rayon::current_num_threads() as u64;
    let segment = (config.memory_budget.saturating_sub(fixed) / workers).min(1 << 20);
    if segment < 1024 {
        return Err(Error::SizeLimit(format!(
            "memory budget of {} bytes is too small for X = {x}",
            config.memory_budget
        )));
    }
    let segments = x.div_ceil(segment);
    let neg_r = (q - r) % q;
    Ok((0..segments)
        .into_par_iter()
        .map(|s| {
            let lo = 1 + s * segment;
            let hi = (lo + segment - 1).min(x);
            let mut free = vec![true; (hi - lo + 1) as usize];
            for &pn in &powers {
                let mut m = lo.div_ceil(pn) * pn;
                while m <= hi {
                    free[(m - lo) as usize] = false;
                    m += pn;
                }
            }
            free.iter()
                .zip(lo..=hi)
                .filter(|(f, _)| **f)
                .map(|(_, b)| {
                    let c = b % q;
                    u64::from(c == r) + u64::from(c == neg_r)
                })
                .sum::<u64>()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Inadmissible,
    Weak,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdmissibilityWitness {
    pub p: u64,
    /// `v_p(r)`, capped at `alpha` when `p^alpha | r`.
    pub v: u32,
    pub alpha: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityVerdict {
    pub verdict: Verdict,
    pub witnesses: Vec<AdmissibilityWitness>,
}

fn class_valuations(r: u64, q: u64) -> Vec<AdmissibilityWitness> {
    arith::factor_u64(q)
        .into_iter()
        .map(|(p, alpha)| {
            let v = if r % p.pow(alpha) == 0 { alpha } else { vp_u64(r, p) };
            AdmissibilityWitness { p, v, alpha }
        })
        .collect()
}

pub fn admissibility(r: u64, q: u64, n: u32) -> Result<AdmissibilityVerdict> {
    check_progression(q, r, n)?;
    let witnesses = class_valuations(r, q);
    let verdict = if witnesses.iter().any(|w| w.alpha >= n && w.v >= n) {
        Verdict::Inadmissible
    } else if witnesses.iter().all(|w| w.v < w.alpha.min(n)) {
        Verdict::Strict
    } else {
        Verdict::Weak
    };
    Ok(AdmissibilityVerdict { verdict, witnesses })
}

/// `(2X/q) (1/ζ(n)) Π_{p|q} (1 - p^{-n})^{-1} Π_{p^α||q} (1 - [v_p(r) >= β] p^{β-n})`
/// with `β = min(α, n)`.
pub fn main_term(x: u64, q: u64, r: u64, n: u32) -> Result<f64> {
    check_progression(q, r, n)?;
    let mut value = 2.0 * x as f64 / q as f64 / zeta(n)?;
    for w in class_valuations(r, q) {
        let p = w.p as f64;
        value /= 1.0 - p.powi(-(n as i32));
        let beta = w.alpha.min(n);
        if w.v >= beta {
            value *= 1.0 - p.powi(beta as i32 - n as i32);
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub x: u64,
    pub q: u64,
    pub r: u64,
    pub n: u32,
    pub exact: u64,
    pub main_term: f64,
    /// `|exact - main| / main`; absent when the main term vanishes.
    pub relative_error: Option<f64>,
    pub admissibility: AdmissibilityVerdict,
}

pub fn count_report(x: u64, q: u64, r: u64, n: u32, config: &SieveConfig) -> Result<CountReport> {
    let exact = count_exact_with(x, q, r, n, config)?;
    let main = main_term(x, q, r, n)?;
    Ok(CountReport {
        x,
        q,
        r,
        n,
        exact,
        main_term: main,
        relative_error: (main > 0.0).then(|| (exact as f64 - main).abs() / main),
        admissibility: admissibility(r, q, n)?,
    })
}

/// A density `coefficient / unit` with `unit` either `pi^n` or `zeta(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    pub value: f64,
    pub coefficient: String,
    pub unit: String,
    pub symbolic: String,
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// Density of `{a : a mod M(n) ∈ R, a n-th-power-free}` among all integers.
pub fn density_shape_classes(n: u32, classes: &[u64]) -> Result<Density> {
    if n < 3 {
        return Err(domain("degree must be at least 3"));
    }
    let modulus = arith::modulus_m(u64::from(n))?;
    let primes: Vec<u64> = arith::factor_u64(u64::from(n)).into_iter().map(|(p, _)| p).collect();
    let set: BTreeSet<u64> = classes.iter().copied().collect();
    let offenders: Vec<u64> = set
        .iter()
        .copied()
        .filter(|&r| r >= modulus || primes.iter().any(|&p| r % (p * p) == 0))
        .collect();
    if !offenders.is_empty() {
        return Err(domain(format!(
            "classes {offenders:?} are not admissible mod {modulus} (need v_p(r) <= 1 for p | {n})"
        )));
    }
    let mut coefficient = BigRational::new(big(set.len() as u64), big(modulus));
    for &p in &primes {
        let pn = num_traits::pow(BigInt::from(p), n as usize);
        coefficient *= BigRational::new(pn.clone(), pn - BigInt::one());
    }
    let (unit, value) = match zeta_pi_coefficient(n) {
        Some((num, den)) => {
            coefficient *= BigRational::new(big(den), big(num));
            let c = coefficient.to_f64().expect("finite");
            (format!("pi^{n}"), c / PI.powi(n as i32))
        }
        None => {
            let c = coefficient.to_f64().expect("finite");
            (format!("zeta({n})"), c / zeta(n)?)
        }
    };
    let coefficient = coefficient.to_string();
    Ok(Density {
        value,
        symbolic: format!("{coefficient}/{unit}"),
        coefficient,
        unit,
    })
}

/// Classes mod `M(n)` with `v_p(r) <= 1` for every `p | n`, grouped by their
/// denominator exponents `k_{p,m}`.
pub fn shape_class_partition(n: u32) -> Result<BTreeMap<ShapeClass, Vec<u64>>> {
    let table = build_table(n)?;
    let primes: Vec<u64> = table.local_tables.iter().map(|t| t.p).collect();
    let mut out: BTreeMap<ShapeClass, Vec<u64>> = BTreeMap::new();
    for entry in &table.entries {
        if primes.iter().any(|&p| entry.residue % (p * p) == 0) {
            continue;
        }
        let shape = match (&entry.status, &entry.shape) {
            (ClassStatus::Shape, Some(s)) => s,
            _ => {
                return Err(Error::Internal(format!(
                    "admissible class {} has no shape",
                    entry.residue
                )))
            }
        };
        let mut key = shape.class();
        for local in &mut key.locals {
            local.beta = None;
        }
        out.entry(key).or_default().push(entry.residue);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RpRow {
    pub k: u32,
    /// Units `u mod p^{e+1}` with `v_p(u^{p-1} - 1) >= k`.
    pub count: u64,
    pub predicted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RpDistribution {
    pub p: u64,
    pub e: u32,
    pub modulus: u64,
    pub units: u64,
    pub rows: Vec<RpRow>,
    /// Observed `P(r_p = j)` for `j = 0..e-1`.
    pub probabilities: Vec<(u32, Ratio<u64>)>,
}

impl RpDistribution {
    pub fn matches(&self) -> bool {
        self.rows.iter().all(|r| r.count == r.predicted)
            && self
                .probabilities
                .iter()
                .all(|&(j, pr)| pr == Ratio::new(self.p - 1, self.p.pow(j + 1)))
    }
}

/// Valuation counts of `u^{p-1} - 1` over units mod `p^{e+1}`, capped at `e + 1`.
fn unit_valuation_counts(p: u64, e: u32) -> Result<(u64, Vec<u64>)> {
    let modulus = checked_pow(p, e + 1)
        .filter(|&m| m <= RP_ENUMERATION_BUDGET)
        .ok_or_else(|| Error::SizeLimit(format!("{p}^{} exceeds the enumeration budget", e + 1)))?;
    let mut at_least = vec![0u64; e as usize + 2];
    for u in (1..modulus).filter(|u| u % p != 0) {
        let diff = (pow_mod(u, p - 1, modulus) + modulus - 1) % modulus;
        let v = if diff == 0 { e + 1 } else { vp_u64(diff, p) };
        for slot in &mut at_least[..=v as usize] {
            *slot += 1;
        }
    }
    Ok((modulus, at_least))
}

pub fn rp_distribution_exact(p: u64, e: u32) -> Result<RpDistribution> {
    if p == 2 || !arith::is_prime(p) {
        return Err(domain(format!("{p} is not an odd prime")));
    }
    if e == 0 {
        return Err(domain("e must be at least 1"));
    }
    let (modulus, at_least) = unit_valuation_counts(p, e)?;
    let units = at_least[0];
    let rows = (1..=e + 1)
        .map(|k| RpRow {
            k,
            count: at_least[k as usize],
            predicted: (p - 1) * p.pow(e + 1 - k),
        })
        .collect();
    let probabilities = (0..e)
        .map(|j| {
            let exact = at_least[j as usize + 1] - at_least[j as usize + 2];
            (j, Ratio::new(exact, units))
        })
        .collect();
    Ok(RpDistribution { p, e, modulus, units, rows, probabilities })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WieferichSplit {
    pub p: u64,
    /// Proportion of units mod `p^2` with `r_p = 0`.
    pub r0: Ratio<u64>,
    pub r_ge1: Ratio<u64>,
    /// Counted by enumeration only, without the closed form.
    pub empirical: bool,
    /// Units whose valuation hit the enumeration precision.
    pub capped_units: Vec<u64>,
}

pub fn wieferich_split(p: u64) -> Result<WieferichSplit> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let modulus = p * p;
    let mut zero = 0;
    let mut units = 0;
    let mut capped_units = Vec::new();
    for u in (1..modulus).filter(|u| u % p != 0) {
        units += 1;
        let diff = (pow_mod(u, p - 1, modulus) + modulus - 1) % modulus;
        if diff == 0 {
            capped_units.push(u);
        } else if vp_u64(diff, p) == 1 {
            zero += 1;
        }
    }
    let observed = (Ratio::new(zero, units), Ratio::new(units - zero, units));
    if p == 2 {
        return Ok(WieferichSplit {
            p,
            r0: observed.0,
            r_ge1: observed.1,
            empirical: true,
            capped_units,
        });
    }
    let closed = (Ratio::new(p - 1, p), Ratio::new(1, p));
    if closed != observed {
        return Err(Error::Internal(format!("enumeration mod {modulus} gives {observed:?}")));
    }
    Ok(WieferichSplit {
        p,
        r0: closed.0,
        r_ge1: closed.1,
        empirical: false,
        capped_units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((zeta(2).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(3).unwrap() - 1.202_056_903_159_594_2).abs() < 1e-12);
        assert!((zeta(5).unwrap() - 1.036_927_755_143_37).abs() < 1e-12);
        assert!(zeta(1).is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(integer_root(1_000_000, 2), 1000);
        assert_eq!(integer_root(999_999, 2), 999);
        assert_eq!(integer_root(1 << 62, 3), 1_664_510);
        assert_eq!(integer_root(15, 4), 1);
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_exact(10, 1, 0, 2).unwrap(), 14);
        assert!(count_exact(10, 8, 8, 4).is_err());
        let tiny = SieveConfig { memory_budget: 100 };
        assert!(matches!(count_exact_with(10, 1, 0, 2, &tiny), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn admissibility_examples() {
        let v = |r, q| admissibility(r, q, 4).unwrap().verdict;
        assert_eq!(v(1, 8), Verdict::Strict);
        assert_eq!(v(4, 8), Verdict::Strict);
        assert_eq!(v(8, 16), Verdict::Strict);
        assert_eq!(v(0, 16), Verdict::Inadmissible);
        assert_eq!(v(0, 8), Verdict::Weak);
        assert_eq!(v(0, 32), Verdict::Inadmissible);
        assert_eq!(v(16, 32), Verdict::Inadmissible);
    }

    #[test]
    fn main_term_examples() {
        let x = 1_000_000;
        let expected = 2.0 * x as f64 / 8.0 * 90.0 / PI.powi(4) * 16.0 / 15.0;
        assert!((main_term(x, 8, 1, 4).unwrap() / expected - 1.0).abs() < 1e-12);
        let q1 = 2.0 * x as f64 / zeta(3).unwrap();
        assert!((main_term(x, 1, 0, 3).unwrap() / q1 - 1.0).abs() < 1e-12);
        // 16 | a forced: nothing survives
        assert_eq!(main_term(x, 32, 16, 4).unwrap(), 0.0);
    }

    #[test]
    fn density_examples() {
        let d = density_shape_classes(4, &[1]).unwrap();
        assert_eq!(d.symbolic, "12/pi^4");
        assert!((d.value / (12.0 / PI.powi(4)) - 1.0).abs() < 1e-12);
        assert_eq!(density_shape_classes(4, &[3, 7, 2, 6]).unwrap().symbolic, "48/pi^4");
        assert!(density_shape_classes(4, &[4]).is_err());
        assert!(density_shape_classes(4, &[8]).is_err());
        assert_eq!(density_shape_classes(9, &[1]).unwrap().unit, "zeta(9)");
    }

    #[test]
    fn partition_sizes() {
        let sizes = |n| {
            let mut v: Vec<usize> = shape_class_partition(n).unwrap().values().map(Vec::len).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(sizes(4), vec![1, 1, 4]);
        assert_eq!(sizes(6), vec![2, 4, 6, 12]);
        assert_eq!(sizes(9).len(), 3);
    }

    #[test]
    fn rp_examples() {
        let d = rp_distribution_exact(3, 1).unwrap();
        assert_eq!(d.rows[0].count, 6);
        assert_eq!(d.rows[1].count, 2);
        assert!(d.matches());
        let d = rp_distribution_exact(5, 1).unwrap();
        assert_eq!((d.units, d.rows[1].count), (20, 4));
        assert!(rp_distribution_exact(2, 1).is_err());
    }

    #[test]
    fn wieferich_examples() {
        let w = wieferich_split(5).unwrap();
        assert_eq!((w.r0, w.r_ge1), (Ratio::new(4, 5), Ratio::new(1, 5)));
        let w = wieferich_split(2).unwrap();
        assert!(w.empirical);
        assert_eq!(w.capped_units, vec![1]);
        assert_eq!(w.r0, Ratio::new(1, 2));
    }
}
