//! Local and global shapes of the integral basis of `Q(θ)`, `θ^n = a`.
//!
//! For each prime `p | n` with `p^e || n` the local shape records the
//! denominator exponents `k_{p,m}` (`m = 1..n-1`) of the basis
//!
//! ```text
//! { 1, (θ^m + β_m) / (C_m(a) · ∏_{p|n} p^{k_{p,m}}) }
//! ```
//!
//! together with the reductions `β_m mod p^{k_{p,m}}` where a fixture table
//! is available (`n = 4` and `n = 6`). The exponents are driven by
//! `r_p(a) = v_p(a^{p-1} - 1) - 1` and `d_p(a) = min(r_p(a), e)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::arith::{self, FactoredInteger};
use crate::error::{domain, Error, Result};

mod beta;

pub use beta::{beta_fixture, has_beta_fixture, BetaReduction};

/// Extra p-adic digits carried beyond `p^e` when computing `r_p`.
pub const RP_EXTRA_DIGITS: u32 = 8;

/// `r_p(a)` together with a flag telling whether the valuation hit the
/// working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RpValue {
    pub value: i64,
    pub at_cap: bool,
}

/// Largest `B` with `p^B <= u64::MAX`.
fn max_precision(p: u64) -> u32 {
    let mut b = 0;
    let mut q: u64 = 1;
    while let Some(next) = q.checked_mul(p) {
        q = next;
        b += 1;
    }
    b
}

/// Checks hypothesis H and reports the first violating prime.
pub fn check_hypothesis_h(a: &FactoredInteger, n: u32) -> Result<()> {
    let violation = |prime: u64, reason: String| Error::HypothesisViolated {
        n,
        a: a.value() as i64,
        prime,
        reason,
    };
    if a.magnitude() == 0 {
        return Err(domain("a must be nonzero"));
    }
    for &(q, v) in a.factors() {
        if v >= n {
            return Err(violation(q, format!("v_{q}(a) = {v} >= {n}, a is not {n}-th-power-free")));
        }
        if n as u64 % q == 0 && v as u64 % q == 0 {
            return Err(violation(q, format!("{q} divides n and v_{q}(a) = {v}")));
        }
    }
    Ok(())
}

/// Hypothesis H: `a` is n-th-power-free and `p ∤ v_p(a)` whenever `p | n` and `p | a`.
pub fn hypothesis_h(a: i64, n: u32) -> bool {
    match arith::factorize(a) {
        Ok(f) => check_hypothesis_h(&f, n).is_ok(),
        Err(_) => false,
    }
}

/// `r_p(a)` computed at the largest precision that fits in a machine word.
pub fn r_p(a: i64, p: u64) -> Result<RpValue> {
    r_p_with_precision(a, p, max_precision(p))
}

/// `r_p(a)` computed with `a^{p-1} - 1` reduced modulo `p^precision`.
///
/// Returns `-1` when `p | a`. When the valuation reaches `precision`, the
/// result is `precision - 1` with `at_cap` set.
pub fn r_p_with_precision(a: i64, p: u64, precision: u32) -> Result<RpValue> {
    if a == 0 {
        return Err(domain("r_p(0) is undefined"));
    }
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    if a.unsigned_abs() % p == 0 {
        return Ok(RpValue {
            value: -1,
            at_cap: false,
        });
    }
    let precision = precision.clamp(1, max_precision(p));
    let modulus = p.pow(precision);
    let x = arith::pow_mod(arith::residue(a, modulus), p - 1, modulus);
    let diff = (x + modulus - 1) % modulus;
    let (v, at_cap) = if diff == 0 {
        (precision, true)
    } else {
        (arith::vp_u64(diff, p), false)
    };
    Ok(RpValue {
        value: i64::from(v) - 1,
        at_cap,
    })
}

/// `d_p(a) = min(r_p(a), e)`, clamped below at 0.
pub fn d_p(a: i64, p: u64, e: u32) -> Result<u32> {
    let r = r_p_with_precision(a, p, e + RP_EXTRA_DIGITS)?;
    Ok(clamp_d(r.value, e))
}

fn clamp_d(r: i64, e: u32) -> u32 {
    r.clamp(0, i64::from(e)) as u32
}

/// Largest `k` in `0..=d` with `m >= n - n/p^k`.
///
/// # Panics
///
/// Panics if `p^d` does not divide `n`.
pub fn k_pm(n: u32, p: u64, d: u32, m: u32) -> u32 {
    let n = u64::from(n);
    assert!(n % p.pow(d) == 0, "p^d must divide n");
    (0..=d)
        .rev()
        .find(|&k| u64::from(m) + n / p.pow(k) >= n)
        .unwrap_or(0)
}

/// `C_m(a) = ∏_j a_j^{⌊jm/n⌋}` over the squarefree decomposition of `a`.
pub fn c_m(a: i64, n: u32, m: u32) -> Result<u64> {
    let decomposition = arith::squarefree_decomposition(a, n)?;
    if m >= n {
        return Err(domain(format!("m = {m} must be below n = {n}")));
    }
    Ok(c_m_from(&decomposition, m))
}

fn c_m_from(decomposition: &arith::SquarefreeDecomposition, m: u32) -> u64 {
    let n = decomposition.n;
    (1..n)
        .map(|j| decomposition.part(j).pow(j * m / n))
        .product()
}

/// Per-prime record of the shape at `p | n`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalShape {
    pub p: u64,
    pub e: u32,
    pub v_p_a: u32,
    pub r_p: RpValue,
    pub d_p: u32,
    /// `k[m - 1] = k_{p,m}` for `m = 1..n-1`.
    pub k: Vec<u32>,
    pub beta: Option<Vec<BetaReduction>>,
}

impl LocalShape {
    pub fn is_ramified(&self) -> bool {
        self.v_p_a > 0
    }

    pub fn k_at(&self, m: u32) -> u32 {
        self.k[(m - 1) as usize]
    }

    /// The data that two shapes are compared on, without `r_p` and the exact `v_p(a)`.
    pub fn class(&self) -> LocalClass {
        LocalClass {
            p: self.p,
            k: self.k.clone(),
            beta: self
                .beta
                .as_ref()
                .map(|b| b.iter().filter(|r| r.modulus > 1).cloned().collect()),
        }
    }

    /// First field in which two local shapes at the same prime differ.
    pub fn first_difference(&self, other: &LocalShape) -> Option<String> {
        if self.d_p != other.d_p {
            return Some(format!("d_{}: {} vs {}", self.p, self.d_p, other.d_p));
        }
        if let Some(i) = (0..self.k.len()).find(|&i| self.k.get(i) != other.k.get(i)) {
            return Some(format!(
                "k_{{{},{}}}: {:?} vs {:?}",
                self.p,
                i + 1,
                self.k.get(i),
                other.k.get(i)
            ));
        }
        if self.k.len() != other.k.len() {
            return Some("degree".into());
        }
        if self.is_ramified() != other.is_ramified() {
            return Some(format!("v_{}(a) > 0: {} vs {}", self.p, self.is_ramified(), other.is_ramified()));
        }
        if self.beta != other.beta {
            return Some(format!("beta reductions at {}", self.p));
        }
        None
    }
}

impl PartialEq for LocalShape {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.first_difference(other).is_none()
    }
}

impl Eq for LocalShape {}

/// The tuple of local shapes over the primes dividing `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlobalShape {
    pub n: u32,
    pub locals: BTreeMap<u64, LocalShape>,
}

impl GlobalShape {
    pub fn local(&self, p: u64) -> Option<&LocalShape> {
        self.locals.get(&p)
    }

    /// Shape class: the k-sequences and nontrivial β reductions per prime.
    pub fn class(&self) -> ShapeClass {
        ShapeClass {
            locals: self.locals.values().map(LocalShape::class).collect(),
        }
    }

    /// First prime and field where two global shapes differ.
    pub fn first_difference(&self, other: &GlobalShape) -> Option<(u64, String)> {
        if self.n != other.n {
            return Some((0, format!("degree {} vs {}", self.n, other.n)));
        }
        for (p, local) in &self.locals {
            match other.locals.get(p) {
                Some(o) => {
                    if let Some(diff) = local.first_difference(o) {
                        return Some((*p, diff));
                    }
                }
                None => return Some((*p, "missing prime".into())),
            }
        }
        None
    }
}

/// Local shape class: `(k_{p,m})_m` plus the nontrivial `β` reductions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LocalClass {
    pub p: u64,
    pub k: Vec<u32>,
    pub beta: Option<Vec<BetaReduction>>,
}

/// Global shape class, ordered by prime.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ShapeClass {
    pub locals: Vec<LocalClass>,
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .locals
            .iter()
            .map(|l| {
                let ks: Vec<String> = l.k.iter().map(u32::to_string).collect();
                format!("p={}:({})", l.p, ks.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn check_degree(n: u32) -> Result<()> {
    if n < 3 {
        return Err(domain(format!("degree n = {n} must be at least 3")));
    }
    Ok(())
}

pub(crate) fn local_shape_factored(a: &FactoredInteger, n: u32, p: u64) -> Result<LocalShape> {
    let e = arith::vp_u64(u64::from(n), p);
    if e == 0 {
        return Err(domain(format!("{p} does not divide n = {n}")));
    }
    let signed = a.value() as i64;
    let v_p_a = a.valuation(p);
    let r_p = r_p_with_precision(signed, p, e + RP_EXTRA_DIGITS)?;
    if v_p_a == 0 && r_p.value < i64::from(e) && r_p.at_cap {
        return Err(Error::SizeLimit(format!(
            "p^{} does not fit in 64 bits; cannot resolve r_{p}",
            e + 1
        )));
    }
    let d_p = clamp_d(r_p.value, e);
    let k = (1..n).map(|m| k_pm(n, p, d_p, m)).collect();
    let beta = if has_beta_fixture(n, p) {
        let modulus = p.pow(e + 1);
        Some(beta_fixture(n, p, arith::residue(signed, modulus))?)
    } else {
        None
    };
    Ok(LocalShape {
        p,
        e,
        v_p_a,
        r_p,
        d_p,
        k,
        beta,
    })
}

/// Local p-shape of `Q(a^(1/n))` for a prime `p | n`.
pub fn local_shape(a: i64, n: u32, p: u64) -> Result<LocalShape> {
    check_degree(n)?;
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let f = arith::factorize(a)?;
    check_hypothesis_h(&f, n)?;
    local_shape_factored(&f, n, p)
}

pub(crate) fn global_shape_factored(a: &FactoredInteger, n: u32) -> Result<GlobalShape> {
    check_hypothesis_h(a, n)?;
    let locals = arith::factor_u64(u64::from(n))
        .into_iter()
        .map(|(p, _)| local_shape_factored(a, n, p).map(|s| (p, s)))
        .collect::<Result<_>>()?;
    Ok(GlobalShape { n, locals })
}

/// Global shape: one local shape per prime dividing `n`.
pub fn global_shape(a: i64, n: u32) -> Result<GlobalShape> {
    check_degree(n)?;
    global_shape_factored(&arith::factorize(a)?, n)
}

/// The numerator correction of one basis element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Correction {
    /// `D_m = 1`, the element is `θ^m`.
    None,
    /// `β_m` reduced modulo `∏ p^{k_{p,m}}`, glued from the per-prime fixtures.
    Reduced { modulus: u64, coeffs: Vec<u64> },
    /// No fixture covers this element.
    Unknown,
}

/// One element `(θ^m + β_m) / D_m` of the integral basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub m: u32,
    pub c_m: u64,
    /// `(p, k_{p,m})` for every `p | n`.
    pub prime_part: Vec<(u64, u32)>,
    pub denominator: u64,
    pub correction: Correction,
}

impl BasisElement {
    pub fn numerator(&self) -> String {
        let lead = theta_power(self.m);
        match &self.correction {
            Correction::None => lead,
            Correction::Unknown => format!("{lead} + β_{}", self.m),
            Correction::Reduced { coeffs, .. } => {
                let mut terms = vec![lead];
                for (i, &c) in coeffs.iter().enumerate().rev() {
                    if c == 0 {
                        continue;
                    }
                    let power = theta_power(i as u32);
                    terms.push(match (c, i) {
                        (_, 0) => c.to_string(),
                        (1, _) => power,
                        _ => format!("{c}{power}"),
                    });
                }
                terms.join(" + ")
            }
        }
    }
}

fn theta_power(i: u32) -> String {
    match i {
        0 => "1".into(),
        1 => "θ".into(),
        _ => format!("θ^{i}"),
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "({})/{}", self.numerator(), self.denominator)
        }
    }
}

/// Chinese remainder of `x ≡ r_i (mod m_i)` for pairwise coprime moduli.
fn crt(residues: &[(u64, u64)]) -> u64 {
    let mut x: u128 = 0;
    let mut modulus: u128 = 1;
    for &(r, m) in residues {
        let m = u128::from(m);
        // find t with x + modulus*t ≡ r (mod m)
        let t = (0..m)
            .find(|t| (x + modulus * t) % m == u128::from(r) % m)
            .expect("moduli are coprime");
        x += modulus * t;
        modulus *= m;
    }
    x as u64
}

/// Denominators and numerators of the basis `{1, (θ^m + β_m)/D_m}`.
pub fn basis_description(a: i64, n: u32) -> Result<Vec<BasisElement>> {
    check_degree(n)?;
    let f = arith::factorize(a)?;
    let shape = global_shape_factored(&f, n)?;
    let decomposition = arith::decompose(f.factors(), n)
        .ok_or_else(|| domain(format!("{a} is not {n}-th-power-free")))?;
    let mut out = Vec::with_capacity((n - 1) as usize);
    for m in 1..n {
        let c = c_m_from(&decomposition, m);
        let prime_part: Vec<(u64, u32)> = shape.locals.values().map(|l| (l.p, l.k_at(m))).collect();
        let p_power: u64 = prime_part.iter().map(|&(p, k)| p.pow(k)).product();
        let denominator = c * p_power;
        let correction = if denominator == 1 {
            Correction::None
        } else if c == 1 {
            glued_correction(&shape, m, n).unwrap_or(Correction::Unknown)
        } else {
            Correction::Unknown
        };
        out.push(BasisElement {
            m,
            c_m: c,
            prime_part,
            denominator,
            correction,
        });
    }
    Ok(out)
}

fn glued_correction(shape: &GlobalShape, m: u32, n: u32) -> Option<Correction> {
    let mut pieces = Vec::new();
    for local in shape.locals.values() {
        if local.k_at(m) == 0 {
            continue;
        }
        let beta = local.beta.as_ref()?.iter().find(|b| b.m == m)?;
        pieces.push(beta);
    }
    let modulus: u64 = pieces.iter().map(|b| b.modulus).product();
    let coeffs = (0..(n - 1) as usize)
        .map(|i| {
            let residues: Vec<(u64, u64)> = pieces.iter().map(|b| (b.coeffs[i], b.modulus)).collect();
            crt(&residues)
        })
        .collect();
    Some(Correction::Reduced { modulus, coeffs })
}
