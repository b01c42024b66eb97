//! Exact integer primitives: factorization, p-adic valuations, radicals,
//! Möbius, power-free tests and the squarefree decomposition of an integer.
//!
//! Everything here works on machine integers. Magnitudes are bounded by
//! [`DEFAULT_MAGNITUDE_BOUND`] (2^63) unless a [`Factorizer`] with a smaller
//! bound is used.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Error, Result};

pub const DEFAULT_MAGNITUDE_BOUND: u64 = 1 << 63;

/// Primes below this limit are kept in a cached table and used for trial division.
const SMALL_PRIME_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// An integer together with its full prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactoredInteger {
    sign: Sign,
    magnitude: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn magnitude(&self) -> u64 {
        self.magnitude
    }

    /// `(prime, exponent)` pairs sorted by prime.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in the factorization (0 when `p` does not divide).
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn value(&self) -> i128 {
        i128::from(self.sign.as_i8()) * i128::from(self.magnitude)
    }

    /// Product of `prime^exponent`; used to check the factorization invariant.
    pub fn reassemble(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| u128::from(p).pow(e))
            .product()
    }
}

/// Factorizer with a configurable magnitude bound.
#[derive(Debug, Clone, Copy)]
pub struct Factorizer {
    bound: u64,
}

impl Default for Factorizer {
    fn default() -> Self {
        Self {
            bound: DEFAULT_MAGNITUDE_BOUND,
        }
    }
}

impl Factorizer {
    pub fn with_bound(bound: u64) -> Self {
        Self { bound }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn factorize(&self, x: i64) -> Result<FactoredInteger> {
        if x == 0 {
            return Err(domain("cannot factorize 0"));
        }
        let magnitude = x.unsigned_abs();
        if magnitude > self.bound {
            return Err(Error::SizeLimit(format!(
                "|{x}| exceeds the factorization bound {}",
                self.bound
            )));
        }
        let sign = if x < 0 { Sign::Negative } else { Sign::Positive };
        Ok(FactoredInteger {
            sign,
            magnitude,
            factors: factor_u64(magnitude),
        })
    }
}

pub fn factorize(x: i64) -> Result<FactoredInteger> {
    Factorizer::default().factorize(x)
}

/// Factorization of a positive `u64` as sorted `(prime, exponent)` pairs.
pub(crate) fn factor_u64(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if m <= 1 {
        return out;
    }
    for &p in small_primes() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if m > 1 {
        // every remaining prime factor is >= SMALL_PRIME_LIMIT
        if m < SMALL_PRIME_LIMIT * SMALL_PRIME_LIMIT || is_prime(m) {
            out.push((m, 1));
        } else {
            let mut large = Vec::new();
            split_large(m, &mut large);
            large.sort_unstable();
            for q in large {
                match out.last_mut() {
                    Some((last, e)) if *last == q => *e += 1,
                    _ => out.push((q, 1)),
                }
            }
        }
    }
    out
}

fn split_large(m: u64, acc: &mut Vec<u64>) {
    if m == 1 {
        return;
    }
    if is_prime(m) {
        acc.push(m);
        return;
    }
    let d = pollard_brent(m);
    split_large(d, acc);
    split_large(m / d, acc);
}

/// Nontrivial divisor of an odd composite `m` with no small factors.
fn pollard_brent(m: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, m) + c) % m;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x);
            y = f(f(y));
            g = gcd(x.abs_diff(y), m);
        }
        if g != m {
            return g;
        }
        c += 1;
    }
}

pub(crate) fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(SMALL_PRIME_LIMIT))
}

/// All primes `<= limit`, by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Deterministic primality test for the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Canonical representative of `a mod q` in `[0, q)`.
pub fn residue(a: i64, q: u64) -> u64 {
    i128::from(a).rem_euclid(i128::from(q)) as u64
}

/// `p^k` if it fits in a `u64`.
pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    p.checked_pow(k)
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(domain(format!("{p} is not prime")))
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp(x: i64, p: u64) -> Result<u32> {
    if x == 0 {
        return Err(domain("v_p(0) is infinite"));
    }
    require_prime(p)?;
    Ok(vp_u64(x.unsigned_abs(), p))
}

/// Valuation of a positive magnitude; `m` must be nonzero.
pub(crate) fn vp_u64(mut m: u64, p: u64) -> u32 {
    debug_assert!(m != 0);
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

/// Product of the distinct primes dividing `n`. `radical(1) = 1`.
pub fn radical(n: u64) -> u64 {
    factor_u64(n).iter().map(|&(p, _)| p).product()
}

/// `M(n) = n * rad(n)`, the product of `p^(e_p + 1)` over `p^e_p || n`.
pub fn modulus_m(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(domain("M(0) is undefined"));
    }
    n.checked_mul(radical(n))
        .ok_or_else(|| Error::SizeLimit(format!("M({n}) overflows u64")))
}

/// True iff no prime `q` has `v_q(a) >= n`. Zero is never power-free.
pub fn is_nth_power_free(a: i64, n: u32) -> bool {
    if a == 0 {
        return false;
    }
    factor_u64(a.unsigned_abs()).iter().all(|&(_, e)| e < n)
}

/// `|a| = prod_j a_j^j` with the `a_j` squarefree and pairwise coprime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquarefreeDecomposition {
    pub n: u32,
    /// `parts[j - 1] = a_j` for `j = 1..n-1`.
    pub parts: Vec<u64>,
}

impl SquarefreeDecomposition {
    /// `a_j` for `1 <= j <= n - 1`.
    pub fn part(&self, j: u32) -> u64 {
        self.parts[(j - 1) as usize]
    }
}

pub fn squarefree_decomposition(a: i64, n: u32) -> Result<SquarefreeDecomposition> {
    if a == 0 {
        return Err(domain("a must be nonzero"));
    }
    if n < 2 {
        return Err(domain(format!("degree {n} must be at least 2")));
    }
    decompose(&factor_u64(a.unsigned_abs()), n)
        .ok_or_else(|| domain(format!("{a} is not {n}-th-power-free")))
}

pub(crate) fn decompose(factors: &[(u64, u32)], n: u32) -> Option<SquarefreeDecomposition> {
    let mut parts = vec![1u64; (n - 1) as usize];
    for &(p, e) in factors {
        if e >= n {
            return None;
        }
        parts[(e - 1) as usize] *= p;
    }
    Some(SquarefreeDecomposition { n, parts })
}

/// Möbius function; `mobius(0)` is taken as 0.
pub fn mobius(d: u64) -> i8 {
    if d == 0 {
        return 0;
    }
    let factors = factor_u64(d);
    if factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `v_p(binomial(n, i))` as the number of carries when adding `i` and
/// `n - i` in base `p`.
///
/// # Panics
///
/// Panics if `i > n` or `p < 2`.
pub fn kummer_binomial_valuation(n: u64, i: u64, p: u64) -> u32 {
    assert!(i <= n, "binomial({n}, {i}) is zero");
    assert!(p >= 2, "base must be at least 2");
    let (mut x, mut y) = (i, n - i);
    let mut carry = 0u64;
    let mut carries = 0;
    while x > 0 || y > 0 || carry > 0 {
        let digit = x % p + y % p + carry;
        carry = u64::from(digit >= p);
        carries += carry as u32;
        x /= p;
        y /= p;
    }
    carries
}
