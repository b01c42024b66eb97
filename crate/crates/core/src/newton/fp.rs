//! Dense polynomials over F_p, coefficients from low to high degree.

use crate::arith::{mul_mod, pow_mod};

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub(crate) fn derivative(f: &[u64], p: u64) -> Vec<u64> {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect(),
    )
}

fn rem(mut f: Vec<u64>, g: &[u64], p: u64) -> Vec<u64> {
    let lead_inv = pow_mod(*g.last().expect("nonzero divisor"), p - 2, p);
    while f.len() >= g.len() {
        let c = mul_mod(*f.last().unwrap(), lead_inv, p);
        let shift = f.len() - g.len();
        for (i, &gi) in g.iter().enumerate() {
            f[shift + i] = (f[shift + i] + p - mul_mod(c, gi, p)) % p;
        }
        f = trim(f);
    }
    f
}

pub(crate) fn gcd(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let r = rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Squarefree test: `gcd(f, f')` is a nonzero constant.
pub(crate) fn is_separable(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    if f.len() <= 1 {
        return true;
    }
    gcd(&f, &derivative(&f, p), p).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separability() {
        // y^2 + y + 1 over F_2 is irreducible
        assert!(is_separable(&[1, 1, 1], 2));
        // (y + 1)^2 = y^2 + 1 over F_2
        assert!(!is_separable(&[1, 0, 1], 2));
        // (y - 1)^2 = y^2 - 2y + 1 over F_5
        assert!(!is_separable(&[1, 3, 1], 5));
        // y^3 - 1 over F_3 = (y - 1)^3
        assert!(!is_separable(&[2, 0, 0, 1], 3));
        // degree 1
        assert!(is_separable(&[2, 1], 3));
    }
}
