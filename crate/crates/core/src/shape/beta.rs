//! Reduced corrections `β_m mod p^{k_{p,m}}` for the quartic and sextic cases.
//!
//! Rows list the classes `a mod p^{e+1}` with nontrivial reductions; every
//! other class has all `k_{p,m} = 0` and therefore only trivial (modulus 1)
//! reductions.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// `β_m ≡ Σ coeffs[i] θ^i (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BetaReduction {
    pub m: u32,
    pub modulus: u64,
    /// `n - 1` coefficients; entries at indices `>= m` are zero.
    pub coeffs: Vec<u64>,
}

struct FixtureRow {
    classes: &'static [u64],
    /// `(m, modulus, coefficients of 1, θ, θ^2, ...)`
    betas: &'static [(u32, u64, &'static [u64])],
}

struct Fixture {
    n: u32,
    p: u64,
    local_modulus: u64,
    rows: &'static [FixtureRow],
}

const FIXTURES: &[Fixture] = &[
    Fixture {
        n: 4,
        p: 2,
        local_modulus: 8,
        rows: &[
            FixtureRow {
                classes: &[1],
                betas: &[(2, 2, &[1]), (3, 4, &[1, 1, 1])],
            },
            FixtureRow {
                classes: &[5],
                betas: &[(2, 2, &[1]), (3, 2, &[0, 1])],
            },
        ],
    },
    Fixture {
        n: 6,
        p: 2,
        local_modulus: 4,
        rows: &[FixtureRow {
            classes: &[1],
            betas: &[(3, 2, &[1]), (4, 2, &[0, 1]), (5, 2, &[0, 0, 1])],
        }],
    },
    Fixture {
        n: 6,
        p: 3,
        local_modulus: 9,
        rows: &[
            FixtureRow {
                classes: &[1],
                betas: &[(4, 3, &[1, 0, 1]), (5, 3, &[0, 1, 0, 1])],
            },
            FixtureRow {
                classes: &[8],
                betas: &[(4, 3, &[1, 0, 2]), (5, 3, &[0, 1, 0, 2])],
            },
        ],
    },
];

pub fn has_beta_fixture(n: u32, p: u64) -> bool {
    FIXTURES.iter().any(|f| f.n == n && f.p == p)
}

/// Reductions `β_1, …, β_{n-1}` for the class `a ≡ class (mod p^{e+1})`.
pub fn beta_fixture(n: u32, p: u64, class: u64) -> Result<Vec<BetaReduction>> {
    let fixture = FIXTURES
        .iter()
        .find(|f| f.n == n && f.p == p)
        .ok_or_else(|| Error::Unsupported(format!("no β fixture for n = {n}, p = {p}")))?;
    if class >= fixture.local_modulus {
        return Err(domain(format!(
            "class {class} is not reduced modulo {}",
            fixture.local_modulus
        )));
    }
    let row = fixture.rows.iter().find(|r| r.classes.contains(&class));
    let width = (n - 1) as usize;
    Ok((1..n)
        .map(|m| {
            let entry = row.and_then(|r| r.betas.iter().find(|&&(bm, _, _)| bm == m));
            let mut coeffs = vec![0; width];
            let modulus = match entry {
                Some(&(_, modulus, c)) => {
                    coeffs[..c.len()].copy_from_slice(c);
                    modulus
                }
                None => 1,
            };
            BetaReduction { m, modulus, coeffs }
        })
        .collect())
}
