//! Lookup table of shapes modulo `M(n) = n · rad(n)` and the sweeps that
//! check its period is exact.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, residue, vp_u64};
use crate::error::{domain, Error, Result};
use crate::shape::{self, BetaReduction, GlobalShape, LocalShape};

pub const DEFAULT_MAX_DEGREE: u32 = 60;

/// Representatives checked per class when building a table.
const SPOT_CHECKS: usize = 4;
const REPRESENTATIVE_SEARCH: u64 = 100_000;
/// Conflicts kept in a report; the total is always counted.
const MAX_REPORTED: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassStatus {
    /// Every member satisfying H has this shape; `v_p` is fixed by the class.
    Shape,
    /// `p^{e+1}` divides the class for some `p | n`: `v_p(a)` is not fixed,
    /// but all members satisfying H share the shape.
    HConditional,
    /// No member satisfies H.
    Excluded,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalEntry {
    pub residue: u64,
    pub status: ClassStatus,
    pub shape: Option<LocalShape>,
    pub representative: Option<i64>,
    pub reason: Option<String>,
}

/// Shapes at one prime, indexed by `a mod p^{e+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalTable {
    pub p: u64,
    pub e: u32,
    pub modulus: u64,
    pub entries: Vec<LocalEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableEntry {
    pub residue: u64,
    pub status: ClassStatus,
    pub shape: Option<GlobalShape>,
    /// Smallest positive member satisfying H.
    pub representative: Option<i64>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeTable {
    pub n: u32,
    pub modulus: u64,
    pub local_tables: Vec<LocalTable>,
    pub entries: Vec<TableEntry>,
}

/// Flat per-class record used for serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRecord {
    pub class: u64,
    pub status: ClassStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub locals: Vec<LocalRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalRecord {
    pub p: u64,
    pub e: u32,
    pub d: u32,
    pub k: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<BetaReduction>>,
}

impl ShapeTable {
    pub fn lookup(&self, a: i64) -> &TableEntry {
        &self.entries[residue(a, self.modulus) as usize]
    }

    pub fn local_table(&self, p: u64) -> Option<&LocalTable> {
        self.local_tables.iter().find(|t| t.p == p)
    }

    pub fn records(&self) -> Vec<TableRecord> {
        self.entries
            .iter()
            .map(|entry| TableRecord {
                class: entry.residue,
                status: entry.status,
                reason: entry.reason.clone(),
                locals: entry
                    .shape
                    .iter()
                    .flat_map(|s| s.locals.values())
                    .map(|l| LocalRecord {
                        p: l.p,
                        e: l.e,
                        d: l.d_p,
                        k: l.k.clone(),
                        beta: l.beta.clone(),
                    })
                    .collect(),
            })
            .collect()
    }
}

fn smallest_h_member(class: u64, modulus: u64, n: u32) -> Option<i64> {
    (0..REPRESENTATIVE_SEARCH)
        .map(|j| class + j * modulus)
        .filter(|&a| a > 0)
        .filter_map(|a| i64::try_from(a).ok())
        .find(|&a| shape::hypothesis_h(a, n))
}

fn local_table(n: u32, p: u64, e: u32) -> Result<LocalTable> {
    let modulus = p.pow(e + 1);
    let entries = (0..modulus)
        .map(|c| {
            let v = if c == 0 { e + 1 } else { vp_u64(c, p) };
            if v > 0 && v <= e && v % p as u32 == 0 {
                return Ok(LocalEntry {
                    residue: c,
                    status: ClassStatus::Excluded,
                    shape: None,
                    representative: None,
                    reason: Some(format!("v_{p}(a) = {v} is divisible by {p}")),
                });
            }
            let status = if v == e + 1 { ClassStatus::HConditional } else { ClassStatus::Shape };
            match smallest_h_member(c, modulus, n) {
                Some(a) => Ok(LocalEntry {
                    residue: c,
                    status,
                    shape: Some(shape::local_shape(a, n, p)?),
                    representative: Some(a),
                    reason: None,
                }),
                None => Ok(LocalEntry {
                    residue: c,
                    status: ClassStatus::Excluded,
                    shape: None,
                    representative: None,
                    reason: Some("no member satisfies H".into()),
                }),
            }
        })
        .collect::<Result<_>>()?;
    Ok(LocalTable { p, e, modulus, entries })
}

pub fn build_table(n: u32) -> Result<ShapeTable> {
    build_table_with_max(n, DEFAULT_MAX_DEGREE)
}

/// Builds the table prime by prime and glues the local tables by CRT.
pub fn build_table_with_max(n: u32, max_degree: u32) -> Result<ShapeTable> {
    if n < 3 || n > max_degree {
        return Err(domain(format!("degree {n} outside [3, {max_degree}]")));
    }
    let modulus = arith::modulus_m(u64::from(n))?;
    let local_tables = arith::factor_u64(u64::from(n))
        .into_iter()
        .map(|(p, e)| local_table(n, p, e))
        .collect::<Result<Vec<_>>>()?;

    let entries = (0..modulus)
        .into_par_iter()
        .map(|r| glue(n, modulus, r, &local_tables))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeTable { n, modulus, local_tables, entries })
}

fn glue(n: u32, modulus: u64, r: u64, local_tables: &[LocalTable]) -> Result<TableEntry> {
    let parts: Vec<&LocalEntry> = local_tables
        .iter()
        .map(|t| &t.entries[(r % t.modulus) as usize])
        .collect();
    if let Some(bad) = parts.iter().find(|e| e.status == ClassStatus::Excluded) {
        return Ok(TableEntry {
            residue: r,
            status: ClassStatus::Excluded,
            shape: None,
            representative: None,
            reason: bad.reason.clone(),
        });
    }
    let status = if parts.iter().any(|e| e.status == ClassStatus::HConditional) {
        ClassStatus::HConditional
    } else {
        ClassStatus::Shape
    };
    let glued = GlobalShape {
        n,
        locals: parts
            .iter()
            .map(|e| {
                let s = e.shape.clone().expect("non-excluded entries carry a shape");
                (s.p, s)
            })
            .collect(),
    };
    let mut representative = None;
    let mut checked = 0;
    for j in 0..REPRESENTATIVE_SEARCH {
        if checked == SPOT_CHECKS {
            break;
        }
        let Ok(a) = i64::try_from(r + j * modulus) else { break };
        if a == 0 || !shape::hypothesis_h(a, n) {
            continue;
        }
        representative.get_or_insert(a);
        let direct = shape::global_shape(a, n)?;
        if let Some((p, field)) = direct.first_difference(&glued) {
            return Err(Error::Internal(format!(
                "class {r} mod {modulus}: a = {a} differs from the glued shape at p = {p} ({field})"
            )));
        }
        checked += 1;
    }
    Ok(TableEntry { residue: r, status, shape: Some(glued), representative, reason: None })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub a: i64,
    pub a_prime: i64,
    pub prime: u64,
    pub field: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodReport {
    pub n: u32,
    pub bound: u64,
    pub modulus: u64,
    /// Distinct classes mod `M(n)` met by the sweep.
    pub classes_checked: usize,
    /// Values `a` satisfying H that were compared.
    pub values_checked: u64,
    pub conflict_count: u64,
    pub conflicts: Vec<Conflict>,
}

impl PeriodReport {
    pub fn passed(&self) -> bool {
        self.conflict_count == 0
    }
}

fn signed_range(bound: u64) -> impl ParallelIterator<Item = i64> {
    let b = bound as i64;
    (-b..=b).into_par_iter().filter(|&a| a != 0)
}

/// Compares the shape of every `a` with `|a| <= bound` satisfying H against
/// the table entry of its class.
pub fn verify_period(n: u32, bound: u64) -> Result<PeriodReport> {
    let table = build_table(n)?;
    verify_period_against(&table, bound)
}

pub fn verify_period_against(table: &ShapeTable, bound: u64) -> Result<PeriodReport> {
    let n = table.n;
    if bound < table.modulus || bound > i64::MAX as u64 / 2 {
        return Err(domain(format!("bound {bound} must lie in [M(n) = {}, 2^62)", table.modulus)));
    }
    let outcomes: Vec<(u64, Option<Conflict>)> = signed_range(bound)
        .map(|a| -> Result<Option<(u64, Option<Conflict>)>> {
            let f = arith::factorize(a)?;
            if shape::check_hypothesis_h(&f, n).is_err() {
                return Ok(None);
            }
            let s = shape::global_shape_factored(&f, n)?;
            let entry = table.lookup(a);
            let conflict = match &entry.shape {
                None => Some(Conflict {
                    a,
                    a_prime: a,
                    prime: 0,
                    field: format!("class {} is marked excluded", entry.residue),
                }),
                Some(expected) => s.first_difference(expected).map(|(prime, field)| Conflict {
                    a,
                    a_prime: entry.representative.unwrap_or(a),
                    prime,
                    field,
                }),
            };
            Ok(Some((entry.residue, conflict)))
        })
        .filter_map(|r| r.transpose())
        .collect::<Result<_>>()?;

    let mut classes = std::collections::BTreeSet::new();
    let mut conflicts = Vec::new();
    let mut conflict_count = 0;
    for (class, conflict) in &outcomes {
        classes.insert(*class);
        if let Some(c) = conflict {
            conflict_count += 1;
            if conflicts.len() < MAX_REPORTED {
                conflicts.push(c.clone());
            }
        }
    }
    Ok(PeriodReport {
        n,
        bound,
        modulus: table.modulus,
        classes_checked: classes.len(),
        values_checked: outcomes.len() as u64,
        conflict_count,
        conflicts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharpnessWitness {
    pub p: u64,
    pub e: u32,
    pub a: i64,
    pub a_prime: i64,
    /// `a ≡ a' (mod p^level)` but not modulo `p^{level+1}`.
    pub congruence_level: u32,
    pub d: u32,
    pub d_prime: u32,
    pub k: Vec<u32>,
    pub k_prime: Vec<u32>,
    /// First `m` with `k_{p,m}(a) != k_{p,m}(a')`.
    pub first_differing_m: u32,
}

const WITNESS_SEARCH: i64 = 10_000;

fn first_h_member(n: u32, base: i64, step: i64, p: u64) -> Result<i64> {
    (1..=WITNESS_SEARCH)
        .filter(|u| u % p as i64 != 0)
        .map(|u| base + step * u)
        .find(|&a| shape::hypothesis_h(a, n))
        .ok_or_else(|| Error::SearchExhausted(format!("no member of {base} + {step}·u satisfies H")))
}

/// Pair with `r_p(a) = t` and `r_p(a') = t + 1`: `a = 1 + p^{t+1} u`,
/// `a' = 1 + p^{t+2} u'` with `p ∤ u u'`.
pub fn find_jump_witness(n: u32, p: u64, t: u32) -> Result<SharpnessWitness> {
    if !arith::is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let e = vp_u64(u64::from(n), p);
    if e == 0 {
        return Err(domain(format!("{p} does not divide {n}")));
    }
    if t >= e {
        return Err(domain(format!("t = {t} must be below e = {e}")));
    }
    let step = |k: u32| {
        arith::checked_pow(p, k)
            .and_then(|x| i64::try_from(x).ok())
            .ok_or_else(|| Error::SizeLimit(format!("{p}^{k} does not fit")))
    };
    let a = first_h_member(n, 1, step(t + 1)?, p)?;
    let a_prime = first_h_member(n, 1, step(t + 2)?, p)?;
    let s = shape::local_shape(a, n, p)?;
    let s_prime = shape::local_shape(a_prime, n, p)?;
    let first_differing_m = (1..n)
        .find(|&m| s.k_at(m) != s_prime.k_at(m))
        .ok_or_else(|| Error::Internal(format!("{a} and {a_prime} share k-sequences at {p}")))?;
    Ok(SharpnessWitness {
        p,
        e,
        a,
        a_prime,
        congruence_level: t + 1,
        d: s.d_p,
        d_prime: s_prime.d_p,
        k: s.k,
        k_prime: s_prime.k,
        first_differing_m,
    })
}

/// Two members of one class mod `p^e` with different shapes at `p`.
pub fn find_sharpness_witness(n: u32, p: u64) -> Result<SharpnessWitness> {
    let e = vp_u64(u64::from(n), p);
    if e == 0 {
        return Err(domain(format!("{p} does not divide {n}")));
    }
    find_jump_witness(n, p, e - 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodRefutation {
    pub p: u64,
    pub candidate: u64,
    pub conflict: Option<Conflict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimalityReport {
    pub n: u32,
    pub bound: u64,
    pub modulus: u64,
    pub candidates: Vec<PeriodRefutation>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.candidates.iter().all(|c| c.conflict.is_some())
    }
}

/// For each `p | n`, searches `|a| <= bound` for two members of one class
/// mod `M(n)/p` with different shapes.
pub fn verify_minimality(n: u32, bound: u64) -> Result<MinimalityReport> {
    if n < 3 {
        return Err(domain("degree must be at least 3"));
    }
    let modulus = arith::modulus_m(u64::from(n))?;
    if bound < modulus || bound > i64::MAX as u64 / 2 {
        return Err(domain(format!("bound {bound} must lie in [M(n) = {modulus}, 2^62)")));
    }
    let candidates = arith::factor_u64(u64::from(n))
        .into_iter()
        .map(|(p, _)| {
            let candidate = modulus / p;
            Ok(PeriodRefutation { p, candidate, conflict: refute(n, candidate, bound)? })
        })
        .collect::<Result<_>>()?;
    Ok(MinimalityReport { n, bound, modulus, candidates })
}

fn refute(n: u32, period: u64, bound: u64) -> Result<Option<Conflict>> {
    let mut first: BTreeMap<u64, (i64, GlobalShape)> = BTreeMap::new();
    let b = bound as i64;
    for mag in 1..=b {
        for a in [mag, -mag] {
            if !shape::hypothesis_h(a, n) {
                continue;
            }
            let s = shape::global_shape(a, n)?;
            match first.entry(residue(a, period)) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert((a, s));
                }
                std::collections::btree_map::Entry::Occupied(o) => {
                    let (a0, s0) = o.get();
                    if let Some((prime, field)) = s0.first_difference(&s) {
                        return Ok(Some(Conflict { a: *a0, a_prime: a, prime, field }));
                    }
                }
            }
        }
    }
    Ok(None)
}
