use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use pureshape::arith::{self, factorize, pow_mod};
use pureshape::count::{self, SieveConfig};
use pureshape::newton::{self, Branch};
use pureshape::shape::{self, Correction};
use pureshape::table::{self, ClassStatus};
use pureshape::{disc, Error, Result};

mod output;

use output::{emit, Format, Outcome};

/// Environment variable giving the sieve memory budget in MiB.
const MEMORY_ENV: &str = "PURESHAPE_MEMORY_MB";

#[derive(Parser)]
#[command(name = "pureshape", version, about = "Integral basis shapes of pure fields Q(a^(1/n))")]
struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local shapes and the integral basis of Q(a^(1/n))
    Shape {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
    },
    /// Shape of every class modulo M(n) = n rad(n)
    Table {
        #[arg(long)]
        n: u32,
        /// Write one JSON record per class to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that the shape depends only on a mod M(n) for |a| <= bound
    VerifyPeriod {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Pairs congruent mod p^e with different shapes at p
    Sharpness {
        #[arg(long)]
        n: u32,
        /// Defaults to every prime dividing n
        #[arg(long)]
        p: Option<u64>,
    },
    /// Refute every period M(n)/p with an explicit pair
    Minimality {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Count n-th-power-free a in [-X, X] with a = r mod q
    Count {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        bound: u64,
    },
    /// Density of a union of classes mod M(n); all shape classes if omitted
    Density {
        #[arg(long)]
        n: u32,
        #[arg(long, value_delimiter = ',')]
        classes: Vec<u64>,
    },
    /// Distribution of r_p over units mod p^{e+1}
    RpDist {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
    },
    /// Newton polygon of x^n - a with respect to x - u at p
    Newton {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        p: u64,
    },
    /// p-regularity of x^n - a, with the Wieferich test when p || n
    Monogenic {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        p: u64,
    },
    /// v_p of the field discriminant
    Disc {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        p: u64,
    },
}

const SHAPE_FORMULAS: &[&str] = &[
    "r_p = v_p(a^(p-1) - 1) - 1",
    "d_p = min(r_p, e_p)",
    "k_{p,m} = max{k <= d_p : m >= n - n/p^k}",
    "D_m = C_m * prod_{p|n} p^{k_{p,m}}",
];
const TABLE_FORMULAS: &[&str] = &["M(n) = n * rad(n)", "d_p depends on a mod p^(e_p+1)", "CRT over p | n"];
const COUNT_FORMULAS: &[&str] = &[
    "main = (2X/q) / zeta(n) * prod_{p|q} (1 - p^-n)^-1 * prod_{p^alpha||q} (1 - [v_p(r) >= min(alpha,n)] p^(min(alpha,n)-n))",
];
const DENSITY_FORMULAS: &[&str] = &["density = |R| / M(n) * prod_{p|n} p^n/(p^n - 1) / zeta(n)"];
const RP_FORMULAS: &[&str] = &["#{u : v_p(u^(p-1) - 1) >= k} = (p-1) p^(e+1-k)", "P(r_p = j) = (p-1)/p^(j+1)"];
const NEWTON_FORMULAS: &[&str] = &["x^n - a = sum_i binom(n,i) u^(n-i) (x-u)^i - a", "phi = x when p | a"];
const MONOGENIC_FORMULAS: &[&str] = &[
    "regular = separable residuals and no lattice points under the polygon",
    "e_p = 1: regular iff a^(p-1) != 1 mod p^2",
];
const DISC_FORMULAS: &[&str] = &["v_p(d_K) = n e - 2 n_p sum_{j=1}^{t} p^(e-j), t = d_p"];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let (name, params, provenance, outcome) = match cli.command {
        Command::Shape { n, a } => ("shape", json!({"n": n, "a": a}), SHAPE_FORMULAS, cmd_shape(n, a)),
        Command::Table { n, out } => (
            "table",
            json!({"n": n, "out": out.as_ref().map(|p| p.display().to_string())}),
            TABLE_FORMULAS,
            cmd_table(n, out),
        ),
        Command::VerifyPeriod { n, bound } => (
            "verify-period",
            json!({"n": n, "bound": bound}),
            TABLE_FORMULAS,
            cmd_verify_period(n, bound),
        ),
        Command::Sharpness { n, p } => ("sharpness", json!({"n": n, "p": p}), SHAPE_FORMULAS, cmd_sharpness(n, p)),
        Command::Minimality { n, bound } => (
            "minimality",
            json!({"n": n, "bound": bound}),
            TABLE_FORMULAS,
            cmd_minimality(n, bound),
        ),
        Command::Count { n, q, r, bound } => (
            "count",
            json!({"n": n, "q": q, "r": r, "bound": bound}),
            COUNT_FORMULAS,
            cmd_count(n, q, r, bound),
        ),
        Command::Density { n, classes } => (
            "density",
            json!({"n": n, "classes": classes}),
            DENSITY_FORMULAS,
            cmd_density(n, &classes),
        ),
        Command::RpDist { p, e } => ("rp-dist", json!({"p": p, "e": e}), RP_FORMULAS, cmd_rp_dist(p, e)),
        Command::Newton { n, a, p } => (
            "newton",
            json!({"n": n, "a": a, "p": p}),
            NEWTON_FORMULAS,
            cmd_newton(n, a, p),
        ),
        Command::Monogenic { n, a, p } => (
            "monogenic",
            json!({"n": n, "a": a, "p": p}),
            MONOGENIC_FORMULAS,
            cmd_monogenic(n, a, p),
        ),
        Command::Disc { n, a, p } => ("disc", json!({"n": n, "a": a, "p": p}), DISC_FORMULAS, cmd_disc(n, a, p)),
    };
    emit(name, params, provenance, outcome, format)
}

fn tuple(xs: &[u32]) -> String {
    let parts: Vec<String> = xs.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

#[derive(Serialize)]
struct BasisRow<'a> {
    #[serde(flatten)]
    element: &'a shape::BasisElement,
    numerator: String,
}

fn cmd_shape(n: u32, a: i64) -> Result<Outcome> {
    let shape = shape::global_shape(a, n)?;
    let basis = shape::basis_description(a, n)?;
    let mut text = format!("n = {n}, a = {a}\n");
    for local in shape.locals.values() {
        let _ = writeln!(
            text,
            "p = {}: e = {}, v_p(a) = {}, r_p = {}, d_p = {}, k = {}",
            local.p,
            local.e,
            local.v_p_a,
            local.r_p.value,
            local.d_p,
            tuple(&local.k)
        );
    }
    let _ = writeln!(text, "{:>4} {:>8} {:>8}  element", "m", "C_m", "D_m");
    for b in &basis {
        let _ = writeln!(text, "{:>4} {:>8} {:>8}  {}", b.m, b.c_m, b.denominator, b);
        if b.correction == Correction::Unknown {
            let _ = writeln!(text, "{:>23}β_{} not tabulated", "", b.m);
        }
    }
    let rows: Vec<BasisRow> = basis.iter().map(|b| BasisRow { element: b, numerator: b.numerator() }).collect();
    Ok(Outcome::new(json!({"shape": shape, "basis": rows}), text))
}

fn status_name(status: ClassStatus) -> &'static str {
    match status {
        ClassStatus::Shape => "shape",
        ClassStatus::HConditional => "h_conditional",
        ClassStatus::Excluded => "excluded",
    }
}

fn cmd_table(n: u32, out: Option<PathBuf>) -> Result<Outcome> {
    let table = table::build_table(n)?;
    let records = table.records();
    let mut text = format!("n = {n}, M(n) = {}\n", table.modulus);
    for r in &records {
        let locals: Vec<String> = r.locals.iter().map(|l| format!("p={} d={} k={}", l.p, l.d, tuple(&l.k))).collect();
        let line = format!("{:>6}  {:<13}  {}", r.class, status_name(r.status), locals.join("  "));
        let _ = writeln!(text, "{}", line.trim_end());
    }
    let result = match out {
        Some(path) => {
            let mut lines = String::new();
            for r in &records {
                lines.push_str(&serde_json::to_string(r).expect("records serialize"));
                lines.push('\n');
            }
            fs::write(&path, lines).map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?;
            json!({"n": n, "modulus": table.modulus, "record_count": records.len(), "out": path.display().to_string()})
        }
        None => json!({"n": n, "modulus": table.modulus, "record_count": records.len(), "records": records}),
    };
    Ok(Outcome::new(result, text))
}

fn cmd_verify_period(n: u32, bound: u64) -> Result<Outcome> {
    let report = table::verify_period(n, bound)?;
    let mut text = format!(
        "n = {n}, M(n) = {}, |a| <= {bound}: {} values in {} classes, {} conflicts\n",
        report.modulus, report.values_checked, report.classes_checked, report.conflict_count
    );
    for c in &report.conflicts {
        let _ = writeln!(text, "  {} vs {} at p = {}: {}", c.a, c.a_prime, c.prime, c.field);
    }
    let code = if report.passed() { output::OK } else { output::CONFLICT };
    Ok(Outcome::new(&report, text).with_code(code))
}

fn cmd_sharpness(n: u32, p: Option<u64>) -> Result<Outcome> {
    let primes: Vec<u64> = match p {
        Some(p) => vec![p],
        None => factorize(i64::from(n))?.primes().collect(),
    };
    let witnesses = primes
        .into_iter()
        .map(|p| table::find_sharpness_witness(n, p))
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for w in &witnesses {
        let _ = writeln!(
            text,
            "p = {}: {} = {} mod {}^{}, d = {} vs {}, k = {} vs {}, first m = {}",
            w.p,
            w.a,
            w.a_prime,
            w.p,
            w.congruence_level,
            w.d,
            w.d_prime,
            tuple(&w.k),
            tuple(&w.k_prime),
            w.first_differing_m
        );
    }
    Ok(Outcome::new(json!({"n": n, "witnesses": witnesses}), text))
}

fn cmd_minimality(n: u32, bound: u64) -> Result<Outcome> {
    let report = table::verify_minimality(n, bound)?;
    let mut text = format!("n = {n}, M(n) = {}\n", report.modulus);
    for c in &report.candidates {
        match &c.conflict {
            Some(x) => {
                let _ = writeln!(text, "  {} refuted: {} vs {} at p = {}: {}", c.candidate, x.a, x.a_prime, x.prime, x.field);
            }
            None => {
                let _ = writeln!(text, "  {} not refuted for |a| <= {bound}", c.candidate);
            }
        }
    }
    let code = if report.passed() { output::OK } else { output::CONFLICT };
    Ok(Outcome::new(&report, text).with_code(code))
}

fn sieve_config() -> Result<SieveConfig> {
    match std::env::var(MEMORY_ENV) {
        Ok(v) => {
            let mb: u64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("{MEMORY_ENV} = {v:?} is not a whole number of MiB")))?;
            Ok(SieveConfig { memory_budget: mb << 20 })
        }
        Err(_) => Ok(SieveConfig::default()),
    }
}

fn cmd_count(n: u32, q: u64, r: u64, bound: u64) -> Result<Outcome> {
    let report = count::count_report(bound, q, r, n, &sieve_config()?)?;
    let rel = report.relative_error.map_or("n/a".to_string(), |e| format!("{e:.3e}"));
    let text = format!(
        "n = {n}, a = {r} mod {q}, |a| <= {bound}: exact {}, main term {:.6}, relative error {rel}, {:?}\n",
        report.exact, report.main_term, report.admissibility.verdict
    );
    Ok(Outcome::new(&report, text))
}

fn cmd_density(n: u32, classes: &[u64]) -> Result<Outcome> {
    if !classes.is_empty() {
        let d = count::density_shape_classes(n, classes)?;
        let text = format!("{} ≈ {:.15}\n", d.symbolic, d.value);
        return Ok(Outcome::new(json!({"classes": classes, "density": d}), text));
    }
    let modulus = arith::modulus_m(u64::from(n))?;
    let mut text = format!("n = {n}, M(n) = {modulus}\n");
    let mut rows = Vec::new();
    for (class, residues) in count::shape_class_partition(n)? {
        let d = count::density_shape_classes(n, &residues)?;
        let _ = writeln!(text, "  {class}  {} classes  {} ≈ {:.15}", residues.len(), d.symbolic, d.value);
        rows.push(json!({"shape": class.to_string(), "size": residues.len(), "residues": residues, "density": d}));
    }
    Ok(Outcome::new(json!({"n": n, "modulus": modulus, "partition": rows}), text))
}

fn cmd_rp_dist(p: u64, e: u32) -> Result<Outcome> {
    let dist = count::rp_distribution_exact(p, e)?;
    let split = count::wieferich_split(p)?;
    let mut text = format!("p = {p}, e = {e}, units mod {}: {}\n", dist.modulus, dist.units);
    let _ = writeln!(text, "{:>4} {:>12} {:>12}", "k", "count", "predicted");
    for row in &dist.rows {
        let _ = writeln!(text, "{:>4} {:>12} {:>12}", row.k, row.count, row.predicted);
    }
    let _ = writeln!(text, "P(r_p = 0) = {}, P(r_p >= 1) = {}", split.r0, split.r_ge1);
    let ratio = |r: &dyn std::fmt::Display| r.to_string();
    let probabilities: Vec<Value> = dist
        .probabilities
        .iter()
        .map(|(j, pr)| json!({"j": j, "probability": ratio(pr)}))
        .collect();
    let result = json!({
        "p": p,
        "e": e,
        "modulus": dist.modulus,
        "units": dist.units,
        "rows": dist.rows,
        "probabilities": probabilities,
        "matches": dist.matches(),
        "wieferich": {"r0": ratio(&split.r0), "r_ge1": ratio(&split.r_ge1), "empirical": split.empirical},
    });
    Ok(Outcome::new(result, text))
}

fn polygon_json(poly: &newton::NewtonPolygon) -> Value {
    let sides: Vec<Value> = poly
        .sides
        .iter()
        .zip(&poly.residuals)
        .map(|(s, res)| {
            json!({
                "start": s.start,
                "end": s.end,
                "slope": s.slope.to_string(),
                "height": s.height,
                "length": s.length,
                "degree": s.degree,
                "residual": res,
            })
        })
        .collect();
    json!({"points": poly.points, "sides": sides, "order1_index": poly.order1_index()})
}

fn polygon_text(poly: &newton::NewtonPolygon) -> String {
    let mut text = String::new();
    for (s, res) in poly.sides.iter().zip(&poly.residuals) {
        let _ = writeln!(
            text,
            "  ({},{}) -> ({},{})  slope {}  degree {}  residual {:?}",
            s.start.0, s.start.1, s.end.0, s.end.1, s.slope, s.degree, res
        );
    }
    text
}

fn branch_text(branch: Branch) -> String {
    match branch {
        Branch::Unit { u } => format!("phi = x - {u}"),
        Branch::Ramified => "phi = x".to_string(),
    }
}

fn cmd_newton(n: u32, a: i64, p: u64) -> Result<Outcome> {
    let expansion = newton::phi_expansion(a, n, p)?;
    let poly = newton::newton_polygon(&expansion)?;
    let mut text = format!("n = {n}, a = {a}, p = {p}, {}\n", branch_text(expansion.branch));
    text.push_str(&polygon_text(&poly));
    let mut result = polygon_json(&poly);
    result["branch"] = json!(expansion.branch);
    Ok(Outcome::new(result, text))
}

fn cmd_monogenic(n: u32, a: i64, p: u64) -> Result<Outcome> {
    let e = factorize(i64::from(n))?.valuation(p);
    let wieferich = (e == 1 && a % p as i64 != 0).then(|| {
        let modulus = p * p;
        let power = pow_mod(arith::residue(a, modulus), p - 1, modulus);
        (modulus, power)
    });
    // without a linear key polynomial only the congruence test is available
    let verdict = match newton::is_p_regular_order1(a, n, p) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) if wieferich.is_some() => None,
        Err(err) => return Err(err),
    };
    let regular = match (&verdict, wieferich) {
        (Some(v), _) => v.regular,
        (None, Some((_, power))) => power != 1,
        (None, None) => unreachable!("unsupported without a congruence test was returned above"),
    };
    let label = if regular { "regular" } else { "not regular" };
    let mut text = format!("n = {n}, a = {a}, p = {p}: {label}\n");
    if let Some((modulus, power)) = wieferich {
        let _ = writeln!(text, "a^{} = {power} mod {modulus}", p - 1);
    }
    match &verdict {
        Some(v) => {
            let _ = writeln!(
                text,
                "residuals separable: {}, order-1 index {}",
                v.residuals_separable, v.order1_index
            );
            text.push_str(&polygon_text(&v.polygon));
        }
        None => text.push_str("no linear factor mod p, verdict from the congruence\n"),
    }
    let result = json!({
        "verdict": label,
        "regular": regular,
        "method": if verdict.is_some() { "newton" } else { "wieferich" },
        "e_p": e,
        "wieferich": wieferich.map(|(modulus, power)| json!({
            "modulus": modulus,
            "power": power,
            "congruent_to_one": power == 1,
            "regular": power != 1,
        })),
        "newton": verdict.as_ref().map(|v| json!({
            "regular": v.regular,
            "residuals_separable": v.residuals_separable,
            "order1_index": v.order1_index,
            "non_separable": v.non_separable,
            "polygon": polygon_json(&v.polygon),
        })),
    });
    Ok(Outcome::new(result, text))
}

fn cmd_disc(n: u32, a: i64, p: u64) -> Result<Outcome> {
    let report = disc::disc_report(a, n, p)?;
    let text = format!("v_{p}(d_K) = {} (n = {n}, a = {a}, t = {})\n", report.valuation, report.t);
    Ok(Outcome::new(report, text))
}
