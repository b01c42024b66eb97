use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Map, Value};

use pureshape::Error;

pub const OK: u8 = 0;
pub const PRECONDITION: u8 = 2;
pub const CONFLICT: u8 = 3;
pub const UNSUPPORTED: u8 = 4;
pub const BUDGET: u8 = 5;
const INTERNAL: u8 = 1;

const SIGNIFICANT_DIGITS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// What a command hands back before rendering.
pub struct Outcome {
    pub result: Value,
    pub code: u8,
    pub text: String,
}

impl Outcome {
    pub fn new(result: impl Serialize, text: String) -> Self {
        Outcome { result: to_value(result), code: OK, text }
    }

    pub fn with_code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }
}

pub fn to_value(x: impl Serialize) -> Value {
    round_reals(serde_json::to_value(x).expect("results serialize"))
}

/// Rounds every non-integer number to 15 significant digits.
fn round_reals(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("float");
            json!(rounded)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_reals).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_reals(v))).collect()),
        other => other,
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::HypothesisViolated { .. } => PRECONDITION,
        Error::Unsupported(_) => UNSUPPORTED,
        Error::SizeLimit(_) | Error::SearchExhausted(_) => BUDGET,
        Error::Internal(_) => INTERNAL,
    }
}

fn error_value(err: &Error) -> Value {
    let kind = match err {
        Error::Domain(_) => "domain",
        Error::HypothesisViolated { .. } => "hypothesis_violated",
        Error::Unsupported(_) => "unsupported",
        Error::SizeLimit(_) => "size_limit",
        Error::SearchExhausted(_) => "search_exhausted",
        Error::Internal(_) => "internal",
    };
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("message".into(), json!(err.to_string()));
    if let Error::HypothesisViolated { prime, .. } = err {
        m.insert("prime".into(), json!(prime));
    }
    Value::Object(m)
}

pub fn emit(
    command: &str,
    params: Value,
    provenance: &[&str],
    outcome: Result<Outcome, Error>,
    format: Format,
) -> ExitCode {
    let (body_key, body, code, text) = match outcome {
        Ok(o) => ("result", o.result, o.code, Some(o.text)),
        Err(err) => {
            eprintln!("error: {err}");
            ("error", error_value(&err), exit_code(&err), None)
        }
    };
    match format {
        Format::Json => {
            let mut envelope = Map::new();
            envelope.insert("command".into(), json!(command));
            envelope.insert("params".into(), params);
            envelope.insert(body_key.into(), body);
            envelope.insert("provenance".into(), json!(provenance));
            println!("{}", Value::Object(envelope));
        }
        Format::Text => {
            if let Some(text) = text {
                print!("{text}");
            }
        }
    }
    ExitCode::from(code)
}
